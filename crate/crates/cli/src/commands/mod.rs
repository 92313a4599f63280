//! The four subcommands. Each writes its files into the output directory
//! together with `config.toml`, the resolved configuration.

mod compare;
mod lyapunov;
mod simulate;
mod sweep;

use std::path::{Path, PathBuf};

pub use compare::compare_exponential;
pub use lyapunov::lyapunov;
pub use simulate::simulate;
pub use sweep::sweep;

use crate::config::RunConfig;
use crate::error::CliError;

/// Drive periods shown in time-domain plots.
const PLOT_PERIODS: usize = 10;
/// Point budget per plotted polyline.
const PLOT_POINTS: usize = 4000;

/// Files written by a command, in creation order, plus a short summary.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

/// Creates the output directory and writes the config echo.
pub(crate) fn prepare(cfg: &RunConfig, command: &str, input: Option<&Path>) -> Result<(PathBuf, Report), CliError> {
    let dir = cfg.output.dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let mut text = format!("# rld {command}\n");
    if let Some(input) = input {
        text.push_str(&format!("# input: {}\n", input.display()));
    }
    text.push_str(&cfg.echo());
    let path = dir.join("config.toml");
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok((
        dir,
        Report {
            files: vec![path],
            summary: Vec::new(),
        },
    ))
}

/// Indices of the last `periods` drive periods of a grid with `per` samples per period.
pub(crate) fn tail_range(len: usize, per: usize, periods: usize) -> std::ops::Range<usize> {
    let span = (per * periods + 1).min(len);
    len - span..len
}
