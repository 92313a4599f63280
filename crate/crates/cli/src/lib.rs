//! Command-line front end for `rld-core`.
//!
//! Exit codes: 0 success, 1 invalid input or configuration, 2 numerical
//! failure, 3 file-system error.

pub mod cli;
pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;
pub mod svg;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

use cli::{Cli, Command};
use commands::Report;
use config::{Format, RunConfig};
pub use error::CliError;

/// Loads the config file (if any) and applies command-line overrides.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            RunConfig::parse(&text).map_err(|e| match e {
                CliError::Validation(msg) => CliError::Validation(format!("{}: {msg}", path.display())),
                other => other,
            })?
        }
        None => RunConfig::default(),
    };
    if let Some(dir) = &cli.common.out {
        cfg.output.dir = dir.clone();
    }
    if let Some(on) = cli.common.svg_choice() {
        cfg.output.set(Format::Svg, on);
    }
    if let Command::Sweep(args) = &cli.command {
        if let Some(v) = args.e_min {
            cfg.sweep.e_min = v;
        }
        if let Some(v) = args.e_max {
            cfg.sweep.e_max = v;
        }
        if let Some(v) = args.steps {
            cfg.sweep.steps = v;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs a parsed invocation on a pool sized by `--jobs`.
pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    let cfg = resolve_config(cli)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.common.jobs {
        pool = pool.num_threads(usize::from(n));
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Numerical(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Simulate => commands::simulate(&cfg),
        Command::Sweep(_) => commands::sweep(&cfg),
        Command::Lyapunov(args) => commands::lyapunov(&cfg, args.input.as_deref()),
        Command::CompareExponential => commands::compare_exponential(&cfg),
    })
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(report) => {
            let mut out = std::io::stdout().lock();
            for line in &report.summary {
                let _ = writeln!(out, "{line}");
            }
            for file in &report.files {
                let _ = writeln!(out, "wrote {}", file.display());
            }
            0
        }
        Err(e) => {
            eprintln!("rld {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}
