use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Driven RLD circuit: simulation, bifurcation sweeps and Lyapunov estimates.
#[derive(Debug, Parser)]
#[command(name = "rld", version)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML configuration; missing keys take their defaults.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: Option<u16>,
    /// Also write SVG plots.
    #[arg(long, global = true, overrides_with = "no_svg")]
    pub svg: bool,
    /// Skip SVG plots.
    #[arg(long, global = true, overrides_with = "svg")]
    pub no_svg: bool,
}

impl CommonArgs {
    /// `Some(true)` for `--svg`, `Some(false)` for `--no-svg`, last one wins.
    pub fn svg_choice(&self) -> Option<bool> {
        match (self.svg, self.no_svg) {
            (true, _) => Some(true),
            (_, true) => Some(false),
            _ => None,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one trajectory; write the time series and phase portrait.
    Simulate,
    /// Sweep the drive amplitude; write the bifurcation diagram and period classes.
    Sweep(SweepArgs),
    /// Estimate the maximal Lyapunov exponent from a simulated or supplied series.
    Lyapunov(LyapunovArgs),
    /// Run the piecewise-linear and exponential diode models side by side.
    CompareExponential,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Sweep(_) => "sweep",
            Command::Lyapunov(_) => "lyapunov",
            Command::CompareExponential => "compare-exponential",
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Lowest amplitude, volts.
    #[arg(long, value_name = "V", allow_negative_numbers = true)]
    pub e_min: Option<f64>,
    /// Highest amplitude, volts.
    #[arg(long, value_name = "V", allow_negative_numbers = true)]
    pub e_max: Option<f64>,
    /// Number of amplitudes, endpoints included.
    #[arg(long, value_name = "N")]
    pub steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct LyapunovArgs {
    /// Scalar series to analyse instead of simulating: one value column, or
    /// `t_s` plus one value column.
    #[arg(long, value_name = "CSV")]
    pub input: Option<PathBuf>,
}
