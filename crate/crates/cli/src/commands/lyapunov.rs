use std::path::Path;

use rld_core::analysis::resistor_voltage_series;
use rld_core::chaoskit::{estimate, ScalarSeries};
use rld_core::integrate;

use super::{prepare, Report};
use crate::config::{Format, RunConfig};
use crate::csvio::{CsvOut, Table};
use crate::error::CliError;
use crate::svg::{thin, Mark, Plot, Series};

/// Relative spread allowed between consecutive `t_s` steps of an input file.
const DT_TOLERANCE: f64 = 1e-6;

/// A uniformly sampled series from a CSV file: either one value column
/// (spacing `input_dt`) or a `t_s` column followed by one value column.
pub fn read_series(path: &Path, input_dt: f64) -> Result<ScalarSeries<f64>, CliError> {
    let table = Table::read(path)?;
    let bad = |msg: String| CliError::Validation(format!("{}: {msg}", path.display()));
    let (dt, values) = match (table.header.len(), table.column_index("t_s")) {
        (1, _) => (input_dt, table.numeric_column(0).map_err(bad)?),
        (2, Some(t_idx)) => {
            let t = table.numeric_column(t_idx).map_err(bad)?;
            let values = table.numeric_column(1 - t_idx).map_err(bad)?;
            if t.len() < 2 {
                return Err(bad("need at least two samples".into()));
            }
            let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
            if let Some(k) = t
                .windows(2)
                .position(|w| ((w[1] - w[0]) - dt).abs() > DT_TOLERANCE * dt.abs())
            {
                return Err(bad(format!("t_s is not uniformly spaced near data row {}", k + 2)));
            }
            (dt, values)
        }
        _ => return Err(bad("expected one value column, optionally paired with t_s".into())),
    };
    Ok(ScalarSeries::new(dt, values)?)
}

/// `lyapunov.csv`, `divergence.csv` and optionally `divergence.svg`.
pub fn lyapunov(cfg: &RunConfig, input: Option<&Path>) -> Result<Report, CliError> {
    let (dir, mut report) = prepare(cfg, "lyapunov", input)?;
    let params = cfg.circuit_params();
    let series = match input {
        Some(path) => read_series(path, cfg.chaos.input_dt)?,
        None => {
            let transient = cfg.analysis.transient_cycles;
            let icfg = cfg.integration_config(transient + cfg.chaos.record_cycles);
            let traj = integrate(&params, cfg.initial_state(), &icfg)?;
            resistor_voltage_series(&traj, &params, transient, cfg.chaos.sample_stride)?
        }
    };
    let series = series.normalized();
    let est = estimate(&series, &cfg.chaos_config())?;
    let r = &est.report;
    let per_period = r.exponent * params.drive_period();

    if cfg.output.wants(Format::Csv) {
        let mut out = CsvOut::create(
            &dir.join("lyapunov.csv"),
            &["tau", "m", "lambda_per_s", "lambda_per_drive_period", "replacements"],
            &["samples", "1", "1/s", "1/period", "1"],
        )?;
        out.row(&[
            r.embedding.delay as f64,
            r.embedding.dimension as f64,
            r.exponent,
            per_period,
            r.replacement_count as f64,
        ])?;
        report.files.push(out.finish()?);
    }

    let mut cumulative = 0.0;
    let mut curve = Vec::with_capacity(r.steps.len());
    let mut div = if cfg.output.wants(Format::Csv) {
        Some(CsvOut::create(
            &dir.join("divergence.csv"),
            &[
                "step",
                "t_s",
                "fiducial",
                "neighbor",
                "d_before",
                "d_after",
                "log_ratio",
                "cumulative_log",
                "replaced",
            ],
            &["1", "s", "index", "index", "1", "1", "1", "1", "1"],
        )?)
    } else {
        None
    };
    for (k, step) in r.steps.iter().enumerate() {
        let ratio = step.log_ratio();
        cumulative += ratio;
        let t = step.fiducial as f64 * series.dt();
        curve.push((t, cumulative));
        if let Some(div) = div.as_mut() {
            div.row(&[
                k as f64,
                t,
                step.fiducial as f64,
                step.neighbor as f64,
                step.d_before,
                step.d_after,
                ratio,
                cumulative,
                f64::from(u8::from(step.replaced)),
            ])?;
        }
    }
    if let Some(div) = div {
        report.files.push(div.finish()?);
    }

    if cfg.output.wants(Format::Svg) {
        let plot = Plot {
            title: format!(
                "Accumulated log divergence, tau = {}, m = {}",
                r.embedding.delay, r.embedding.dimension
            ),
            x_label: "t (s)".into(),
            y_label: "sum ln(d_after / d_before)".into(),
            series: vec![Series {
                label: "log sum".into(),
                mark: Mark::Line,
                points: thin(&curve, 4000),
            }],
        };
        report.files.push(plot.write(&dir.join("divergence.svg"))?);
    }

    report.summary.push(format!(
        "lambda_max = {:.6e} 1/s ({:.6} per drive period), tau = {}, m = {}, {} replacements",
        r.exponent, per_period, r.embedding.delay, r.embedding.dimension, r.replacement_count
    ));
    Ok(report)
}
