use rld_core::analysis::portrait;
use rld_core::{integrate, region_of};

use super::{prepare, tail_range, Report, PLOT_PERIODS, PLOT_POINTS};
use crate::config::{Format, RunConfig};
use crate::csvio::CsvOut;
use crate::error::CliError;
use crate::svg::{thin, Mark, Plot, Series};

/// `timeseries.csv`, `portrait.csv` and optionally `timeseries.svg`.
pub fn simulate(cfg: &RunConfig) -> Result<Report, CliError> {
    let (dir, mut report) = prepare(cfg, "simulate", None)?;
    let params = cfg.circuit_params();
    let traj = integrate(
        &params,
        cfg.initial_state(),
        &cfg.integration_config(cfg.integration.cycles),
    )?;

    if cfg.output.wants(Format::Csv) {
        let mut ts = CsvOut::create(
            &dir.join("timeseries.csv"),
            &["t_s", "q_C", "i_A", "v_r_V", "region"],
            &["s", "C", "A", "V", "1"],
        )?;
        for (n, s) in traj.states.iter().enumerate() {
            let region = f64::from(region_of(s, &params).index());
            ts.row(&[traj.time(n), s.charge, s.current, params.resistance * s.current, region])?;
        }
        report.files.push(ts.finish()?);

        let mut pc = CsvOut::create(&dir.join("portrait.csv"), &["v_in_V", "v_r_V"], &["V", "V"])?;
        for (v_in, v_r) in portrait(&traj, &params, cfg.analysis.transient_cycles) {
            pc.row(&[v_in, v_r])?;
        }
        report.files.push(pc.finish()?);
    }

    if cfg.output.wants(Format::Svg) {
        let range = tail_range(traj.len(), cfg.integration.steps_per_period, PLOT_PERIODS);
        let points: Vec<(f64, f64)> = range
            .map(|n| (traj.time(n) * 1e6, params.resistance * traj.states[n].current))
            .collect();
        let plot = Plot {
            title: format!(
                "Resistor voltage, E = {} V, f = {} Hz",
                params.drive_amplitude, params.drive_frequency
            ),
            x_label: "t (µs)".into(),
            y_label: "v_R (V)".into(),
            series: vec![Series {
                label: "v_R".into(),
                mark: Mark::Line,
                points: thin(&points, PLOT_POINTS),
            }],
        };
        report.files.push(plot.write(&dir.join("timeseries.svg"))?);
    }

    report.summary.push(format!(
        "{} samples over {} drive periods, {} region switches",
        traj.len(),
        cfg.integration.cycles,
        traj.switch_times.len()
    ));
    Ok(report)
}
