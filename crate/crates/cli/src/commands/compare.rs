use rld_core::analysis::{classify_points, scalar_section, AnalysisError};
use rld_core::{classify_period, integrate, integrate_exponential, stroboscopic_section, PeriodClass};

use super::{prepare, tail_range, Report, PLOT_PERIODS, PLOT_POINTS};
use crate::config::{Format, RunConfig};
use crate::csvio::{fmt_num, CsvOut};
use crate::error::CliError;
use crate::svg::{thin, Mark, Plot, Series};

fn label(class: &Result<PeriodClass, AnalysisError>) -> String {
    class.as_ref().map_or_else(|_| "ERROR".to_string(), PeriodClass::label)
}

/// Runs the piecewise-linear and exponential models at the same drive.
/// Writes `exp_timeseries.csv`, `comparison.csv` (ending in a `class` row)
/// and optionally `comparison.svg`.
pub fn compare_exponential(cfg: &RunConfig) -> Result<Report, CliError> {
    let (dir, mut report) = prepare(cfg, "compare-exponential", None)?;
    let params = cfg.circuit_params();
    let diode = cfg.exp_params();
    let icfg = cfg.integration_config(cfg.integration.cycles);
    let pwl = integrate(&params, cfg.initial_state(), &icfg)?;
    let exp = integrate_exponential(&params, &diode, cfg.integration.initial_current, &icfg)?;
    debug_assert_eq!(pwl.len(), exp.values.len());

    let a = &cfg.analysis;
    let pwl_class = stroboscopic_section(&pwl, &params, a.transient_cycles)
        .and_then(|s| classify_period(&s, a.epsilon, a.max_period));
    let exp_class = scalar_section(&exp, params.drive_period(), a.transient_cycles).and_then(|s| {
        let pts: Vec<[f64; 1]> = s.iter().map(|&v| [v]).collect();
        classify_points(&pts, a.epsilon, a.max_period)
    });

    if cfg.output.wants(Format::Csv) {
        let mut et = CsvOut::create(
            &dir.join("exp_timeseries.csv"),
            &["t_s", "i_A", "v_r_V", "v_d_V"],
            &["s", "A", "V", "V"],
        )?;
        for (n, (&i, &vd)) in exp.values.iter().zip(&exp.diode_voltages).enumerate() {
            et.row(&[exp.time(n), i, params.resistance * i, vd])?;
        }
        report.files.push(et.finish()?);

        let mut cmp = CsvOut::create(
            &dir.join("comparison.csv"),
            &["t_s", "v_r_pwl_V", "v_r_exp_V"],
            &["s", "V", "V"],
        )?;
        for (n, (s, &i)) in pwl.states.iter().zip(&exp.values).enumerate() {
            cmp.text_row(&[
                fmt_num(pwl.time(n)),
                fmt_num(params.resistance * s.current),
                fmt_num(params.resistance * i),
            ])?;
        }
        cmp.text_row(&["class".to_string(), label(&pwl_class), label(&exp_class)])?;
        report.files.push(cmp.finish()?);
    }

    if cfg.output.wants(Format::Svg) {
        let range = tail_range(pwl.len(), cfg.integration.steps_per_period, PLOT_PERIODS);
        let series = |name: &str, v: &dyn Fn(usize) -> f64| Series {
            label: name.to_string(),
            mark: Mark::Line,
            points: thin(
                &range.clone().map(|n| (pwl.time(n) * 1e6, v(n))).collect::<Vec<_>>(),
                PLOT_POINTS,
            ),
        };
        let plot = Plot {
            title: format!(
                "Piecewise-linear vs exponential diode, E = {} V",
                params.drive_amplitude
            ),
            x_label: "t (µs)".into(),
            y_label: "v_R (V)".into(),
            series: vec![
                series("piecewise-linear", &|n| params.resistance * pwl.states[n].current),
                series("exponential", &|n| params.resistance * exp.values[n]),
            ],
        };
        report.files.push(plot.write(&dir.join("comparison.svg"))?);
    }

    report.summary.push(format!(
        "piecewise-linear: {}, exponential: {}",
        label(&pwl_class),
        label(&exp_class)
    ));
    for (name, class) in [("piecewise-linear", &pwl_class), ("exponential", &exp_class)] {
        if let Err(e) = class {
            report.summary.push(format!("{name} not classified: {e}"));
        }
    }
    Ok(report)
}
