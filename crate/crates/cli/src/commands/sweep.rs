use rld_core::bifurcation_sweep;

use super::{prepare, Report};
use crate::config::{Format, RunConfig};
use crate::csvio::{fmt_num, CsvOut};
use crate::error::CliError;
use crate::svg::{Mark, Plot, Series};

/// Failed amplitudes tolerated before the run counts as a numerical failure.
const MAX_FAILURE_FRACTION: f64 = 0.1;

/// `bifurcation.csv`, `classes.csv` and optionally `bifurcation.svg`.
pub fn sweep(cfg: &RunConfig) -> Result<Report, CliError> {
    let (dir, mut report) = prepare(cfg, "sweep", None)?;
    let params = cfg.circuit_params();
    let section_cfg = cfg.section_config();
    let icfg = cfg.integration_config(section_cfg.transient_cycles + section_cfg.record_cycles);
    let s = &cfg.sweep;
    let diagram = bifurcation_sweep(&params, s.e_min, s.e_max, s.steps, &icfg, &section_cfg)?;

    if cfg.output.wants(Format::Csv) {
        let mut bif = CsvOut::create(&dir.join("bifurcation.csv"), &["E_V", "v_r_section_V"], &["V", "V"])?;
        for (e, section) in diagram.amplitudes.iter().zip(&diagram.sections) {
            for v in section {
                bif.row(&[*e, *v])?;
            }
        }
        report.files.push(bif.finish()?);

        let mut classes = CsvOut::create(&dir.join("classes.csv"), &["E_V", "class"], &["V", "1"])?;
        for (e, class) in diagram.amplitudes.iter().zip(&diagram.classes) {
            let label = match class {
                Ok(c) => c.label(),
                Err(_) => "ERROR".to_string(),
            };
            classes.text_row(&[fmt_num(*e), label])?;
        }
        report.files.push(classes.finish()?);
    }

    if cfg.output.wants(Format::Svg) {
        let points: Vec<(f64, f64)> = diagram
            .amplitudes
            .iter()
            .zip(&diagram.sections)
            .flat_map(|(e, section)| section.iter().map(move |v| (*e, *v)))
            .collect();
        let plot = Plot {
            title: format!("Bifurcation diagram, f = {} Hz", params.drive_frequency),
            x_label: "E (V)".into(),
            y_label: "v_R at t = nT (V)".into(),
            series: vec![Series {
                label: "section".into(),
                mark: Mark::Dots,
                points,
            }],
        };
        report.files.push(plot.write(&dir.join("bifurcation.svg"))?);
    }

    let mut tally = std::collections::BTreeMap::new();
    for class in diagram.classes.iter().flatten() {
        *tally.entry(class.label()).or_insert(0usize) += 1;
    }
    let counts: Vec<String> = tally.iter().map(|(k, v)| format!("{k}: {v}")).collect();
    report.summary.push(format!(
        "{} amplitudes; {}",
        diagram.amplitudes.len(),
        counts.join(", ")
    ));

    let failures = diagram.failures();
    for (e, class) in diagram.amplitudes.iter().zip(&diagram.classes) {
        if let Err(err) = class {
            report.summary.push(format!("E = {e} V failed: {err}"));
        }
    }
    if failures as f64 > MAX_FAILURE_FRACTION * diagram.amplitudes.len() as f64 {
        return Err(CliError::Numerical(format!(
            "{failures} of {} amplitudes failed (more than {}%)",
            diagram.amplitudes.len(),
            MAX_FAILURE_FRACTION * 100.0
        )));
    }
    Ok(report)
}
