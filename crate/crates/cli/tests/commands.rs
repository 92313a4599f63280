mod common;

use std::path::Path;

use rld_cli::config::RunConfig;
use rld_core::{bifurcation_sweep, integrate, PeriodClass};

use common::{column, rld, rld_ok, s, table, write_config};

fn simulate(dir: &Path, name: &str, config: &str) -> std::path::PathBuf {
    let cfg = write_config(dir, &format!("{name}.toml"), config);
    let out = dir.join(name);
    rld_ok(&["simulate", "--config", s(&cfg), "--out", s(&out)]);
    out
}

fn assert_svg_has_marks(path: &Path) {
    let text = std::fs::read_to_string(path).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    let marks = doc
        .descendants()
        .filter(|n| matches!(n.tag_name().name(), "polyline" | "circle"))
        .count();
    assert!(marks > 0, "{} has no plotted elements", path.display());
}

#[test]
fn simulate_row_count_matches_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let out = simulate(
        tmp.path(),
        "e1",
        "[circuit]\ndrive_amplitude = 1.0\n[integration]\ncycles = 30\nsteps_per_period = 400\n",
    );
    let text = std::fs::read_to_string(out.join("timeseries.csv")).unwrap();
    assert_eq!(text.lines().count(), 2 + 30 * 400 + 1);
    assert!(!text.contains('\r'));
    let t = table(&out.join("timeseries.csv"));
    assert_eq!(t.header, ["t_s", "q_C", "i_A", "v_r_V", "region"]);
    assert_eq!(
        t.units.as_deref(),
        Some(&["s", "C", "A", "V", "1"].map(String::from)[..])
    );
    assert!(t.rows.iter().all(|r| r.len() == 5));
    assert_svg_has_marks(&out.join("timeseries.svg"));
}

#[test]
fn undriven_forward_only_run_stays_at_rest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = simulate(
        tmp.path(),
        "e0",
        "[circuit]\ndrive_amplitude = 0.0\nthreshold_mode = \"forward_only\"\n[integration]\ncycles = 20\n",
    );
    let t = table(&out.join("timeseries.csv"));
    assert!(column(&t, "v_r_V").iter().all(|&v| v == 0.0));
}

#[test]
fn chaotic_run_visits_both_regions() {
    let tmp = tempfile::tempdir().unwrap();
    let out = simulate(tmp.path(), "e9", "[integration]\ncycles = 50\n");
    let regions = column(&table(&out.join("timeseries.csv")), "region");
    assert!(regions.contains(&1.0) && regions.contains(&2.0));
}

#[test]
fn timeseries_reparses_to_the_integrated_trajectory() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "[circuit]\ndrive_amplitude = 6.5\n[integration]\ncycles = 12\nsteps_per_period = 250\n";
    let out = simulate(tmp.path(), "rt", text);
    let cfg = RunConfig::parse(text).unwrap();
    let params = cfg.circuit_params();
    let traj = integrate(&params, cfg.initial_state(), &cfg.integration_config(12)).unwrap();
    let t = table(&out.join("timeseries.csv"));
    let (times, q, i) = (column(&t, "t_s"), column(&t, "q_C"), column(&t, "i_A"));
    assert_eq!(q.len(), traj.len());
    for (n, s) in traj.states.iter().enumerate() {
        assert_eq!(times[n], traj.time(n));
        assert_eq!(q[n], s.charge);
        assert_eq!(i[n], s.current);
    }
    let portrait = table(&out.join("portrait.csv"));
    assert_eq!(portrait.header, ["v_in_V", "v_r_V"]);
}

#[test]
fn config_echo_reparses_to_the_run_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out = simulate(
        tmp.path(),
        "echo",
        "[circuit]\ndrive_amplitude = 2.5\n[integration]\ncycles = 20\n",
    );
    let echo = std::fs::read_to_string(out.join("config.toml")).unwrap();
    assert!(echo.starts_with("# rld simulate\n"));
    let cfg = RunConfig::parse(&echo).unwrap();
    assert_eq!(cfg.circuit.drive_amplitude, 2.5);
    assert_eq!(cfg.output.dir, out);
    assert_eq!(cfg.echo(), RunConfig::parse(&cfg.echo()).unwrap().echo());
}

#[test]
fn minimal_sweep_has_one_class_row_per_step_and_reparses() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sweep");
    rld_ok(&[
        "sweep",
        "--out",
        s(&out),
        "--e-min",
        "1",
        "--e-max",
        "9",
        "--steps",
        "2",
        "--jobs",
        "2",
    ]);
    let classes = table(&out.join("classes.csv"));
    assert_eq!(classes.rows.len(), 2);
    assert_eq!(column(&classes, "E_V"), [1.0, 9.0]);
    for r in &classes.rows {
        assert!(PeriodClass::parse_label(&r[1]).is_some(), "bad class {}", r[1]);
    }

    let bif = table(&out.join("bifurcation.csv"));
    let e = column(&bif, "E_V");
    let v = column(&bif, "v_r_section_V");
    let mut groups: Vec<f64> = e.clone();
    groups.dedup();
    assert_eq!(groups, [1.0, 9.0]);

    let cfg = RunConfig::default();
    let section_cfg = cfg.section_config();
    let icfg = cfg.integration_config(section_cfg.transient_cycles + section_cfg.record_cycles);
    let diagram = bifurcation_sweep(&cfg.circuit_params(), 1.0, 9.0, 2, &icfg, &section_cfg).unwrap();
    let flat: Vec<f64> = diagram.sections.concat();
    assert_eq!(v, flat);
    for (row, class) in classes.rows.iter().zip(&diagram.classes) {
        assert_eq!(row[1], class.as_ref().unwrap().label());
    }
    assert_svg_has_marks(&out.join("bifurcation.svg"));
}

#[test]
fn sweep_with_mostly_failed_points_is_a_numerical_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "bad.toml",
        "[integration]\nmax_event_iterations = 20\nevent_tolerance = 1e-15\n",
    );
    let out = tmp.path().join("sweep");
    let run = rld(&[
        "sweep",
        "--config",
        s(&cfg),
        "--out",
        s(&out),
        "--steps",
        "3",
        "--no-svg",
    ]);
    assert_eq!(run.status.code(), Some(2));
    let classes = table(&out.join("classes.csv"));
    assert!(classes.rows.iter().all(|r| r[1] == "ERROR"));
}

#[test]
fn lyapunov_internal_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let mut results = Vec::new();
    for e in [9.0, 1.0] {
        let cfg = write_config(
            tmp.path(),
            &format!("ly{e}.toml"),
            &format!("[circuit]\ndrive_amplitude = {e}\n"),
        );
        let out = tmp.path().join(format!("ly{e}"));
        rld_ok(&["lyapunov", "--config", s(&cfg), "--out", s(&out)]);
        let t = table(&out.join("lyapunov.csv"));
        assert_eq!(
            t.header,
            ["tau", "m", "lambda_per_s", "lambda_per_drive_period", "replacements"]
        );
        let (per_s, per_period) = (column(&t, "lambda_per_s")[0], column(&t, "lambda_per_drive_period")[0]);
        assert!((per_s * 1e-5 - per_period).abs() <= 1e-12 * per_period.abs().max(1e-300));

        let div = table(&out.join("divergence.csv"));
        let cumulative = column(&div, "cumulative_log");
        let steps = column(&div, "log_ratio");
        let total: f64 = steps.iter().sum();
        assert!((cumulative.last().unwrap() - total).abs() <= 1e-9 * total.abs().max(1.0));
        assert_svg_has_marks(&out.join("divergence.svg"));
        results.push(per_s);
    }
    assert!(results[0] > 0.0, "E = 9 V exponent {}", results[0]);
    assert!((results[1] * 1e-5).abs() < 0.02, "E = 1 V exponent {}", results[1]);
}

#[test]
fn lyapunov_on_supplied_sine_is_near_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let dt = 2e-7;
    let mut text = String::from("t_s,v_V\ns,V\n");
    for k in 0..20_000 {
        text.push_str(&format!(
            "{:e},{:e}\n",
            k as f64 * dt,
            (2.0 * std::f64::consts::PI * k as f64 / 50.0).sin()
        ));
    }
    let input = write_config(tmp.path(), "sine.csv", &text);
    let out = tmp.path().join("sine");
    rld_ok(&["lyapunov", "--input", s(&input), "--out", s(&out), "--no-svg"]);
    let per_period = column(&table(&out.join("lyapunov.csv")), "lambda_per_drive_period")[0];
    assert!(per_period.abs() < 0.02, "{per_period}");
    assert!(!out.join("divergence.svg").exists());
    assert!(std::fs::read_to_string(out.join("config.toml"))
        .unwrap()
        .contains("# input: "));
}

#[test]
fn lyapunov_rejects_short_and_malformed_input() {
    let tmp = tempfile::tempdir().unwrap();
    let short = write_config(tmp.path(), "short.csv", "x\n1\n2\n3\n");
    let run = rld(&["lyapunov", "--input", s(&short), "--out", s(&tmp.path().join("a"))]);
    assert_eq!(run.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&run.stderr).contains("required"));

    let uneven = write_config(tmp.path(), "uneven.csv", "t_s,v\n0,1\n1,2\n3,3\n");
    let run = rld(&["lyapunov", "--input", s(&uneven), "--out", s(&tmp.path().join("b"))]);
    assert_eq!(run.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&run.stderr).contains("uniformly"));

    let text = write_config(tmp.path(), "text.csv", "v\nV\n1\nabc\n");
    let run = rld(&["lyapunov", "--input", s(&text), "--out", s(&tmp.path().join("c"))]);
    assert_eq!(run.status.code(), Some(1));

    let run = rld(&[
        "lyapunov",
        "--input",
        s(&tmp.path().join("missing.csv")),
        "--out",
        s(&tmp.path().join("d")),
    ]);
    assert_eq!(run.status.code(), Some(3));
}

#[test]
fn compare_exponential_at_nine_volts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("cmp");
    rld_ok(&["compare-exponential", "--out", s(&out)]);
    let t = table(&out.join("comparison.csv"));
    assert_eq!(t.header, ["t_s", "v_r_pwl_V", "v_r_exp_V"]);
    let last = t.rows.last().unwrap();
    assert_eq!(last, &["class", "APERIODIC", "P1"]);
    assert!(t.rows[..t.rows.len() - 1]
        .iter()
        .all(|r| r.len() == 3 && r[2].parse::<f64>().is_ok()));

    let exp = table(&out.join("exp_timeseries.csv"));
    assert_eq!(exp.header, ["t_s", "i_A", "v_r_V", "v_d_V"]);
    assert_eq!(exp.rows.len(), t.rows.len() - 1);
    let (i, vr) = (column(&exp, "i_A"), column(&exp, "v_r_V"));
    let cmp_exp: Vec<f64> = t.rows[..t.rows.len() - 1]
        .iter()
        .map(|r| r[2].parse().unwrap())
        .collect();
    assert_eq!(vr, cmp_exp);
    assert!(i.iter().zip(&vr).all(|(i, v)| *v == 10.0 * i));
    assert_svg_has_marks(&out.join("comparison.svg"));
}

#[test]
fn compare_exponential_undriven_is_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "zero.toml",
        "[circuit]\ndrive_amplitude = 0.0\nthreshold_mode = \"forward_only\"\n[integration]\ncycles = 20\n",
    );
    let out = tmp.path().join("cmp");
    rld_ok(&["compare-exponential", "--config", s(&cfg), "--out", s(&out), "--no-svg"]);
    let t = table(&out.join("comparison.csv"));
    let data = &t.rows[..t.rows.len() - 1];
    assert_eq!(data.len(), 20 * 1000 + 1);
    assert!(data
        .iter()
        .all(|r| r[1].parse::<f64>().unwrap() == 0.0 && r[2].parse::<f64>().unwrap() == 0.0));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(rld(&["--help"]).status.code(), Some(0));
    assert_eq!(rld(&["--version"]).status.code(), Some(0));
    assert_eq!(rld(&["bogus"]).status.code(), Some(1));
    assert_eq!(rld(&["simulate", "--jobs", "0"]).status.code(), Some(1));

    let neg = write_config(tmp.path(), "neg.toml", "[circuit]\nresistance = -1\n");
    let run = rld(&["simulate", "--config", s(&neg), "--out", s(&tmp.path().join("neg"))]);
    assert_eq!(run.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&run.stderr).contains("resistance"));
    assert!(!tmp.path().join("neg").exists());

    let unknown = write_config(tmp.path(), "unknown.toml", "[circuit]\n\nresistence = 10\n");
    let run = rld(&["simulate", "--config", s(&unknown)]);
    assert_eq!(run.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&run.stderr).contains("line 3"));

    let backwards = rld(&[
        "sweep",
        "--e-min",
        "5",
        "--e-max",
        "1",
        "--out",
        s(&tmp.path().join("sw")),
    ]);
    assert_eq!(backwards.status.code(), Some(1));

    let events = write_config(
        tmp.path(),
        "ev.toml",
        "[integration]\nmax_event_iterations = 20\nevent_tolerance = 1e-15\n",
    );
    let run = rld(&["simulate", "--config", s(&events), "--out", s(&tmp.path().join("ev"))]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("event location"));

    assert_eq!(
        rld(&["simulate", "--config", s(&tmp.path().join("nope.toml"))])
            .status
            .code(),
        Some(3)
    );
    let blocker = write_config(tmp.path(), "file", "");
    let run = rld(&["simulate", "--out", s(&blocker.join("sub"))]);
    assert_eq!(run.status.code(), Some(3));
}

#[test]
fn svg_flags_toggle_plot_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        "[integration]\ncycles = 20\n[output]\nformats = [\"csv\"]\n",
    );
    let off = tmp.path().join("off");
    rld_ok(&["simulate", "--config", s(&cfg), "--out", s(&off)]);
    assert!(!off.join("timeseries.svg").exists());
    let on = tmp.path().join("on");
    rld_ok(&["simulate", "--config", s(&cfg), "--out", s(&on), "--no-svg", "--svg"]);
    assert!(on.join("timeseries.svg").exists());
    let last = tmp.path().join("last");
    rld_ok(&["simulate", "--config", s(&cfg), "--out", s(&last), "--svg", "--no-svg"]);
    assert!(!last.join("timeseries.svg").exists());
}
