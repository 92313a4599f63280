//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed.

mod common;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rld_core::model::{affine_apply, forcing, storage_energy, system_matrix};
use rld_core::*;

use common::{column, rld_ok, s, table, write_config};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Default sweep output, shared with criteria 2 and 8.
struct SweepRun {
    amplitudes: Vec<f64>,
    classes: Vec<String>,
    elapsed: Duration,
}

fn default_sweep(out: &Path, jobs: &str) -> SweepRun {
    let start = Instant::now();
    rld_ok(&[
        "sweep",
        "--out",
        s(out),
        "--jobs",
        jobs,
        "--e-min",
        "0.1",
        "--e-max",
        "10",
        "--steps",
        "200",
    ]);
    let elapsed = start.elapsed();
    let t = table(&out.join("classes.csv"));
    let amplitudes = column(&t, "E_V");
    let classes = t.rows.iter().map(|r| r[1].clone()).collect();
    SweepRun {
        amplitudes,
        classes,
        elapsed,
    }
}

fn criterion_1(sweep: &SweepRun) -> Outcome {
    let first_p1 = sweep.classes.iter().position(|c| c == "P1");
    let p2_after = first_p1.and_then(|k| sweep.classes[k..].iter().position(|c| c == "P2").map(|j| k + j));
    let aperiodic = sweep.classes.iter().filter(|c| *c == "APERIODIC").count();
    let mut tally = BTreeMap::new();
    for c in &sweep.classes {
        *tally.entry(c.as_str()).or_insert(0) += 1;
    }
    check(
        sweep.classes.first().map(String::as_str) == Some("P1")
            && p2_after.is_some()
            && aperiodic > 0
            && sweep.elapsed < Duration::from_secs(60),
        format!(
            "E = 0.1 V is {}, first P2 at {:?} V, {tally:?}, {:.1} s with --jobs 4",
            sweep.classes[0],
            p2_after.map(|k| sweep.amplitudes[k]),
            sweep.elapsed.as_secs_f64()
        ),
    )
}

struct LyapunovRow {
    tau: usize,
    m: usize,
    per_period: f64,
}

fn lyapunov_run(dir: &Path, name: &str, config: &str, input: Option<&Path>) -> LyapunovRow {
    let cfg = write_config(dir, &format!("{name}.toml"), config);
    let out = dir.join(name);
    let mut args = vec!["lyapunov", "--config", s(&cfg), "--out", s(&out), "--no-svg"];
    if let Some(input) = input {
        args.extend(["--input", s(input)]);
    }
    rld_ok(&args);
    let t = table(&out.join("lyapunov.csv"));
    LyapunovRow {
        tau: column(&t, "tau")[0] as usize,
        m: column(&t, "m")[0] as usize,
        per_period: column(&t, "lambda_per_drive_period")[0],
    }
}

/// Grid amplitude of class `class` nearest `target`.
fn pick(sweep: &SweepRun, class: &str, target: f64) -> Option<f64> {
    sweep
        .amplitudes
        .iter()
        .zip(&sweep.classes)
        .filter(|(_, c)| *c == class)
        .map(|(e, _)| *e)
        .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
}

fn criterion_2(dir: &Path, sweep: &SweepRun) -> Outcome {
    let chaotic = pick(sweep, "APERIODIC", 9.0).ok_or("no APERIODIC amplitude")?;
    let periodic = pick(sweep, "P1", 1.0).ok_or("no P1 amplitude")?;
    let base_cfg = format!("[circuit]\ndrive_amplitude = {chaotic}\n");
    let base = lyapunov_run(dir, "chaotic", &base_cfg, None);
    let scale = |v: usize, f: f64| ((v as f64 * f).round() as usize).max(1);
    let mut perturbed = Vec::new();
    for ft in [0.8, 1.0, 1.2] {
        for fm in [0.8, 1.0, 1.2] {
            if ft == 1.0 && fm == 1.0 {
                continue;
            }
            let (tau, m) = (scale(base.tau, ft), scale(base.m, fm));
            let cfg = format!("{base_cfg}[chaos]\ndelay = {tau}\ndimension = {m}\n");
            let row = lyapunov_run(dir, &format!("chaotic_{tau}_{m}"), &cfg, None);
            perturbed.push((tau, m, row.per_period));
        }
    }
    let p1 = lyapunov_run(
        dir,
        "periodic",
        &format!("[circuit]\ndrive_amplitude = {periodic}\n"),
        None,
    );
    let min_perturbed = perturbed.iter().map(|p| p.2).fold(f64::INFINITY, f64::min);
    check(
        base.per_period > 0.0 && min_perturbed > 0.0 && p1.per_period.abs() < 0.02,
        format!(
            "E = {chaotic:.4} V: lambda T = {:.4} (tau {}, m {}), min over +-20% tau/m = {min_perturbed:.4}; \
             E = {periodic:.4} V (P1): lambda T = {:.5}",
            base.per_period, base.tau, base.m, p1.per_period
        ),
    )
}

fn criterion_3(dir: &Path) -> Outcome {
    let mut classes = Vec::new();
    for e in [1.0, 3.0, 6.0, 9.0] {
        let cfg = write_config(
            dir,
            &format!("exp_{e}.toml"),
            &format!("[circuit]\ndrive_amplitude = {e}\n"),
        );
        let out = dir.join(format!("exp_{e}"));
        rld_ok(&["compare-exponential", "--config", s(&cfg), "--out", s(&out), "--no-svg"]);
        let t = table(&out.join("comparison.csv"));
        let last = t.rows.last().unwrap();
        assert_eq!(last[0], "class");
        classes.push((e, last[2].clone(), last[1].clone()));
    }
    check(
        classes.iter().all(|c| c.1 == "P1"),
        classes
            .iter()
            .map(|(e, x, p)| format!("{e} V: exponential {x} (piecewise-linear {p})"))
            .collect::<Vec<_>>()
            .join(", "),
    )
}

fn criterion_4(dir: &Path) -> Outcome {
    let base = CircuitParams64::default();
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, c1) in [("resonant", base.cap_region1), ("detuned", 2.0 * base.cap_region1)] {
        let (r, e) = (100.0, 0.05);
        let q_eq = -base.threshold_voltage * c1;
        let cfg = write_config(
            dir,
            &format!("lti_{name}.toml"),
            &format!(
                "[circuit]\nresistance = {r}\ndrive_amplitude = {e}\ncap_region1 = {c1:e}\ncap_region2 = {:e}\n\
                 [integration]\ncycles = 60\nsteps_per_period = 1000\ninitial_excess_charge = {q_eq:e}\n",
                100.0 * c1
            ),
        );
        let out = dir.join(format!("lti_{name}"));
        rld_ok(&["simulate", "--config", s(&cfg), "--out", s(&out), "--no-svg"]);
        let t = table(&out.join("timeseries.csv"));
        let current = column(&t, "i_A");
        let stayed = column(&t, "region").iter().all(|&r| r == 1.0);
        let got = current[50 * 1000..].iter().fold(0.0f64, |a, i| a.max(i.abs()));
        let w = 2.0 * PI * base.drive_frequency;
        let want = e / (r * r + (w * base.inductance - 1.0 / (w * c1)).powi(2)).sqrt();
        let rel = got / want - 1.0;
        ok &= stayed && rel.abs() < 0.01;
        notes.push(format!(
            "{name}: {got:.6e} A vs phasor {want:.6e} A ({:+.4}%, Region1 only: {stayed})",
            rel * 100.0
        ));
    }
    check(ok, notes.join("; "))
}

fn criterion_5() -> Outcome {
    let p = CircuitParams64 {
        drive_amplitude: 0.0,
        ..Default::default()
    };
    let x0 = State::new(-p.threshold_voltage * p.cap_region1, 1e-3);
    let runs: Vec<Trajectory64> = [40, 80, 160, 320]
        .iter()
        .map(|&n| integrate(&p, x0, &IntegrationConfig::for_drive(&p, 5, n)).unwrap())
        .collect();
    let event_free = runs.iter().all(|r| r.switch_times.is_empty());
    let qs = p.threshold_voltage * p.cap_region1;
    let diff = |a: &Trajectory64, b: &Trajectory64| {
        let (x, y) = (a.states.last().unwrap(), b.states.last().unwrap());
        (((x.charge - y.charge) / qs).powi(2) + ((x.current - y.current) / 1e-3).powi(2)).sqrt()
    };
    let e: Vec<f64> = runs.windows(2).map(|w| diff(&w[0], &w[1])).collect();
    let orders: Vec<f64> = e.windows(2).map(|w| (w[0] / w[1]).log2()).collect();

    let q = CircuitParams64 {
        drive_amplitude: 0.0,
        threshold_mode: ThresholdMode::ForwardOnly,
        ..Default::default()
    };
    let traj = integrate(
        &q,
        State::new(q.charge_offset, 0.1),
        &IntegrationConfig::for_drive(&q, 30, 1000),
    )
    .unwrap();
    let w: Vec<f64> = traj.states.iter().map(|s| storage_energy(s, &q)).collect();
    let worst = w
        .windows(2)
        .map(|pair| pair[1] / pair[0] - 1.0)
        .fold(f64::NEG_INFINITY, f64::max);
    check(
        event_free && orders.iter().all(|&o| o >= 3.5) && worst <= 1e-12 && !traj.switch_times.is_empty(),
        format!(
            "orders {:?}; energy: largest relative step change {worst:.2e} over {} samples, {} switches",
            orders.iter().map(|o| (o * 100.0).round() / 100.0).collect::<Vec<_>>(),
            w.len(),
            traj.switch_times.len()
        ),
    )
}

fn write_series(path: &Path, header: &str, units: &str, rows: impl Iterator<Item = String>) {
    let mut text = format!("{header}\n{units}\n");
    for r in rows {
        text.push_str(&r);
        text.push('\n');
    }
    std::fs::write(path, text).unwrap();
}

fn criterion_6(dir: &Path) -> Outcome {
    let n = 20_000;
    let mut x = 0.3141f64;
    let mut logistic = Vec::with_capacity(n);
    let mut oracle = 0.0;
    for _ in 0..n {
        logistic.push(x);
        oracle += (4.0 * (1.0 - 2.0 * x)).abs().ln();
        x = 4.0 * x * (1.0 - x);
    }
    oracle /= n as f64;
    let logistic_csv = dir.join("logistic.csv");
    write_series(&logistic_csv, "x", "1", logistic.iter().map(|v| format!("{v:e}")));
    let cfg = "[circuit]\ndrive_frequency = 1.0\n[chaos]\ninput_dt = 1.0\ndelay = 1\ndimension = 1\n";
    let got = lyapunov_run(dir, "logistic", cfg, Some(&logistic_csv)).per_period;
    let rel = got / oracle - 1.0;

    // Sine with one period per drive period of the default circuit.
    let dt = 1e-5 / 50.0;
    let sine_csv = dir.join("sine.csv");
    write_series(
        &sine_csv,
        "t_s,v_V",
        "s,V",
        (0..n).map(|k| format!("{:e},{:e}", k as f64 * dt, (2.0 * PI * k as f64 / 50.0).sin())),
    );
    let sine = lyapunov_run(dir, "sine", "", Some(&sine_csv)).per_period;
    check(
        rel.abs() < 0.15 && sine.abs() < 0.02,
        format!(
            "logistic: {got:.4} per step vs derivative average {oracle:.4} ({:+.1}%, ln 2 = {:.4}); sine: {sine:.5} per period",
            rel * 100.0,
            std::f64::consts::LN_2
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let log_uniform = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| rng.gen_range(lo.ln()..hi.ln()).exp();
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let c1 = log_uniform(&mut rng, 1e-12, 1e-6);
        let p = CircuitParams64 {
            resistance: log_uniform(&mut rng, 0.1, 1e3),
            inductance: log_uniform(&mut rng, 1e-5, 1e-1),
            drive_amplitude: rng.gen_range(0.0..20.0),
            drive_frequency: log_uniform(&mut rng, 1e3, 1e6),
            drive_waveform: if rng.gen() {
                DriveWaveform::Cosine
            } else {
                DriveWaveform::Sine
            },
            threshold_voltage: rng.gen_range(0.0..2.0),
            charge_offset: rng.gen_range(-1e-8..1e-8),
            cap_region1: c1,
            cap_region2: c1 * log_uniform(&mut rng, 1.0, 1e3),
            cond_region1: rng.gen_range(0.0..1e-3),
            cond_region2: rng.gen_range(0.0..10.0),
            threshold_mode: if rng.gen() {
                ThresholdMode::PaperLiteral
            } else {
                ThresholdMode::ForwardOnly
            },
        };
        let state = State::new(p.charge_offset + rng.gen_range(-1e-7..1e-7), rng.gen_range(-1.0..1.0));
        let t = rng.gen_range(0.0..1e-3);
        let region = region_of(&state, &p);
        let (a, x, b) = (system_matrix(region, &p), state.shifted(&p), forcing(t, region, &p));
        let expected = affine_apply(&a, &x, &b);
        let got = vector_field(t, &state, &p);
        for k in 0..2 {
            let scale = (a[k][0] * x[0]).abs() + (a[k][1] * x[1]).abs() + b[k].abs();
            worst = worst.max((got[k] - expected[k]).abs() / scale.max(f64::MIN_POSITIVE));
        }
    }
    check(
        worst <= 1e-12,
        format!("10000 samples, largest relative deviation {worst:.2e}"),
    )
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

/// Reruns each command into the directory of its first run and compares
/// every file against a snapshot taken in between.
fn criterion_8(dir: &Path, sweep_dir: &Path) -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    let mut compare = |name: &str, before: BTreeMap<String, Vec<u8>>, out: &Path| {
        let after = files(out);
        let same = !before.is_empty() && before == after;
        ok &= same;
        notes.push(format!(
            "{name}: {} files {}",
            after.len(),
            if same { "identical" } else { "DIFFER" }
        ));
    };

    let snapshot = files(sweep_dir);
    default_sweep(sweep_dir, "1");
    compare("sweep (--jobs 4 then 1)", snapshot, sweep_dir);

    let input = dir.join("det_input.csv");
    write_series(
        &input,
        "v",
        "V",
        (0..5000).map(|k| format!("{:e}", (0.37 * k as f64).sin() + (0.05 * k as f64).cos())),
    );
    let runs: [(&str, Vec<&str>); 4] = [
        ("simulate", vec!["simulate"]),
        ("compare-exponential", vec!["compare-exponential"]),
        ("lyapunov", vec!["lyapunov"]),
        ("lyapunov --input", vec!["lyapunov", "--input", s(&input)]),
    ];
    for (k, (name, args)) in runs.iter().enumerate() {
        let out = dir.join(format!("det_{k}"));
        let mut full = args.clone();
        full.extend(["--out", s(&out), "--svg"]);
        rld_ok(&full);
        let snapshot = files(&out);
        rld_ok(&full);
        compare(name, snapshot, &out);
    }
    check(ok, notes.join(", "))
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let sweep_dir = dir.join("sweep");
    let sweep = default_sweep(&sweep_dir, "4");

    let criteria: Vec<Criterion> = vec![
        (
            "period-doubling route in the default sweep",
            Box::new(|| criterion_1(&sweep)),
        ),
        (
            "positive exponent when aperiodic, near zero when P1",
            Box::new(|| criterion_2(dir, &sweep)),
        ),
        ("exponential model stays P1", Box::new(|| criterion_3(dir))),
        (
            "Region1 response matches the phasor amplitude",
            Box::new(|| criterion_4(dir)),
        ),
        ("integrator order and energy decay", Box::new(criterion_5)),
        (
            "estimator calibration on logistic map and sine",
            Box::new(|| criterion_6(dir)),
        ),
        ("vector field equals matrix form", Box::new(criterion_7)),
        (
            "byte-identical repeated runs",
            Box::new(|| criterion_8(dir, &sweep_dir)),
        ),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", k + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
