//! Stroboscopic sections, period classification and amplitude sweeps.

use rayon::prelude::*;
use thiserror::Error;

use crate::chaoskit::{ChaosError, ScalarSeries};
use crate::integrator::{integrate, IntegrationConfig, IntegrationError, ScalarTrajectory, Trajectory};
use crate::model::{CircuitParams, State};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("trajectory spans {available} drive periods; at least {required} are required")]
    InsufficientSpan { available: usize, required: usize },
    #[error("sample spacing {dt} s does not divide the drive period {period} s")]
    GridNotAligned { dt: f64, period: f64 },
    #[error("classification needs at least {required} section points, got {available}")]
    TooFewPoints { available: usize, required: usize },
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
}

/// Minimum number of post-transient periods a section must cover.
pub const MIN_SECTION_CYCLES: usize = 16;

/// States sampled once per drive period after a transient.
#[derive(Debug, Clone, PartialEq)]
pub struct StroboscopicSection<T> {
    pub drive_period: T,
    pub transient_cycles: usize,
    pub points: Vec<State<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PeriodClass {
    Periodic(usize),
    Aperiodic,
}

impl PeriodClass {
    /// `P<k>` or `APERIODIC`.
    pub fn label(&self) -> String {
        match self {
            PeriodClass::Periodic(k) => format!("P{k}"),
            PeriodClass::Aperiodic => "APERIODIC".to_string(),
        }
    }

    pub fn parse_label(label: &str) -> Option<Self> {
        if label == "APERIODIC" {
            return Some(PeriodClass::Aperiodic);
        }
        let k: usize = label.strip_prefix('P')?.parse().ok()?;
        (k >= 1).then_some(PeriodClass::Periodic(k))
    }
}

/// Knobs shared by section extraction and classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionConfig<T> {
    pub transient_cycles: usize,
    pub record_cycles: usize,
    /// Relative tolerance against the section diameter.
    pub epsilon: T,
    pub max_period: usize,
}

impl<T: Scalar> Default for SectionConfig<T> {
    fn default() -> Self {
        Self {
            transient_cycles: 200,
            record_cycles: 256,
            epsilon: T::lit(1e-3),
            max_period: 16,
        }
    }
}

/// Grid samples per drive period, provided `dt` divides the period.
pub fn samples_per_period<T: Scalar>(dt: T, period: T) -> Result<usize, AnalysisError> {
    let ratio = (period / dt).as_f64();
    let nearest = ratio.round();
    if nearest < 1.0 || (ratio - nearest).abs() > 1e-6 * nearest {
        return Err(AnalysisError::GridNotAligned {
            dt: dt.as_f64(),
            period: period.as_f64(),
        });
    }
    Ok(nearest as usize)
}

/// The state at `t0 + n T` for every `n > transient_cycles`.
pub fn stroboscopic_section<T: Scalar>(
    traj: &Trajectory<T>,
    params: &CircuitParams<T>,
    transient_cycles: usize,
) -> Result<StroboscopicSection<T>, AnalysisError> {
    let period = params.drive_period();
    let per = samples_per_period(traj.dt, period)?;
    let total_cycles = traj.len().saturating_sub(1) / per;
    let required = transient_cycles + MIN_SECTION_CYCLES;
    if total_cycles < required {
        return Err(AnalysisError::InsufficientSpan {
            available: total_cycles,
            required,
        });
    }
    let points = ((transient_cycles + 1)..=total_cycles)
        .map(|n| traj.states[n * per])
        .collect();
    Ok(StroboscopicSection {
        drive_period: period,
        transient_cycles,
        points,
    })
}

/// Once-per-period samples of a scalar trajectory after `transient_cycles`.
pub fn scalar_section<T: Scalar>(
    traj: &ScalarTrajectory<T>,
    period: T,
    transient_cycles: usize,
) -> Result<Vec<T>, AnalysisError> {
    let per = samples_per_period(traj.dt, period)?;
    let total_cycles = traj.values.len().saturating_sub(1) / per;
    let required = transient_cycles + MIN_SECTION_CYCLES;
    if total_cycles < required {
        return Err(AnalysisError::InsufficientSpan {
            available: total_cycles,
            required,
        });
    }
    Ok(((transient_cycles + 1)..=total_cycles)
        .map(|n| traj.values[n * per])
        .collect())
}

fn distance<T: Scalar, const N: usize>(a: &[T; N], b: &[T; N]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + (*x - *y) * (*x - *y))
        .sqrt()
}

/// Periodicity test on fixed-dimension points.
///
/// Each coordinate is first divided by its largest magnitude so that mixed
/// units (coulombs against amperes) weigh equally. The smallest `k` with
/// `|p[n+k] - p[n]| <= epsilon * diameter` for all `n` wins. A section whose
/// diameter is below `epsilon` times its largest point norm is a fixed point.
pub fn classify_points<T: Scalar, const N: usize>(
    points: &[[T; N]],
    epsilon: T,
    max_period: usize,
) -> Result<PeriodClass, AnalysisError> {
    let required = 4 * max_period.max(1);
    if points.len() < required {
        return Err(AnalysisError::TooFewPoints {
            available: points.len(),
            required,
        });
    }
    let mut scale = [T::zero(); N];
    for p in points {
        for j in 0..N {
            scale[j] = scale[j].max(p[j].abs());
        }
    }
    let normalized: Vec<[T; N]> = points
        .iter()
        .map(|p| {
            let mut q = *p;
            for j in 0..N {
                if scale[j] > T::zero() {
                    q[j] = q[j] / scale[j];
                }
            }
            q
        })
        .collect();

    let mut diameter = T::zero();
    let mut max_norm = T::zero();
    let origin = [T::zero(); N];
    for (a, pa) in normalized.iter().enumerate() {
        max_norm = max_norm.max(distance(pa, &origin));
        for pb in &normalized[a + 1..] {
            diameter = diameter.max(distance(pa, pb));
        }
    }
    if diameter <= epsilon * max_norm || diameter <= T::min_positive_value() {
        return Ok(PeriodClass::Periodic(1));
    }
    let threshold = epsilon * diameter;
    for k in 1..=max_period {
        if repeats_with_lag(&normalized, k, threshold) {
            return Ok(PeriodClass::Periodic(k));
        }
    }
    Ok(PeriodClass::Aperiodic)
}

fn repeats_with_lag<T: Scalar, const N: usize>(points: &[[T; N]], lag: usize, threshold: T) -> bool {
    points
        .iter()
        .zip(&points[lag..])
        .all(|(a, b)| distance(a, b) <= threshold)
}

/// Classifies a section of `(q, i)` states.
pub fn classify_period<T: Scalar>(
    section: &StroboscopicSection<T>,
    epsilon: T,
    max_period: usize,
) -> Result<PeriodClass, AnalysisError> {
    let pts: Vec<[T; 2]> = section.points.iter().map(|s| s.to_array()).collect();
    classify_points(&pts, epsilon, max_period)
}

/// `(E w(w t_n), R i_n)` for every sample at or after `transient_cycles` periods.
pub fn portrait<T: Scalar>(traj: &Trajectory<T>, params: &CircuitParams<T>, transient_cycles: usize) -> Vec<(T, T)> {
    let start = post_transient_index(traj, params, transient_cycles);
    traj.states
        .iter()
        .enumerate()
        .skip(start)
        .map(|(n, s)| (params.drive_voltage(traj.time(n)), params.resistance * s.current))
        .collect()
}

/// First sample index at `t >= t0 + transient_cycles * T`.
pub fn post_transient_index<T: Scalar>(
    traj: &Trajectory<T>,
    params: &CircuitParams<T>,
    transient_cycles: usize,
) -> usize {
    let span = params.drive_period() * T::count(transient_cycles);
    let idx = (span / traj.dt).as_f64();
    let idx = if (idx - idx.round()).abs() < 1e-9 * idx.max(1.0) {
        idx.round()
    } else {
        idx.ceil()
    };
    (idx as usize).min(traj.len())
}

/// Resistor voltage after `transient_cycles`, keeping every `stride`-th grid
/// sample.
pub fn resistor_voltage_series<T: Scalar>(
    traj: &Trajectory<T>,
    params: &CircuitParams<T>,
    transient_cycles: usize,
    stride: usize,
) -> Result<ScalarSeries<T>, ChaosError> {
    let start = post_transient_index(traj, params, transient_cycles);
    let values: Vec<T> = traj.states[start.min(traj.len())..]
        .iter()
        .step_by(stride.max(1))
        .map(|s| params.resistance * s.current)
        .collect();
    ScalarSeries::new(traj.dt * T::count(stride.max(1)), values)
}

/// Result for one amplitude of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint<T> {
    pub amplitude: T,
    /// Resistor voltage at each section point (empty on failure).
    pub section: Vec<T>,
    pub class: Result<PeriodClass, AnalysisError>,
}

/// Section resistor voltages and period classes over an amplitude grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationDiagram<T> {
    pub amplitudes: Vec<T>,
    pub sections: Vec<Vec<T>>,
    pub classes: Vec<Result<PeriodClass, AnalysisError>>,
}

impl<T> BifurcationDiagram<T> {
    pub fn failures(&self) -> usize {
        self.classes.iter().filter(|c| c.is_err()).count()
    }
}

/// `steps` uniformly spaced amplitudes from `e_min` to `e_max` inclusive.
pub fn amplitude_grid<T: Scalar>(e_min: T, e_max: T, steps: usize) -> Result<Vec<T>, AnalysisError> {
    if !(e_min.is_finite() && e_max.is_finite()) || !(e_min < e_max) {
        return Err(AnalysisError::InvalidSweep(format!(
            "e_min ({e_min}) must be strictly below e_max ({e_max})"
        )));
    }
    if steps < 2 {
        return Err(AnalysisError::InvalidSweep(format!("steps must be >= 2 (got {steps})")));
    }
    let last = T::count(steps - 1);
    Ok((0..steps)
        .map(|j| {
            if j == steps - 1 {
                e_max
            } else {
                e_min + (e_max - e_min) * T::count(j) / last
            }
        })
        .collect())
}

/// Simulates one amplitude from `(q0, 0)` and classifies its section.
pub fn sweep_point<T: Scalar>(
    base: &CircuitParams<T>,
    amplitude: T,
    cfg: &IntegrationConfig<T>,
    section_cfg: &SectionConfig<T>,
) -> SweepPoint<T> {
    let mut params = *base;
    params.drive_amplitude = amplitude;
    let mut run_cfg = *cfg;
    run_cfg.t_end =
        cfg.t_start + params.drive_period() * T::count(section_cfg.transient_cycles + section_cfg.record_cycles);
    let outcome = integrate(&params, State::new(params.charge_offset, T::zero()), &run_cfg)
        .map_err(AnalysisError::from)
        .and_then(|traj| stroboscopic_section(&traj, &params, section_cfg.transient_cycles))
        .and_then(|section| {
            let class = classify_period(&section, section_cfg.epsilon, section_cfg.max_period)?;
            Ok((section, class))
        });
    match outcome {
        Ok((section, class)) => SweepPoint {
            amplitude,
            section: section.points.iter().map(|s| params.resistance * s.current).collect(),
            class: Ok(class),
        },
        Err(e) => SweepPoint {
            amplitude,
            section: Vec::new(),
            class: Err(e),
        },
    }
}

/// Drive-amplitude sweep. Amplitudes are independent; they run on the current
/// rayon pool and are assembled in grid order.
pub fn bifurcation_sweep<T: Scalar>(
    base: &CircuitParams<T>,
    e_min: T,
    e_max: T,
    steps: usize,
    cfg: &IntegrationConfig<T>,
    section_cfg: &SectionConfig<T>,
) -> Result<BifurcationDiagram<T>, AnalysisError> {
    let amplitudes = amplitude_grid(e_min, e_max, steps)?;
    base.validate()
        .map_err(|e| AnalysisError::InvalidSweep(e.to_string()))?;
    let points: Vec<SweepPoint<T>> = amplitudes
        .par_iter()
        .map(|&e| sweep_point(base, e, cfg, section_cfg))
        .collect();
    let mut diagram = BifurcationDiagram {
        amplitudes: Vec::with_capacity(steps),
        sections: Vec::with_capacity(steps),
        classes: Vec::with_capacity(steps),
    };
    for p in points {
        diagram.amplitudes.push(p.amplitude);
        diagram.sections.push(p.section);
        diagram.classes.push(p.class);
    }
    Ok(diagram)
}
