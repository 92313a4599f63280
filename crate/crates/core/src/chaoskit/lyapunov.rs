use rayon::prelude::*;

use crate::scalar::Scalar;

use super::embedding::{embed, DelayEmbedding, EmbeddingSpec};
use super::{euclidean, ChaosError, ScalarSeries};

/// Minimum number of reconstructed points for an estimate.
pub const MIN_EMBEDDED_POINTS: usize = 100;

/// Neighbor-following parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WolfConfig<T> {
    /// Neighbors closer in time than this many samples are ignored.
    pub theiler_window: usize,
    /// Samples evolved between distance measurements.
    pub follow_steps: usize,
    /// Replacement is triggered above this fraction of the attractor extent.
    pub replace_threshold: T,
    /// Neighbors closer than this fraction of the extent are ignored.
    pub min_separation: T,
}

impl<T: Scalar> WolfConfig<T> {
    /// Defaults for a given embedding: Theiler window `m tau`.
    pub fn for_embedding(spec: EmbeddingSpec) -> Self {
        Self {
            theiler_window: spec.dimension * spec.delay,
            follow_steps: 3,
            replace_threshold: T::lit(0.1),
            min_separation: T::lit(1e-9),
        }
    }
}

/// One evolution interval of the fiducial/neighbor pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceStep<T> {
    /// Fiducial index at the start of the interval.
    pub fiducial: usize,
    pub neighbor: usize,
    pub d_before: T,
    pub d_after: T,
    /// Whether the neighbor was replaced at the end of this interval.
    pub replaced: bool,
}

impl<T: Scalar> DivergenceStep<T> {
    pub fn log_ratio(&self) -> T {
        (self.d_after / self.d_before).ln()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovReport<T> {
    pub embedding: EmbeddingSpec,
    /// Maximal exponent in 1/seconds.
    pub exponent: T,
    pub replacement_count: usize,
    /// Total evolution time in seconds.
    pub follow_time: T,
    pub steps: Vec<DivergenceStep<T>>,
}

struct Tracker<'a, T> {
    points: &'a DelayEmbedding<T>,
    theiler: usize,
    horizon: usize,
    min_sep: T,
}

impl<T: Scalar> Tracker<'_, T> {
    fn eligible(&self, fiducial: usize, j: usize) -> Option<T> {
        if j.abs_diff(fiducial) <= self.theiler || j + self.horizon >= self.points.len() {
            return None;
        }
        let d = euclidean(self.points.point(fiducial), self.points.point(j));
        (d > self.min_sep).then_some(d)
    }

    /// Closest eligible point, lowest index on ties.
    fn nearest(&self, fiducial: usize) -> Option<(usize, T)> {
        (0..self.points.len())
            .into_par_iter()
            .filter_map(|j| self.eligible(fiducial, j).map(|d| (j, d)))
            .reduce_with(|a, b| if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a })
    }

    /// Closest eligible point within `radius` whose separation vector lies
    /// in a cone around the line of `direction`. The cone opens from 0.3 rad
    /// to a right angle; `None` when no eligible point is within `radius`.
    fn replacement(&self, fiducial: usize, direction: &[T], radius: T) -> Option<(usize, T)> {
        let f = self.points.point(fiducial);
        let dir_norm = direction.iter().fold(T::zero(), |a, &x| a + x * x).sqrt();
        let candidates: Vec<(usize, T, T)> = (0..self.points.len())
            .into_par_iter()
            .filter_map(|j| {
                let d = self.eligible(fiducial, j)?;
                if d > radius {
                    return None;
                }
                let p = self.points.point(j);
                let dot = p
                    .iter()
                    .zip(f)
                    .zip(direction)
                    .fold(T::zero(), |a, ((pj, fj), dj)| a + (*pj - *fj) * *dj);
                let cos = if dir_norm > T::zero() {
                    (dot / (d * dir_norm)).abs()
                } else {
                    T::one()
                };
                Some((j, d, cos))
            })
            .collect();
        for cone in [0.3, 0.6, 1.2, std::f64::consts::FRAC_PI_2] {
            let min_cos = T::lit(cone).cos();
            let best =
                candidates
                    .iter()
                    .filter(|c| c.2 >= min_cos)
                    .fold(None, |best: Option<(usize, T)>, c| match best {
                        Some((_, bd)) if c.1 >= bd => best,
                        _ => Some((c.0, c.1)),
                    });
            if best.is_some() {
                return best;
            }
        }
        None
    }
}

/// Follows a fiducial trajectory and one neighbor through the reconstruction,
/// accumulating `ln(d_after / d_before)` over every `follow_steps` interval and
/// replacing the neighbor once the separation exceeds the threshold. The
/// exponent is the accumulated sum over the total followed time.
pub fn max_lyapunov<T: Scalar>(
    series: &ScalarSeries<T>,
    spec: EmbeddingSpec,
    cfg: &WolfConfig<T>,
) -> Result<LyapunovReport<T>, ChaosError> {
    let points = embed(series, spec)?;
    if points.len() < MIN_EMBEDDED_POINTS {
        return Err(ChaosError::TooShort {
            available: points.len(),
            required: MIN_EMBEDDED_POINTS,
        });
    }
    if cfg.theiler_window < spec.delay * spec.dimension {
        return Err(ChaosError::InvalidParameter(format!(
            "theiler_window {} must be >= delay * dimension = {}",
            cfg.theiler_window,
            spec.delay * spec.dimension
        )));
    }
    if cfg.follow_steps < 1 {
        return Err(ChaosError::InvalidParameter("follow_steps must be >= 1".into()));
    }
    if !(cfg.replace_threshold > T::zero()) || !(cfg.min_separation >= T::zero()) {
        return Err(ChaosError::InvalidParameter(
            "replace_threshold must be > 0 and min_separation >= 0".into(),
        ));
    }
    let extent = points.extent();
    if !(extent > T::zero()) {
        return Err(ChaosError::DegenerateSeries);
    }
    let max_sep = cfg.replace_threshold * extent;
    let tracker = Tracker {
        points: &points,
        theiler: cfg.theiler_window,
        horizon: cfg.follow_steps,
        min_sep: cfg.min_separation * extent,
    };
    let fs = cfg.follow_steps;
    let m = spec.dimension;

    let mut fiducial = 0;
    let (mut neighbor, _) = tracker.nearest(fiducial).ok_or(ChaosError::NoNeighbor)?;
    let mut log_sum = T::zero();
    let mut evolved = 0usize;
    let mut replacements = 0usize;
    let mut steps = Vec::new();

    while fiducial + fs < points.len() && neighbor + fs < points.len() {
        let d_before = euclidean(points.point(fiducial), points.point(neighbor));
        let d_after = euclidean(points.point(fiducial + fs), points.point(neighbor + fs));
        let degenerate = d_after <= T::zero();
        if !degenerate {
            log_sum = log_sum + (d_after / d_before).ln();
            evolved += fs;
        }
        let start = fiducial;
        let start_neighbor = neighbor;
        fiducial += fs;
        neighbor += fs;
        if fiducial + fs >= points.len() {
            if !degenerate {
                steps.push(DivergenceStep {
                    fiducial: start,
                    neighbor: start_neighbor,
                    d_before,
                    d_after,
                    replaced: false,
                });
            }
            break;
        }
        let replace = degenerate || d_after > max_sep || d_after <= tracker.min_sep || neighbor + fs >= points.len();
        if !degenerate {
            steps.push(DivergenceStep {
                fiducial: start,
                neighbor: start_neighbor,
                d_before,
                d_after,
                replaced: replace,
            });
        }
        if replace {
            let current_usable = !degenerate && neighbor + fs < points.len();
            let f = points.point(fiducial);
            let direction: Vec<T> = if neighbor < points.len() {
                points.point(neighbor).iter().zip(f).map(|(a, b)| *a - *b).collect()
            } else {
                vec![T::zero(); m]
            };
            // With no point inside the radius the current neighbor is kept.
            let next = match tracker.replacement(fiducial, &direction, max_sep) {
                Some(found) => Some(found),
                None if current_usable => None,
                None => Some(tracker.nearest(fiducial).ok_or(ChaosError::NoNeighbor)?),
            };
            if let Some((j, _)) = next {
                neighbor = j;
                replacements += 1;
            }
        }
    }

    if evolved == 0 {
        return Err(ChaosError::NoNeighbor);
    }
    let follow_time = series.dt() * T::count(evolved);
    Ok(LyapunovReport {
        embedding: spec,
        exponent: log_sum / follow_time,
        replacement_count: replacements,
        follow_time,
        steps,
    })
}
