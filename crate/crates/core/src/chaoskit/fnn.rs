use rayon::prelude::*;

use crate::scalar::Scalar;

use super::embedding::{embed_values, EmbeddingSpec};
use super::{euclidean, ChaosError, ScalarSeries};

/// Thresholds of the false-nearest-neighbor test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FnnConfig<T> {
    /// Ratio of the added-coordinate jump to the current neighbor distance.
    pub r_tol: T,
    /// Ratio of the extended neighbor distance to the series standard deviation.
    pub a_tol: T,
    /// Neighbors closer than this many standard deviations are treated as
    /// repeats of the same state and skipped.
    pub noise_floor: T,
}

impl<T: Scalar> Default for FnnConfig<T> {
    fn default() -> Self {
        Self {
            r_tol: T::lit(15.0),
            a_tol: T::lit(2.0),
            noise_floor: T::lit(1e-9),
        }
    }
}

/// Index of the nearest other point farther than `floor` (lowest index on
/// ties) and its distance.
pub(crate) fn nearest_neighbor<T: Scalar>(points: &[&[T]], query: usize, floor: T) -> Option<(usize, T)> {
    let q = points[query];
    let mut best: Option<(usize, T)> = None;
    for (j, p) in points.iter().enumerate() {
        if j == query {
            continue;
        }
        let d = euclidean(q, p);
        if d <= floor {
            continue;
        }
        match best {
            Some((_, bd)) if d >= bd => {}
            _ => best = Some((j, d)),
        }
    }
    best
}

/// Fraction of false nearest neighbors for `m = 1..=m_max`.
///
/// For each `m` only points whose `(m+1)`-th delay coordinate exists take
/// part. A neighbor is false when `|x_{n+m tau} - x_{k+m tau}| > r_tol R_m`
/// or when the `(m+1)`-dimensional distance exceeds `a_tol` standard
/// deviations.
pub fn false_nearest_neighbors<T: Scalar>(
    series: &ScalarSeries<T>,
    delay: usize,
    m_max: usize,
    cfg: &FnnConfig<T>,
) -> Result<Vec<(usize, T)>, ChaosError> {
    if m_max < 2 {
        return Err(ChaosError::InvalidParameter(format!(
            "m_max must be >= 2 (got {m_max})"
        )));
    }
    if delay < 1 {
        return Err(ChaosError::InvalidParameter("delay must be >= 1".into()));
    }
    let values = series.values();
    let sigma = series.std_dev();
    let floor = cfg.noise_floor * sigma;
    let mut out = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        let usable = values.len().saturating_sub(m * delay);
        if usable < 10 {
            return Err(ChaosError::TooShort {
                available: usable,
                required: 10,
            });
        }
        let emb = embed_values(&values[..usable + (m - 1) * delay], EmbeddingSpec::new(delay, m))?;
        let points: Vec<&[T]> = emb.iter().collect();
        let false_count: usize = (0..points.len())
            .into_par_iter()
            .map(|n| {
                let Some((k, dist)) = nearest_neighbor(&points, n, floor) else {
                    return 0;
                };
                let jump = (values[n + m * delay] - values[k + m * delay]).abs();
                let extended = (dist * dist + jump * jump).sqrt();
                let ratio_false = jump / dist > cfg.r_tol;
                let size_false = extended > cfg.a_tol * sigma;
                usize::from(ratio_false || size_false)
            })
            .sum();
        out.push((m, T::count(false_count) / T::count(points.len())));
    }
    Ok(out)
}

/// Smallest `m` whose false-neighbor fraction is at most `threshold`, else
/// the `m` with the lowest fraction.
pub fn choose_dimension<T: Scalar>(fnn: &[(usize, T)], threshold: T) -> usize {
    if let Some(&(m, _)) = fnn.iter().find(|(_, f)| *f <= threshold) {
        return m;
    }
    fnn.iter()
        .fold(None, |best: Option<(usize, T)>, &(m, f)| match best {
            Some((_, bf)) if f >= bf => best,
            _ => Some((m, f)),
        })
        .map_or(1, |(m, _)| m)
}
