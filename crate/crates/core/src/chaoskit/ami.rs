use crate::scalar::Scalar;

use super::{ChaosError, ScalarSeries};

/// `I(tau)` in bits for `tau = 0..=max_delay` from a `bins x bins` histogram
/// of the pairs `(x_n, x_{n+tau})` over the series range.
pub fn average_mutual_information<T: Scalar>(
    series: &ScalarSeries<T>,
    max_delay: usize,
    bins: usize,
) -> Result<Vec<(usize, T)>, ChaosError> {
    if bins < 2 {
        return Err(ChaosError::InvalidParameter(format!("bins must be >= 2 (got {bins})")));
    }
    let values = series.values();
    if max_delay * 4 >= values.len() {
        return Err(ChaosError::InvalidParameter(format!(
            "max_delay {max_delay} must be below length/4 = {}",
            values.len() / 4
        )));
    }
    let lo = values.iter().copied().fold(T::infinity(), T::min);
    let hi = values.iter().copied().fold(T::neg_infinity(), T::max);
    if !(hi > lo) {
        return Err(ChaosError::DegenerateSeries);
    }
    let width = hi - lo;
    let nb = T::count(bins);
    let binned: Vec<usize> = values
        .iter()
        .map(|&v| {
            let b = ((v - lo) / width * nb).floor().to_usize().unwrap_or(0);
            b.min(bins - 1)
        })
        .collect();

    let mut joint = vec![0usize; bins * bins];
    let mut row = vec![0usize; bins];
    let mut col = vec![0usize; bins];
    let mut out = Vec::with_capacity(max_delay + 1);
    for tau in 0..=max_delay {
        joint.iter_mut().for_each(|c| *c = 0);
        row.iter_mut().for_each(|c| *c = 0);
        col.iter_mut().for_each(|c| *c = 0);
        let pairs = values.len() - tau;
        for n in 0..pairs {
            let (a, b) = (binned[n], binned[n + tau]);
            joint[a * bins + b] += 1;
            row[a] += 1;
            col[b] += 1;
        }
        let total = T::count(pairs);
        let mut info = T::zero();
        for a in 0..bins {
            if row[a] == 0 {
                continue;
            }
            for b in 0..bins {
                let c = joint[a * bins + b];
                if c == 0 {
                    continue;
                }
                // p_ab log2(p_ab / (p_a p_b)) = p_ab log2(c N / (r_a c_b))
                let p_ab = T::count(c) / total;
                let ratio = T::count(c) * total / (T::count(row[a]) * T::count(col[b]));
                info = info + p_ab * ratio.log2();
            }
        }
        out.push((tau, info.max(T::zero())));
    }
    Ok(out)
}

/// Delay chosen from an AMI curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DelayChoice {
    pub delay: usize,
    /// False when no interior local minimum exists and the global argmin was used.
    pub is_local_minimum: bool,
}

/// Smallest `tau` with `I(tau-1) > I(tau) <= I(tau+1)`; falls back to the
/// argmin over the scanned range.
pub fn first_minimum<T: Scalar>(ami: &[(usize, T)]) -> Result<DelayChoice, ChaosError> {
    if ami.len() < 3 {
        return Err(ChaosError::InvalidParameter(
            "AMI curve needs at least 3 entries".into(),
        ));
    }
    for w in ami.windows(3) {
        if w[0].1 > w[1].1 && w[1].1 <= w[2].1 {
            return Ok(DelayChoice {
                delay: w[1].0,
                is_local_minimum: true,
            });
        }
    }
    let mut best = ami[0];
    for &(tau, info) in &ami[1..] {
        if info < best.1 {
            best = (tau, info);
        }
    }
    Ok(DelayChoice {
        delay: best.0,
        is_local_minimum: false,
    })
}
