//! Time-series chaos quantification: delay selection by average mutual
//! information, embedding dimension by false nearest neighbors, and the
//! maximal Lyapunov exponent by neighbor following with replacement.

mod ami;
mod embedding;
mod fnn;
mod lyapunov;
mod pipeline;

pub use ami::{average_mutual_information, first_minimum, DelayChoice};
pub use embedding::{embed, DelayEmbedding, EmbeddingSpec};
pub use fnn::{choose_dimension, false_nearest_neighbors, FnnConfig};
pub use lyapunov::{max_lyapunov, DivergenceStep, LyapunovReport, WolfConfig};
pub use pipeline::{estimate, estimate_with_embedding, ChaosConfig, ChaosEstimate};

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChaosError {
    #[error("invalid series: {0}")]
    InvalidSeries(String),
    #[error("series is constant: zero entropy, delay undefined")]
    DegenerateSeries,
    #[error("invalid embedding (delay {delay}, dimension {dimension}) for {length} samples")]
    InvalidEmbedding {
        delay: usize,
        dimension: usize,
        length: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("series too short: {available} embedded points, at least {required} required")]
    TooShort { available: usize, required: usize },
    #[error("no eligible neighbor outside the temporal exclusion window; supply a longer series")]
    NoNeighbor,
}

/// Uniformly sampled scalar observable.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSeries<T> {
    dt: T,
    values: Vec<T>,
}

impl<T: Scalar> ScalarSeries<T> {
    pub fn new(dt: T, values: Vec<T>) -> Result<Self, ChaosError> {
        if !(dt.is_finite() && dt > T::zero()) {
            return Err(ChaosError::InvalidSeries(format!(
                "dt must be finite and > 0 (got {dt})"
            )));
        }
        if values.len() < 2 {
            return Err(ChaosError::InvalidSeries(format!(
                "need at least 2 samples (got {})",
                values.len()
            )));
        }
        if let Some(n) = values.iter().position(|v| !v.is_finite()) {
            return Err(ChaosError::InvalidSeries(format!("sample {n} is not finite")));
        }
        Ok(Self { dt, values })
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> T {
        self.values.iter().fold(T::zero(), |a, &v| a + v) / T::count(self.values.len())
    }

    /// Population standard deviation.
    pub fn std_dev(&self) -> T {
        let mean = self.mean();
        let var = self.values.iter().fold(T::zero(), |a, &v| a + (v - mean) * (v - mean)) / T::count(self.values.len());
        var.sqrt()
    }

    /// Zero-mean, unit-variance copy (unchanged if the series is constant).
    pub fn normalized(&self) -> Self {
        let mean = self.mean();
        let sd = self.std_dev();
        let scale = if sd > T::zero() { sd } else { T::one() };
        Self {
            dt: self.dt,
            values: self.values.iter().map(|&v| (v - mean) / scale).collect(),
        }
    }

    /// Every `stride`-th sample.
    pub fn decimated(&self, stride: usize) -> Result<Self, ChaosError> {
        if stride == 0 {
            return Err(ChaosError::InvalidParameter("stride must be >= 1".into()));
        }
        Self::new(
            self.dt * T::count(stride),
            self.values.iter().step_by(stride).copied().collect(),
        )
    }

    pub fn reversed(&self) -> Self {
        Self {
            dt: self.dt,
            values: self.values.iter().rev().copied().collect(),
        }
    }
}

#[inline]
pub(crate) fn euclidean<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + (*x - *y) * (*x - *y))
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_validation() {
        assert!(ScalarSeries::new(0.0, vec![1.0, 2.0]).is_err());
        assert!(ScalarSeries::new(1.0, vec![1.0]).is_err());
        assert!(ScalarSeries::new(1.0, vec![1.0, f64::NAN]).is_err());
        let s = ScalarSeries::new(0.5, vec![1.0, 3.0]).unwrap();
        assert_eq!(s.mean(), 2.0);
        assert_eq!(s.std_dev(), 1.0);
        assert_eq!(s.normalized().values(), &[-1.0, 1.0]);
    }

    #[test]
    fn decimation_scales_dt() {
        let s = ScalarSeries::new(0.1, (0..10).map(f64::from).collect()).unwrap();
        let d = s.decimated(3).unwrap();
        assert_eq!(d.values(), &[0.0, 3.0, 6.0, 9.0]);
        assert!((d.dt() - 0.3).abs() < 1e-15);
        assert!(s.decimated(0).is_err());
    }
}
