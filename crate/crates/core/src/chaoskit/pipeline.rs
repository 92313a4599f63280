use crate::scalar::Scalar;

use super::ami::{average_mutual_information, first_minimum, DelayChoice};
use super::embedding::EmbeddingSpec;
use super::fnn::{choose_dimension, false_nearest_neighbors, FnnConfig};
use super::lyapunov::{max_lyapunov, LyapunovReport, WolfConfig};
use super::{ChaosError, ScalarSeries};

/// Knobs for the delay -> dimension -> exponent pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChaosConfig<T> {
    pub bins: usize,
    /// Upper end of the AMI scan, clamped below `length / 4`.
    pub max_delay: usize,
    pub m_max: usize,
    pub fnn: FnnConfig<T>,
    /// FNN fraction accepted as "unfolded".
    pub fnn_threshold: T,
    /// FNN runs on at most this many leading samples (brute-force cost is quadratic).
    pub fnn_max_points: usize,
    /// `None` uses `m * tau`.
    pub theiler_window: Option<usize>,
    pub follow_steps: usize,
    pub replace_threshold: T,
    pub min_separation: T,
    /// Fixed delay; chosen from the AMI curve when `None`.
    pub delay: Option<usize>,
    /// Fixed dimension; chosen by FNN when `None`.
    pub dimension: Option<usize>,
}

impl<T: Scalar> Default for ChaosConfig<T> {
    fn default() -> Self {
        Self {
            bins: 64,
            max_delay: 100,
            m_max: 8,
            fnn: FnnConfig::default(),
            fnn_threshold: T::lit(0.01),
            fnn_max_points: 4000,
            theiler_window: None,
            follow_steps: 3,
            replace_threshold: T::lit(0.1),
            min_separation: T::lit(1e-9),
            delay: None,
            dimension: None,
        }
    }
}

impl<T: Scalar> ChaosConfig<T> {
    pub fn wolf(&self, spec: EmbeddingSpec) -> WolfConfig<T> {
        WolfConfig {
            theiler_window: self.theiler_window.unwrap_or(spec.dimension * spec.delay),
            follow_steps: self.follow_steps,
            replace_threshold: self.replace_threshold,
            min_separation: self.min_separation,
        }
    }
}

/// Everything the pipeline produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaosEstimate<T> {
    /// Empty when the delay was fixed.
    pub ami: Vec<(usize, T)>,
    pub delay: Option<DelayChoice>,
    /// Empty when the dimension was fixed.
    pub fnn: Vec<(usize, T)>,
    pub report: LyapunovReport<T>,
}

/// AMI first minimum for the delay, FNN for the dimension, then the exponent.
/// Either choice is skipped when the config fixes it.
pub fn estimate<T: Scalar>(series: &ScalarSeries<T>, cfg: &ChaosConfig<T>) -> Result<ChaosEstimate<T>, ChaosError> {
    let (ami, delay) = match cfg.delay {
        Some(_) => (Vec::new(), None),
        None => {
            let max_delay = cfg.max_delay.min((series.len().saturating_sub(1)) / 4);
            if max_delay < 2 {
                return Err(ChaosError::TooShort {
                    available: series.len(),
                    required: 12,
                });
            }
            let ami = average_mutual_information(series, max_delay, cfg.bins)?;
            let choice = first_minimum(&ami)?;
            (ami, Some(choice))
        }
    };
    let tau = cfg.delay.or(delay.map(|d| d.delay)).unwrap_or(1).max(1);
    let (fnn, m) = match cfg.dimension {
        Some(m) => (Vec::new(), m),
        None => {
            let fnn_len = series.len().min(cfg.fnn_max_points.max(10));
            let fnn_series = ScalarSeries::new(series.dt(), series.values()[..fnn_len].to_vec())?;
            let fnn = false_nearest_neighbors(&fnn_series, tau, cfg.m_max, &cfg.fnn)?;
            let m = choose_dimension(&fnn, cfg.fnn_threshold);
            (fnn, m)
        }
    };
    let spec = EmbeddingSpec::new(tau, m);
    let report = max_lyapunov(series, spec, &cfg.wolf(spec))?;
    Ok(ChaosEstimate {
        ami,
        delay,
        fnn,
        report,
    })
}

/// Exponent for a fixed embedding.
pub fn estimate_with_embedding<T: Scalar>(
    series: &ScalarSeries<T>,
    spec: EmbeddingSpec,
    cfg: &ChaosConfig<T>,
) -> Result<LyapunovReport<T>, ChaosError> {
    max_lyapunov(series, spec, &cfg.wolf(spec))
}
