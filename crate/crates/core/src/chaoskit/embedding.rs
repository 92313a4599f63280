use crate::scalar::Scalar;

use super::{ChaosError, ScalarSeries};

/// Delay `tau` (in samples) and dimension `m` of a delay reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EmbeddingSpec {
    pub delay: usize,
    pub dimension: usize,
}

impl EmbeddingSpec {
    pub fn new(delay: usize, dimension: usize) -> Self {
        Self { delay, dimension }
    }

    /// Number of reconstructed points for a series of `length` samples.
    pub fn point_count(&self, length: usize) -> usize {
        length.saturating_sub((self.dimension - 1) * self.delay)
    }

    pub fn validate(&self, length: usize) -> Result<(), ChaosError> {
        if self.delay < 1 || self.dimension < 1 || (self.dimension - 1) * self.delay >= length {
            return Err(ChaosError::InvalidEmbedding {
                delay: self.delay,
                dimension: self.dimension,
                length,
            });
        }
        Ok(())
    }
}

/// Reconstructed points stored row-major, `dimension` values per point.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayEmbedding<T> {
    spec: EmbeddingSpec,
    data: Vec<T>,
}

impl<T: Scalar> DelayEmbedding<T> {
    pub fn spec(&self) -> EmbeddingSpec {
        self.spec
    }

    pub fn dimension(&self) -> usize {
        self.spec.dimension
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.spec.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn point(&self, n: usize) -> &[T] {
        let m = self.spec.dimension;
        &self.data[n * m..(n + 1) * m]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.spec.dimension)
    }

    pub fn to_vecs(&self) -> Vec<Vec<T>> {
        self.iter().map(<[T]>::to_vec).collect()
    }

    /// Diagonal of the axis-aligned bounding box.
    pub fn extent(&self) -> T {
        let m = self.spec.dimension;
        let mut lo = vec![T::infinity(); m];
        let mut hi = vec![T::neg_infinity(); m];
        for p in self.iter() {
            for j in 0..m {
                lo[j] = lo[j].min(p[j]);
                hi[j] = hi[j].max(p[j]);
            }
        }
        lo.iter()
            .zip(&hi)
            .fold(T::zero(), |acc, (l, h)| acc + (*h - *l) * (*h - *l))
            .sqrt()
    }
}

/// `point_n = (x_n, x_{n+tau}, ..., x_{n+(m-1)tau})`.
pub fn embed<T: Scalar>(series: &ScalarSeries<T>, spec: EmbeddingSpec) -> Result<DelayEmbedding<T>, ChaosError> {
    embed_values(series.values(), spec)
}

pub(crate) fn embed_values<T: Scalar>(values: &[T], spec: EmbeddingSpec) -> Result<DelayEmbedding<T>, ChaosError> {
    spec.validate(values.len())?;
    let count = spec.point_count(values.len());
    let mut data = Vec::with_capacity(count * spec.dimension);
    for n in 0..count {
        for j in 0..spec.dimension {
            data.push(values[n + j * spec.delay]);
        }
    }
    Ok(DelayEmbedding { spec, data })
}
