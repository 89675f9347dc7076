use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::MatchError;

/// A dense embedding. Dimension is positive and every component finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f32>", into = "Vec<f32>")]
pub struct EmbeddingVector(Vec<f32>);

impl EmbeddingVector {
    pub fn new(values: Vec<f32>) -> Result<Self, MatchError> {
        if values.is_empty() {
            return Err(MatchError::EmptyEmbedding);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(MatchError::NonFinite);
        }
        Ok(Self(values))
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f32] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.0.iter().map(|&v| f64::from(v) * f64::from(v)).sum())
    }

    /// Scale to unit L2 norm.
    pub fn normalized(&self) -> Result<Self, MatchError> {
        let n = self.norm();
        if n == 0.0 {
            return Err(MatchError::ZeroVector);
        }
        Ok(Self(self.0.iter().map(|&v| (f64::from(v) / n) as f32).collect()))
    }
}

impl TryFrom<Vec<f32>> for EmbeddingVector {
    type Error = MatchError;
    fn try_from(v: Vec<f32>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<EmbeddingVector> for Vec<f32> {
    fn from(e: EmbeddingVector) -> Self {
        e.0
    }
}

/// `dot(a, b) / (‖a‖ ‖b‖)`, clamped to `[-1, 1]`.
pub fn cosine_similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, MatchError> {
    if a.dimension() != b.dimension() {
        return Err(MatchError::DimensionMismatch {
            expected: a.dimension(),
            got: b.dimension(),
        });
    }
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.0.iter().zip(&b.0) {
        let (x, y) = (f64::from(x), f64::from(y));
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(MatchError::ZeroVector);
    }
    Ok((dot / (libm::sqrt(na) * libm::sqrt(nb))).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn v(xs: &[f32]) -> EmbeddingVector {
        EmbeddingVector::new(xs.to_vec()).unwrap()
    }

    #[test]
    fn self_similarity_is_one() {
        let a = v(&[0.3, -1.2, 4.0]);
        assert!((cosine_similarity(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_is_zero() {
        assert_eq!(cosine_similarity(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(), 0.0);
    }

    #[test]
    fn forty_five_degrees() {
        let s = cosine_similarity(&v(&[1.0, 1.0]), &v(&[1.0, 0.0])).unwrap();
        assert!((s - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-4);
        assert!((s - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
    }

    #[test]
    fn errors() {
        assert_eq!(
            cosine_similarity(&v(&[1.0]), &v(&[1.0, 0.0])),
            Err(MatchError::DimensionMismatch { expected: 1, got: 2 })
        );
        assert_eq!(cosine_similarity(&v(&[0.0, 0.0]), &v(&[1.0, 0.0])), Err(MatchError::ZeroVector));
        assert_eq!(EmbeddingVector::new(vec![]), Err(MatchError::EmptyEmbedding));
        assert_eq!(EmbeddingVector::new(vec![f32::NAN]), Err(MatchError::NonFinite));
    }

    #[test]
    fn normalize_gives_unit_norm() {
        let n = v(&[3.0, 4.0]).normalized().unwrap();
        assert!((n.norm() - 1.0).abs() < 1e-6);
        assert!(v(&[0.0]).normalized().is_err());
    }
}
