//! Angular distance on the unit hypersphere.
//!
//! Every score in the crate is built from one metric: the arccos of the inner
//! product of two unit vectors, with the inner product clamped to
//! `[-1 + CLAMP_EPS, 1 - CLAMP_EPS]`. The clamp means identical vectors sit at
//! `arccos(1 - 1e-6) ≈ 1.414e-3` rather than zero.

use alloc::vec::Vec;

use crate::error::ArgumentError;

/// Margin kept between the clamped inner product and ±1.
pub const CLAMP_EPS: f64 = 1e-6;

/// Distance between two identical unit vectors after clamping.
pub fn min_distance() -> f64 {
    libm::acos(1.0 - CLAMP_EPS)
}

/// Distance between two antipodal unit vectors after clamping.
pub fn max_distance() -> f64 {
    libm::acos(-1.0 + CLAMP_EPS)
}

/// Plain sequential inner product.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Angle for an already-computed inner product.
#[inline]
pub fn angle_from_dot(dot: f64) -> f64 {
    libm::acos(dot.clamp(-1.0 + CLAMP_EPS, 1.0 - CLAMP_EPS))
}

/// Clamped angular distance between two unit vectors, in radians.
///
/// Symmetric in its arguments bit for bit. The caller is responsible for
/// passing unit vectors; use [`normalized`] to re-project float32 data.
pub fn angular_distance(a: &[f64], b: &[f64]) -> Result<f64, ArgumentError> {
    if a.len() != b.len() {
        return Err(ArgumentError::DimensionMismatch(a.len(), b.len()));
    }
    if !a.iter().chain(b).all(|x| x.is_finite()) {
        return Err(ArgumentError::NonFinite);
    }
    Ok(angle_from_dot(dot(a, b)))
}

/// Widen to f64 and rescale to unit length.
///
/// A zero vector is returned unchanged.
pub fn normalized(v: &[f32]) -> Vec<f64> {
    let mut out: Vec<f64> = v.iter().map(|&x| f64::from(x)).collect();
    let norm = libm::sqrt(dot(&out, &out));
    if norm > 0.0 {
        out.iter_mut().for_each(|x| *x /= norm);
    }
    out
}

/// Row-major matrix of unit f64 vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitRows {
    dim: usize,
    data: Vec<f64>,
}

impl UnitRows {
    /// Re-normalize each `dim`-wide row of a flat f32 matrix.
    pub fn from_f32(dim: usize, flat: &[f32]) -> Self {
        let mut data = Vec::with_capacity(flat.len());
        for row in flat.chunks_exact(dim) {
            data.extend(normalized(row));
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn identical_vectors_hit_the_lower_clamp() {
        let e1 = [1.0, 0.0, 0.0];
        let d = angular_distance(&e1, &e1).unwrap();
        assert!((d - 1.414_213_6e-3).abs() < 1e-9, "{d}");
        assert_eq!(d, min_distance());
    }

    #[test]
    fn orthogonal_is_right_angle() {
        let d = angular_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((d - core::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn antipodal_hits_the_upper_clamp() {
        let d = angular_distance(&[1.0, 0.0], &[-1.0, 0.0]).unwrap();
        assert!((d - 3.140_178_4).abs() < 1e-7, "{d}");
        assert_eq!(d, max_distance());
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            angular_distance(&[1.0, 0.0], &[1.0]),
            Err(ArgumentError::DimensionMismatch(2, 1))
        );
        assert_eq!(
            angular_distance(&[f64::NAN, 0.0], &[1.0, 0.0]),
            Err(ArgumentError::NonFinite)
        );
    }

    #[test]
    fn normalized_rescales() {
        let v = normalized(&[3.0, 4.0]);
        assert_eq!(v, vec![0.6, 0.8]);
        assert_eq!(normalized(&[0.0, 0.0]), vec![0.0, 0.0]);
    }
}
