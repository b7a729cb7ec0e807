//! Synthetic embedding pools with controllable class geometry.
//!
//! Images are `normalize(κ·prototype + N(0, I))`. A configurable share of each
//! class is replaced by near-copies of other images of that class.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::angular::dot;
use crate::error::{ArgumentError, Error};
use crate::pool::EmbeddingPool;

/// Norm of the perturbation applied to a duplicated image before re-normalizing.
pub const DUPLICATE_JITTER: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub dim: usize,
    pub n_classes: usize,
    pub per_class: usize,
    /// κ: weight of the prototype before noise is added. 0 gives uniform directions.
    pub concentration: f64,
    pub duplicate_fraction: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Number of near-copies per class: `round_half_up(fraction · per_class)`.
    pub fn duplicates_per_class(&self) -> usize {
        libm::floor(self.duplicate_fraction * self.per_class as f64 + 0.5) as usize
    }

    pub fn validate(&self) -> Result<(), ArgumentError> {
        if self.dim < 2 {
            return Err(ArgumentError::BadSpec("dim must be at least 2"));
        }
        if self.n_classes < 2 {
            return Err(ArgumentError::BadSpec("at least 2 classes are required"));
        }
        if self.per_class == 0 {
            return Err(ArgumentError::BadSpec("per_class must be at least 1"));
        }
        if !self.concentration.is_finite() || self.concentration < 0.0 {
            return Err(ArgumentError::BadSpec("concentration must be finite and >= 0"));
        }
        if !(self.duplicate_fraction >= 0.0 && self.duplicate_fraction < 1.0) {
            return Err(ArgumentError::BadSpec("duplicate fraction must lie in [0, 1)"));
        }
        if self.duplicates_per_class() >= self.per_class {
            return Err(ArgumentError::BadSpec(
                "duplicate fraction leaves no original images",
            ));
        }
        Ok(())
    }
}

/// A generated pool and how it was built.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPool {
    pub pool: EmbeddingPool,
    /// False when `dim < n_classes` and prototypes are independent Gaussians.
    pub orthonormal_prototypes: bool,
    /// `(copy, source)` pool indices of every near-duplicate.
    pub duplicates: Vec<(usize, usize)>,
}

pub fn generate_pool(spec: &SyntheticSpec) -> Result<SyntheticPool, Error> {
    spec.validate()?;
    let dim = spec.dim;
    let orthonormal = dim >= spec.n_classes;

    let mut rng = stream(spec.seed, 0);
    let mut prototypes: Vec<Vec<f64>> = Vec::with_capacity(spec.n_classes);
    while prototypes.len() < spec.n_classes {
        let mut v = gaussian(&mut rng, dim);
        if orthonormal {
            for p in &prototypes {
                let along = dot(&v, p);
                v.iter_mut().zip(p).for_each(|(x, y)| *x -= along * y);
            }
        }
        if normalize(&mut v) {
            prototypes.push(v);
        }
    }

    let n_dup = spec.duplicates_per_class();
    let n_orig = spec.per_class - n_dup;
    let mut features = Vec::with_capacity(spec.n_classes * spec.per_class * dim);
    let mut image_ids = Vec::with_capacity(spec.n_classes * spec.per_class);
    let mut labels = Vec::with_capacity(spec.n_classes * spec.per_class);
    let mut duplicates = Vec::new();

    for (class, proto) in prototypes.iter().enumerate() {
        let mut rng = stream(spec.seed, class as u64 + 1);
        let base = class * spec.per_class;
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(spec.per_class);
        while rows.len() < n_orig {
            let mut v = gaussian(&mut rng, dim);
            v.iter_mut()
                .zip(proto)
                .for_each(|(x, p)| *x += spec.concentration * p);
            if normalize(&mut v) {
                rows.push(v);
            }
        }
        while rows.len() < spec.per_class {
            let source = rng.random_range(0..n_orig);
            let mut jitter = gaussian(&mut rng, dim);
            if !normalize(&mut jitter) {
                continue;
            }
            let mut v: Vec<f64> = rows[source]
                .iter()
                .zip(&jitter)
                .map(|(s, j)| s + DUPLICATE_JITTER * j)
                .collect();
            normalize(&mut v);
            duplicates.push((base + rows.len(), base + source));
            rows.push(v);
        }
        for (k, row) in rows.iter().enumerate() {
            features.extend(row.iter().map(|&x| x as f32));
            image_ids.push(format!("class_{class:03}/img_{k:04}"));
            labels.push(class as u32);
        }
    }

    let pool = EmbeddingPool::new(
        dim,
        (0..spec.n_classes).map(|c| format!("class_{c:03}")).collect(),
        prototypes.iter().flatten().map(|&x| x as f32).collect(),
        image_ids,
        labels,
        features,
    )?;
    Ok(SyntheticPool {
        pool,
        orthonormal_prototypes: orthonormal,
        duplicates,
    })
}

fn stream(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian(rng: &mut ChaCha12Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

/// Scale to unit length; false if the vector is too short to normalize reliably.
fn normalize(v: &mut [f64]) -> bool {
    let n = libm::sqrt(dot(v, v));
    if n < 1e-9 {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= n);
    true
}
