//! Semantic scores: target relevance, non-target separation, intra-set
//! diversity, and the margin and mixed scores built from them.
//!
//! Stored f32 vectors are widened and re-normalized once when a
//! [`SemanticSpace`] is built; every score after that is f64.

use alloc::vec::Vec;

use crate::angular::{angle_from_dot, dot, UnitRows};
use crate::error::ArgumentError;
use crate::pool::EmbeddingPool;

/// A pool together with its unit f64 features and prototypes.
#[derive(Debug, Clone)]
pub struct SemanticSpace<'a> {
    pool: &'a EmbeddingPool,
    features: UnitRows,
    prototypes: UnitRows,
}

impl<'a> SemanticSpace<'a> {
    pub fn new(pool: &'a EmbeddingPool) -> Self {
        Self {
            pool,
            features: UnitRows::from_f32(pool.dim(), pool.features()),
            prototypes: UnitRows::from_f32(pool.dim(), pool.prototypes()),
        }
    }

    pub fn pool(&self) -> &'a EmbeddingPool {
        self.pool
    }

    pub fn feature(&self, image: usize) -> &[f64] {
        self.features.row(image)
    }

    pub fn prototype(&self, class: usize) -> &[f64] {
        self.prototypes.row(class)
    }

    fn check_index(&self, image: usize) -> Result<(), ArgumentError> {
        if image < self.pool.n_images() {
            Ok(())
        } else {
            Err(ArgumentError::IndexOutOfRange {
                index: image,
                len: self.pool.n_images(),
            })
        }
    }

    /// Angular distance between two images.
    #[inline]
    pub fn image_distance(&self, a: usize, b: usize) -> f64 {
        angle_from_dot(dot(self.features.row(a), self.features.row(b)))
    }

    /// Angular distance between an image and a class prototype.
    #[inline]
    pub fn prototype_distance(&self, image: usize, class: usize) -> f64 {
        angle_from_dot(dot(self.features.row(image), self.prototypes.row(class)))
    }

    /// Negated distance to the image's own class prototype; in `[-π, 0]`.
    pub fn target_relevance(&self, image: usize) -> Result<f64, ArgumentError> {
        self.check_index(image)?;
        Ok(-self.prototype_distance(image, self.pool.label(image)))
    }

    /// Distance to the closest prototype of any other class.
    pub fn non_target_separation(&self, image: usize) -> Result<f64, ArgumentError> {
        self.check_index(image)?;
        let own = self.pool.label(image);
        Ok((0..self.pool.n_classes())
            .filter(|&c| c != own)
            .map(|c| self.prototype_distance(image, c))
            .fold(f64::INFINITY, f64::min))
    }

    /// Mean distance from `image` to the other members of a same-class set.
    ///
    /// With the whole class as `members` this is the static pool diversity;
    /// with the current selection it is the dynamic diversity used while sampling.
    /// `members` must contain `image`.
    pub fn diversity(&self, image: usize, members: &[usize]) -> Result<f64, ArgumentError> {
        self.check_index(image)?;
        if members.len() < 2 {
            return Err(ArgumentError::SingletonSet);
        }
        let class = self.pool.label(image);
        let mut contains_self = false;
        for &j in members {
            self.check_index(j)?;
            let found = self.pool.label(j);
            if found != class {
                return Err(ArgumentError::MixedClasses {
                    index: j,
                    expected: class,
                    found,
                });
            }
            contains_self |= j == image;
        }
        if !contains_self {
            return Err(ArgumentError::BadSpec("member set must contain the scored image"));
        }
        let sum: f64 = members
            .iter()
            .filter(|&&j| j != image)
            .map(|&j| self.image_distance(image, j))
            .sum();
        Ok(sum / (members.len() - 1) as f64)
    }
}

/// Per-image scores for a whole pool, indexed by pool position.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub relevance: Vec<f64>,
    pub separation: Vec<f64>,
    /// NaN for images of a singleton class, where the mean is undefined.
    pub diversity_static: Vec<f64>,
    pub margin: Vec<f64>,
    pub mixed: Option<Vec<f64>>,
    /// Classes holding exactly one image.
    pub singleton_classes: Vec<usize>,
}

impl ScoreTable {
    pub fn len(&self) -> usize {
        self.margin.len()
    }

    pub fn is_empty(&self) -> bool {
        self.margin.is_empty()
    }

    /// Fill the `mixed` column for the given weight.
    pub fn with_mixed(mut self, pool: &EmbeddingPool, lambda: f64) -> Result<Self, ArgumentError> {
        self.mixed = Some(mixed_score(&self, pool, lambda)?);
        Ok(self)
    }
}

/// Compute relevance, separation, static diversity and margin for every image.
pub fn score_pool(space: &SemanticSpace<'_>) -> ScoreTable {
    let pool = space.pool();
    let n = pool.n_images();
    let mut table = ScoreTable {
        relevance: Vec::with_capacity(n),
        separation: Vec::with_capacity(n),
        diversity_static: alloc::vec![f64::NAN; n],
        margin: Vec::with_capacity(n),
        mixed: None,
        singleton_classes: Vec::new(),
    };
    for i in 0..n {
        let rel = space.target_relevance(i).expect("index in range");
        let sep = space.non_target_separation(i).expect("index in range");
        table.relevance.push(rel);
        table.separation.push(sep);
        table.margin.push(rel + sep);
    }
    for class in 0..pool.n_classes() {
        let members = pool.class_members(class);
        match members.len() {
            0 => {}
            1 => table.singleton_classes.push(class),
            _ => {
                for &i in members {
                    table.diversity_static[i] =
                        space.diversity(i, members).expect("members share a class");
                }
            }
        }
    }
    table
}

/// Margin plus `lambda` times the per-class z-scored static diversity.
///
/// z-scores use the population standard deviation within each class; a class
/// whose diversity values are all equal contributes z = 0.
pub fn mixed_score(
    table: &ScoreTable,
    pool: &EmbeddingPool,
    lambda: f64,
) -> Result<Vec<f64>, ArgumentError> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(ArgumentError::NegativeLambda(lambda));
    }
    if let Some(&class) = table.singleton_classes.first() {
        return Err(ArgumentError::SingletonClass { class });
    }
    let mut mixed = table.margin.clone();
    for class in 0..pool.n_classes() {
        let members = pool.class_members(class);
        if members.is_empty() {
            continue;
        }
        let values: Vec<f64> = members.iter().map(|&i| table.diversity_static[i]).collect();
        for (&i, z) in members.iter().zip(z_scores(&values)) {
            mixed[i] += lambda * z;
        }
    }
    Ok(mixed)
}

/// Population z-scores, or all zeros when every value is equal.
pub fn z_scores(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    let first = values.first().copied().unwrap_or(0.0);
    if values.iter().all(|&v| v == first) {
        return alloc::vec![0.0; values.len()];
    }
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sd = libm::sqrt(var);
    values.iter().map(|v| (v - mean) / sd).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::min_distance;
    use crate::pool::fixtures::tiny;
    use alloc::format;
    use alloc::string::String;
    use alloc::vec;
    use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    const CLAMPED_SELF: f64 = 1.414_213_680_224_251_8e-3;

    fn norm(v: &[f64]) -> Vec<f32> {
        let n = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
        v.iter().map(|x| (x / n) as f32).collect()
    }

    fn pool(dim: usize, protos: &[&[f64]], images: &[(&[f64], u32)]) -> EmbeddingPool {
        EmbeddingPool::new(
            dim,
            (0..protos.len()).map(|c| format!("c{c}")).collect(),
            protos.iter().flat_map(|p| norm(p)).collect(),
            (0..images.len()).map(|i| format!("i{i}")).collect::<Vec<String>>(),
            images.iter().map(|(_, l)| *l).collect(),
            images.iter().flat_map(|(v, _)| norm(v)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn relevance_examples() {
        let p = pool(
            3,
            &[&[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]],
            &[
                (&[1.0, 0.0, 0.0], 0),
                (&[0.0, 1.0, 0.0], 0),
                (&[1.0, 1.0, 0.0], 0),
                (&[0.0, 0.0, 1.0], 1),
            ],
        );
        let s = SemanticSpace::new(&p);
        assert!((s.target_relevance(0).unwrap() + CLAMPED_SELF).abs() < 1e-12);
        assert!((s.target_relevance(1).unwrap() + FRAC_PI_2).abs() < 1e-12);
        assert!((s.target_relevance(2).unwrap() + FRAC_PI_4).abs() < 1e-7);
        assert!(s.target_relevance(4).is_err());
    }

    #[test]
    fn separation_examples() {
        let p = pool(
            3,
            &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[1.0, 1.0, 0.0]],
            &[
                (&[1.0, 0.0, 0.0], 0),
                (&[0.0, 1.0, 0.0], 0),
                (&[0.0, 1.0, 0.0], 1),
                (&[1.0, 1.0, 0.0], 2),
            ],
        );
        let s = SemanticSpace::new(&p);
        assert!((s.non_target_separation(0).unwrap() - FRAC_PI_4).abs() < 1e-7);
        // image 1 sits exactly on class 1's prototype
        assert!((s.non_target_separation(1).unwrap() - CLAMPED_SELF).abs() < 1e-12);

        let two = pool(2, &[&[1.0, 0.0], &[0.0, 1.0]], &[(&[1.0, 0.0], 0), (&[0.0, 1.0], 1)]);
        let s = SemanticSpace::new(&two);
        assert!((s.non_target_separation(0).unwrap() - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn diversity_examples() {
        let p = pool(
            3,
            &[&[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]],
            &[
                (&[1.0, 0.0, 0.0], 0),
                (&[0.0, 1.0, 0.0], 0),
                (&[0.0, 0.0, 1.0], 0),
                (&[1.0, 1.0, 0.0], 0),
                (&[1.0, 0.0, 0.0], 0),
                (&[0.0, 0.0, 1.0], 1),
            ],
        );
        let s = SemanticSpace::new(&p);
        for i in 0..3 {
            assert!((s.diversity(i, &[0, 1, 2]).unwrap() - FRAC_PI_2).abs() < 1e-12);
        }
        assert!((s.diversity(0, &[0, 4]).unwrap() - CLAMPED_SELF).abs() < 1e-12);
        let d = s.diversity(0, &[0, 1, 3]).unwrap();
        assert!((d - 3.0 * PI / 8.0).abs() < 1e-7, "{d}");

        assert_eq!(s.diversity(0, &[0]), Err(ArgumentError::SingletonSet));
        assert_eq!(
            s.diversity(0, &[0, 5]),
            Err(ArgumentError::MixedClasses {
                index: 5,
                expected: 0,
                found: 1
            })
        );
    }

    #[test]
    fn orthogonal_prototypes_give_known_margin() {
        let p = pool(
            3,
            &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]],
            &[
                (&[1.0, 0.0, 0.0], 0),
                (&[0.0, 1.0, 0.0], 1),
                (&[0.0, 0.0, 1.0], 2),
            ],
        );
        let t = score_pool(&SemanticSpace::new(&p));
        for m in &t.margin {
            assert!((m - (FRAC_PI_2 - CLAMPED_SELF)).abs() < 1e-12);
        }
        assert_eq!(t.singleton_classes, vec![0, 1, 2]);
        assert!(t.diversity_static.iter().all(|d| d.is_nan()));
        assert_eq!(
            mixed_score(&t, &p, 0.1),
            Err(ArgumentError::SingletonClass { class: 0 })
        );
    }

    #[test]
    fn margin_is_exact_sum() {
        let p = tiny();
        let t = score_pool(&SemanticSpace::new(&p));
        for i in 0..p.n_images() {
            assert_eq!(t.margin[i] - t.relevance[i] - t.separation[i], 0.0);
        }
        assert_eq!(min_distance(), angle_from_dot(1.0));
    }

    #[test]
    fn mixed_with_zero_lambda_is_margin() {
        let p = tiny();
        let t = score_pool(&SemanticSpace::new(&p));
        assert_eq!(mixed_score(&t, &p, 0.0).unwrap(), t.margin);
        assert_eq!(
            mixed_score(&t, &p, -0.1),
            Err(ArgumentError::NegativeLambda(-0.1))
        );
        // two-member classes have equal diversities, so z falls back to 0
        assert_eq!(mixed_score(&t, &p, 0.2).unwrap(), t.margin);
        let t = t.with_mixed(&p, 0.0).unwrap();
        assert_eq!(t.mixed.as_deref(), Some(&t.margin[..]));
    }

    #[test]
    fn z_score_examples() {
        let z = z_scores(&[0.2, 0.4, 0.6, 0.8]);
        let want = [-1.341_640_786, -0.447_213_595, 0.447_213_595, 1.341_640_786];
        for (a, b) in z.iter().zip(want) {
            assert!((a - b).abs() < 1e-9);
        }
        assert_eq!(z_scores(&[0.1, 0.1, 0.1]), vec![0.0; 3]);
    }
}
