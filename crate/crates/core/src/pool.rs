//! The embedding pool: unit image features, labels, ids and per-class text prototypes.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{ArgumentError, Error, ValidationError};

/// Accepted distance of a stored row's norm from 1.
pub const NORM_TOLERANCE: f64 = 1e-4;

/// A pool of candidate images in a shared image/text embedding space.
///
/// Immutable once built. Features and prototypes are stored row-major as f32.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingPool {
    dim: usize,
    class_names: Vec<String>,
    prototypes: Vec<f32>,
    image_ids: Vec<String>,
    labels: Vec<u32>,
    features: Vec<f32>,
    members: Vec<Vec<usize>>,
}

impl EmbeddingPool {
    /// Build a pool, checking every invariant including that each class has an image.
    pub fn new(
        dim: usize,
        class_names: Vec<String>,
        prototypes: Vec<f32>,
        image_ids: Vec<String>,
        labels: Vec<u32>,
        features: Vec<f32>,
    ) -> Result<Self, ValidationError> {
        let pool = Self::build(dim, class_names, prototypes, image_ids, labels, features)?;
        pool.check_classes_populated()?;
        Ok(pool)
    }

    fn build(
        dim: usize,
        class_names: Vec<String>,
        prototypes: Vec<f32>,
        image_ids: Vec<String>,
        labels: Vec<u32>,
        features: Vec<f32>,
    ) -> Result<Self, ValidationError> {
        if dim < 2 {
            return Err(ValidationError::DimTooSmall(dim));
        }
        let n_classes = class_names.len();
        if n_classes < 2 {
            return Err(ValidationError::TooFewClasses(n_classes));
        }
        let n_images = image_ids.len();
        check_len("prototypes", n_classes * dim, prototypes.len())?;
        check_len("labels", n_images, labels.len())?;
        check_len("features", n_images * dim, features.len())?;
        check_unit_rows("prototype", dim, &prototypes)?;
        check_unit_rows("feature", dim, &features)?;

        let mut members = alloc::vec![Vec::new(); n_classes];
        for (row, &label) in labels.iter().enumerate() {
            let label = label as usize;
            if label >= n_classes {
                return Err(ValidationError::LabelOutOfRange {
                    row,
                    label,
                    n_classes,
                });
            }
            members[label].push(row);
        }

        let mut seen = BTreeSet::new();
        for id in &image_ids {
            if !seen.insert(id.as_str()) {
                return Err(ValidationError::DuplicateImageId(id.clone()));
            }
        }

        Ok(Self {
            dim,
            class_names,
            prototypes,
            image_ids,
            labels,
            features,
            members,
        })
    }

    /// Fails if any listed class has no images.
    ///
    /// Pools built by [`EmbeddingPool::new`] or read from disk always pass; a
    /// pool produced by [`EmbeddingPool::subset`] may not.
    pub fn check_classes_populated(&self) -> Result<(), ValidationError> {
        match self.members.iter().position(Vec::is_empty) {
            Some(class) => Err(ValidationError::EmptyClass {
                class,
                name: self.class_names[class].clone(),
            }),
            None => Ok(()),
        }
    }

    /// Restrict the pool to the given images, keeping every class and prototype.
    ///
    /// Images keep the order of `indices`. Classes left without images are
    /// allowed here; such a pool cannot be written to disk.
    pub fn subset(&self, indices: &[usize]) -> Result<Self, Error> {
        if indices.is_empty() {
            return Err(ArgumentError::EmptySubset.into());
        }
        let mut seen = BTreeSet::new();
        for &i in indices {
            if i >= self.n_images() {
                return Err(ArgumentError::IndexOutOfRange {
                    index: i,
                    len: self.n_images(),
                }
                .into());
            }
            if !seen.insert(i) {
                return Err(ArgumentError::DuplicateIndex(i).into());
            }
        }
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            features.extend_from_slice(self.feature(i));
        }
        let pool = Self::build(
            self.dim,
            self.class_names.clone(),
            self.prototypes.clone(),
            indices.iter().map(|&i| self.image_ids[i].clone()).collect(),
            indices.iter().map(|&i| self.labels[i]).collect(),
            features,
        )?;
        Ok(pool)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn n_images(&self) -> usize {
        self.image_ids.len()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn image_ids(&self) -> &[String] {
        &self.image_ids
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, image: usize) -> usize {
        self.labels[image] as usize
    }

    pub fn prototypes(&self) -> &[f32] {
        &self.prototypes
    }

    pub fn features(&self) -> &[f32] {
        &self.features
    }

    pub fn prototype(&self, class: usize) -> &[f32] {
        &self.prototypes[class * self.dim..(class + 1) * self.dim]
    }

    pub fn feature(&self, image: usize) -> &[f32] {
        &self.features[image * self.dim..(image + 1) * self.dim]
    }

    /// Pool indices of a class's images, ascending.
    pub fn class_members(&self, class: usize) -> &[usize] {
        &self.members[class]
    }

    /// Number of images per class.
    pub fn class_sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    /// Pool index of an image id.
    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.image_ids.iter().position(|x| x == id)
    }
}

fn check_len(field: &'static str, expected: usize, actual: usize) -> Result<(), ValidationError> {
    if expected == actual {
        Ok(())
    } else {
        Err(ValidationError::LengthMismatch {
            field,
            expected,
            actual,
        })
    }
}

fn check_unit_rows(field: &'static str, dim: usize, flat: &[f32]) -> Result<(), ValidationError> {
    for (row, v) in flat.chunks_exact(dim).enumerate() {
        let norm = libm::sqrt(v.iter().map(|&x| f64::from(x) * f64::from(x)).sum::<f64>());
        // NaN fails this comparison too.
        if norm.is_nan() || (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(ValidationError::NotUnitNorm { field, row, norm });
        }
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use alloc::format;
    use alloc::vec;

    /// Two classes in 2-D: class 0 prototype e1, class 1 prototype e2.
    pub fn tiny() -> EmbeddingPool {
        let s = core::f32::consts::FRAC_1_SQRT_2;
        EmbeddingPool::new(
            2,
            vec!["cat".into(), "dog".into()],
            vec![1.0, 0.0, 0.0, 1.0],
            (0..4).map(|i| format!("img{i}")).collect(),
            vec![0, 0, 1, 1],
            vec![1.0, 0.0, s, s, 0.0, 1.0, -s, s],
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::tiny;
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn members_are_grouped_by_class() {
        let pool = tiny();
        assert_eq!(pool.class_members(0), &[0, 1]);
        assert_eq!(pool.class_members(1), &[2, 3]);
        assert_eq!(pool.class_sizes(), vec![2, 2]);
        assert_eq!(pool.index_of("img2"), Some(2));
    }

    #[test]
    fn rejects_non_unit_feature_row() {
        let err = EmbeddingPool::new(
            2,
            vec!["a".into(), "b".into()],
            vec![1.0, 0.0, 0.0, 1.0],
            vec!["x".into(), "y".into(), "z".into(), "w".into()],
            vec![0, 1, 0, 1],
            vec![1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.9, 0.0],
        )
        .unwrap_err();
        assert!(err.to_string().starts_with("feature row 3 not unit norm"), "{err}");
    }

    #[test]
    fn rejects_structural_violations() {
        let names = || vec!["a".to_string(), "b".to_string()];
        let protos = || vec![1.0, 0.0, 0.0, 1.0];
        assert_eq!(
            EmbeddingPool::new(1, names(), vec![1.0, 1.0], vec![], vec![], vec![]),
            Err(ValidationError::DimTooSmall(1))
        );
        assert_eq!(
            EmbeddingPool::new(2, vec!["a".into()], vec![1.0, 0.0], vec![], vec![], vec![]),
            Err(ValidationError::TooFewClasses(1))
        );
        assert!(matches!(
            EmbeddingPool::new(2, names(), protos(), vec!["x".into()], vec![2], vec![1.0, 0.0]),
            Err(ValidationError::LabelOutOfRange { row: 0, label: 2, .. })
        ));
        assert!(matches!(
            EmbeddingPool::new(2, names(), protos(), vec!["x".into()], vec![0], vec![1.0, 0.0]),
            Err(ValidationError::EmptyClass { class: 1, .. })
        ));
        assert_eq!(
            EmbeddingPool::new(
                2,
                names(),
                protos(),
                vec!["x".into(), "x".into()],
                vec![0, 1],
                vec![1.0, 0.0, 0.0, 1.0]
            ),
            Err(ValidationError::DuplicateImageId("x".into()))
        );
        assert!(matches!(
            EmbeddingPool::new(2, names(), protos(), vec!["x".into()], vec![0, 1], vec![1.0, 0.0]),
            Err(ValidationError::LengthMismatch { field: "labels", .. })
        ));
    }

    #[test]
    fn subset_of_everything_is_identity() {
        let pool = tiny();
        assert_eq!(pool.subset(&[0, 1, 2, 3]).unwrap(), pool);
    }

    #[test]
    fn subset_of_one_class_keeps_prototypes() {
        let pool = tiny();
        let sub = pool.subset(&[3, 2]).unwrap();
        assert_eq!(sub.labels(), &[1, 1]);
        assert_eq!(sub.image_ids(), &["img3".to_string(), "img2".to_string()]);
        assert_eq!(sub.prototypes(), pool.prototypes());
        assert_eq!(sub.class_names(), pool.class_names());
        assert!(sub.check_classes_populated().is_err());
    }

    #[test]
    fn subset_argument_errors() {
        let pool = tiny();
        assert_eq!(
            pool.subset(&[]).unwrap_err().to_string(),
            "empty subset not allowed"
        );
        assert_eq!(
            pool.subset(&[0, 9]),
            Err(ArgumentError::IndexOutOfRange { index: 9, len: 4 }.into())
        );
        assert_eq!(
            pool.subset(&[1, 1]),
            Err(ArgumentError::DuplicateIndex(1).into())
        );
    }
}
