//! Error types shared by the selection engine.

use alloc::string::String;

/// A pool that breaks one of the [`EmbeddingPool`](crate::pool::EmbeddingPool) invariants.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ValidationError {
    #[error("dimension must be at least 2, got {0}")]
    DimTooSmall(usize),
    #[error("at least 2 classes are required, got {0}")]
    TooFewClasses(usize),
    #[error("{field} has {actual} entries, expected {expected}")]
    LengthMismatch {
        field: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("{field} row {row} not unit norm (norm {norm})")]
    NotUnitNorm {
        field: &'static str,
        row: usize,
        norm: f64,
    },
    #[error("label of image {row} is {label}, but there are only {n_classes} classes")]
    LabelOutOfRange {
        row: usize,
        label: usize,
        n_classes: usize,
    },
    #[error("class {class} ({name}) has no images")]
    EmptyClass { class: usize, name: String },
    #[error("duplicate image id {0:?}")]
    DuplicateImageId(String),
}

/// A byte string that is not a well-formed SASE file.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormatError {
    #[error("bad magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported version {0}")]
    UnsupportedVersion(u32),
    #[error("truncated {section}: need {expected} bytes, file has {actual} ({} short)", expected - actual)]
    Truncated {
        section: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),
    #[error("{section} entry {index} is not valid UTF-8")]
    InvalidUtf8 { section: &'static str, index: usize },
    #[error("{0} does not fit the on-disk integer width")]
    TooLarge(&'static str),
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

/// Bad arguments to a scoring, selection or subsetting call.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ArgumentError {
    #[error("vectors have different dimensions ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("non-finite vector component")]
    NonFinite,
    #[error("image index {index} out of range for a pool of {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("duplicate index {0}")]
    DuplicateIndex(usize),
    #[error("empty subset not allowed")]
    EmptySubset,
    #[error("diversity undefined for singleton set")]
    SingletonSet,
    #[error("image {index} is in class {found}, expected class {expected}")]
    MixedClasses {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("lambda must be a finite value >= 0, got {0}")]
    NegativeLambda(f64),
    #[error("class {class} has a single image, so its diversity is undefined")]
    SingletonClass { class: usize },
    #[error("ipc must be at least 1")]
    ZeroIpc,
    #[error("candidate ratio must lie in (0, 1), got {0}")]
    BadRatio(f64),
    #[error("{0}")]
    BadSpec(&'static str),
    #[error("unknown image id {0:?}")]
    UnknownImageId(String),
    #[error("selection is for {found} classes, pool has {expected}")]
    ClassCountMismatch { expected: usize, found: usize },
    #[error("cached {what} for image {index} is {cached}, recomputed {recomputed}")]
    CacheMismatch {
        what: &'static str,
        index: usize,
        cached: f64,
        recomputed: f64,
    },
}

/// Top-level error for the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Argument(#[from] ArgumentError),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
