//! Semantic-aware subset selection over embedding pools.
//!
//! Given unit image embeddings and per-class text prototypes in a shared
//! embedding space, this crate scores every image for class relevance,
//! separation from other classes and intra-class diversity, and picks a
//! compact per-class subset with a filter-then-diversify procedure. Random,
//! k-center, margin-only and mixed-score selectors are provided for comparison.
//!
//! The crate is `no_std` and needs only `alloc`; file IO and the command-line
//! driver live in the `sas` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod angular;
pub mod baselines;
pub mod error;
pub mod format;
pub mod pool;
pub mod report;
pub mod sampler;
pub mod scoring;
pub mod synth;

pub use error::{ArgumentError, Error, FormatError, Result, ValidationError};
pub use pool::EmbeddingPool;
pub use sampler::{
    select, Ablation, ClassSelection, Removal, SelectedImage, Selection, SelectionConfig,
    SelectorKind, Warning,
};
pub use scoring::{score_pool, ScoreTable, SemanticSpace};
