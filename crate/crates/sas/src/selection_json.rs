//! Selection JSON documents and the shared configuration schema.
//!
//! ```json
//! {"config": {"ipc": 10, "ratio": 0.5, "selector": "sas", ...,"warnings": []},
//!  "classes": [{"class_name": "...",
//!               "selected": [{"image_id": "...", "margin": 1.2, "dynamic_diversity": 0.9}],
//!               "removals": [{"step": 10, "image_id": "...", "diversity": 0.1}]}]}
//! ```
//!
//! Floats are rounded to 9 significant digits; classes follow pool order.

use serde::{Deserialize, Serialize};

use sas_core::sampler::{ClassSelection, Removal, SelectedImage};
use sas_core::{Ablation, ArgumentError, EmbeddingPool, Selection, SelectionConfig};

use crate::error::{Error, Result};
use crate::num::sig9;

/// Cross-check tolerance for selections loaded from JSON: the in-memory
/// tolerance plus the rounding of 9-digit output for scores up to π.
pub const FILE_CACHE_TOLERANCE: f64 =
    sas_core::report::CACHE_TOLERANCE + 5e-9 * std::f64::consts::PI;

fn default_ratio() -> f64 {
    0.5
}

fn default_selector() -> String {
    "sas".into()
}

/// A [`SelectionConfig`] with the CLI's flag names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigDoc {
    pub ipc: usize,
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    #[serde(default = "default_selector")]
    pub selector: String,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, alias = "no-rel")]
    pub no_rel: bool,
    #[serde(default, alias = "no-sep")]
    pub no_sep: bool,
    #[serde(default, alias = "no-div")]
    pub no_div: bool,
}

impl From<&SelectionConfig> for ConfigDoc {
    fn from(c: &SelectionConfig) -> Self {
        Self {
            ipc: c.ipc,
            ratio: c.candidate_ratio,
            selector: c.selector.as_str().into(),
            lambda: c.lambda,
            seed: c.seed,
            no_rel: !c.ablation.use_rel,
            no_sep: !c.ablation.use_sep,
            no_div: !c.ablation.use_div,
        }
    }
}

impl TryFrom<&ConfigDoc> for SelectionConfig {
    type Error = ArgumentError;

    fn try_from(d: &ConfigDoc) -> Result<Self, ArgumentError> {
        let config = SelectionConfig {
            ipc: d.ipc,
            candidate_ratio: d.ratio,
            selector: d.selector.parse()?,
            lambda: d.lambda,
            seed: d.seed,
            ablation: Ablation {
                use_rel: !d.no_rel,
                use_sep: !d.no_sep,
                use_div: !d.no_div,
            },
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    #[serde(flatten)]
    pub config: ConfigDoc,
    #[serde(default)]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedDoc {
    pub image_id: String,
    pub margin: f64,
    pub dynamic_diversity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovalDoc {
    pub step: usize,
    pub image_id: String,
    pub diversity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDoc {
    pub class_name: String,
    pub selected: Vec<SelectedDoc>,
    pub removals: Vec<RemovalDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionDoc {
    pub config: ConfigEcho,
    pub classes: Vec<ClassDoc>,
}

impl SelectionDoc {
    pub fn new(pool: &EmbeddingPool, selection: &Selection) -> Self {
        let id = |i: usize| pool.image_ids()[i].clone();
        let classes = selection
            .classes
            .iter()
            .zip(pool.class_names())
            .map(|(c, name)| ClassDoc {
                class_name: name.clone(),
                selected: c
                    .selected
                    .iter()
                    .map(|s| SelectedDoc {
                        image_id: id(s.index),
                        margin: sig9(s.margin),
                        dynamic_diversity: s.dynamic_diversity.map(sig9),
                    })
                    .collect(),
                removals: c
                    .removals
                    .iter()
                    .map(|r| RemovalDoc {
                        step: r.step,
                        image_id: id(r.index),
                        diversity: sig9(r.diversity),
                    })
                    .collect(),
            })
            .collect();
        Self {
            config: ConfigEcho {
                config: ConfigDoc::from(&selection.config),
                warnings: selection.warnings.iter().map(ToString::to_string).collect(),
            },
            classes,
        }
    }

    /// Resolve image ids against `pool`.
    ///
    /// Warnings are not carried back; they are recomputed when selecting.
    pub fn to_selection(&self, pool: &EmbeddingPool) -> Result<Selection> {
        if self.classes.len() != pool.n_classes() {
            return Err(ArgumentError::ClassCountMismatch {
                expected: pool.n_classes(),
                found: self.classes.len(),
            }
            .into());
        }
        let lookup = |id: &str| {
            pool.index_of(id)
                .ok_or_else(|| ArgumentError::UnknownImageId(id.to_owned()))
        };
        let mut classes = Vec::with_capacity(self.classes.len());
        for (doc, name) in self.classes.iter().zip(pool.class_names()) {
            if &doc.class_name != name {
                return Err(Error::Schema(format!(
                    "selection lists class {:?} where the pool has {:?}",
                    doc.class_name, name
                )));
            }
            let mut selected = Vec::with_capacity(doc.selected.len());
            for s in &doc.selected {
                selected.push(SelectedImage {
                    index: lookup(&s.image_id)?,
                    margin: s.margin,
                    dynamic_diversity: s.dynamic_diversity,
                });
            }
            let mut removals = Vec::with_capacity(doc.removals.len());
            for r in &doc.removals {
                removals.push(Removal {
                    step: r.step,
                    index: lookup(&r.image_id)?,
                    diversity: r.diversity,
                });
            }
            classes.push(ClassSelection { selected, removals });
        }
        Ok(Selection {
            config: SelectionConfig::try_from(&self.config.config)?,
            classes,
            warnings: Vec::new(),
        })
    }
}

/// Pretty-printed JSON, newline-terminated.
pub fn selection_json(pool: &EmbeddingPool, selection: &Selection) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&SelectionDoc::new(pool, selection))?;
    s.push('\n');
    Ok(s)
}

pub fn parse_selection(text: &str, pool: &EmbeddingPool) -> Result<Selection> {
    let doc: SelectionDoc = serde_json::from_str(text)?;
    doc.to_selection(pool)
}
