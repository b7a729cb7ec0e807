//! Semantic-quality metrics for selections, and the sweep harness.
//!
//! Metrics are recomputed from the pool's raw features; the scores cached in a
//! [`Selection`] are only cross-checked against the fresh values.

use alloc::vec::Vec;

use crate::error::{ArgumentError, Error};
use crate::pool::EmbeddingPool;
use crate::sampler::{filter_candidates, select, Selection, SelectionConfig};
use crate::scoring::{score_pool, SemanticSpace};

/// Largest accepted gap between a cached score and its recomputation.
pub const CACHE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MarginStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl MarginStats {
    fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        Some(Self {
            mean: values.iter().sum::<f64>() / values.len() as f64,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupReport {
    /// `None` for the overall row.
    pub class: Option<usize>,
    pub n_pool: usize,
    pub n_candidates: usize,
    pub n_selected: usize,
    /// Selected images that are also stage-1 candidates under the selection's config.
    pub candidates_retained: usize,
    pub margin: Option<MarginStats>,
    /// Mean pairwise angular distance inside the selected set; `None` below two images.
    /// For the overall row, the mean over classes where it is defined.
    pub mean_pairwise_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionReport {
    pub config: SelectionConfig,
    pub classes: Vec<GroupReport>,
    pub overall: GroupReport,
    /// Largest gap seen between cached and recomputed scores.
    pub max_cache_error: f64,
}

/// Recompute metrics for `selection` and cross-check its cached scores.
///
/// `tolerance` bounds the allowed gap between cached and fresh values; use
/// [`CACHE_TOLERANCE`] for in-memory selections.
pub fn selection_report(
    pool: &EmbeddingPool,
    selection: &Selection,
    tolerance: f64,
) -> Result<SelectionReport, Error> {
    if selection.classes.len() != pool.n_classes() {
        return Err(ArgumentError::ClassCountMismatch {
            expected: pool.n_classes(),
            found: selection.classes.len(),
        }
        .into());
    }
    let space = SemanticSpace::new(pool);
    let table = score_pool(&space);
    let candidates = filter_candidates(&space, &table, &selection.config)?;

    let mut max_cache_error: f64 = 0.0;
    let mut classes = Vec::with_capacity(pool.n_classes());
    let mut all_margins = Vec::new();
    for (class, chosen) in selection.classes.iter().enumerate() {
        let picks = chosen.indices();
        for &i in &picks {
            if i >= pool.n_images() {
                return Err(ArgumentError::IndexOutOfRange {
                    index: i,
                    len: pool.n_images(),
                }
                .into());
            }
            if pool.label(i) != class {
                return Err(ArgumentError::MixedClasses {
                    index: i,
                    expected: class,
                    found: pool.label(i),
                }
                .into());
            }
        }
        for s in &chosen.selected {
            let fresh = table.margin[s.index];
            max_cache_error = max_cache_error.max(check("margin", s.index, s.margin, fresh, tolerance)?);
            let fresh = if picks.len() < 2 {
                None
            } else {
                Some(space.diversity(s.index, &picks)?)
            };
            match (s.dynamic_diversity, fresh) {
                (None, None) => {}
                (Some(cached), Some(fresh)) => {
                    max_cache_error = max_cache_error.max(check(
                        "dynamic diversity",
                        s.index,
                        cached,
                        fresh,
                        tolerance,
                    )?);
                }
                (cached, fresh) => {
                    return Err(ArgumentError::CacheMismatch {
                        what: "dynamic diversity",
                        index: s.index,
                        cached: cached.unwrap_or(f64::NAN),
                        recomputed: fresh.unwrap_or(f64::NAN),
                    }
                    .into())
                }
            }
        }

        let margins: Vec<f64> = picks.iter().map(|&i| table.margin[i]).collect();
        all_margins.extend_from_slice(&margins);
        classes.push(GroupReport {
            class: Some(class),
            n_pool: pool.class_members(class).len(),
            n_candidates: candidates[class].len(),
            n_selected: picks.len(),
            candidates_retained: picks
                .iter()
                .filter(|i| candidates[class].contains(i))
                .count(),
            margin: MarginStats::of(&margins),
            mean_pairwise_distance: mean_pairwise_distance(&space, &picks),
        });
    }

    let defined: Vec<f64> = classes
        .iter()
        .filter_map(|c| c.mean_pairwise_distance)
        .collect();
    let overall = GroupReport {
        class: None,
        n_pool: pool.n_images(),
        n_candidates: classes.iter().map(|c| c.n_candidates).sum(),
        n_selected: classes.iter().map(|c| c.n_selected).sum(),
        candidates_retained: classes.iter().map(|c| c.candidates_retained).sum(),
        margin: MarginStats::of(&all_margins),
        mean_pairwise_distance: if defined.is_empty() {
            None
        } else {
            Some(defined.iter().sum::<f64>() / defined.len() as f64)
        },
    };
    Ok(SelectionReport {
        config: selection.config,
        classes,
        overall,
        max_cache_error,
    })
}

fn check(what: &'static str, index: usize, cached: f64, recomputed: f64, tol: f64) -> Result<f64, ArgumentError> {
    let gap = (cached - recomputed).abs();
    if gap <= tol {
        Ok(gap)
    } else {
        Err(ArgumentError::CacheMismatch {
            what,
            index,
            cached,
            recomputed,
        })
    }
}

/// Mean angular distance over unordered pairs of `set`.
pub fn mean_pairwise_distance(space: &SemanticSpace<'_>, set: &[usize]) -> Option<f64> {
    if set.len() < 2 {
        return None;
    }
    let mut sum = 0.0;
    for (a, &i) in set.iter().enumerate() {
        for &j in &set[a + 1..] {
            sum += space.image_distance(i, j);
        }
    }
    let pairs = set.len() * (set.len() - 1) / 2;
    Some(sum / pairs as f64)
}

/// One configuration of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridEntry {
    pub config: SelectionConfig,
    /// Restrict each class to its first `m × ipc` images before selecting.
    pub pool_multiplier: Option<usize>,
}

impl From<SelectionConfig> for GridEntry {
    fn from(config: SelectionConfig) -> Self {
        Self {
            config,
            pool_multiplier: None,
        }
    }
}

/// Result of one grid entry, in grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub entry: GridEntry,
    pub outcome: Result<SelectionReport, Error>,
}

/// Per-class prefix of `multiplier × ipc` images, as a sub-pool.
pub fn pool_prefix(pool: &EmbeddingPool, per_class: usize) -> Result<EmbeddingPool, Error> {
    let mut keep: Vec<usize> = (0..pool.n_classes())
        .flat_map(|c| pool.class_members(c).iter().take(per_class).copied())
        .collect();
    keep.sort_unstable();
    pool.subset(&keep)
}

/// Run every grid entry independently; failures are kept in place.
pub fn sweep(pool: &EmbeddingPool, grid: &[GridEntry]) -> Vec<SweepResult> {
    grid.iter()
        .map(|entry| SweepResult {
            entry: *entry,
            outcome: run_entry(pool, entry),
        })
        .collect()
}

fn run_entry(pool: &EmbeddingPool, entry: &GridEntry) -> Result<SelectionReport, Error> {
    entry.config.validate()?;
    let sub;
    let pool = match entry.pool_multiplier {
        Some(0) => return Err(ArgumentError::BadSpec("pool multiplier must be at least 1").into()),
        Some(m) => {
            sub = pool_prefix(pool, m.saturating_mul(entry.config.ipc))?;
            &sub
        }
        None => pool,
    };
    let space = SemanticSpace::new(pool);
    let table = score_pool(&space);
    let selection = select(&space, &table, &entry.config)?;
    selection_report(pool, &selection, CACHE_TOLERANCE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{ClassSelection, SelectedImage, SelectorKind};
    use crate::synth::{generate_pool, SyntheticSpec};

    fn synthetic() -> EmbeddingPool {
        generate_pool(&SyntheticSpec {
            dim: 8,
            n_classes: 3,
            per_class: 12,
            concentration: 3.0,
            duplicate_fraction: 0.25,
            seed: 9,
        })
        .unwrap()
        .pool
    }

    #[test]
    fn whole_pool_selection_reports_pool_means() {
        let pool = synthetic();
        let space = SemanticSpace::new(&pool);
        let table = score_pool(&space);
        let config = SelectionConfig::new(SelectorKind::MarginOnly, 12);
        let sel = select(&space, &table, &config).unwrap();
        let report = selection_report(&pool, &sel, CACHE_TOLERANCE).unwrap();
        for (class, r) in report.classes.iter().enumerate() {
            let members = pool.class_members(class);
            let mean = members.iter().map(|&i| table.margin[i]).sum::<f64>() / members.len() as f64;
            assert!((r.margin.unwrap().mean - mean).abs() < 1e-12);
            assert_eq!(r.n_selected, 12);
        }
        assert_eq!(report.overall.n_selected, 36);
    }

    #[test]
    fn singleton_selection_has_undefined_diversity() {
        let pool = synthetic();
        let space = SemanticSpace::new(&pool);
        let table = score_pool(&space);
        let sel = select(&space, &table, &SelectionConfig::new(SelectorKind::Sas, 1)).unwrap();
        let report = selection_report(&pool, &sel, CACHE_TOLERANCE).unwrap();
        assert!(report.classes.iter().all(|c| c.mean_pairwise_distance.is_none()));
        assert_eq!(report.overall.mean_pairwise_distance, None);
    }

    #[test]
    fn tampered_cache_is_caught() {
        let pool = synthetic();
        let space = SemanticSpace::new(&pool);
        let table = score_pool(&space);
        let mut sel = select(&space, &table, &SelectionConfig::new(SelectorKind::Sas, 3)).unwrap();
        sel.classes[1].selected[0].margin += 1e-6;
        assert!(matches!(
            selection_report(&pool, &sel, CACHE_TOLERANCE),
            Err(Error::Argument(ArgumentError::CacheMismatch { what: "margin", .. }))
        ));
    }

    #[test]
    fn wrong_class_is_rejected() {
        let pool = synthetic();
        let space = SemanticSpace::new(&pool);
        let table = score_pool(&space);
        let mut sel = select(&space, &table, &SelectionConfig::new(SelectorKind::Sas, 2)).unwrap();
        sel.classes[0] = ClassSelection {
            selected: alloc::vec![SelectedImage {
                index: pool.class_members(2)[0],
                margin: 0.0,
                dynamic_diversity: None,
            }],
            removals: alloc::vec![],
        };
        assert!(selection_report(&pool, &sel, CACHE_TOLERANCE).is_err());
    }

    #[test]
    fn sweep_keeps_grid_order_and_failures() {
        let pool = synthetic();
        let ok = SelectionConfig::new(SelectorKind::Sas, 2);
        let grid = [
            GridEntry::from(ok),
            GridEntry::from(SelectionConfig { ipc: 0, ..ok }),
            GridEntry {
                config: ok,
                pool_multiplier: Some(3),
            },
        ];
        let rows = sweep(&pool, &grid);
        assert_eq!(rows.len(), 3);
        assert!(rows[0].outcome.is_ok());
        assert!(rows[1].outcome.is_err());
        let sub = rows[2].outcome.as_ref().unwrap();
        assert!(sub.classes.iter().all(|c| c.n_pool == 6));
        assert!(sweep(&pool, &[]).is_empty());
    }
}
