//! Two-stage semantic-aware sampling.
//!
//! Stage 1 keeps, per class, the images with the highest margin
//! (relevance + separation). Stage 2 walks those candidates strongest-first,
//! adding each to a running set and, whenever the set holds `ipc + 1` images,
//! dropping the member whose mean distance to the rest of the set is smallest.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use crate::baselines;
use crate::error::{ArgumentError, Error};
use crate::scoring::{mixed_score, ScoreTable, SemanticSpace};

/// Which selector produces a [`Selection`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SelectorKind {
    Sas,
    MarginOnly,
    Mixed,
    Random,
    KCenter,
}

impl SelectorKind {
    pub const ALL: [SelectorKind; 5] = [
        SelectorKind::Sas,
        SelectorKind::MarginOnly,
        SelectorKind::Mixed,
        SelectorKind::Random,
        SelectorKind::KCenter,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SelectorKind::Sas => "sas",
            SelectorKind::MarginOnly => "margin",
            SelectorKind::Mixed => "mixed",
            SelectorKind::Random => "random",
            SelectorKind::KCenter => "kcenter",
        }
    }
}

impl fmt::Display for SelectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SelectorKind {
    type Err = ArgumentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sas" => Ok(SelectorKind::Sas),
            "margin" | "margin_only" => Ok(SelectorKind::MarginOnly),
            "mixed" => Ok(SelectorKind::Mixed),
            "random" => Ok(SelectorKind::Random),
            "kcenter" => Ok(SelectorKind::KCenter),
            _ => Err(ArgumentError::BadSpec("unknown selector")),
        }
    }
}

/// Score components switched on for the two-stage selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ablation {
    pub use_rel: bool,
    pub use_sep: bool,
    pub use_div: bool,
}

impl Default for Ablation {
    fn default() -> Self {
        Self {
            use_rel: true,
            use_sep: true,
            use_div: true,
        }
    }
}

/// What stage 1 ranks candidates by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageOneScore {
    Margin,
    Relevance,
    Separation,
    /// No filtering: every image is a candidate, in pool order.
    Unfiltered,
}

impl Ablation {
    pub fn stage_one(self) -> StageOneScore {
        match (self.use_rel, self.use_sep) {
            (true, true) => StageOneScore::Margin,
            (true, false) => StageOneScore::Relevance,
            (false, true) => StageOneScore::Separation,
            (false, false) => StageOneScore::Unfiltered,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionConfig {
    pub ipc: usize,
    pub candidate_ratio: f64,
    pub selector: SelectorKind,
    pub lambda: f64,
    pub seed: u64,
    pub ablation: Ablation,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            ipc: 10,
            candidate_ratio: 0.5,
            selector: SelectorKind::Sas,
            lambda: 0.0,
            seed: 0,
            ablation: Ablation::default(),
        }
    }
}

impl SelectionConfig {
    pub fn new(selector: SelectorKind, ipc: usize) -> Self {
        Self {
            ipc,
            selector,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ArgumentError> {
        if self.ipc == 0 {
            return Err(ArgumentError::ZeroIpc);
        }
        if !(self.candidate_ratio > 0.0 && self.candidate_ratio < 1.0) {
            return Err(ArgumentError::BadRatio(self.candidate_ratio));
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(ArgumentError::NegativeLambda(self.lambda));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectedImage {
    pub index: usize,
    pub margin: f64,
    /// Mean distance to the other members of the final set; `None` for a singleton.
    pub dynamic_diversity: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Removal {
    /// Position in the candidate order of the insertion that triggered this removal.
    pub step: usize,
    pub index: usize,
    pub diversity: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClassSelection {
    pub selected: Vec<SelectedImage>,
    pub removals: Vec<Removal>,
}

impl ClassSelection {
    pub fn indices(&self) -> Vec<usize> {
        self.selected.iter().map(|s| s.index).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    /// The class has fewer images than the budget and was taken whole.
    ShortClass {
        class: usize,
        available: usize,
        ipc: usize,
    },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::ShortClass {
                class,
                available,
                ipc,
            } => write!(
                f,
                "class {class} has {available} images, fewer than ipc {ipc}; selected in full"
            ),
        }
    }
}

/// Final per-class subsets plus how they were reached.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub config: SelectionConfig,
    /// Indexed by class.
    pub classes: Vec<ClassSelection>,
    pub warnings: Vec<Warning>,
}

impl Selection {
    pub fn selected_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.classes
            .iter()
            .flat_map(|c| c.selected.iter().map(|s| s.index))
    }
}

/// Stage-1 ranking key for each image, or `None` when stage 1 is disabled.
pub fn stage_one_scores(table: &ScoreTable, ablation: Ablation) -> Option<&[f64]> {
    match ablation.stage_one() {
        StageOneScore::Margin => Some(&table.margin),
        StageOneScore::Relevance => Some(&table.relevance),
        StageOneScore::Separation => Some(&table.separation),
        StageOneScore::Unfiltered => None,
    }
}

/// `max(ipc, round_half_up(ratio · n))`, capped at `n`.
pub fn candidate_count(n: usize, ratio: f64, ipc: usize) -> usize {
    let kept = libm::floor(ratio * n as f64 + 0.5) as usize;
    kept.max(ipc).min(n)
}

/// Sort indices by descending score, ties by ascending index.
pub fn rank_descending(indices: &mut [usize], score: &[f64]) {
    indices.sort_by(|&a, &b| score[b].total_cmp(&score[a]).then(a.cmp(&b)));
}

/// Stage 1: per-class candidate lists in descending stage-1 score.
pub fn filter_candidates(
    space: &SemanticSpace<'_>,
    table: &ScoreTable,
    config: &SelectionConfig,
) -> Result<Vec<Vec<usize>>, ArgumentError> {
    config.validate()?;
    let pool = space.pool();
    let scores = stage_one_scores(table, config.ablation);
    Ok((0..pool.n_classes())
        .map(|class| {
            let mut members = pool.class_members(class).to_vec();
            if let Some(score) = scores {
                rank_descending(&mut members, score);
                let k = candidate_count(members.len(), config.candidate_ratio, config.ipc);
                members.truncate(k);
            }
            members
        })
        .collect())
}

/// Run the selector named in `config`.
pub fn select(
    space: &SemanticSpace<'_>,
    table: &ScoreTable,
    config: &SelectionConfig,
) -> Result<Selection, Error> {
    match config.selector {
        SelectorKind::Sas => select_sas(space, table, config),
        SelectorKind::MarginOnly => select_margin_only(space, table, config),
        SelectorKind::Mixed => select_mixed(space, table, config),
        SelectorKind::Random => baselines::select_random(space, table, config),
        SelectorKind::KCenter => baselines::select_kcenter(space, table, config),
    }
}

/// The two-stage selector, honoring the ablation flags.
///
/// With `use_div` off, stage 2 is skipped and the top `ipc` candidates are
/// kept. With every component off, this is random selection.
pub fn select_sas(
    space: &SemanticSpace<'_>,
    table: &ScoreTable,
    config: &SelectionConfig,
) -> Result<Selection, Error> {
    let ablation = config.ablation;
    if !ablation.use_rel && !ablation.use_sep && !ablation.use_div {
        let mut selection = baselines::select_random(space, table, config)?;
        selection.config = *config;
        return Ok(selection);
    }
    let candidates = filter_candidates(space, table, config)?;
    let classes = candidates
        .iter()
        .map(|cands| {
            if ablation.use_div {
                diversify(space, table, cands, config.ipc)
            } else {
                let keep = &cands[..cands.len().min(config.ipc)];
                finish_class(space, table, keep.to_vec(), Vec::new())
            }
        })
        .collect();
    Ok(assemble(space, config, classes))
}

/// Stage 2 for one class.
fn diversify(
    space: &SemanticSpace<'_>,
    table: &ScoreTable,
    candidates: &[usize],
    ipc: usize,
) -> ClassSelection {
    let k = candidates.len();
    let mut dist = alloc::vec![0.0; k * k];
    if k > ipc {
        for a in 0..k {
            for b in a + 1..k {
                let d = space.image_distance(candidates[a], candidates[b]);
                dist[a * k + b] = d;
                dist[b * k + a] = d;
            }
        }
    }

    // positions into `candidates`, in insertion order
    let mut current: Vec<usize> = Vec::with_capacity(ipc + 1);
    let mut removals = Vec::new();
    for step in 0..k {
        current.push(step);
        if current.len() <= ipc {
            continue;
        }
        let denom = (current.len() - 1) as f64;
        let mut victim: Option<(usize, f64)> = None;
        for (slot, &m) in current.iter().enumerate() {
            let sum: f64 = current
                .iter()
                .filter(|&&o| o != m)
                .map(|&o| dist[m * k + o])
                .sum();
            let div = sum / denom;
            let replace = match victim {
                None => true,
                Some((best_slot, best_div)) => {
                    let best = candidates[current[best_slot]];
                    let this = candidates[m];
                    removal_order(div, table.margin[this], this, best_div, table.margin[best], best)
                        == Ordering::Less
                }
            };
            if replace {
                victim = Some((slot, div));
            }
        }
        let (slot, diversity) = victim.expect("set is non-empty");
        let removed = current.remove(slot);
        removals.push(Removal {
            step,
            index: candidates[removed],
            diversity,
        });
    }
    let kept = current.into_iter().map(|p| candidates[p]).collect();
    finish_class(space, table, kept, removals)
}

/// Lowest diversity goes first, then lowest margin, then highest pool index.
pub fn removal_order(
    div_a: f64,
    margin_a: f64,
    index_a: usize,
    div_b: f64,
    margin_b: f64,
    index_b: usize,
) -> Ordering {
    div_a
        .total_cmp(&div_b)
        .then(margin_a.total_cmp(&margin_b))
        .then(index_b.cmp(&index_a))
}

/// Top-`ipc` per class by margin over the whole class.
pub fn select_margin_only(
    space: &SemanticSpace<'_>,
    table: &ScoreTable,
    config: &SelectionConfig,
) -> Result<Selection, Error> {
    config.validate()?;
    Ok(top_by(space, table, config, &table.margin))
}

/// Top-`ipc` per class by the mixed score over the whole class.
pub fn select_mixed(
    space: &SemanticSpace<'_>,
    table: &ScoreTable,
    config: &SelectionConfig,
) -> Result<Selection, Error> {
    config.validate()?;
    let mixed = mixed_score(table, space.pool(), config.lambda)?;
    Ok(top_by(space, table, config, &mixed))
}

fn top_by(
    space: &SemanticSpace<'_>,
    table: &ScoreTable,
    config: &SelectionConfig,
    score: &[f64],
) -> Selection {
    let pool = space.pool();
    let classes = (0..pool.n_classes())
        .map(|class| {
            let mut members = pool.class_members(class).to_vec();
            rank_descending(&mut members, score);
            members.truncate(config.ipc);
            finish_class(space, table, members, Vec::new())
        })
        .collect();
    assemble(space, config, classes)
}

/// Attach margins and final-set diversities to an ordered list of picks.
pub(crate) fn finish_class(
    space: &SemanticSpace<'_>,
    table: &ScoreTable,
    picks: Vec<usize>,
    removals: Vec<Removal>,
) -> ClassSelection {
    let selected = picks
        .iter()
        .map(|&i| SelectedImage {
            index: i,
            margin: table.margin[i],
            dynamic_diversity: set_diversity(space, i, &picks),
        })
        .collect();
    ClassSelection { selected, removals }
}

/// Mean distance from `image` to the other entries of `set`, summed in set order.
pub(crate) fn set_diversity(space: &SemanticSpace<'_>, image: usize, set: &[usize]) -> Option<f64> {
    if set.len() < 2 {
        return None;
    }
    let sum: f64 = set
        .iter()
        .filter(|&&j| j != image)
        .map(|&j| space.image_distance(image, j))
        .sum();
    Some(sum / (set.len() - 1) as f64)
}

pub(crate) fn assemble(
    space: &SemanticSpace<'_>,
    config: &SelectionConfig,
    classes: Vec<ClassSelection>,
) -> Selection {
    let warnings = space
        .pool()
        .class_sizes()
        .into_iter()
        .enumerate()
        .filter(|&(_, n)| n < config.ipc)
        .map(|(class, available)| Warning::ShortClass {
            class,
            available,
            ipc: config.ipc,
        })
        .collect();
    Selection {
        config: *config,
        classes,
        warnings,
    }
}

/// Human-readable name, used by reports.
pub fn describe(config: &SelectionConfig) -> String {
    use core::fmt::Write;
    let mut s = String::from(config.selector.as_str());
    let a = config.ablation;
    if config.selector == SelectorKind::Sas && a != Ablation::default() {
        let _ = write!(
            s,
            "[rel={},sep={},div={}]",
            a.use_rel as u8, a.use_sep as u8, a.use_div as u8
        );
    }
    if config.selector == SelectorKind::Mixed {
        let _ = write!(s, "({})", config.lambda);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pool::EmbeddingPool;
    use crate::scoring::score_pool;
    use alloc::format;
    use alloc::vec;

    fn unit(v: [f64; 2]) -> [f32; 2] {
        let n = libm::sqrt(v[0] * v[0] + v[1] * v[1]);
        [(v[0] / n) as f32, (v[1] / n) as f32]
    }

    /// Class 0 has images A, B (near-duplicate of A), C; class 1 holds one filler.
    ///
    /// Class 0's prototype sits just below A, and class 1's prototype lies on
    /// C's side of the circle, so margin(A) > margin(B) > margin(C).
    fn near_duplicate_pool() -> EmbeddingPool {
        let a = unit([1.0, 0.0]);
        let b = unit([0.9999, 0.0141]);
        let c = unit([0.0, 1.0]);
        let proto0 = unit([1.0, -0.2]);
        let proto1 = unit([-1.0, 0.3]);
        EmbeddingPool::new(
            2,
            vec!["target".into(), "other".into()],
            [proto0, proto1].concat(),
            vec!["A".into(), "B".into(), "C".into(), "D".into()],
            vec![0, 0, 0, 1],
            [a, b, c, proto1].concat(),
        )
        .unwrap()
    }

    #[test]
    fn candidate_counts() {
        assert_eq!(candidate_count(40, 0.5, 10), 20);
        assert_eq!(candidate_count(8, 0.5, 5), 5);
        assert_eq!(candidate_count(3, 0.5, 5), 3);
        assert_eq!(candidate_count(9, 0.5, 1), 5);
        assert_eq!(candidate_count(10, 0.3, 1), 3);
    }

    #[test]
    fn ties_rank_by_pool_index() {
        let mut idx = vec![3, 0, 2, 1];
        rank_descending(&mut idx, &[1.0, 2.0, 1.0, 1.0]);
        assert_eq!(idx, vec![1, 0, 2, 3]);
    }

    #[test]
    fn config_validation() {
        let ok = SelectionConfig::default();
        assert!(ok.validate().is_ok());
        assert_eq!(
            SelectionConfig { ipc: 0, ..ok }.validate(),
            Err(ArgumentError::ZeroIpc)
        );
        for r in [0.0, 1.0, f64::NAN] {
            assert!(SelectionConfig {
                candidate_ratio: r,
                ..ok
            }
            .validate()
            .is_err());
        }
        assert!(SelectionConfig { lambda: -1.0, ..ok }.validate().is_err());
    }

    #[test]
    fn selector_names_round_trip() {
        for k in SelectorKind::ALL {
            assert_eq!(k.as_str().parse::<SelectorKind>().unwrap(), k);
        }
        assert!("nope".parse::<SelectorKind>().is_err());
    }

    #[test]
    fn near_duplicate_is_removed() {
        let pool = near_duplicate_pool();
        let space = SemanticSpace::new(&pool);
        let table = score_pool(&space);
        // the construction must give margin(A) > margin(B) > margin(C)
        assert!(table.margin[0] > table.margin[1], "{:?}", table.margin);
        assert!(table.margin[1] > table.margin[2], "{:?}", table.margin);

        let config = SelectionConfig {
            ipc: 2,
            candidate_ratio: 0.99,
            ..SelectionConfig::default()
        };
        let cands = filter_candidates(&space, &table, &config).unwrap();
        assert_eq!(cands[0], vec![0, 1, 2]);

        let sel = select_sas(&space, &table, &config).unwrap();
        assert_eq!(sel.classes[0].indices(), vec![0, 2]);
        let removal = sel.classes[0].removals[0];
        assert_eq!((removal.step, removal.index), (2, 1));
        let dab = space.image_distance(0, 1);
        let expected_b = (dab + space.image_distance(1, 2)) / 2.0;
        assert_eq!(removal.diversity, expected_b);

        assert_eq!(sel.classes[1].indices(), vec![3]);
        assert_eq!(sel.classes[1].selected[0].dynamic_diversity, None);
        assert_eq!(
            sel.warnings,
            vec![Warning::ShortClass {
                class: 1,
                available: 1,
                ipc: 2
            }]
        );
    }

    #[test]
    fn few_candidates_means_no_removals() {
        let pool = near_duplicate_pool();
        let space = SemanticSpace::new(&pool);
        let table = score_pool(&space);
        let config = SelectionConfig {
            ipc: 3,
            ..SelectionConfig::default()
        };
        let sas = select_sas(&space, &table, &config).unwrap();
        assert!(sas.classes.iter().all(|c| c.removals.is_empty()));
        let margin = select_margin_only(
            &space,
            &table,
            &SelectionConfig {
                selector: SelectorKind::MarginOnly,
                ..config
            },
        )
        .unwrap();
        assert_eq!(sas.classes, margin.classes);
    }

    #[test]
    fn removal_tie_rules() {
        use Ordering::*;
        assert_eq!(removal_order(0.1, 5.0, 0, 0.2, 0.0, 1), Less);
        assert_eq!(removal_order(0.1, 1.0, 0, 0.1, 2.0, 1), Less);
        assert_eq!(removal_order(0.1, 1.0, 7, 0.1, 1.0, 3), Less);
        assert_eq!(removal_order(0.1, 1.0, 3, 0.1, 1.0, 7), Greater);
    }

    #[test]
    fn mixed_at_zero_lambda_matches_margin() {
        let s = core::f32::consts::FRAC_1_SQRT_2;
        let pool = EmbeddingPool::new(
            2,
            vec!["a".into(), "b".into()],
            vec![1.0, 0.0, 0.0, 1.0],
            (0..6).map(|i| format!("{i}")).collect(),
            vec![0, 0, 0, 1, 1, 1],
            vec![1.0, 0.0, s, s, 0.6, 0.8, 0.0, 1.0, s, s, -0.6, 0.8],
        )
        .unwrap();
        let space = SemanticSpace::new(&pool);
        let table = score_pool(&space);
        let base = SelectionConfig::new(SelectorKind::MarginOnly, 2);
        let m = select_margin_only(&space, &table, &base).unwrap();
        let x = select_mixed(
            &space,
            &table,
            &SelectionConfig {
                selector: SelectorKind::Mixed,
                ..base
            },
        )
        .unwrap();
        assert_eq!(m.classes, x.classes);
        assert_eq!(m.classes[0].indices(), vec![0, 1]);
    }
}
