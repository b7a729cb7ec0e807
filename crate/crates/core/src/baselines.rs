//! Comparison selectors: uniform random and greedy k-center.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::Error;
use crate::sampler::{assemble, finish_class, Selection, SelectionConfig};
use crate::scoring::{ScoreTable, SemanticSpace};

/// Generator for one class: seeded by `seed`, on stream `class`.
///
/// Each class draws from its own stream, so adding classes never changes the
/// draws of existing ones.
pub fn class_rng(seed: u64, class: usize) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(class as u64);
    rng
}

/// Uniform sample of `ipc` images per class without replacement.
///
/// Picks are listed in ascending pool order.
pub fn select_random(
    space: &SemanticSpace<'_>,
    table: &ScoreTable,
    config: &SelectionConfig,
) -> Result<Selection, Error> {
    config.validate()?;
    let pool = space.pool();
    let classes = (0..pool.n_classes())
        .map(|class| {
            let members = pool.class_members(class);
            let take = config.ipc.min(members.len());
            let mut rng = class_rng(config.seed, class);
            let mut picks: Vec<usize> = rand::seq::index::sample(&mut rng, members.len(), take)
                .into_iter()
                .map(|k| members[k])
                .collect();
            picks.sort_unstable();
            finish_class(space, table, picks, Vec::new())
        })
        .collect();
    Ok(assemble(space, config, classes))
}

/// Greedy farthest-point selection under angular distance.
///
/// Starts from the image nearest its class prototype, then repeatedly adds the
/// image whose distance to the closest already-chosen image is largest. Ties go
/// to the lower pool index. Picks are listed in the order they were chosen.
pub fn select_kcenter(
    space: &SemanticSpace<'_>,
    table: &ScoreTable,
    config: &SelectionConfig,
) -> Result<Selection, Error> {
    config.validate()?;
    let pool = space.pool();
    let classes = (0..pool.n_classes())
        .map(|class| {
            let picks = kcenter_class(space, table, pool.class_members(class), config.ipc);
            finish_class(space, table, picks, Vec::new())
        })
        .collect();
    Ok(assemble(space, config, classes))
}

fn kcenter_class(
    space: &SemanticSpace<'_>,
    table: &ScoreTable,
    members: &[usize],
    ipc: usize,
) -> Vec<usize> {
    let take = ipc.min(members.len());
    let mut picks = Vec::with_capacity(take);
    if take == 0 {
        return picks;
    }
    // members are ascending, so strict comparisons keep the lowest index on ties
    let mut first = 0;
    for (k, &i) in members.iter().enumerate() {
        if table.relevance[i] > table.relevance[members[first]] {
            first = k;
        }
    }
    let mut chosen = alloc::vec![false; members.len()];
    let mut nearest = alloc::vec![f64::INFINITY; members.len()];
    let mut last = first;
    loop {
        chosen[last] = true;
        picks.push(members[last]);
        if picks.len() == take {
            break;
        }
        let mut next: Option<usize> = None;
        for k in 0..members.len() {
            if chosen[k] {
                continue;
            }
            let d = space.image_distance(members[k], members[last]);
            if d < nearest[k] {
                nearest[k] = d;
            }
            if next.is_none_or(|n| nearest[k] > nearest[n]) {
                next = Some(k);
            }
        }
        last = next.expect("unchosen members remain");
    }
    picks
}
