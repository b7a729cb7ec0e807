use sas_core::baselines::select_kcenter;
use sas_core::sampler::{
    filter_candidates, select_margin_only, select_mixed, select_sas, SelectionConfig, SelectorKind,
};
use sas_core::scoring::mixed_score;
use sas_core::{score_pool, SemanticSpace};
use sas_oracle::instances::{random_pool, Limits};
use sas_oracle::{candidate_count, kcenter_class, ranked, sas_class, scores, top, Geometry};

const SMALL: Limits = Limits {
    max_classes: 4,
    max_per_class: 20,
    max_dim: 24,
};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a.is_nan() && b.is_nan()) || (a - b).abs() <= tol
}

#[test]
fn scores_match_naive_loops() {
    for seed in 0..60 {
        let pool = random_pool(seed, &SMALL);
        let table = score_pool(&SemanticSpace::new(&pool));
        let g = Geometry::of(&pool);
        let naive = scores(&g);
        for i in 0..pool.n_images() {
            assert!(close(table.relevance[i], naive.relevance[i], 1e-12));
            assert!(close(table.separation[i], naive.separation[i], 1e-12));
            assert!(close(table.diversity_static[i], naive.diversity[i], 1e-12));
            assert!(close(table.margin[i], naive.margin[i], 1e-12));
        }
        if table.singleton_classes.is_empty() {
            for lambda in [0.0, 0.05, 0.1, 0.2] {
                let fast = mixed_score(&table, &pool, lambda).unwrap();
                let slow = sas_oracle::mixed(&g, &naive, lambda);
                for (a, b) in fast.iter().zip(&slow) {
                    assert!(close(*a, *b, 1e-12), "seed {seed} lambda {lambda}");
                }
            }
        }
    }
}

#[test]
fn candidates_match_sort_oracle() {
    for seed in 0..40 {
        let pool = random_pool(seed, &SMALL);
        let space = SemanticSpace::new(&pool);
        let table = score_pool(&space);
        let g = Geometry::bitwise(&pool);
        for (ipc, ratio) in [(1, 0.3), (3, 0.5), (5, 0.8)] {
            let config = SelectionConfig {
                ipc,
                candidate_ratio: ratio,
                ..SelectionConfig::default()
            };
            let cands = filter_candidates(&space, &table, &config).unwrap();
            for (c, got) in cands.iter().enumerate() {
                let members = g.members(c);
                let k = candidate_count(members.len(), ratio, ipc);
                let want: Vec<usize> = ranked(&members, &table.margin).into_iter().take(k).collect();
                assert_eq!(got, &want);
            }
        }
    }
}

#[test]
fn two_stage_matches_replay() {
    for seed in 0..100 {
        let pool = random_pool(seed, &SMALL);
        let space = SemanticSpace::new(&pool);
        let table = score_pool(&space);
        let g = Geometry::bitwise(&pool);
        let naive = scores(&g);
        for ipc in 1..=5 {
            let config = SelectionConfig {
                ipc,
                candidate_ratio: 0.5,
                ..SelectionConfig::default()
            };
            let sel = select_sas(&space, &table, &config).unwrap();
            for (c, class) in sel.classes.iter().enumerate() {
                let members = g.members(c);
                let k = candidate_count(members.len(), 0.5, ipc);
                let cands: Vec<usize> = ranked(&members, &naive.margin).into_iter().take(k).collect();
                let replay = sas_class(&g, &naive.margin, &cands, ipc);
                assert_eq!(class.indices(), replay.kept, "seed {seed} ipc {ipc} class {c}");
                assert_eq!(class.removals.len(), replay.removals.len());
                for (r, (step, index, div)) in class.removals.iter().zip(&replay.removals) {
                    assert_eq!((r.step, r.index, r.diversity), (*step, *index, *div));
                }
            }
        }
    }
}

#[test]
fn ranking_selectors_match_oracle() {
    for seed in 0..40 {
        let pool = random_pool(seed, &SMALL);
        let space = SemanticSpace::new(&pool);
        let table = score_pool(&space);
        let g = Geometry::bitwise(&pool);
        let naive = scores(&g);
        let config = SelectionConfig::new(SelectorKind::MarginOnly, 4);
        let sel = select_margin_only(&space, &table, &config).unwrap();
        for (c, class) in sel.classes.iter().enumerate() {
            assert_eq!(class.indices(), top(&g, c, &naive.margin, 4));
        }
        if table.singleton_classes.is_empty() {
            let config = SelectionConfig {
                lambda: 0.1,
                ..SelectionConfig::new(SelectorKind::Mixed, 4)
            };
            let sel = select_mixed(&space, &table, &config).unwrap();
            let mixed = sas_oracle::mixed(&g, &naive, 0.1);
            for (c, class) in sel.classes.iter().enumerate() {
                assert_eq!(class.indices(), top(&g, c, &mixed, 4));
            }
        }
    }
}

#[test]
fn kcenter_matches_replay() {
    for seed in 0..40 {
        let pool = random_pool(seed, &SMALL);
        let space = SemanticSpace::new(&pool);
        let table = score_pool(&space);
        let g = Geometry::bitwise(&pool);
        let naive = scores(&g);
        let sel = select_kcenter(&space, &table, &SelectionConfig::new(SelectorKind::KCenter, 4))
            .unwrap();
        for (c, class) in sel.classes.iter().enumerate() {
            let (picks, _) = kcenter_class(&g, &naive.relevance, c, 4);
            assert_eq!(class.indices(), picks, "seed {seed} class {c}");
        }
    }
}
