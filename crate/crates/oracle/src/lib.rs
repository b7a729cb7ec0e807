//! Slow, literal reimplementations of the selection engine for tests.
//!
//! Nothing here calls into `sas-core` beyond reading raw pool fields. Every
//! distance is recomputed from scratch, sorting is done by repeated arg-max,
//! and the two-stage loop recomputes all diversities at each step.
//!
//! [`Geometry::of`] uses `f64::acos`. [`Geometry::bitwise`] uses the `libm`
//! arccosine that `sas-core` is built on, so replays can be compared bit for
//! bit even where exact real-number ties are split by last-bit rounding.

#![allow(clippy::manual_clamp, clippy::needless_range_loop)]

use sas_core::EmbeddingPool;

pub const EPS: f64 = 1e-6;

pub fn clamped_angle(a: &[f64], b: &[f64]) -> f64 {
    clamped_angle_with(f64::acos, a, b)
}

pub fn clamped_angle_with(acos: fn(f64) -> f64, a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut d = 0.0;
    for k in 0..a.len() {
        d += a[k] * b[k];
    }
    if d > 1.0 - EPS {
        d = 1.0 - EPS;
    }
    if d < -1.0 + EPS {
        d = -1.0 + EPS;
    }
    acos(d)
}

pub fn unit(v: &[f32]) -> Vec<f64> {
    let mut w = Vec::new();
    let mut s = 0.0;
    for &x in v {
        w.push(x as f64);
        s += (x as f64) * (x as f64);
    }
    let n = s.sqrt();
    for x in w.iter_mut() {
        *x /= n;
    }
    w
}

pub struct Geometry {
    pub features: Vec<Vec<f64>>,
    pub prototypes: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub n_classes: usize,
    pub acos: fn(f64) -> f64,
}

impl Geometry {
    pub fn of(pool: &EmbeddingPool) -> Self {
        Self::with_acos(pool, f64::acos)
    }

    pub fn bitwise(pool: &EmbeddingPool) -> Self {
        Self::with_acos(pool, libm::acos)
    }

    fn with_acos(pool: &EmbeddingPool, acos: fn(f64) -> f64) -> Self {
        let d = pool.dim();
        Geometry {
            features: pool.features().chunks(d).map(unit).collect(),
            prototypes: pool.prototypes().chunks(d).map(unit).collect(),
            labels: pool.labels().iter().map(|&l| l as usize).collect(),
            n_classes: pool.n_classes(),
            acos,
        }
    }

    pub fn members(&self, class: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for i in 0..self.labels.len() {
            if self.labels[i] == class {
                out.push(i);
            }
        }
        out
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.angle(&self.features[i], &self.features[j])
    }

    pub fn angle(&self, a: &[f64], b: &[f64]) -> f64 {
        clamped_angle_with(self.acos, a, b)
    }
}

pub struct Scores {
    pub relevance: Vec<f64>,
    pub separation: Vec<f64>,
    pub diversity: Vec<f64>,
    pub margin: Vec<f64>,
}

pub fn scores(g: &Geometry) -> Scores {
    let n = g.labels.len();
    let mut s = Scores {
        relevance: vec![0.0; n],
        separation: vec![0.0; n],
        diversity: vec![f64::NAN; n],
        margin: vec![0.0; n],
    };
    for i in 0..n {
        let c = g.labels[i];
        s.relevance[i] = -g.angle(&g.features[i], &g.prototypes[c]);
        let mut best = f64::INFINITY;
        for other in 0..g.n_classes {
            if other != c {
                let d = g.angle(&g.features[i], &g.prototypes[other]);
                if d < best {
                    best = d;
                }
            }
        }
        s.separation[i] = best;
        s.margin[i] = s.relevance[i] + s.separation[i];
        let same = g.members(c);
        if same.len() >= 2 {
            let mut total = 0.0;
            for &j in &same {
                if j != i {
                    total += g.dist(i, j);
                }
            }
            s.diversity[i] = total / (same.len() - 1) as f64;
        }
    }
    s
}

/// Margin plus lambda times per-class population z-score of static diversity.
pub fn mixed(g: &Geometry, s: &Scores, lambda: f64) -> Vec<f64> {
    let mut out = s.margin.clone();
    for c in 0..g.n_classes {
        let m = g.members(c);
        if m.is_empty() {
            continue;
        }
        let vals: Vec<f64> = m.iter().map(|&i| s.diversity[i]).collect();
        let all_same = vals.iter().all(|&v| v == vals[0]);
        let mut mean = 0.0;
        for v in &vals {
            mean += v;
        }
        mean /= vals.len() as f64;
        let mut var = 0.0;
        for v in &vals {
            var += (v - mean) * (v - mean);
        }
        var /= vals.len() as f64;
        for (k, &i) in m.iter().enumerate() {
            let z = if all_same { 0.0 } else { (vals[k] - mean) / var.sqrt() };
            out[i] += lambda * z;
        }
    }
    out
}

/// Descending by score, ties to the lower index, by repeated arg-max.
pub fn ranked(indices: &[usize], score: &[f64]) -> Vec<usize> {
    let mut left: Vec<usize> = indices.to_vec();
    let mut out = Vec::new();
    while !left.is_empty() {
        let mut best = 0;
        for k in 1..left.len() {
            let (a, b) = (left[k], left[best]);
            if score[a] > score[b] || (score[a] == score[b] && a < b) {
                best = k;
            }
        }
        out.push(left.remove(best));
    }
    out
}

pub fn candidate_count(n: usize, ratio: f64, ipc: usize) -> usize {
    let r = (ratio * n as f64 + 0.5).floor() as usize;
    let k = if r < ipc { ipc } else { r };
    if k > n {
        n
    } else {
        k
    }
}

pub fn top(g: &Geometry, class: usize, score: &[f64], k: usize) -> Vec<usize> {
    ranked(&g.members(class), score).into_iter().take(k).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replay {
    pub kept: Vec<usize>,
    /// (step, removed index, its diversity)
    pub removals: Vec<(usize, usize, f64)>,
}

/// Two-stage selection for one class, recomputing every diversity from scratch.
pub fn sas_class(g: &Geometry, margin: &[f64], candidates: &[usize], ipc: usize) -> Replay {
    let mut set: Vec<usize> = Vec::new();
    let mut removals = Vec::new();
    for (step, &c) in candidates.iter().enumerate() {
        set.push(c);
        if set.len() > ipc {
            let mut divs = Vec::new();
            for &m in &set {
                let mut t = 0.0;
                for &o in &set {
                    if o != m {
                        t += g.dist(m, o);
                    }
                }
                divs.push(t / (set.len() - 1) as f64);
            }
            let mut worst = 0;
            for k in 1..set.len() {
                let lower_div = divs[k] < divs[worst];
                let same_div = divs[k] == divs[worst];
                let lower_margin = margin[set[k]] < margin[set[worst]];
                let same_margin = margin[set[k]] == margin[set[worst]];
                if lower_div || (same_div && (lower_margin || (same_margin && set[k] > set[worst]))) {
                    worst = k;
                }
            }
            removals.push((step, set[worst], divs[worst]));
            set.remove(worst);
        }
    }
    Replay { kept: set, removals }
}

/// Greedy k-center for one class with min-distances recomputed at every step.
///
/// Returns the picks and, per step after the first, the chosen image's
/// min-distance together with every unchosen image's min-distance.
pub fn kcenter_class(g: &Geometry, relevance: &[f64], class: usize, ipc: usize) -> (Vec<usize>, Vec<(f64, Vec<f64>)>) {
    let members = g.members(class);
    let mut picks = Vec::new();
    let mut steps = Vec::new();
    if members.is_empty() {
        return (picks, steps);
    }
    picks.push(ranked(&members, relevance)[0]);
    while picks.len() < ipc.min(members.len()) {
        let mut best: Option<(usize, f64)> = None;
        let mut all = Vec::new();
        for &m in &members {
            if picks.contains(&m) {
                continue;
            }
            let mut nearest = f64::INFINITY;
            for &p in &picks {
                let d = g.dist(m, p);
                if d < nearest {
                    nearest = d;
                }
            }
            all.push(nearest);
            if best.is_none_or(|(_, b)| nearest > b) {
                best = Some((m, nearest));
            }
        }
        let (m, d) = best.unwrap();
        steps.push((d, all));
        picks.push(m);
    }
    (picks, steps)
}

/// For a k-center pick order within one class, each step's chosen
/// min-distance to earlier picks and the largest such value among the images
/// still unchosen at that step.
pub fn max_min_steps(g: &Geometry, class: usize, picks: &[usize]) -> Vec<(f64, f64)> {
    let members = g.members(class);
    let mut out = Vec::new();
    for t in 1..picks.len() {
        let before = &picks[..t];
        let min_to = |m: usize| {
            let mut nearest = f64::INFINITY;
            for &p in before {
                let d = g.dist(m, p);
                if d < nearest {
                    nearest = d;
                }
            }
            nearest
        };
        let mut rival = f64::NEG_INFINITY;
        for &m in &members {
            if !picks[..=t].contains(&m) {
                let d = min_to(m);
                if d > rival {
                    rival = d;
                }
            }
        }
        out.push((min_to(picks[t]), rival));
    }
    out
}

/// Random test pools with varied geometry, some exact duplicate rows and
/// occasionally uneven class sizes.
pub mod instances {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use sas_core::synth::{generate_pool, SyntheticSpec};
    use sas_core::EmbeddingPool;

    pub struct Limits {
        pub max_classes: usize,
        pub max_per_class: usize,
        pub max_dim: usize,
    }

    pub fn random_pool(seed: u64, limits: &Limits) -> EmbeddingPool {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_classes = rng.random_range(2..=limits.max_classes);
        let per_class = rng.random_range(2..=limits.max_per_class);
        let spec = SyntheticSpec {
            dim: rng.random_range(2..=limits.max_dim),
            n_classes,
            per_class,
            concentration: [0.0, 0.5, 2.0, 8.0][rng.random_range(0..4)],
            duplicate_fraction: [0.0, 0.2, 0.4][rng.random_range(0..3)],
            seed: rng.random(),
        };
        let pool = generate_pool(&spec).unwrap().pool;

        // drop a random tail from some classes so sizes differ, keeping >= 1 image
        let mut keep = Vec::new();
        for c in 0..n_classes {
            let members = pool.class_members(c);
            let n = if rng.random_bool(0.3) {
                rng.random_range(1..=members.len())
            } else {
                members.len()
            };
            keep.extend_from_slice(&members[..n]);
        }
        keep.sort_unstable();
        let pool = pool.subset(&keep).unwrap();
        if rng.random_bool(0.3) {
            with_exact_copies(&pool, &mut rng)
        } else {
            pool
        }
    }

    /// Overwrite a few rows with bit-identical copies of same-class rows.
    fn with_exact_copies(pool: &EmbeddingPool, rng: &mut ChaCha8Rng) -> EmbeddingPool {
        let d = pool.dim();
        let mut features = pool.features().to_vec();
        for c in 0..pool.n_classes() {
            let m = pool.class_members(c);
            if m.len() >= 2 && rng.random_bool(0.5) {
                let (a, b) = (m[rng.random_range(0..m.len())], m[rng.random_range(0..m.len())]);
                let row = pool.feature(a).to_vec();
                features[b * d..(b + 1) * d].copy_from_slice(&row);
            }
        }
        EmbeddingPool::new(
            d,
            pool.class_names().to_vec(),
            pool.prototypes().to_vec(),
            pool.image_ids().to_vec(),
            pool.labels().to_vec(),
            features,
        )
        .unwrap()
    }
}
