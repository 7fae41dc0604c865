//! The coalescing-branching walk engine and the simple random walk.
//!
//! A k-cobra walk maintains an active vertex set. Each round, every
//! active vertex draws `k` neighbors uniformly with replacement; the
//! next active set is the union of all draws (coalescing is implicit in
//! the union). `k = 1` is exactly the simple random walk.

pub mod grid;

use crate::graph::Graph;
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WalkError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

/// Outcome of a bounded-length run: the round count, or a timeout at
/// the cap. A timeout is data, not a failure; callers decide how to
/// aggregate it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunOutcome {
    Finished(u64),
    TimedOut,
}

impl RunOutcome {
    pub fn finished(self) -> Option<u64> {
        match self {
            RunOutcome::Finished(r) => Some(r),
            RunOutcome::TimedOut => None,
        }
    }
}

/// Default cap on simulated rounds: comfortably above every cover- and
/// hitting-time scale of interest at desk sizes (worst families are
/// cubic), so a timeout signals something genuinely pathological.
pub fn default_round_cap(n: usize) -> u64 {
    64 * (n as u64).pow(3)
}

/// The active vertex set of a cobra walk, as a fixed-width bit set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveSet {
    words: Vec<u64>,
    n: usize,
    len: usize,
    /// Round counter maintained by the engines.
    pub round: u64,
}

impl ActiveSet {
    pub fn new(n: usize) -> Self {
        ActiveSet {
            words: vec![0; n.div_ceil(64)],
            n,
            len: 0,
            round: 0,
        }
    }

    /// A set holding exactly `v`.
    pub fn single(n: usize, v: usize) -> Self {
        let mut s = ActiveSet::new(n);
        s.insert(v);
        s
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, v: usize) -> bool {
        debug_assert!(v < self.n);
        self.words[v / 64] >> (v % 64) & 1 == 1
    }

    /// Inserts `v`; returns whether it was newly added.
    pub fn insert(&mut self, v: usize) -> bool {
        debug_assert!(v < self.n);
        let word = &mut self.words[v / 64];
        let bit = 1u64 << (v % 64);
        if *word & bit == 0 {
            *word |= bit;
            self.len += 1;
            true
        } else {
            false
        }
    }

    pub fn clear(&mut self) {
        self.words.fill(0);
        self.len = 0;
    }

    /// Active vertices in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &bits)| {
            std::iter::successors(
                if bits == 0 { None } else { Some(bits) },
                |&b| {
                    let rest = b & (b - 1);
                    if rest == 0 {
                        None
                    } else {
                        Some(rest)
                    }
                },
            )
            .map(move |b| w * 64 + b.trailing_zeros() as usize)
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Folds this set into `visited`, returning how many vertices were
    /// newly covered.
    fn union_into(&self, visited: &mut ActiveSet) -> usize {
        let mut added = 0;
        for (dst, &src) in visited.words.iter_mut().zip(&self.words) {
            added += (src & !*dst).count_ones() as usize;
            *dst |= src;
        }
        visited.len += added;
        added
    }
}

/// Parameters of a cobra walk run: branching factor, start vertex, and
/// the seed of its random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CobraConfig {
    pub k: u32,
    pub start: usize,
    pub seed: u64,
}

impl CobraConfig {
    pub fn new(k: u32, start: usize, seed: u64) -> Result<Self, WalkError> {
        if k == 0 {
            return Err(WalkError::InvalidParams("branching factor k must be >= 1".into()));
        }
        Ok(CobraConfig { k, start, seed })
    }

    fn check_on(&self, g: &Graph) -> Result<(), WalkError> {
        if self.start >= g.n() {
            return Err(WalkError::InvalidParams(format!(
                "start vertex {} out of range for n = {}",
                self.start,
                g.n()
            )));
        }
        Ok(())
    }
}

/// One cobra round, writing the union of all neighbor draws into
/// `next`. This is the hot loop: no allocation.
pub fn cobra_step_into<R: Rng + ?Sized>(
    g: &Graph,
    current: &ActiveSet,
    next: &mut ActiveSet,
    k: u32,
    rng: &mut R,
) {
    debug_assert!(!current.is_empty(), "cobra step from an empty active set");
    next.clear();
    for v in current.iter() {
        let nbrs = g.neighbors(v);
        for _ in 0..k {
            let w = nbrs[rng.random_range(0..nbrs.len())] as usize;
            next.insert(w);
        }
    }
    next.round = current.round + 1;
}

/// One cobra round, allocating the next set.
pub fn cobra_step<R: Rng + ?Sized>(
    g: &Graph,
    current: &ActiveSet,
    k: u32,
    rng: &mut R,
) -> ActiveSet {
    let mut next = ActiveSet::new(current.universe());
    cobra_step_into(g, current, &mut next, k, rng);
    next
}

/// First round at which `target` is active, starting the k-cobra walk
/// from `start` (0 when they coincide).
pub fn run_cobra_hitting_rng<R: Rng + ?Sized>(
    g: &Graph,
    k: u32,
    start: usize,
    target: usize,
    cap: u64,
    rng: &mut R,
) -> RunOutcome {
    if start == target {
        return RunOutcome::Finished(0);
    }
    let mut current = ActiveSet::single(g.n(), start);
    let mut next = ActiveSet::new(g.n());
    for round in 1..=cap {
        cobra_step_into(g, &current, &mut next, k, rng);
        if next.contains(target) {
            return RunOutcome::Finished(round);
        }
        std::mem::swap(&mut current, &mut next);
    }
    RunOutcome::TimedOut
}

/// First round at which the running union of active sets covers every
/// vertex; the start vertex counts as visited at round 0.
pub fn run_cobra_cover_rng<R: Rng + ?Sized>(
    g: &Graph,
    k: u32,
    start: usize,
    cap: u64,
    rng: &mut R,
) -> RunOutcome {
    let n = g.n();
    let mut visited = ActiveSet::single(n, start);
    if visited.len() == n {
        return RunOutcome::Finished(0);
    }
    let mut current = ActiveSet::single(n, start);
    let mut next = ActiveSet::new(n);
    let mut remaining = n - 1;
    for round in 1..=cap {
        cobra_step_into(g, &current, &mut next, k, rng);
        remaining -= next.union_into(&mut visited);
        if remaining == 0 {
            return RunOutcome::Finished(round);
        }
        std::mem::swap(&mut current, &mut next);
    }
    RunOutcome::TimedOut
}

/// Seeded wrapper around [`run_cobra_hitting_rng`].
pub fn run_cobra_hitting(
    g: &Graph,
    cfg: &CobraConfig,
    target: usize,
    cap: u64,
) -> Result<RunOutcome, WalkError> {
    cfg.check_on(g)?;
    if target >= g.n() {
        return Err(WalkError::InvalidParams(format!(
            "target vertex {target} out of range for n = {}",
            g.n()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    Ok(run_cobra_hitting_rng(g, cfg.k, cfg.start, target, cap, &mut rng))
}

/// Seeded wrapper around [`run_cobra_cover_rng`].
pub fn run_cobra_cover(g: &Graph, cfg: &CobraConfig, cap: u64) -> Result<RunOutcome, WalkError> {
    cfg.check_on(g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    Ok(run_cobra_cover_rng(g, cfg.k, cfg.start, cap, &mut rng))
}

/// Single-pebble random walk hitting time (the k = 1 cobra walk, but
/// without set bookkeeping — used as the baseline engine).
pub fn run_srw_hitting_rng<R: Rng + ?Sized>(
    g: &Graph,
    start: usize,
    target: usize,
    cap: u64,
    rng: &mut R,
) -> RunOutcome {
    if start == target {
        return RunOutcome::Finished(0);
    }
    let mut pos = start;
    for round in 1..=cap {
        let nbrs = g.neighbors(pos);
        pos = nbrs[rng.random_range(0..nbrs.len())] as usize;
        if pos == target {
            return RunOutcome::Finished(round);
        }
    }
    RunOutcome::TimedOut
}

/// Single-pebble random walk cover time; the start counts at round 0.
pub fn run_srw_cover_rng<R: Rng + ?Sized>(
    g: &Graph,
    start: usize,
    cap: u64,
    rng: &mut R,
) -> RunOutcome {
    let n = g.n();
    let mut visited = vec![false; n];
    visited[start] = true;
    let mut remaining = n - 1;
    if remaining == 0 {
        return RunOutcome::Finished(0);
    }
    let mut pos = start;
    for round in 1..=cap {
        let nbrs = g.neighbors(pos);
        pos = nbrs[rng.random_range(0..nbrs.len())] as usize;
        if !std::mem::replace(&mut visited[pos], true) {
            remaining -= 1;
            if remaining == 0 {
                return RunOutcome::Finished(round);
            }
        }
    }
    RunOutcome::TimedOut
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Family};
    use crate::oracle;
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn seeded(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    proptest! {
        #[test]
        fn active_set_matches_hash_set_model(ops in prop::collection::vec((0usize..100, any::<bool>()), 0..200)) {
            let mut set = ActiveSet::new(100);
            let mut model = std::collections::HashSet::new();
            for (v, _probe) in ops {
                let newly = set.insert(v);
                prop_assert_eq!(newly, model.insert(v));
                prop_assert_eq!(set.len(), model.len());
                prop_assert!(set.contains(v));
            }
            let mut listed = set.to_vec();
            let mut expected: Vec<usize> = model.into_iter().collect();
            expected.sort_unstable();
            listed.sort_unstable();
            prop_assert_eq!(listed, expected);
        }
    }

    #[test]
    fn degree_one_start_forces_the_move() {
        // On a path, the endpoint's only neighbor always receives every
        // pebble.
        let g = generate(&Family::Path { n: 3 }, 0).unwrap();
        let mut rng = seeded(7);
        for _ in 0..200 {
            let s = ActiveSet::single(3, 0);
            let next = cobra_step(&g, &s, 2, &mut rng);
            assert_eq!(next.to_vec(), vec![1]);
            assert_eq!(next.round, 1);
        }
    }

    #[test]
    fn middle_of_path_splits_one_quarter_half_quarter() {
        // From {1} on a 3-path with two draws: {0} and {2} each 1/4,
        // {0,2} 1/2.
        let g = generate(&Family::Path { n: 3 }, 0).unwrap();
        let mut rng = seeded(11);
        let trials = 100_000;
        let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
        for _ in 0..trials {
            let s = ActiveSet::single(3, 1);
            let next = cobra_step(&g, &s, 2, &mut rng);
            *counts.entry(next.to_vec()).or_insert(0) += 1;
        }
        let freq = |key: &[usize]| counts[key] as f64 / trials as f64;
        assert!((freq(&[0]) - 0.25).abs() < 0.01);
        assert!((freq(&[2]) - 0.25).abs() < 0.01);
        assert!((freq(&[0, 2]) - 0.5).abs() < 0.01);
    }

    #[test]
    fn single_step_matches_exact_transition_distribution() {
        // Empirical one-step distribution from a two-vertex active set
        // against the exact convolution, in total variation.
        let g = generate(&Family::Cycle { n: 5 }, 0).unwrap();
        let start = ActiveSet {
            words: vec![0b01001],
            n: 5,
            len: 2,
            round: 0,
        };
        let exact: HashMap<u32, f64> = oracle::cobra_transition_distribution(&g, 0b01001, 2)
            .unwrap()
            .into_iter()
            .collect();
        let trials = 1_000_000u64;
        let mut counts: HashMap<u32, u64> = HashMap::new();
        let mut rng = seeded(13);
        let mut next = ActiveSet::new(5);
        for _ in 0..trials {
            cobra_step_into(&g, &start, &mut next, 2, &mut rng);
            let mask = next.iter().fold(0u32, |m, v| m | 1 << v);
            *counts.entry(mask).or_insert(0) += 1;
        }
        let mut tv = 0.0;
        for (&mask, &p) in &exact {
            let emp = counts.get(&mask).copied().unwrap_or(0) as f64 / trials as f64;
            tv += (emp - p).abs();
        }
        for (&mask, &c) in &counts {
            assert!(exact.contains_key(&mask), "impossible outcome {mask:#b} observed {c} times");
        }
        assert!(tv / 2.0 <= 0.01, "total variation {tv}");
    }

    #[test]
    fn active_set_never_empties_and_growth_is_bounded() {
        let g = generate(&Family::Lollipop { n: 9 }, 0).unwrap();
        let mut rng = seeded(17);
        for k in [1u32, 2, 3] {
            let mut s = ActiveSet::single(g.n(), 0);
            let mut next = ActiveSet::new(g.n());
            for _ in 0..300 {
                cobra_step_into(&g, &s, &mut next, k, &mut rng);
                assert!(!next.is_empty());
                assert!(next.len() <= k as usize * s.len());
                // Next set lies inside the neighborhood of the current set.
                for w in next.iter() {
                    assert!(
                        s.iter().any(|v| g.has_edge(v, w)),
                        "vertex {w} not adjacent to the previous active set"
                    );
                }
                std::mem::swap(&mut s, &mut next);
            }
        }
    }

    #[test]
    fn hitting_conventions() {
        let g = generate(&Family::Path { n: 5 }, 0).unwrap();
        let cfg = CobraConfig::new(2, 3, 99).unwrap();
        assert_eq!(run_cobra_hitting(&g, &cfg, 3, 100).unwrap(), RunOutcome::Finished(0));
        // A cap of 1 cannot reach the far end of the path.
        assert_eq!(run_cobra_hitting(&g, &cfg, 0, 1).unwrap(), RunOutcome::TimedOut);
        assert!(CobraConfig::new(0, 0, 0).is_err());
        assert!(run_cobra_hitting(&g, &cfg, 9, 10).is_err());
    }

    #[test]
    fn two_vertex_cover_is_always_one_round() {
        let g = generate(&Family::Complete { n: 2 }, 0).unwrap();
        let mut rng = seeded(23);
        for _ in 0..100 {
            assert_eq!(
                run_cobra_cover_rng(&g, 2, 0, 10, &mut rng),
                RunOutcome::Finished(1)
            );
        }
    }

    #[test]
    fn single_vertex_cover_is_zero() {
        let g = generate(&Family::Complete { n: 1 }, 0).unwrap();
        let mut rng = seeded(29);
        assert_eq!(run_cobra_cover_rng(&g, 2, 0, 10, &mut rng), RunOutcome::Finished(0));
    }

    #[test]
    fn two_branch_path_hitting_mean_matches_exact_chain() {
        // Mean empirical hitting time 0 -> 2 on the 3-path with k = 2
        // against the exact subset-chain value 8/3.
        let g = generate(&Family::Path { n: 3 }, 0).unwrap();
        let exact = oracle::exact_cobra_hitting(&g, 0, 2, 2).unwrap();
        let trials = 100_000u64;
        let mut rng = seeded(31);
        let mut sum = 0.0;
        let mut sq = 0.0;
        for _ in 0..trials {
            let r = run_cobra_hitting_rng(&g, 2, 0, 2, 10_000, &mut rng)
                .finished()
                .expect("cap ample for a 3-path") as f64;
            sum += r;
            sq += r * r;
        }
        let mean = sum / trials as f64;
        let sd = ((sq / trials as f64 - mean * mean).max(0.0)).sqrt();
        let se = sd / (trials as f64).sqrt();
        assert!(
            (mean - exact).abs() <= 3.0 * se,
            "mean {mean} vs exact {exact} (se {se})"
        );
    }

    #[test]
    fn triangle_cover_mean_matches_exact_chain() {
        let g = generate(&Family::Complete { n: 3 }, 0).unwrap();
        let exact = oracle::exact_cobra_cover(&g, 0, 2).unwrap();
        let trials = 100_000u64;
        let mut rng = seeded(37);
        let mut sum = 0.0;
        let mut sq = 0.0;
        for _ in 0..trials {
            let r = run_cobra_cover_rng(&g, 2, 0, 10_000, &mut rng)
                .finished()
                .unwrap() as f64;
            sum += r;
            sq += r * r;
        }
        let mean = sum / trials as f64;
        let sd = ((sq / trials as f64 - mean * mean).max(0.0)).sqrt();
        let se = sd / (trials as f64).sqrt();
        assert!(
            (mean - exact).abs() <= 3.0 * se,
            "mean {mean} vs exact {exact} (se {se})"
        );
    }

    #[test]
    fn one_branch_walk_matches_simple_random_walk_hitting() {
        // k = 1 empirical means against exact first-passage times, and
        // the baseline engine against the same, on a small pinned corpus.
        let families = [
            Family::Path { n: 4 },
            Family::Cycle { n: 5 },
            Family::Star { n: 5 },
        ];
        let trials = 4000u64;
        let mut rng = seeded(41);
        for family in families {
            let g = generate(&family, 0).unwrap();
            let chain = oracle::srw_chain(&g);
            for target in 0..g.n() {
                let mut is_target = vec![false; g.n()];
                is_target[target] = true;
                let exact = oracle::exact_hitting(&chain, &is_target).unwrap();
                for start in 0..g.n() {
                    if start == target {
                        continue;
                    }
                    let mut sum = 0.0;
                    let mut sq = 0.0;
                    for _ in 0..trials {
                        let r = run_cobra_hitting_rng(&g, 1, start, target, 1_000_000, &mut rng)
                            .finished()
                            .unwrap() as f64;
                        sum += r;
                        sq += r * r;
                    }
                    let mean = sum / trials as f64;
                    let sd = ((sq / trials as f64 - mean * mean).max(0.0)).sqrt();
                    let se = sd / (trials as f64).sqrt();
                    assert!(
                        (mean - exact[start]).abs() <= 3.5 * se,
                        "{family:?} {start}->{target}: mean {mean} vs exact {} (se {se})",
                        exact[start]
                    );
                }
            }
        }
    }

    #[test]
    fn branching_never_slows_hitting_below_single_walk() {
        // A single pebble inside the 2-cobra walk is itself a simple
        // random walk, so the cobra hitting mean cannot exceed the
        // exact single-walk value (one-sided, three standard errors).
        let g = generate(&Family::Lollipop { n: 8 }, 0).unwrap();
        let chain = oracle::srw_chain(&g);
        let trials = 3000u64;
        let mut rng = seeded(43);
        for target in 0..g.n() {
            let mut is_target = vec![false; g.n()];
            is_target[target] = true;
            let exact = oracle::exact_hitting(&chain, &is_target).unwrap();
            for start in 0..g.n() {
                if start == target {
                    continue;
                }
                let mut sum = 0.0;
                let mut sq = 0.0;
                for _ in 0..trials {
                    let r = run_cobra_hitting_rng(&g, 2, start, target, 1_000_000, &mut rng)
                        .finished()
                        .unwrap() as f64;
                    sum += r;
                    sq += r * r;
                }
                let mean = sum / trials as f64;
                let sd = ((sq / trials as f64 - mean * mean).max(0.0)).sqrt();
                let se = sd / (trials as f64).sqrt();
                assert!(
                    mean <= exact[start] + 3.0 * se,
                    "{start}->{target}: cobra mean {mean} above single-walk {} (se {se})",
                    exact[start]
                );
            }
        }
    }

    #[test]
    fn seeded_runs_reproduce() {
        let g = generate(&Family::Petersen, 0).unwrap();
        let cfg = CobraConfig::new(2, 0, 424242).unwrap();
        let a = run_cobra_cover(&g, &cfg, 10_000).unwrap();
        let b = run_cobra_cover(&g, &cfg, 10_000).unwrap();
        assert_eq!(a, b);
    }
}
