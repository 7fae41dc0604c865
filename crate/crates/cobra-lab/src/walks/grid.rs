//! Tracked-pebble observer on the grid `[0, side]^dim`.
//!
//! The cover-time argument for grids follows one pebble of a 2-cobra
//! walk and, each round, keeps exactly one of its two clones according
//! to a selection policy. The observer simulates that selected
//! trajectory directly — per-dimension distances to a fixed target,
//! with the absolute position carried along so grid boundaries behave
//! exactly as in the graph (boundary vertices simply lack the
//! out-of-range neighbor).

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

/// The grid `[0, side]^dim`: `side + 1` coordinates per dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub dim: usize,
    pub side: u32,
}

impl GridSpec {
    pub fn new(dim: usize, side: u32) -> Result<Self, GridError> {
        if dim == 0 || side == 0 {
            return Err(GridError::InvalidParams(
                "grid needs dim >= 1 and side >= 1".into(),
            ));
        }
        Ok(GridSpec { dim, side })
    }

    fn check_point(&self, p: &[u32]) -> Result<(), GridError> {
        if p.len() != self.dim || p.iter().any(|&c| c > self.side) {
            return Err(GridError::InvalidParams(format!(
                "point {p:?} outside [0, {}]^{}",
                self.side, self.dim
            )));
        }
        Ok(())
    }
}

/// Which of the two clones the observer keeps each round.
///
/// `DimensionPriority` is the rule set used for the d-dimensional drift
/// argument: same-dimension moves keep the closer clone; for moves in
/// different dimensions a matched dimension (distance 0) is protected
/// by keeping the clone that moves elsewhere, and remaining ties are
/// uniform. `ClosestUnstick` is the rule set implicit in the
/// two-dimensional two-step analysis: keep a closer clone if one
/// exists; otherwise prefer the clone that un-matches a matched
/// dimension (it improves the next step's chance of moving closer),
/// breaking remaining ties uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionPolicy {
    DimensionPriority,
    ClosestUnstick,
}

/// Tracked pebble state: absolute position plus the fixed target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrackedGridState {
    pos: Vec<u32>,
    target: Vec<u32>,
}

impl TrackedGridState {
    pub fn new(spec: &GridSpec, pos: Vec<u32>, target: Vec<u32>) -> Result<Self, GridError> {
        spec.check_point(&pos)?;
        spec.check_point(&target)?;
        Ok(TrackedGridState { pos, target })
    }

    pub fn position(&self) -> &[u32] {
        &self.pos
    }

    /// Distance to the target in dimension `i`.
    pub fn z(&self, i: usize) -> u32 {
        self.pos[i].abs_diff(self.target[i])
    }

    /// Manhattan distance to the target.
    pub fn distance(&self) -> u64 {
        (0..self.pos.len()).map(|i| self.z(i) as u64).sum()
    }
}

/// One clone's proposed move.
#[derive(Debug, Clone, Copy)]
struct Move {
    dim: usize,
    new_coord: u32,
    closer: bool,
}

fn draw_move<R: Rng + ?Sized>(spec: &GridSpec, state: &TrackedGridState, rng: &mut R) -> Move {
    // A uniform neighbor of the current grid vertex: enumerate the
    // in-range (dimension, direction) options and pick one.
    let mut options = 0;
    for i in 0..spec.dim {
        if state.pos[i] > 0 {
            options += 1;
        }
        if state.pos[i] < spec.side {
            options += 1;
        }
    }
    debug_assert!(options > 0, "grid with side >= 1 has no isolated vertices");
    let mut pick = rng.random_range(0..options);
    for i in 0..spec.dim {
        if state.pos[i] > 0 {
            if pick == 0 {
                return make_move(state, i, state.pos[i] - 1);
            }
            pick -= 1;
        }
        if state.pos[i] < spec.side {
            if pick == 0 {
                return make_move(state, i, state.pos[i] + 1);
            }
            pick -= 1;
        }
    }
    unreachable!("pick is always within the enumerated options");
}

fn make_move(state: &TrackedGridState, dim: usize, new_coord: u32) -> Move {
    let closer = new_coord.abs_diff(state.target[dim]) < state.z(dim);
    Move {
        dim,
        new_coord,
        closer,
    }
}

/// Advances the tracked pebble by one round: draws the two clones'
/// moves, keeps one per `policy`, and applies it. Returns the signed
/// change in Manhattan distance (−1 or +1).
pub fn tracked_grid_step<R: Rng + ?Sized>(
    spec: &GridSpec,
    state: &mut TrackedGridState,
    policy: SelectionPolicy,
    rng: &mut R,
) -> i64 {
    let a = draw_move(spec, state, rng);
    let b = draw_move(spec, state, rng);
    let chosen = select(state, a, b, policy, rng);
    let before = state.distance();
    state.pos[chosen.dim] = chosen.new_coord;
    state.distance() as i64 - before as i64
}

fn select<R: Rng + ?Sized>(
    state: &TrackedGridState,
    a: Move,
    b: Move,
    policy: SelectionPolicy,
    rng: &mut R,
) -> Move {
    let coin = |rng: &mut R| if rng.random_bool(0.5) { a } else { b };
    match policy {
        SelectionPolicy::DimensionPriority => {
            if a.dim == b.dim {
                // Same dimension: the closer clone if exactly one is
                // closer; otherwise the moves have the same effect.
                match (a.closer, b.closer) {
                    (true, false) => a,
                    (false, true) => b,
                    _ => a,
                }
            } else {
                let za = state.z(a.dim);
                let zb = state.z(b.dim);
                if za == 0 && zb != 0 {
                    b // protect the matched dimension
                } else if zb == 0 && za != 0 {
                    a
                } else if za == 0 && zb == 0 {
                    coin(rng)
                } else {
                    match (a.closer, b.closer) {
                        (true, false) => a,
                        (false, true) => b,
                        _ => coin(rng),
                    }
                }
            }
        }
        SelectionPolicy::ClosestUnstick => match (a.closer, b.closer) {
            (true, false) => a,
            (false, true) => b,
            (true, true) => coin(rng),
            (false, false) => {
                // Neither clone moves closer: prefer the one that
                // un-matches a matched dimension.
                let unstick_a = state.z(a.dim) == 0;
                let unstick_b = state.z(b.dim) == 0;
                match (unstick_a, unstick_b) {
                    (true, false) => a,
                    (false, true) => b,
                    _ => coin(rng),
                }
            }
        },
    }
}

/// Net distance change over two tracked rounds (−2 ..= +2).
pub fn two_step_drift_sample<R: Rng + ?Sized>(
    spec: &GridSpec,
    start: &TrackedGridState,
    policy: SelectionPolicy,
    rng: &mut R,
) -> i64 {
    let mut state = start.clone();
    tracked_grid_step(spec, &mut state, policy, rng)
        + tracked_grid_step(spec, &mut state, policy, rng)
}

/// Runs the tracked pebble for `steps` rounds, returning the final
/// state.
pub fn run_tracked_walk<R: Rng + ?Sized>(
    spec: &GridSpec,
    start: TrackedGridState,
    policy: SelectionPolicy,
    steps: u64,
    rng: &mut R,
) -> TrackedGridState {
    let mut state = start;
    for _ in 0..steps {
        tracked_grid_step(spec, &mut state, policy, rng);
    }
    state
}

/// Equilibrium mass at distance `j` of the per-dimension biased walk
/// extracted from the tracked process: `pi_j = 2/(4d−1) · ((4d−3)/(4d−1))^j`,
/// the detailed-balance solution of the chain that steps up with
/// probability `1/2 − 1/(8d−4)` and down with `1/2 + 1/(8d−4)`,
/// reflecting at 0.
pub fn biased_dim_equilibrium(d: u32, j: u32) -> f64 {
    assert!(d >= 1, "dimension must be >= 1");
    let base = (4.0 * d as f64 - 3.0) / (4.0 * d as f64 - 1.0);
    2.0 / (4.0 * d as f64 - 1.0) * base.powi(j as i32)
}

/// One step of the single-dimension biased comparison chain on the
/// nonnegative integers: up with probability `1/2 − 1/(8d−4)`, down
/// with the complement, except at 0 where the down move is a hold.
pub fn biased_dim_chain_step<R: Rng + ?Sized>(d: u32, state: u32, rng: &mut R) -> u32 {
    debug_assert!(d >= 1);
    let up = 0.5 - 1.0 / (8.0 * d as f64 - 4.0);
    if rng.random_bool(up) {
        state + 1
    } else {
        state.saturating_sub(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Family};
    use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

    fn seeded(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// Empirical frequencies of per-step outcomes from a fixed state.
    fn step_frequencies(
        spec: &GridSpec,
        start: &TrackedGridState,
        policy: SelectionPolicy,
        watch_dim: usize,
        samples: u64,
        rng: &mut ChaCha8Rng,
    ) -> (f64, f64, f64) {
        let (mut changed, mut decreased, mut increased) = (0u64, 0u64, 0u64);
        for _ in 0..samples {
            let mut state = start.clone();
            let before = state.z(watch_dim);
            tracked_grid_step(spec, &mut state, policy, rng);
            let after = state.z(watch_dim);
            if after != before {
                changed += 1;
                if after < before {
                    decreased += 1;
                } else {
                    increased += 1;
                }
            }
        }
        (
            changed as f64 / samples as f64,
            if changed > 0 {
                decreased as f64 / changed as f64
            } else {
                0.0
            },
            increased as f64 / samples as f64,
        )
    }

    #[test]
    fn one_dimensional_interior_decreases_three_quarters() {
        // Both clones move in the only dimension; keeping the closer
        // one decreases the distance unless both move away: 1 − (1/2)².
        let spec = GridSpec::new(1, 20).unwrap();
        let start = TrackedGridState::new(&spec, vec![10], vec![5]).unwrap();
        let mut rng = seeded(3);
        let samples = 100_000;
        let mut dec = 0u64;
        for _ in 0..samples {
            let mut s = start.clone();
            if tracked_grid_step(&spec, &mut s, SelectionPolicy::DimensionPriority, &mut rng) < 0 {
                dec += 1;
            }
        }
        let p = dec as f64 / samples as f64;
        let se = (0.75 * 0.25 / samples as f64).sqrt();
        assert!((p - 0.75).abs() <= 4.0 * se, "decrease rate {p}");
    }

    #[test]
    fn interior_step_bounds_hold_one_sided() {
        // Per-dimension bounds with all distances nonzero: the watched
        // dimension changes with probability >= 1/(2d−1); conditioned
        // on changing it decreases with probability >= 1/2 + 1/(8d−4);
        // from a matched dimension it increases with probability
        // <= 2/(d+1). One-sided at three standard errors.
        let samples = 200_000u64;
        let mut rng = seeded(5);
        for d in [2usize, 3] {
            let spec = GridSpec::new(d, 40).unwrap();
            let pos: Vec<u32> = (0..d).map(|i| 20 + i as u32).collect();
            let target = vec![10u32; d];
            let start = TrackedGridState::new(&spec, pos, target.clone()).unwrap();
            let (changed, dec_given_change, _) = step_frequencies(
                &spec,
                &start,
                SelectionPolicy::DimensionPriority,
                0,
                samples,
                &mut rng,
            );
            let change_floor = 1.0 / (2.0 * d as f64 - 1.0);
            let dec_floor = 0.5 + 1.0 / (8.0 * d as f64 - 4.0);
            let se = |p: f64, n: f64| (p.max(1e-9) * (1.0 - p) / n).sqrt();
            assert!(
                changed >= change_floor - 3.0 * se(change_floor, samples as f64),
                "d={d}: change rate {changed} below {change_floor}"
            );
            assert!(
                dec_given_change >= dec_floor - 3.0 * se(dec_floor, changed * samples as f64),
                "d={d}: conditional decrease {dec_given_change} below {dec_floor}"
            );

            // Matched watched dimension, others nonzero.
            let mut pos0 = vec![10u32; d];
            pos0[1] = 25;
            let start0 = TrackedGridState::new(&spec, pos0, target).unwrap();
            let (_, _, increased) = step_frequencies(
                &spec,
                &start0,
                SelectionPolicy::DimensionPriority,
                0,
                samples,
                &mut rng,
            );
            let inc_cap = 2.0 / (d as f64 + 1.0);
            assert!(
                increased <= inc_cap + 3.0 * se(inc_cap, samples as f64),
                "d={d}: increase-from-matched rate {increased} above {inc_cap}"
            );
        }
    }

    #[test]
    fn two_step_drift_from_one_matched_state() {
        // From a state with one matched coordinate deep in the grid
        // interior, the two-step distance change under the
        // closest/unstick rule lands on the frozen case-analysis
        // values: +2 with 41/256, −2 with 49/256.
        let spec = GridSpec::new(2, 500).unwrap();
        let start =
            TrackedGridState::new(&spec, vec![250, 240], vec![250, 250]).unwrap();
        let mut rng = seeded(7);
        let samples = 200_000u64;
        let (mut up2, mut down2) = (0u64, 0u64);
        for _ in 0..samples {
            match two_step_drift_sample(&spec, &start, SelectionPolicy::ClosestUnstick, &mut rng) {
                2 => up2 += 1,
                -2 => down2 += 1,
                _ => {}
            }
        }
        let up = up2 as f64 / samples as f64;
        let down = down2 as f64 / samples as f64;
        assert!((up - 41.0 / 256.0).abs() < 0.01, "+2 rate {up}");
        assert!((down - 49.0 / 256.0).abs() < 0.01, "−2 rate {down}");
    }

    #[test]
    fn policies_differ_on_the_unmatching_tie() {
        // Dimension priority protects the matched coordinate, so the
        // +2 mass shifts from 41/256 to 61/256 while −2 stays (7/16)².
        let spec = GridSpec::new(2, 500).unwrap();
        let start =
            TrackedGridState::new(&spec, vec![250, 240], vec![250, 250]).unwrap();
        let mut rng = seeded(11);
        let samples = 200_000u64;
        let (mut up2, mut down2) = (0u64, 0u64);
        for _ in 0..samples {
            match two_step_drift_sample(&spec, &start, SelectionPolicy::DimensionPriority, &mut rng)
            {
                2 => up2 += 1,
                -2 => down2 += 1,
                _ => {}
            }
        }
        let up = up2 as f64 / samples as f64;
        let down = down2 as f64 / samples as f64;
        assert!((up - 61.0 / 256.0).abs() < 0.01, "+2 rate {up}");
        assert!((down - 49.0 / 256.0).abs() < 0.01, "−2 rate {down}");
    }

    #[test]
    fn deep_unmatched_two_step_drift() {
        // With both coordinates far from matched, each step keeps a
        // closer clone with probability 3/4, so two-step outcomes are
        // (3/4)² down and (1/4)² up under either policy.
        let spec = GridSpec::new(2, 500).unwrap();
        let start =
            TrackedGridState::new(&spec, vec![240, 260], vec![250, 250]).unwrap();
        for (policy, seed) in [
            (SelectionPolicy::DimensionPriority, 13),
            (SelectionPolicy::ClosestUnstick, 17),
        ] {
            let mut rng = seeded(seed);
            let samples = 100_000u64;
            let (mut up2, mut down2) = (0u64, 0u64);
            for _ in 0..samples {
                match two_step_drift_sample(&spec, &start, policy, &mut rng) {
                    2 => up2 += 1,
                    -2 => down2 += 1,
                    _ => {}
                }
            }
            let up = up2 as f64 / samples as f64;
            let down = down2 as f64 / samples as f64;
            assert!((up - 16.0 / 256.0).abs() < 0.01, "{policy:?} +2 rate {up}");
            assert!(
                (down - 144.0 / 256.0).abs() < 0.01,
                "{policy:?} −2 rate {down}"
            );
        }
    }

    #[test]
    fn positions_stay_inside_the_grid() {
        let spec = GridSpec::new(2, 4).unwrap();
        let mut rng = seeded(19);
        let mut state = TrackedGridState::new(&spec, vec![0, 0], vec![4, 4]).unwrap();
        for _ in 0..20_000 {
            tracked_grid_step(&spec, &mut state, SelectionPolicy::DimensionPriority, &mut rng);
            assert!(state.position().iter().all(|&c| c <= 4));
            assert!((0..2).all(|i| state.z(i) <= 4));
        }
    }

    #[test]
    fn grid_moves_match_graph_adjacency() {
        // Every move produced by the observer is an edge of the grid
        // graph family, and from an interior vertex all 2d moves occur.
        let spec = GridSpec::new(2, 2).unwrap();
        let g = generate(&Family::Grid { dim: 2, side: 2 }, 0).unwrap();
        let index = |p: &[u32]| (p[0] * 3 + p[1]) as usize;
        let mut rng = seeded(23);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..2000 {
            let state = TrackedGridState::new(&spec, vec![1, 1], vec![0, 0]).unwrap();
            let mut next = state.clone();
            tracked_grid_step(&spec, &mut next, SelectionPolicy::DimensionPriority, &mut rng);
            assert!(g.has_edge(index(state.position()), index(next.position())));
            seen.insert(next.position().to_vec());
        }
        assert_eq!(seen.len(), 4, "all interior moves should appear");
    }

    #[test]
    fn equilibrium_formula_values_and_normalization() {
        assert!((biased_dim_equilibrium(1, 0) - 2.0 / 3.0).abs() < 1e-12);
        for d in 1..=4u32 {
            let total: f64 = (0..2000).map(|j| biased_dim_equilibrium(d, j)).sum();
            assert!((total - 1.0).abs() < 1e-9, "d={d}: sum {total}");
        }
    }

    #[test]
    fn biased_chain_occupancy_matches_equilibrium() {
        // Long-run occupancy of the reflecting biased chain against the
        // closed form, within ±0.01 per level.
        let d = 2u32;
        let mut rng = seeded(29);
        let mut state = 0u32;
        for _ in 0..10_000 {
            state = biased_dim_chain_step(d, state, &mut rng);
        }
        let steps = 1_000_000u64;
        let mut counts = vec![0u64; 64];
        for _ in 0..steps {
            state = biased_dim_chain_step(d, state, &mut rng);
            if (state as usize) < counts.len() {
                counts[state as usize] += 1;
            }
        }
        for j in 0..8u32 {
            let emp = counts[j as usize] as f64 / steps as f64;
            let exact = biased_dim_equilibrium(d, j);
            assert!(
                (emp - exact).abs() < 0.01,
                "level {j}: empirical {emp} vs {exact}"
            );
        }
    }
}
