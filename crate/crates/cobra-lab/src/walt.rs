//! The ordered-pebble coalescing process and its two-pebble observer.
//!
//! A fixed population of totally ordered pebbles moves on the graph.
//! Each (non-lazy) round, pebbles sharing a vertex are grouped: groups
//! of at most two move independently and uniformly; in larger groups
//! the two lowest-order pebbles pick destinations `u`, `w`
//! independently and uniformly, and every other pebble copies `u` or
//! `w` with a fair coin. A single global coin per round makes the
//! process lazy (all pebbles hold in place together). Because crowded
//! vertices scatter to at most two destinations, the process spreads no
//! faster than a 2-cobra walk started at the same vertices — which is
//! what makes its cover time a useful stochastic upper envelope.
//!
//! The two-pebble variant (`tensor_pair_walk`) realizes the pair chain
//! whose stationary distribution puts mass `2/(n²+n)` on co-located
//! states and `1/(n²+n)` elsewhere on any d-regular graph.

use crate::graph::Graph;
use crate::harness::mix_seed;
use crate::walks::RunOutcome;
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WaltError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("regular graph required: {0}")]
    RegularityRequired(String),
    #[error("distribution support mismatch: {0}")]
    SupportMismatch(String),
}

/// Ordered pebble positions; index is priority (lower index = lower
/// order). The pebble count never changes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PebbleConfig {
    positions: Vec<u32>,
    pub round: u64,
    pub lazy: bool,
}

impl PebbleConfig {
    pub fn new(positions: Vec<u32>, lazy: bool) -> Result<Self, WaltError> {
        if positions.is_empty() {
            return Err(WaltError::InvalidParams("at least one pebble required".into()));
        }
        Ok(PebbleConfig {
            positions,
            round: 0,
            lazy,
        })
    }

    pub fn positions(&self) -> &[u32] {
        &self.positions
    }

    pub fn pebble_count(&self) -> usize {
        self.positions.len()
    }

    fn check_on(&self, g: &Graph) -> Result<(), WaltError> {
        if let Some(&p) = self.positions.iter().find(|&&p| p as usize >= g.n()) {
            return Err(WaltError::InvalidParams(format!(
                "pebble at vertex {p} out of range for n = {}",
                g.n()
            )));
        }
        Ok(())
    }
}

/// Initial placement for a density-driven run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WaltStart {
    /// All pebbles stacked on one vertex.
    Stacked(usize),
    /// Explicit pebble positions (index = priority).
    Explicit(Vec<u32>),
}

/// Density-driven run parameters: `ceil(delta · n)` pebbles (at least
/// two) when stacked, `delta ∈ (0, 1/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaltConfig {
    pub delta: f64,
    pub start: WaltStart,
    pub seed: u64,
}

impl WaltConfig {
    pub fn new(delta: f64, start: WaltStart, seed: u64) -> Result<Self, WaltError> {
        if !(delta > 0.0 && delta <= 0.5) {
            return Err(WaltError::InvalidParams(format!(
                "pebble density delta must lie in (0, 1/2], got {delta}"
            )));
        }
        Ok(WaltConfig { delta, start, seed })
    }

    /// Materializes the initial pebbles on `g`.
    pub fn initial_pebbles(&self, g: &Graph) -> Result<Vec<u32>, WaltError> {
        match &self.start {
            WaltStart::Stacked(v) => {
                if *v >= g.n() {
                    return Err(WaltError::InvalidParams(format!(
                        "start vertex {v} out of range for n = {}",
                        g.n()
                    )));
                }
                let count = (self.delta * g.n() as f64).ceil() as usize;
                if count < 2 {
                    return Err(WaltError::InvalidParams(format!(
                        "ceil(delta·n) = {count} pebbles; the stacked process needs at least 2"
                    )));
                }
                Ok(vec![*v as u32; count])
            }
            WaltStart::Explicit(positions) => {
                if positions.is_empty() {
                    return Err(WaltError::InvalidParams("empty explicit placement".into()));
                }
                if let Some(&p) = positions.iter().find(|&&p| p as usize >= g.n()) {
                    return Err(WaltError::InvalidParams(format!(
                        "pebble at vertex {p} out of range for n = {}",
                        g.n()
                    )));
                }
                Ok(positions.clone())
            }
        }
    }
}

/// Advances the pebble population one round in place.
///
/// Groups are processed in ascending vertex order and pebbles within a
/// group in ascending index order, so a given RNG stream yields one
/// deterministic trajectory.
pub fn walt_step<R: Rng + ?Sized>(g: &Graph, p: &mut PebbleConfig, rng: &mut R) {
    debug_assert!(p.check_on(g).is_ok());
    p.round += 1;
    if p.lazy && rng.random_bool(0.5) {
        return;
    }
    // Sort pebble indices by (vertex, index) to expose co-located runs.
    let mut order: Vec<usize> = (0..p.positions.len()).collect();
    order.sort_unstable_by_key(|&i| (p.positions[i], i));
    let old = p.positions.clone();
    let mut run_start = 0;
    while run_start < order.len() {
        let vertex = old[order[run_start]];
        let mut run_end = run_start + 1;
        while run_end < order.len() && old[order[run_end]] == vertex {
            run_end += 1;
        }
        let group = &order[run_start..run_end];
        let nbrs = g.neighbors(vertex as usize);
        let draw = |rng: &mut R| nbrs[rng.random_range(0..nbrs.len())];
        if group.len() <= 2 {
            for &i in group {
                p.positions[i] = draw(rng);
            }
        } else {
            // The two lowest-order pebbles scout; the rest copy one of
            // their destinations with a fair coin.
            let u = draw(rng);
            let w = draw(rng);
            p.positions[group[0]] = u;
            p.positions[group[1]] = w;
            for &i in &group[2..] {
                p.positions[i] = if rng.random_bool(0.5) { u } else { w };
            }
        }
        run_start = run_end;
    }
}

/// First round by which every vertex has held at least one pebble
/// (initial placement counts at round 0). Non-regular graphs run with a
/// warning, as the cover envelope this process is used for is stated
/// for regular graphs.
pub fn run_walt_cover(g: &Graph, cfg: &WaltConfig, cap: u64) -> Result<RunOutcome, WaltError> {
    if g.n() == 1 {
        return Ok(RunOutcome::Finished(0));
    }
    if g.regular_degree().is_none() {
        log::warn!(
            "ordered-pebble cover on a non-regular graph (n = {}): the cover envelope is stated for regular graphs",
            g.n()
        );
    }
    let positions = cfg.initial_pebbles(g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    Ok(run_walt_cover_rng(g, positions, true, cap, &mut rng))
}

/// Core cover loop with explicit pebbles, laziness flag, and stream.
pub fn run_walt_cover_rng<R: Rng + ?Sized>(
    g: &Graph,
    positions: Vec<u32>,
    lazy: bool,
    cap: u64,
    rng: &mut R,
) -> RunOutcome {
    let n = g.n();
    let mut visited = vec![false; n];
    let mut remaining = n;
    for &v in &positions {
        if !std::mem::replace(&mut visited[v as usize], true) {
            remaining -= 1;
        }
    }
    if remaining == 0 {
        return RunOutcome::Finished(0);
    }
    let mut pebbles = PebbleConfig {
        positions,
        round: 0,
        lazy,
    };
    for round in 1..=cap {
        walt_step(g, &mut pebbles, rng);
        for &v in &pebbles.positions {
            if !std::mem::replace(&mut visited[v as usize], true) {
                remaining -= 1;
            }
        }
        if remaining == 0 {
            return RunOutcome::Finished(round);
        }
    }
    RunOutcome::TimedOut
}

/// First round at which some pebble sits on `target` (round 0 if one
/// starts there).
pub fn run_walt_hitting_rng<R: Rng + ?Sized>(
    g: &Graph,
    positions: Vec<u32>,
    lazy: bool,
    target: usize,
    cap: u64,
    rng: &mut R,
) -> RunOutcome {
    if positions.iter().any(|&v| v as usize == target) {
        return RunOutcome::Finished(0);
    }
    let mut pebbles = PebbleConfig {
        positions,
        round: 0,
        lazy,
    };
    for round in 1..=cap {
        walt_step(g, &mut pebbles, rng);
        if pebbles.positions.iter().any(|&v| v as usize == target) {
            return RunOutcome::Finished(round);
        }
    }
    RunOutcome::TimedOut
}

/// Paired cover-time samples: the 2-cobra walk from `start` versus the
/// ordered-pebble process with `ceil(n/2)` pebbles stacked at `start`
/// (its cover time stochastically dominates the cobra walk's).
pub fn dominance_trial(
    g: &Graph,
    start: usize,
    trials: u64,
    seed: u64,
    cap: u64,
) -> Result<(Vec<RunOutcome>, Vec<RunOutcome>), WaltError> {
    if start >= g.n() {
        return Err(WaltError::InvalidParams(format!(
            "start vertex {start} out of range for n = {}",
            g.n()
        )));
    }
    if g.n() == 1 {
        return Ok((
            vec![RunOutcome::Finished(0); trials as usize],
            vec![RunOutcome::Finished(0); trials as usize],
        ));
    }
    let cfg = WaltConfig::new(0.5, WaltStart::Stacked(start), seed)?;
    let pebbles = cfg.initial_pebbles(g)?;
    let mut cobra = Vec::with_capacity(trials as usize);
    let mut walt = Vec::with_capacity(trials as usize);
    for trial in 0..trials {
        let mut cobra_rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 2 * trial));
        cobra.push(crate::walks::run_cobra_cover_rng(
            g,
            2,
            start,
            cap,
            &mut cobra_rng,
        ));
        let mut walt_rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 2 * trial + 1));
        walt.push(run_walt_cover_rng(
            g,
            pebbles.clone(),
            true,
            cap,
            &mut walt_rng,
        ));
    }
    Ok((cobra, walt))
}

/// Start-state rule for the two-pebble observer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorStart {
    /// The same ordered pair every trial.
    Fixed(usize, usize),
    /// Drawn per trial from the pair chain's stationary distribution
    /// (mass 2/(n²+n) on each co-located state, 1/(n²+n) elsewhere):
    /// the occupancy after any number of steps must then still match
    /// it, which checks every transition rule without depending on
    /// mixing — the pair chain is not even irreducible on bipartite
    /// graphs, where the pebbles' side-parity never changes.
    Stationary,
}

/// Empirical pair-occupancy of the two-pebble walk at a fixed time.
#[derive(Debug, Clone)]
pub struct TensorOccupancy {
    /// Probability the pebbles were co-located at observation time.
    pub diag_mass: f64,
    /// Distribution over ordered pairs, indexed `a * n + b`; sums to 1.
    pub per_state: Vec<f64>,
    pub steps: u64,
    pub trials: u64,
}

/// One non-lazy move of the ordered pebble pair `(i, j)`: co-located
/// pebbles use the copy rule (j copies i's destination with a fair
/// coin, else moves uniformly); separated pebbles move independently.
pub fn tensor_pair_step<R: Rng + ?Sized>(
    g: &Graph,
    pair: (usize, usize),
    rng: &mut R,
) -> (usize, usize) {
    let (a, b) = pair;
    let nbrs_a = g.neighbors(a);
    let next_a = nbrs_a[rng.random_range(0..nbrs_a.len())] as usize;
    let next_b = if a == b {
        if rng.random_bool(0.5) {
            next_a
        } else {
            nbrs_a[rng.random_range(0..nbrs_a.len())] as usize
        }
    } else {
        let nbrs_b = g.neighbors(b);
        nbrs_b[rng.random_range(0..nbrs_b.len())] as usize
    };
    (next_a, next_b)
}

/// Runs the lazy two-pebble walk for `s` rounds per trial and records
/// where the pair sits at time `s`.
pub fn tensor_pair_walk(
    g: &Graph,
    s: u64,
    trials: u64,
    seed: u64,
    start: TensorStart,
) -> Result<TensorOccupancy, WaltError> {
    let n = g.n();
    g.regular_degree().ok_or_else(|| {
        WaltError::RegularityRequired("two-pebble pair walk needs a regular graph".into())
    })?;
    if trials == 0 {
        return Err(WaltError::InvalidParams("trials must be >= 1".into()));
    }
    if let TensorStart::Fixed(a, b) = start {
        if a >= n || b >= n {
            return Err(WaltError::InvalidParams(format!(
                "start pair ({a}, {b}) out of range for n = {n}"
            )));
        }
    }
    let mut counts = vec![0u64; n * n];
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, trial));
        let mut pair = match start {
            TensorStart::Fixed(a, b) => (a, b),
            TensorStart::Stationary => draw_stationary_pair(n, &mut rng),
        };
        for _ in 0..s {
            if rng.random_bool(0.5) {
                continue; // global lazy coin: both pebbles hold
            }
            pair = tensor_pair_step(g, pair, &mut rng);
        }
        counts[pair.0 * n + pair.1] += 1;
    }
    let per_state: Vec<f64> = counts.iter().map(|&c| c as f64 / trials as f64).collect();
    let diag_mass = (0..n).map(|v| per_state[v * n + v]).sum();
    Ok(TensorOccupancy {
        diag_mass,
        per_state,
        steps: s,
        trials,
    })
}

/// Samples an ordered pair from the Eulerian stationary distribution:
/// co-located with total mass 2n/(n²+n) = 2/(n+1), else a uniform
/// ordered pair of distinct vertices.
fn draw_stationary_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    if rng.random_bool(2.0 / (n as f64 + 1.0)) {
        let v = rng.random_range(0..n);
        (v, v)
    } else {
        loop {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a != b {
                return (a, b);
            }
        }
    }
}

/// Rounds after which the pair chain's occupancy is treated as settled
/// in the conductance argument:
/// `ceil(32 d⁴ / phi² · (ln(n² + n) + 4 ln(n²)))`.
pub fn epoch_length(phi: f64, d: u32, n: usize) -> Result<u64, WaltError> {
    if !(phi > 0.0 && phi <= 1.0) {
        return Err(WaltError::InvalidParams(format!(
            "conductance must lie in (0, 1], got {phi}"
        )));
    }
    if d < 1 || n < 2 {
        return Err(WaltError::InvalidParams(format!(
            "need degree >= 1 and n >= 2, got d = {d}, n = {n}"
        )));
    }
    let n = n as f64;
    let lead = 32.0 * (d as f64).powi(4) / (phi * phi);
    let logs = (n * n + n).ln() + 4.0 * (n * n).ln();
    Ok((lead * logs).ceil() as u64)
}

/// Chi-square distance `Σ_x (p̂(x) − π(x))² / π(x)` between an
/// empirical distribution and a strictly positive reference.
pub fn chi_square_distance(empirical: &[f64], pi: &[f64]) -> Result<f64, WaltError> {
    if empirical.len() != pi.len() {
        return Err(WaltError::SupportMismatch(format!(
            "lengths differ: {} vs {}",
            empirical.len(),
            pi.len()
        )));
    }
    if let Some(i) = pi.iter().position(|&p| p <= 0.0) {
        return Err(WaltError::SupportMismatch(format!(
            "reference distribution not strictly positive at index {i}"
        )));
    }
    Ok(empirical
        .iter()
        .zip(pi)
        .map(|(&e, &p)| (e - p) * (e - p) / p)
        .sum())
}

/// The Eulerian stationary distribution of the pair chain on a regular
/// n-vertex graph, indexed `a * n + b`.
pub fn eulerian_pair_stationary(n: usize) -> Vec<f64> {
    let denom = (n * n + n) as f64;
    (0..n * n)
        .map(|s| {
            if s / n == s % n {
                2.0 / denom
            } else {
                1.0 / denom
            }
        })
        .collect()
}
