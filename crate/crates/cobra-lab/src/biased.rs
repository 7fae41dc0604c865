//! Controlled-walk engines and closed-form bound calculators.
//!
//! An ε-biased walk lets a controller pick the next neighbor with
//! probability ε and moves uniformly otherwise; an inverse-degree-biased
//! walk is the special case where the bias at `x` is `1/d(x)`. The
//! Metropolis construction here produces an explicit inverse-degree
//! walk whose stationary distribution concentrates on a target set,
//! which yields computable return-time and hitting-time bounds.
//!
//! Path-weight convention: `sigma_hat(x, v)` is the best interior
//! product `prod (1 - 1/d)` over x→v paths, charging *interior*
//! vertices only (neither endpoint). Adjacent pairs therefore have
//! `sigma_hat = 1`, and the weight never degenerates on degree-1
//! endpoints, so the derived return bound `(d(v) + Σ_x σ̂(x,v)d(x))/d(v)`
//! is a valid (and on K2 tight) upper bound on the chain's exact return
//! time.

use crate::graph::paths::{departure_charged_dijkstra, neg_ln_one_minus_inv, shortest_hop_path};
use crate::graph::Graph;
use crate::oracle::{self, FiniteChain};
use crate::walks::RunOutcome;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BiasedError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("degenerate path weight: {0}")]
    DegenerateSigma(String),
    #[error("bias floor violated: {0}")]
    BiasViolation(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
}

/// Which construction produced a chain.
#[derive(Debug, Clone, PartialEq)]
pub enum ChainKind {
    EpsilonBiased { eps: f64 },
    InverseDegree { targets: Vec<usize> },
    MetropolisDerived { targets: Vec<usize> },
}

/// A finite chain supported on the graph's edges (plus, for lazy-style
/// rows, the diagonal), together with its stationary distribution.
#[derive(Debug, Clone)]
pub struct BiasedChain {
    pub matrix: Vec<Vec<f64>>,
    pub kind: ChainKind,
    pub stationary: Vec<f64>,
}

impl BiasedChain {
    pub fn n(&self) -> usize {
        self.matrix.len()
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.matrix[x][y]
    }

    /// The chain as a plain transition matrix for exact solves.
    pub fn to_finite_chain(&self) -> Result<FiniteChain, oracle::OracleError> {
        FiniteChain::from_rows(self.matrix.clone())
    }
}

/// Largest n for which dense chain construction is allowed.
pub const CHAIN_MAX_N: usize = 256;

/// Interior-only optimal path weights toward a target set:
/// `sigma[x] = min_{v in targets} max_{paths x→v} prod_interior (1-1/d)`
/// and `p[x] = max_{v} min_{paths} sum_interior 1/d` (so that
/// `e^{-p[x]} >= sigma[x]` holds pointwise). Entries at target vertices
/// are the empty-path values 1 and 0.
fn interior_weights_to_set(g: &Graph, targets: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let log_weights: Vec<f64> = (0..g.n())
        .map(|v| neg_ln_one_minus_inv(g.degree(v)))
        .collect();
    let additive_weights: Vec<f64> = (0..g.n()).map(|v| 1.0 / g.degree(v) as f64).collect();
    let mut sigma = vec![f64::INFINITY; g.n()]; // as -ln values; min sigma = max cost
    let mut p = vec![0.0f64; g.n()];
    for &v in targets {
        let log_cost = departure_charged_dijkstra(g, v, &log_weights, true);
        let add_cost = departure_charged_dijkstra(g, v, &additive_weights, true);
        for x in 0..g.n() {
            // min over targets of the product = max of the -ln cost
            sigma[x] = if sigma[x] == f64::INFINITY {
                log_cost[x]
            } else {
                sigma[x].max(log_cost[x])
            };
            p[x] = p[x].max(add_cost[x]);
        }
    }
    for &v in targets {
        sigma[v] = 0.0;
        p[v] = 0.0;
    }
    (sigma.into_iter().map(|c| (-c).exp()).collect(), p)
}

/// The Metropolis pair: `m` keeps its diagonal (stationary = `pi_m`);
/// `p` is the same chain watched only at actual moves (zero diagonal),
/// which is the inverse-degree-biased walk the bounds refer to.
#[derive(Debug, Clone)]
pub struct MetropolisController {
    pub m: BiasedChain,
    pub p: BiasedChain,
    pub pi_m: Vec<f64>,
    pub sigma_hat: Vec<f64>,
}

/// Builds the Metropolis chain whose stationary distribution weights
/// vertex `x` by `sigma_hat(x, S)·d(x)` (just `d(v)` inside `S`), then
/// verifies the induced move chain clears the inverse-degree bias floor
/// `P_{x,y} >= (1 - 1/d(x))/d(x)` for every `x ∉ S`.
pub fn build_metropolis_controller(
    g: &Graph,
    targets: &[usize],
) -> Result<MetropolisController, BiasedError> {
    let n = g.n();
    if n > CHAIN_MAX_N {
        return Err(BiasedError::TooLarge(format!(
            "dense chain construction capped at n = {CHAIN_MAX_N}, got {n}"
        )));
    }
    validate_targets(g, targets)?;
    let in_set = membership(n, targets);
    let (sigma_hat, _) = interior_weights_to_set(g, targets);
    let weights: Vec<f64> = (0..n)
        .map(|x| {
            if in_set[x] {
                g.degree(x) as f64
            } else {
                sigma_hat[x] * g.degree(x) as f64
            }
        })
        .collect();
    if let Some(x) = weights.iter().position(|&w| !(w > 0.0)) {
        return Err(BiasedError::DegenerateSigma(format!(
            "sigma_hat({x}, S)·d({x}) = {} — no usable path into the target set",
            weights[x]
        )));
    }
    let total: f64 = weights.iter().sum();
    let pi_m: Vec<f64> = weights.iter().map(|w| w / total).collect();

    let mut m_rows = vec![vec![0.0; n]; n];
    for x in 0..n {
        let dx = g.degree(x) as f64;
        let mut off_sum = 0.0;
        for &y in g.neighbors(x) {
            let y = y as usize;
            let dy = g.degree(y) as f64;
            let p = (1.0 / dx).min(pi_m[y] / (dy * pi_m[x]));
            m_rows[x][y] = p;
            off_sum += p;
        }
        m_rows[x][x] = (1.0 - off_sum).max(0.0);
    }

    let mut p_rows = vec![vec![0.0; n]; n];
    for x in 0..n {
        let hold = m_rows[x][x];
        let move_mass = 1.0 - hold;
        if move_mass <= 1e-12 {
            return Err(BiasedError::DegenerateSigma(format!(
                "vertex {x} never moves under M"
            )));
        }
        for &y in g.neighbors(x) {
            let y = y as usize;
            p_rows[x][y] = m_rows[x][y] / move_mass;
        }
    }
    for x in 0..n {
        if in_set[x] {
            continue;
        }
        let dx = g.degree(x) as f64;
        let floor = (1.0 - 1.0 / dx) / dx;
        for &y in g.neighbors(x) {
            let y = y as usize;
            if p_rows[x][y] < floor - 1e-12 {
                return Err(BiasedError::BiasViolation(format!(
                    "P({x},{y}) = {} below the floor {floor}",
                    p_rows[x][y]
                )));
            }
        }
    }

    // Stationary of the move chain: watching M only at move times
    // reweights each state by its move probability.
    let mut pi_p: Vec<f64> = (0..n).map(|x| pi_m[x] * (1.0 - m_rows[x][x])).collect();
    let z: f64 = pi_p.iter().sum();
    pi_p.iter_mut().for_each(|v| *v /= z);

    Ok(MetropolisController {
        m: BiasedChain {
            matrix: m_rows,
            kind: ChainKind::MetropolisDerived {
                targets: targets.to_vec(),
            },
            stationary: pi_m.clone(),
        },
        p: BiasedChain {
            matrix: p_rows,
            kind: ChainKind::InverseDegree {
                targets: targets.to_vec(),
            },
            stationary: pi_p,
        },
        pi_m,
        sigma_hat,
    })
}

/// An ε-biased chain for an explicit deterministic controller: from `x`
/// the walk moves to a uniform neighbor with probability 1−ε and to
/// `controller[x]` with probability ε.
pub fn epsilon_biased_chain(
    g: &Graph,
    controller: &[u32],
    eps: f64,
) -> Result<BiasedChain, BiasedError> {
    let n = g.n();
    if n > 64 {
        return Err(BiasedError::TooLarge(format!(
            "controller chains use dense stationary solves, capped at n = 64, got {n}"
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(BiasedError::InvalidParams(format!(
            "bias must lie in (0, 1), got {eps}"
        )));
    }
    if controller.len() != n {
        return Err(BiasedError::InvalidParams(
            "controller must choose one neighbor per vertex".into(),
        ));
    }
    let mut rows = vec![vec![0.0; n]; n];
    for x in 0..n {
        let choice = controller[x] as usize;
        if !g.has_edge(x, choice) {
            return Err(BiasedError::InvalidParams(format!(
                "controller sends {x} to non-neighbor {choice}"
            )));
        }
        let u = (1.0 - eps) / g.degree(x) as f64;
        for &y in g.neighbors(x) {
            rows[x][y as usize] = u;
        }
        rows[x][choice] += eps;
    }
    let chain = FiniteChain::from_rows(rows.clone())
        .map_err(|e| BiasedError::InvalidParams(e.to_string()))?;
    let stationary = oracle::exact_stationary(&chain)
        .map_err(|e| BiasedError::InvalidParams(e.to_string()))?;
    Ok(BiasedChain {
        matrix: rows,
        kind: ChainKind::EpsilonBiased { eps },
        stationary,
    })
}

/// Budget on the number of enumerated controllers (product of degrees).
pub const CONTROLLER_ENUM_BUDGET: u64 = 3_000_000;

/// Exhaustively enumerates deterministic time-independent controllers
/// (one chosen neighbor per vertex) and returns the best achievable
/// stationary mass on `targets` together with an optimal controller.
/// This is a desk-scale oracle: probabilistic controllers are out of
/// scope, which matters for none of the sizes enumerated here.
pub fn best_controller_mass(
    g: &Graph,
    targets: &[usize],
    eps: f64,
) -> Result<(f64, Vec<u32>), BiasedError> {
    validate_targets(g, targets)?;
    if g.n() > 10 {
        return Err(BiasedError::TooLarge(format!(
            "controller enumeration capped at n = 10, got {}",
            g.n()
        )));
    }
    let mut combos: u64 = 1;
    for x in 0..g.n() {
        combos = combos.saturating_mul(g.degree(x) as u64);
        if combos > CONTROLLER_ENUM_BUDGET {
            return Err(BiasedError::TooLarge(format!(
                "more than {CONTROLLER_ENUM_BUDGET} controllers to enumerate"
            )));
        }
    }
    let in_set = membership(g.n(), targets);
    let mut idx = vec![0usize; g.n()];
    let mut best_mass = -1.0;
    let mut best_controller = Vec::new();
    loop {
        let controller: Vec<u32> = (0..g.n()).map(|x| g.neighbors(x)[idx[x]]).collect();
        let chain = epsilon_biased_chain(g, &controller, eps)?;
        let mass: f64 = chain
            .stationary
            .iter()
            .enumerate()
            .filter(|(x, _)| in_set[*x])
            .map(|(_, &p)| p)
            .sum();
        if mass > best_mass {
            best_mass = mass;
            best_controller = controller;
        }
        // Mixed-radix increment over neighbor indices.
        let mut x = 0;
        loop {
            if x == g.n() {
                return Ok((best_mass, best_controller));
            }
            idx[x] += 1;
            if idx[x] < g.degree(x) {
                break;
            }
            idx[x] = 0;
            x += 1;
        }
    }
}

/// Simulates one hitting run of an explicit chain.
pub fn run_biased_walk<R: Rng + ?Sized>(
    chain: &BiasedChain,
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
        pos = sample_row(&chain.matrix[pos], rng);
        if pos == target {
            return RunOutcome::Finished(round);
        }
    }
    RunOutcome::TimedOut
}

/// Simulates one cover run of an explicit chain.
pub fn run_chain_cover_rng<R: Rng + ?Sized>(
    chain: &BiasedChain,
    start: usize,
    cap: u64,
    rng: &mut R,
) -> RunOutcome {
    let n = chain.n();
    let mut visited = vec![false; n];
    visited[start] = true;
    let mut remaining = n - 1;
    if remaining == 0 {
        return RunOutcome::Finished(0);
    }
    let mut pos = start;
    for round in 1..=cap {
        pos = sample_row(&chain.matrix[pos], rng);
        if !std::mem::replace(&mut visited[pos], true) {
            remaining -= 1;
            if remaining == 0 {
                return RunOutcome::Finished(round);
            }
        }
    }
    RunOutcome::TimedOut
}

fn sample_row<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (y, &p) in row.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = y;
            if u < acc {
                return y;
            }
        }
    }
    last_positive // guards against cumulative rounding at u ≈ 1
}

/// A named closed-form bound together with the inputs that reproduce it.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub name: &'static str,
    pub value: f64,
    pub inputs: Vec<(String, String)>,
    pub extras: Vec<(String, f64)>,
}

/// Lower bound on the stationary mass an ε-bias controller can hold on
/// `S`: `vol(S) / (vol(S) + Σ_{x∉S} β^{Δ(x,S)−1} d(x))` with `β = 1−ε`
/// and `Δ` the hop distance to `S`.
pub fn azar_bound(g: &Graph, targets: &[usize], eps: f64) -> Result<BoundReport, BiasedError> {
    validate_targets(g, targets)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(BiasedError::InvalidParams(format!(
            "bias must lie in (0, 1), got {eps}"
        )));
    }
    let beta = 1.0 - eps;
    let dist = g.bfs_distances_to_set(targets);
    let in_set = membership(g.n(), targets);
    let vol_s: f64 = targets.iter().map(|&v| g.degree(v) as f64).sum();
    let outside: f64 = (0..g.n())
        .filter(|&x| !in_set[x])
        .map(|x| beta.powi(dist[x] as i32 - 1) * g.degree(x) as f64)
        .sum();
    Ok(BoundReport {
        name: "stationary-mass-lower",
        value: vol_s / (vol_s + outside),
        inputs: vec![
            ("n".into(), g.n().to_string()),
            ("set".into(), join_usizes(targets)),
            ("eps".into(), format!("{eps}")),
        ],
        extras: vec![("vol_set".into(), vol_s)],
    })
}

/// Upper bound on the expected return time to `v` in the Metropolis
/// move chain: `(d(v) + Σ_{x≠v} σ̂(x,v)·d(x)) / d(v)`. The relaxed form
/// replaces `σ̂(x,v)` by `e^{−p(x,v)}` and is always at least as large.
pub fn inverse_bound(g: &Graph, v: usize) -> Result<BoundReport, BiasedError> {
    if v >= g.n() {
        return Err(BiasedError::InvalidParams(format!(
            "vertex {v} out of range for n = {}",
            g.n()
        )));
    }
    let (sigma, p) = interior_weights_to_set(g, &[v]);
    let dv = g.degree(v) as f64;
    let mut sigma_sum = 0.0;
    let mut exp_sum = 0.0;
    for x in 0..g.n() {
        if x == v {
            continue;
        }
        sigma_sum += sigma[x] * g.degree(x) as f64;
        exp_sum += (-p[x]).exp() * g.degree(x) as f64;
    }
    Ok(BoundReport {
        name: "return-time-upper",
        value: (dv + sigma_sum) / dv,
        inputs: vec![
            ("n".into(), g.n().to_string()),
            ("v".into(), v.to_string()),
        ],
        extras: vec![("exp_form".into(), (dv + exp_sum) / dv)],
    })
}

/// Closed-form envelopes for δ-regular graphs (δ ≥ 3):
/// `L = log_{δ−1}((n−1)(δ−2)/δ + 1)`, `β = 1 − 1/δ`,
/// `C = δ/((δ−1)β − 1)`, return time at most `1 + n^{1−1/δ}`, and the
/// hitting envelope `2δC·n^{2−1/δ}` (the reported value).
pub fn regular_bound(n: usize, delta: usize) -> Result<BoundReport, BiasedError> {
    if delta <= 2 {
        return Err(BiasedError::InvalidParams(format!(
            "the regular-graph envelope needs degree >= 3, got {delta}"
        )));
    }
    if n < 2 {
        return Err(BiasedError::InvalidParams(format!(
            "need at least 2 vertices, got {n}"
        )));
    }
    let nf = n as f64;
    let d = delta as f64;
    let l = ((nf - 1.0) * (d - 2.0) / d + 1.0).ln() / (d - 1.0).ln();
    let beta = 1.0 - 1.0 / d;
    let beta_l = beta.powf(l);
    let c = d / ((d - 1.0) * beta - 1.0);
    let return_bound = 1.0 + nf.powf(1.0 - 1.0 / d);
    let envelope = 2.0 * d * c * nf.powf(2.0 - 1.0 / d);
    Ok(BoundReport {
        name: "regular-hitting-envelope",
        value: envelope,
        inputs: vec![
            ("n".into(), n.to_string()),
            ("delta".into(), delta.to_string()),
        ],
        extras: vec![
            ("L".into(), l),
            ("beta_pow_L".into(), beta_l),
            ("n_pow_neg_inv_delta".into(), nf.powf(-1.0 / d)),
            ("return_bound".into(), return_bound),
            ("C".into(), c),
        ],
    })
}

/// Hitting-time bound along the lexicographically smallest shortest-hop
/// path `u = u_0, …, u_L = v`: `Σ_{i<L} d(u_i)·R̂(u_i)` with `R̂` the
/// per-vertex return bound. The relaxed expanded form
/// `3n + Σ_x d(x)·Σ_{i<L} e^{−p(x,u_i)}` is reported alongside.
pub fn path_sum_bound(g: &Graph, u: usize, v: usize) -> Result<BoundReport, BiasedError> {
    if u >= g.n() || v >= g.n() {
        return Err(BiasedError::InvalidParams(format!(
            "pair ({u},{v}) out of range for n = {}",
            g.n()
        )));
    }
    let inputs = |path: &[usize]| {
        vec![
            ("n".into(), g.n().to_string()),
            ("u".into(), u.to_string()),
            ("v".into(), v.to_string()),
            ("path".into(), join_usizes(path)),
        ]
    };
    if u == v {
        return Ok(BoundReport {
            name: "hitting-path-sum",
            value: 0.0,
            inputs: inputs(&[u]),
            extras: vec![("expanded_form".into(), 0.0), ("path_hops".into(), 0.0)],
        });
    }
    let path = shortest_hop_path(g, u, v);
    let mut sigma_form = 0.0;
    let mut cross = vec![0.0f64; g.n()];
    for &ui in &path[..path.len() - 1] {
        let (sigma, p) = interior_weights_to_set(g, &[ui]);
        let dui = g.degree(ui) as f64;
        let mut sum = dui;
        for x in 0..g.n() {
            if x != ui {
                sum += sigma[x] * g.degree(x) as f64;
            }
            cross[x] += (-p[x]).exp();
        }
        sigma_form += sum; // d(u_i) · R̂(u_i) with R̂ = sum / d(u_i)
    }
    let expanded = 3.0 * g.n() as f64
        + cross
            .iter()
            .enumerate()
            .map(|(x, &c)| g.degree(x) as f64 * c)
            .sum::<f64>();
    Ok(BoundReport {
        name: "hitting-path-sum",
        value: sigma_form,
        inputs: inputs(&path),
        extras: vec![
            ("expanded_form".into(), expanded),
            ("path_hops".into(), (path.len() - 1) as f64),
        ],
    })
}

/// Probability that a vertex of the given degree sends at least one of
/// its two pebbles to a fixed neighbor: `1 − (1 − 1/deg)²`, returned
/// with the biased-walk floor `1/deg + (1 − 1/deg)/deg` it dominates.
pub fn activation_probability(deg: usize) -> Result<(f64, f64), BiasedError> {
    if deg == 0 {
        return Err(BiasedError::InvalidParams("degree must be >= 1".into()));
    }
    let d = deg as f64;
    let p_star = 1.0 - (1.0 - 1.0 / d) * (1.0 - 1.0 / d);
    let floor = 1.0 / d + (1.0 - 1.0 / d) / d;
    debug_assert!(p_star >= floor - 1e-15);
    Ok((p_star, floor))
}

fn validate_targets(g: &Graph, targets: &[usize]) -> Result<(), BiasedError> {
    if targets.is_empty() {
        return Err(BiasedError::InvalidParams("target set is empty".into()));
    }
    if let Some(&v) = targets.iter().find(|&&v| v >= g.n()) {
        return Err(BiasedError::InvalidParams(format!(
            "target {v} out of range for n = {}",
            g.n()
        )));
    }
    let mut sorted = targets.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != targets.len() {
        return Err(BiasedError::InvalidParams("duplicate targets".into()));
    }
    Ok(())
}

fn membership(n: usize, targets: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &v in targets {
        m[v] = true;
    }
    m
}

fn join_usizes(vs: &[usize]) -> String {
    vs.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("-")
}
