//! Exact finite-chain computations used as ground truth in tests.
//!
//! Small graphs admit exact answers: the cobra walk's active set is a
//! Markov chain on subset masks, so hitting and cover times come from
//! dense linear solves rather than simulation. Everything here is
//! double-precision Gaussian elimination on explicitly built chains —
//! deliberately independent from the simulation engines it validates.

use crate::graph::Graph;
use std::collections::HashMap;
use thiserror::Error;

/// Errors from exact chain construction and linear solves.
#[derive(Debug, Error)]
pub enum OracleError {
    /// The requested state space exceeds the dense-solve budget.
    #[error("state space too large: {0}")]
    TooLarge(String),
    /// Some non-target state cannot reach a target, so hitting times
    /// would be infinite.
    #[error("target unreachable from state {state}")]
    Unreachable { state: usize },
    /// The chain is not irreducible, so no unique stationary
    /// distribution exists.
    #[error("chain is reducible")]
    Reducible,
    /// Rows fail to be probability distributions, or a solve failed.
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    /// The operation requires a regular graph.
    #[error("regular graph required: {0}")]
    RegularityRequired(String),
    /// Parameters are out of range.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

/// Largest vertex count for exact cobra hitting (subset-mask chain).
pub const COBRA_HITTING_MAX_N: usize = 12;
/// Largest vertex count for exact cobra cover ((active, visited) chain).
pub const COBRA_COVER_MAX_N: usize = 8;
/// Cap on materialized states for any dense solve here.
pub const MAX_DENSE_STATES: usize = 6000;

/// A row-stochastic transition matrix held densely.
#[derive(Debug, Clone)]
pub struct FiniteChain {
    n: usize,
    rows: Vec<f64>,
}

impl FiniteChain {
    /// Validates and wraps a dense row-major transition matrix.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, OracleError> {
        let n = rows.len();
        if n == 0 {
            return Err(OracleError::InvalidChain("empty chain".into()));
        }
        let mut flat = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(OracleError::InvalidChain(format!(
                    "row {i} has length {}, expected {n}",
                    row.len()
                )));
            }
            let mut sum = 0.0;
            for &p in row {
                if !(0.0..=1.0 + 1e-12).contains(&p) {
                    return Err(OracleError::InvalidChain(format!(
                        "row {i} has entry {p} outside [0, 1]"
                    )));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > 1e-9 {
                return Err(OracleError::InvalidChain(format!(
                    "row {i} sums to {sum}"
                )));
            }
            flat.extend_from_slice(row);
        }
        Ok(FiniteChain { n, rows: flat })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.n..(i + 1) * self.n]
    }

    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.rows[i * self.n + j]
    }
}

/// The simple-random-walk chain of a graph: each row is uniform over the
/// vertex's neighbors.
pub fn srw_chain(g: &Graph) -> FiniteChain {
    let n = g.n();
    let mut rows = vec![vec![0.0; n]; n];
    for v in 0..n {
        let p = 1.0 / g.degree(v) as f64;
        for &w in g.neighbors(v) {
            rows[v][w as usize] = p;
        }
    }
    FiniteChain::from_rows(rows).expect("SRW rows are stochastic by construction")
}

/// Expected steps to first reach any target state, for every start
/// state, from the linear system `(I - Q) h = 1` on non-target states.
///
/// Fails with [`OracleError::Unreachable`] if some state cannot reach a
/// target through positive-probability transitions.
pub fn exact_hitting(chain: &FiniteChain, is_target: &[bool]) -> Result<Vec<f64>, OracleError> {
    let n = chain.n();
    if is_target.len() != n {
        return Err(OracleError::InvalidParams(
            "target mask length must match chain size".into(),
        ));
    }
    if !is_target.iter().any(|&t| t) {
        return Err(OracleError::InvalidParams("no target states".into()));
    }
    // Reverse reachability from the target set over the support graph.
    let mut can_reach = is_target.to_vec();
    let mut frontier: Vec<usize> = (0..n).filter(|&i| is_target[i]).collect();
    while let Some(j) = frontier.pop() {
        for i in 0..n {
            if !can_reach[i] && chain.prob(i, j) > 0.0 {
                can_reach[i] = true;
                frontier.push(i);
            }
        }
    }
    if let Some(state) = (0..n).find(|&i| !can_reach[i]) {
        return Err(OracleError::Unreachable { state });
    }

    let transient: Vec<usize> = (0..n).filter(|&i| !is_target[i]).collect();
    let index_of: HashMap<usize, usize> = transient
        .iter()
        .enumerate()
        .map(|(k, &i)| (i, k))
        .collect();
    let t = transient.len();
    let mut a = vec![0.0; t * t];
    let mut b = vec![1.0; t];
    for (k, &i) in transient.iter().enumerate() {
        a[k * t + k] = 1.0;
        for (&j, &l) in &index_of {
            a[k * t + l] -= chain.prob(i, j);
        }
    }
    let h = solve_dense(&mut a, &mut b, t)?;
    let mut full = vec![0.0; n];
    for (k, &i) in transient.iter().enumerate() {
        full[i] = h[k];
    }
    Ok(full)
}

/// Unique stationary distribution of an irreducible chain, from the
/// linear system `pi P = pi`, `sum pi = 1`.
pub fn exact_stationary(chain: &FiniteChain) -> Result<Vec<f64>, OracleError> {
    let n = chain.n();
    if !is_strongly_connected(chain) {
        return Err(OracleError::Reducible);
    }
    // Rows 0..n-1: (P^T - I) pi = 0, with the last row replaced by the
    // normalization constraint.
    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n];
    for i in 0..n - 1 {
        for j in 0..n {
            a[i * n + j] = chain.prob(j, i) - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..n {
        a[(n - 1) * n + j] = 1.0;
    }
    b[n - 1] = 1.0;
    let pi = solve_dense(&mut a, &mut b, n)?;
    // The solve can leave tiny negative dust; verify and clamp.
    let mut residual: f64 = 0.0;
    for j in 0..n {
        let mut acc = -pi[j];
        for i in 0..n {
            acc += pi[i] * chain.prob(i, j);
        }
        residual = residual.max(acc.abs());
    }
    if residual > 1e-10 || pi.iter().any(|&p| p < -1e-10) {
        return Err(OracleError::InvalidChain(format!(
            "stationary solve residual {residual:.3e}"
        )));
    }
    Ok(pi.into_iter().map(|p| p.max(0.0)).collect())
}

/// Expected return time to `v`: one step out of `v`, then the expected
/// hitting time back. For an irreducible chain this equals
/// `1 / pi(v)`.
pub fn exact_return_time(chain: &FiniteChain, v: usize) -> Result<f64, OracleError> {
    let mut is_target = vec![false; chain.n()];
    is_target[v] = true;
    let h = exact_hitting(chain, &is_target)?;
    let back: f64 = (0..chain.n()).map(|y| chain.prob(v, y) * h[y]).sum();
    Ok(1.0 + back)
}

fn is_strongly_connected(chain: &FiniteChain) -> bool {
    let n = chain.n();
    let reached = |reverse: bool| {
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut stack = vec![0usize];
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for w in 0..n {
                let p = if reverse {
                    chain.prob(w, u)
                } else {
                    chain.prob(u, w)
                };
                if p > 0.0 && !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n
    };
    reached(false) && reached(true)
}

/// Gaussian elimination with partial pivoting; consumes `a` (row-major
/// `n x n`) and `b`.
fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Result<Vec<f64>, OracleError> {
    if n == 0 {
        return Ok(Vec::new());
    }
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        if a[pivot_row * n + col].abs() < 1e-300 {
            return Err(OracleError::InvalidChain("singular linear system".into()));
        }
        if pivot_row != col {
            for j in 0..n {
                a.swap(col * n + j, pivot_row * n + j);
            }
            b.swap(col, pivot_row);
        }
        let pivot = a[col * n + col];
        for row in (col + 1)..n {
            let factor = a[row * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                a[row * n + j] -= factor * a[col * n + j];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for j in (row + 1)..n {
            acc -= a[row * n + j] * x[j];
        }
        x[row] = acc / a[row * n + row];
    }
    Ok(x)
}

/// Distribution of the union of `k` uniform-with-replacement neighbor
/// draws from a single vertex, as `(neighbor-subset mask, probability)`
/// pairs sorted by mask.
///
/// By inclusion–exclusion, `P(union = T) = sum_{U subseteq T} (-1)^{|T| - |U|} (|U|/d)^k`.
pub fn single_vertex_union_distribution(g: &Graph, v: usize, k: u32) -> Vec<(u32, f64)> {
    let nbrs = g.neighbors(v);
    let d = nbrs.len();
    debug_assert!(d > 0, "cobra step from an isolated vertex");
    let mut out = Vec::new();
    // Enumerate subsets T of the neighbor list by index mask, then map
    // index masks to vertex masks.
    for t_mask in 1u32..(1 << d) {
        let t_size = t_mask.count_ones();
        if t_size > k {
            continue; // k draws touch at most k distinct vertices
        }
        let mut p = 0.0;
        let mut u_mask = t_mask;
        // Iterate all subsets U of T (including T itself, excluding 0
        // unless needed: |U| = 0 contributes 0^k = 0 for k >= 1).
        loop {
            let sign = if (t_size - u_mask.count_ones()) % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            p += sign * (u_mask.count_ones() as f64 / d as f64).powi(k as i32);
            if u_mask == 0 {
                break;
            }
            u_mask = (u_mask - 1) & t_mask;
        }
        if p > 0.0 {
            let vertex_mask = (0..d)
                .filter(|i| t_mask >> i & 1 == 1)
                .fold(0u32, |m, i| m | (1 << nbrs[i]));
            out.push((vertex_mask, p));
        }
    }
    out.sort_unstable_by_key(|&(mask, _)| mask);
    out
}

/// Exact one-step distribution of the cobra active set: every vertex in
/// `active` (a bitmask) contributes the union of its `k` draws, and the
/// results merge. Returned pairs are sorted by mask and sum to 1.
pub fn cobra_transition_distribution(
    g: &Graph,
    active: u32,
    k: u32,
) -> Result<Vec<(u32, f64)>, OracleError> {
    if g.n() > COBRA_HITTING_MAX_N {
        return Err(OracleError::TooLarge(format!(
            "subset masks support n <= {COBRA_HITTING_MAX_N}, got {}",
            g.n()
        )));
    }
    if k == 0 {
        return Err(OracleError::InvalidParams("k must be >= 1".into()));
    }
    if active == 0 || active >> g.n() != 0 {
        return Err(OracleError::InvalidParams(format!(
            "active mask {active:#x} invalid for n = {}",
            g.n()
        )));
    }
    let mut acc: HashMap<u32, f64> = HashMap::from([(0u32, 1.0)]);
    let mut bits = active;
    while bits != 0 {
        let v = bits.trailing_zeros() as usize;
        bits &= bits - 1;
        let per_vertex = single_vertex_union_distribution(g, v, k);
        let mut next: HashMap<u32, f64> = HashMap::with_capacity(acc.len() * per_vertex.len());
        for (&mask, &p) in &acc {
            for &(t, q) in &per_vertex {
                *next.entry(mask | t).or_insert(0.0) += p * q;
            }
        }
        acc = next;
    }
    let mut out: Vec<(u32, f64)> = acc.into_iter().collect();
    out.sort_unstable_by_key(|&(mask, _)| mask);
    Ok(out)
}

/// Exact expected hitting time of `target` for a `k`-cobra walk started
/// at `start`, from the subset-mask chain with every target-containing
/// set collapsed into one absorbing state.
pub fn exact_cobra_hitting(
    g: &Graph,
    start: usize,
    target: usize,
    k: u32,
) -> Result<f64, OracleError> {
    if g.n() > COBRA_HITTING_MAX_N {
        return Err(OracleError::TooLarge(format!(
            "exact cobra hitting supports n <= {COBRA_HITTING_MAX_N}, got {}",
            g.n()
        )));
    }
    if start >= g.n() || target >= g.n() {
        return Err(OracleError::InvalidParams("vertex out of range".into()));
    }
    if start == target {
        return Ok(0.0);
    }
    let target_bit = 1u32 << target;
    let start_mask = 1u32 << start;

    // Breadth-first materialization of reachable transient masks.
    let mut index: HashMap<u32, usize> = HashMap::from([(start_mask, 0)]);
    let mut states = vec![start_mask];
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut cursor = 0;
    while cursor < states.len() {
        let mask = states[cursor];
        cursor += 1;
        let mut row = Vec::new();
        for (next, p) in cobra_transition_distribution(g, mask, k)? {
            if next & target_bit != 0 {
                continue; // absorbed; contributes nothing to the system
            }
            let idx = *index.entry(next).or_insert_with(|| {
                states.push(next);
                states.len() - 1
            });
            row.push((idx, p));
        }
        rows.push(row);
        if states.len() > MAX_DENSE_STATES {
            return Err(OracleError::TooLarge(format!(
                "cobra hitting chain exceeded {MAX_DENSE_STATES} states"
            )));
        }
    }
    solve_expected_absorption(&rows).map(|h| h[0])
}

/// Exact expected cover time of a `k`-cobra walk from `start`: the
/// round at which the visited set first equals the whole vertex set, on
/// the `(active, visited)` product chain.
pub fn exact_cobra_cover(g: &Graph, start: usize, k: u32) -> Result<f64, OracleError> {
    if g.n() > COBRA_COVER_MAX_N {
        return Err(OracleError::TooLarge(format!(
            "exact cobra cover supports n <= {COBRA_COVER_MAX_N}, got {}",
            g.n()
        )));
    }
    if start >= g.n() {
        return Err(OracleError::InvalidParams("vertex out of range".into()));
    }
    let full: u32 = if g.n() == 32 { u32::MAX } else { (1 << g.n()) - 1 };
    let start_state = (1u32 << start, 1u32 << start);
    if start_state.1 == full {
        return Ok(0.0);
    }
    let mut index: HashMap<(u32, u32), usize> = HashMap::from([(start_state, 0)]);
    let mut states = vec![start_state];
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut cursor = 0;
    while cursor < states.len() {
        let (active, visited) = states[cursor];
        cursor += 1;
        let mut row = Vec::new();
        for (next_active, p) in cobra_transition_distribution(g, active, k)? {
            let next_visited = visited | next_active;
            if next_visited == full {
                continue; // covered; absorbing
            }
            let key = (next_active, next_visited);
            let idx = *index.entry(key).or_insert_with(|| {
                states.push(key);
                states.len() - 1
            });
            row.push((idx, p));
        }
        rows.push(row);
        if states.len() > MAX_DENSE_STATES {
            return Err(OracleError::TooLarge(format!(
                "cobra cover chain exceeded {MAX_DENSE_STATES} states"
            )));
        }
    }
    solve_expected_absorption(&rows).map(|h| h[0])
}

/// Solves `h = 1 + Q h` for sparse transient rows (missing mass is
/// absorption).
fn solve_expected_absorption(rows: &[Vec<(usize, f64)>]) -> Result<Vec<f64>, OracleError> {
    let t = rows.len();
    let mut a = vec![0.0; t * t];
    let mut b = vec![1.0; t];
    for (i, row) in rows.iter().enumerate() {
        a[i * t + i] = 1.0;
        for &(j, p) in row {
            a[i * t + j] -= p;
        }
    }
    solve_dense(&mut a, &mut b, t)
}

/// Explicit two-pebble tensor walk chain on ordered pairs `(a, b)`,
/// indexed `a * n + b`, for a `d`-regular graph (non-lazy version).
///
/// From a co-located pair `(u, u)` the chain moves to `(w, w)` with
/// probability `(d + 1) / (2 d^2)` for each neighbor `w`, and to each
/// ordered pair `(w, x)` of distinct neighbors with probability
/// `1 / (2 d^2)`. From `(a, b)` with `a != b` both pebbles move
/// independently and uniformly.
pub fn build_tensor_pair_chain(g: &Graph) -> Result<FiniteChain, OracleError> {
    let n = g.n();
    let d = g
        .regular_degree()
        .ok_or_else(|| OracleError::RegularityRequired("tensor pair chain".into()))?;
    if n * n > MAX_DENSE_STATES {
        return Err(OracleError::TooLarge(format!(
            "tensor chain has {} states",
            n * n
        )));
    }
    let mut rows = vec![vec![0.0; n * n]; n * n];
    let d_f = d as f64;
    for a in 0..n {
        for b in 0..n {
            let row = &mut rows[a * n + b];
            if a == b {
                let diag = (d_f + 1.0) / (2.0 * d_f * d_f);
                let off = 1.0 / (2.0 * d_f * d_f);
                for &w in g.neighbors(a) {
                    for &x in g.neighbors(a) {
                        let p = if w == x { diag } else { off };
                        row[w as usize * n + x as usize] += p;
                    }
                }
            } else {
                let p = 1.0 / (d_f * d_f);
                for &w in g.neighbors(a) {
                    for &x in g.neighbors(b) {
                        row[w as usize * n + x as usize] += p;
                    }
                }
            }
        }
    }
    FiniteChain::from_rows(rows)
}
