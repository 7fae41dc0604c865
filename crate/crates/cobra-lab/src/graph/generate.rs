//! Deterministic graph family generators.

use super::{Graph, GraphError};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A named graph family with its parameters.
///
/// `Grid { dim, side }` is the set of integer points of `[0, side]^dim`
/// with axis-neighbor edges, so it has `(side + 1)^dim` vertices. All
/// other size parameters count vertices directly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Family {
    Path { n: usize },
    Cycle { n: usize },
    Complete { n: usize },
    /// One center (vertex 0) joined to `n - 1` leaves.
    Star { n: usize },
    Hypercube { dim: usize },
    Grid { dim: usize, side: usize },
    /// Complete `arity`-ary tree truncated to exactly `n` vertices;
    /// the children of `i` are `arity*i + 1 ..= arity*i + arity`.
    KaryTree { arity: usize, n: usize },
    /// Random `d`-regular graph sampled by the pairing model.
    RandomRegular { n: usize, d: usize },
    /// Clique on `ceil(2n/3)` vertices with a path of the remaining
    /// `floor(n/3)` vertices attached at clique vertex `ceil(2n/3) - 1`.
    Lollipop { n: usize },
    /// The 3-regular graph on 10 vertices with girth 5.
    Petersen,
}

/// How many full restarts the pairing model gets before giving up.
const PAIRING_RETRY_BUDGET: usize = 1000;

/// Builds the requested family member. `seed` only matters for
/// [`Family::RandomRegular`]; all other families are deterministic.
pub fn generate(family: &Family, seed: u64) -> Result<Graph, GraphError> {
    match *family {
        Family::Path { n } => path(n),
        Family::Cycle { n } => cycle(n),
        Family::Complete { n } => complete(n),
        Family::Star { n } => star(n),
        Family::Hypercube { dim } => hypercube(dim),
        Family::Grid { dim, side } => grid(dim, side),
        Family::KaryTree { arity, n } => kary_tree(arity, n),
        Family::RandomRegular { n, d } => random_regular(n, d, seed),
        Family::Lollipop { n } => lollipop(n),
        Family::Petersen => petersen(),
    }
}

fn path(n: usize) -> Result<Graph, GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidParams("path needs n >= 1".into()));
    }
    let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
    Graph::from_edges(n, &edges)
}

fn cycle(n: usize) -> Result<Graph, GraphError> {
    if n < 3 {
        return Err(GraphError::InvalidParams("cycle needs n >= 3".into()));
    }
    let edges: Vec<_> = (0..n).map(|v| (v, (v + 1) % n)).collect();
    Graph::from_edges(n, &edges)
}

fn complete(n: usize) -> Result<Graph, GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidParams("complete graph needs n >= 1".into()));
    }
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for u in 0..n {
        for v in (u + 1)..n {
            edges.push((u, v));
        }
    }
    Graph::from_edges(n, &edges)
}

fn star(n: usize) -> Result<Graph, GraphError> {
    if n < 2 {
        return Err(GraphError::InvalidParams("star needs n >= 2".into()));
    }
    let edges: Vec<_> = (1..n).map(|v| (0, v)).collect();
    Graph::from_edges(n, &edges)
}

fn hypercube(dim: usize) -> Result<Graph, GraphError> {
    if dim == 0 || dim > 20 {
        return Err(GraphError::InvalidParams(
            "hypercube needs 1 <= dim <= 20".into(),
        ));
    }
    let n = 1usize << dim;
    let mut edges = Vec::with_capacity(n * dim / 2);
    for u in 0..n {
        for b in 0..dim {
            let v = u ^ (1 << b);
            if v > u {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges)
}

fn grid(dim: usize, side: usize) -> Result<Graph, GraphError> {
    if dim == 0 || side == 0 {
        return Err(GraphError::InvalidParams(
            "grid needs dim >= 1 and side >= 1".into(),
        ));
    }
    let points_per_axis = side + 1;
    let n = points_per_axis
        .checked_pow(dim as u32)
        .filter(|&n| n <= 1 << 28)
        .ok_or_else(|| GraphError::TooLarge(format!("grid {dim}^{side} has too many vertices")))?;
    // Mixed-radix indexing: coordinate i has stride points_per_axis^i.
    let mut edges = Vec::new();
    for u in 0..n {
        let mut stride = 1;
        let mut rest = u;
        for _ in 0..dim {
            let coord = rest % points_per_axis;
            rest /= points_per_axis;
            if coord < side {
                edges.push((u, u + stride));
            }
            stride *= points_per_axis;
        }
    }
    Graph::from_edges(n, &edges)
}

fn kary_tree(arity: usize, n: usize) -> Result<Graph, GraphError> {
    if arity == 0 || n == 0 {
        return Err(GraphError::InvalidParams(
            "k-ary tree needs arity >= 1 and n >= 1".into(),
        ));
    }
    let edges: Vec<_> = (1..n).map(|v| ((v - 1) / arity, v)).collect();
    Graph::from_edges(n, &edges)
}

/// Pairing (configuration) model: put `d` stubs on every vertex, draw a
/// uniform perfect matching of the stubs, and restart from scratch if the
/// matching induces a self-loop, a parallel edge, or a disconnected
/// graph. Restarting rather than patching keeps the sample uniform over
/// simple outcomes.
fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph, GraphError> {
    if d == 0 || n <= d || (n * d) % 2 != 0 {
        return Err(GraphError::InvalidParams(format!(
            "random regular graph needs 1 <= d < n and n*d even, got n = {n}, d = {d}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stubs: Vec<u32> = (0..n * d).map(|s| (s / d) as u32).collect();
    for attempt in 0..PAIRING_RETRY_BUDGET {
        stubs.shuffle(&mut rng);
        match simple_graph_from_stub_pairs(n, &stubs) {
            Some(g) => return Ok(g),
            None => {
                let _ = attempt;
            }
        }
    }
    Err(GraphError::GenerationFailed {
        attempts: PAIRING_RETRY_BUDGET,
        reason: format!("pairing model kept producing non-simple or disconnected graphs (n = {n}, d = {d})"),
    })
}

fn simple_graph_from_stub_pairs(n: usize, stubs: &[u32]) -> Option<Graph> {
    let mut edges = Vec::with_capacity(stubs.len() / 2);
    for pair in stubs.chunks_exact(2) {
        let (u, v) = (pair[0] as usize, pair[1] as usize);
        if u == v {
            return None;
        }
        edges.push((u.min(v), u.max(v)));
    }
    edges.sort_unstable();
    if edges.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Graph::from_edges(n, &edges).ok()
}

fn lollipop(n: usize) -> Result<Graph, GraphError> {
    if n < 3 {
        return Err(GraphError::InvalidParams("lollipop needs n >= 3".into()));
    }
    let clique = (2 * n).div_ceil(3);
    let mut edges = Vec::new();
    for u in 0..clique {
        for v in (u + 1)..clique {
            edges.push((u, v));
        }
    }
    for v in clique..n {
        edges.push((v - 1, v));
    }
    Graph::from_edges(n, &edges)
}

fn petersen() -> Result<Graph, GraphError> {
    // Outer 5-cycle 0..4, inner 5-cycle 5..9 with skip-2 chords, spokes.
    let mut edges = Vec::with_capacity(15);
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((5 + i, 5 + (i + 2) % 5));
        edges.push((i, 5 + i));
    }
    Graph::from_edges(10, &edges)
}
