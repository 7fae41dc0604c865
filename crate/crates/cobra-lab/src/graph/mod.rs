//! Undirected simple graphs: construction, generators, and exact metrics.
//!
//! The [`Graph`] type is a compact adjacency-list representation of a
//! connected, undirected, simple graph. Vertices are `0..n`. Every
//! constructor validates simplicity (no self-loops, no parallel edges),
//! symmetry, and connectivity, so downstream code can rely on those
//! invariants without re-checking.

mod generate;
mod metrics;
pub(crate) mod paths;

pub use generate::{generate, Family};
pub use metrics::{
    conductance_exact, conductance_spectral_lower, spectral_gap, ConductanceMethod,
    ConductanceReport,
};
pub use paths::{inverse_degree_paths, shortest_hop_path, PathWeights};

use thiserror::Error;

/// Errors from graph construction, parsing, and metric computation.
#[derive(Debug, Error)]
pub enum GraphError {
    /// Family or constructor parameters are out of range.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    /// A randomized generator exhausted its retry budget.
    #[error("generation failed after {attempts} attempts: {reason}")]
    GenerationFailed { attempts: usize, reason: String },
    /// The graph is too large for an enumeration-based metric.
    #[error("graph too large: {0}")]
    TooLarge(String),
    /// An iterative solver did not reach the requested tolerance.
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    /// Edge-list text did not parse or described an invalid graph.
    #[error("bad edge list: {0}")]
    BadEdgeList(String),
}

/// A connected, undirected, simple graph with vertices `0..n`.
///
/// Neighbor lists are sorted ascending, which makes iteration order (and
/// therefore every consumer's RNG draw order) deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<u32>>,
    edges: usize,
}

impl Graph {
    /// Builds a graph from an undirected edge list over vertices `0..n`.
    ///
    /// Rejects self-loops, duplicate edges (in either orientation),
    /// out-of-range endpoints, and disconnected results.
    pub fn from_edges(n: usize, edge_list: &[(usize, usize)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::InvalidParams("graph must have n >= 1".into()));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edge_list {
            if u >= n || v >= n {
                return Err(GraphError::BadEdgeList(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            if u == v {
                return Err(GraphError::BadEdgeList(format!("self-loop at {u}")));
            }
            adj[u].push(v as u32);
            adj[v].push(u as u32);
        }
        for (v, nbrs) in adj.iter_mut().enumerate() {
            nbrs.sort_unstable();
            if nbrs.windows(2).any(|w| w[0] == w[1]) {
                return Err(GraphError::BadEdgeList(format!(
                    "duplicate edge incident to {v}"
                )));
            }
        }
        let g = Graph {
            adj,
            edges: edge_list.len(),
        };
        if !g.is_connected() {
            return Err(GraphError::BadEdgeList("graph is not connected".into()));
        }
        Ok(g)
    }

    /// Parses the plain edge-list format: a header line `n m` followed by
    /// `m` lines `u v`, one per undirected edge, 0-based vertex ids.
    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| GraphError::BadEdgeList("empty input".into()))?;
        let mut head = header.split_whitespace();
        let n: usize = head
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| GraphError::BadEdgeList("header must be `n m`".into()))?;
        let m: usize = head
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| GraphError::BadEdgeList("header must be `n m`".into()))?;
        if head.next().is_some() {
            return Err(GraphError::BadEdgeList("header must be exactly `n m`".into()));
        }
        let mut edge_list = Vec::with_capacity(m);
        for line in lines {
            let mut it = line.split_whitespace();
            let u: usize = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| GraphError::BadEdgeList(format!("bad edge line: {line:?}")))?;
            let v: usize = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| GraphError::BadEdgeList(format!("bad edge line: {line:?}")))?;
            if it.next().is_some() {
                return Err(GraphError::BadEdgeList(format!("bad edge line: {line:?}")));
            }
            edge_list.push((u, v));
        }
        if edge_list.len() != m {
            return Err(GraphError::BadEdgeList(format!(
                "header promised {m} edges, found {}",
                edge_list.len()
            )));
        }
        Self::from_edges(n, &edge_list)
    }

    /// Serializes to the same `n m` + edge-lines format accepted by
    /// [`Graph::parse_edge_list`]. Each edge appears once with `u < v`.
    pub fn to_edge_list_string(&self) -> String {
        let mut out = format!("{} {}\n", self.n(), self.edges);
        for u in 0..self.n() {
            for &v in self.neighbors(u) {
                if (v as usize) > u {
                    out.push_str(&format!("{u} {v}\n"));
                }
            }
        }
        out
    }

    /// Number of vertices.
    pub fn n(&self) -> usize {
        self.adj.len()
    }

    /// Number of undirected edges.
    pub fn m(&self) -> usize {
        self.edges
    }

    /// Degree of `v`.
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[v]
    }

    /// Sum of all degrees, i.e. `2m`.
    pub fn volume(&self) -> usize {
        2 * self.edges
    }

    /// Largest degree in the graph.
    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Whether every vertex has the same degree (returns it if so).
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.degree(0);
        if (1..self.n()).all(|v| self.degree(v) == d) {
            Some(d)
        } else {
            None
        }
    }

    /// True when `u` and `v` share an edge.
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&(v as u32)).is_ok()
    }

    fn is_connected(&self) -> bool {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &w in self.neighbors(u) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    count += 1;
                    stack.push(w as usize);
                }
            }
        }
        count == n
    }

    /// BFS hop distances from `src` to every vertex.
    pub fn bfs_distances(&self, src: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.n()];
        dist[src] = 0;
        let mut queue = std::collections::VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for &w in self.neighbors(u) {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dist[u] + 1;
                    queue.push_back(w as usize);
                }
            }
        }
        dist
    }

    /// BFS hop distance to the nearest vertex of `set` for every vertex.
    pub fn bfs_distances_to_set(&self, set: &[usize]) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.n()];
        let mut queue = std::collections::VecDeque::new();
        for &s in set {
            if dist[s] == u32::MAX {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &w in self.neighbors(u) {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dist[u] + 1;
                    queue.push_back(w as usize);
                }
            }
        }
        dist
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_edges_builds_sorted_adjacency() {
        let g = Graph::from_edges(4, &[(2, 0), (0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.m(), 4);
        assert_eq!(g.neighbors(2), &[0, 1, 3]);
        assert_eq!(g.volume(), 8);
        assert!(g.has_edge(0, 2));
        assert!(!g.has_edge(0, 3));
    }

    #[test]
    fn from_edges_rejects_self_loop_duplicate_and_disconnected() {
        assert!(matches!(
            Graph::from_edges(3, &[(0, 0), (1, 2)]),
            Err(GraphError::BadEdgeList(_))
        ));
        assert!(matches!(
            Graph::from_edges(3, &[(0, 1), (1, 0), (1, 2)]),
            Err(GraphError::BadEdgeList(_))
        ));
        assert!(matches!(
            Graph::from_edges(4, &[(0, 1), (2, 3)]),
            Err(GraphError::BadEdgeList(_))
        ));
    }

    #[test]
    fn edge_list_round_trips() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        let text = g.to_edge_list_string();
        let h = Graph::parse_edge_list(&text).unwrap();
        assert_eq!(g, h);
    }

    #[test]
    fn parse_rejects_malformed_input() {
        assert!(Graph::parse_edge_list("").is_err());
        assert!(Graph::parse_edge_list("2 1\n0 1\n1 0").is_err()); // count mismatch
        assert!(Graph::parse_edge_list("2 1\n0 5").is_err()); // out of range
        assert!(Graph::parse_edge_list("x y\n0 1").is_err());
    }

    #[test]
    fn bfs_distances_on_a_path() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(g.bfs_distances(0), vec![0, 1, 2, 3]);
        assert_eq!(g.bfs_distances_to_set(&[0, 3]), vec![0, 1, 1, 0]);
    }
}
