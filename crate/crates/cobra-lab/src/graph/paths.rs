//! Inverse-degree path weights and lexicographic shortest hop paths.
//!
//! For a path `P = x = p_0, p_1, ..., p_L = v` the two weights of
//! interest are
//!
//! * `p(P) = sum 1/d(p_i)` and
//! * `sigma(P) = prod (1 - 1/d(p_i))`,
//!
//! both taken over the start vertex and the interior vertices
//! (`i = 0 .. L-1`), excluding the target endpoint. [`PathWeights`]
//! holds `p(x, v) = min_P p(P)` and `sigma_hat(x, v) = max_P sigma(P)`
//! for a fixed source `x` and every target `v`. A degree-1 vertex
//! contributes the factor `1 - 1/1 = 0`, so any source whose every
//! departure passes through one has `sigma_hat = 0` exactly.

use super::Graph;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Optimal inverse-degree path weights from one source to all targets.
#[derive(Debug, Clone)]
pub struct PathWeights {
    pub source: usize,
    /// `p(source, v)`: minimum additive `1/deg` cost; 0 at the source.
    pub additive: Vec<f64>,
    /// `sigma_hat(source, v)`: maximum multiplicative `1 - 1/deg`
    /// product; 1 at the source by the empty-product convention.
    pub sigma_hat: Vec<f64>,
}

/// Computes [`PathWeights`] from `source` by two Dijkstra passes: one on
/// `1/deg` costs and one on `-ln(1 - 1/deg)` costs (so the maximum
/// product becomes a minimum sum).
pub fn inverse_degree_paths(g: &Graph, source: usize) -> PathWeights {
    let additive_weights: Vec<f64> = (0..g.n()).map(|v| 1.0 / g.degree(v) as f64).collect();
    let log_weights: Vec<f64> = (0..g.n())
        .map(|v| neg_ln_one_minus_inv(g.degree(v)))
        .collect();
    let additive = departure_charged_dijkstra(g, source, &additive_weights, false);
    let sigma_hat = departure_charged_dijkstra(g, source, &log_weights, false)
        .into_iter()
        .map(|c| (-c).exp())
        .collect();
    PathWeights {
        source,
        additive,
        sigma_hat,
    }
}

/// `-ln(1 - 1/d)`, with degree 1 mapping to infinity (the factor is 0).
pub(crate) fn neg_ln_one_minus_inv(degree: usize) -> f64 {
    if degree <= 1 {
        f64::INFINITY
    } else {
        -(1.0 - 1.0 / degree as f64).ln()
    }
}

/// Single-source shortest paths where traversing an edge `a -> b` pays
/// the *tail* vertex's weight `w[a]`. With `skip_root_charge` the root's
/// own weight is never paid, which turns root-side distances into
/// interior-only path costs for paths running toward the root.
pub(crate) fn departure_charged_dijkstra(
    g: &Graph,
    root: usize,
    weights: &[f64],
    skip_root_charge: bool,
) -> Vec<f64> {
    struct Entry(f64, usize);
    impl PartialEq for Entry {
        fn eq(&self, other: &Self) -> bool {
            self.0 == other.0 && self.1 == other.1
        }
    }
    impl Eq for Entry {}
    impl PartialOrd for Entry {
        fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Entry {
        fn cmp(&self, other: &Self) -> Ordering {
            // Reversed so the BinaryHeap pops the smallest distance.
            other
                .0
                .total_cmp(&self.0)
                .then_with(|| other.1.cmp(&self.1))
        }
    }

    let mut dist = vec![f64::INFINITY; g.n()];
    dist[root] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Entry(0.0, root));
    while let Some(Entry(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        let charge = if skip_root_charge && u == root {
            0.0
        } else {
            weights[u]
        };
        let next = d + charge;
        if next.is_infinite() {
            continue;
        }
        for &w in g.neighbors(u) {
            let w = w as usize;
            if next < dist[w] {
                dist[w] = next;
                heap.push(Entry(next, w));
            }
        }
    }
    dist
}

/// The lexicographically smallest shortest hop path from `u` to `v`,
/// returned as the full vertex sequence including both endpoints.
///
/// Among all minimum-hop paths the vertex sequence that compares
/// smallest element-by-element is chosen, which pins a deterministic
/// representative for path-sum bounds.
pub fn shortest_hop_path(g: &Graph, u: usize, v: usize) -> Vec<usize> {
    let dist_to_v = g.bfs_distances(v);
    let mut path = vec![u];
    let mut current = u;
    while current != v {
        let next = g
            .neighbors(current)
            .iter()
            .map(|&w| w as usize)
            .find(|&w| dist_to_v[w] == dist_to_v[current] - 1)
            .expect("connected graph always has a descending neighbor");
        path.push(next);
        current = next;
    }
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Family};

    #[test]
    fn edge_graph_weights() {
        // K2 from vertex 0: the only path departs the degree-1 source,
        // so p(0,1) = 1 and sigma_hat(0,1) = 0.
        let g = generate(&Family::Path { n: 2 }, 0).unwrap();
        let w = inverse_degree_paths(&g, 0);
        assert_eq!(w.additive[1], 1.0);
        assert_eq!(w.sigma_hat[1], 0.0);
        assert_eq!(w.additive[0], 0.0);
        assert_eq!(w.sigma_hat[0], 1.0);
    }

    #[test]
    fn path_graph_weights() {
        // 0 - 1 - 2 from source 0: p(0,2) = 1/1 + 1/2 = 3/2.
        let g = generate(&Family::Path { n: 3 }, 0).unwrap();
        let w = inverse_degree_paths(&g, 0);
        assert!((w.additive[2] - 1.5).abs() < 1e-15);
        assert_eq!(w.sigma_hat[2], 0.0);
        // From the middle vertex the start factor is 1 - 1/2.
        let w = inverse_degree_paths(&g, 1);
        assert!((w.sigma_hat[0] - 0.5).abs() < 1e-15);
        assert!((w.additive[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sigma_prefers_high_degree_routes() {
        // Two routes 0 -> 4: via 1 (degree 2) or via 2 -> 3 (degree 2
        // each, longer). The shorter route wins for both weights here;
        // richer cases are covered by the exhaustive cross-check below.
        let g = Graph::from_edges(5, &[(0, 1), (1, 4), (0, 2), (2, 3), (3, 4)]).unwrap();
        let w = inverse_degree_paths(&g, 0);
        let direct = (1.0 - 0.5) * (1.0 - 0.5); // start 0 (deg 2), interior 1
        assert!((w.sigma_hat[4] - direct).abs() < 1e-15);
    }

    /// Brute force over all simple paths, applying the same
    /// start-plus-interior convention.
    fn exhaustive_weights(g: &Graph, source: usize, target: usize) -> (f64, f64) {
        fn recurse(
            g: &Graph,
            current: usize,
            target: usize,
            visited: &mut Vec<bool>,
            p_acc: f64,
            sigma_acc: f64,
            best: &mut (f64, f64),
        ) {
            if current == target {
                best.0 = best.0.min(p_acc);
                best.1 = best.1.max(sigma_acc);
                return;
            }
            let d = g.degree(current) as f64;
            let p_next = p_acc + 1.0 / d;
            let sigma_next = sigma_acc * (1.0 - 1.0 / d);
            for &w in g.neighbors(current) {
                let w = w as usize;
                if !visited[w] {
                    visited[w] = true;
                    recurse(g, w, target, visited, p_next, sigma_next, best);
                    visited[w] = false;
                }
            }
        }
        let mut best = (f64::INFINITY, 0.0);
        let mut visited = vec![false; g.n()];
        visited[source] = true;
        recurse(g, source, target, &mut visited, 0.0, 1.0, &mut best);
        best
    }

    #[test]
    fn dijkstra_matches_exhaustive_path_enumeration() {
        let graphs = vec![
            generate(&Family::Cycle { n: 7 }, 0).unwrap(),
            generate(&Family::Star { n: 7 }, 0).unwrap(),
            generate(&Family::KaryTree { arity: 2, n: 7 }, 0).unwrap(),
            generate(&Family::Lollipop { n: 8 }, 0).unwrap(),
            Graph::from_edges(6, &[(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (3, 5), (4, 5)])
                .unwrap(),
        ];
        for g in &graphs {
            for source in 0..g.n() {
                let w = inverse_degree_paths(g, source);
                for target in 0..g.n() {
                    if source == target {
                        continue;
                    }
                    let (p, sigma) = exhaustive_weights(g, source, target);
                    assert!(
                        (w.additive[target] - p).abs() < 1e-12,
                        "p mismatch {source}->{target}"
                    );
                    assert!(
                        (w.sigma_hat[target] - sigma).abs() < 1e-12,
                        "sigma mismatch {source}->{target}"
                    );
                }
            }
        }
    }

    #[test]
    fn exp_bound_dominates_sigma_everywhere() {
        // e^{-p(x,v)} >= sigma_hat(x,v): each factor obeys
        // e^{-1/d} >= 1 - 1/d.
        for family in [
            Family::Cycle { n: 8 },
            Family::Path { n: 8 },
            Family::Star { n: 8 },
            Family::Complete { n: 6 },
            Family::Lollipop { n: 8 },
            Family::Hypercube { dim: 3 },
        ] {
            let g = generate(&family, 0).unwrap();
            for source in 0..g.n() {
                let w = inverse_degree_paths(&g, source);
                for v in 0..g.n() {
                    assert!(
                        (-w.additive[v]).exp() >= w.sigma_hat[v] - 1e-12,
                        "{family:?} {source}->{v}"
                    );
                }
            }
        }
    }

    #[test]
    fn sigma_hat_lies_in_unit_interval() {
        for family in [Family::Lollipop { n: 9 }, Family::Star { n: 9 }] {
            let g = generate(&family, 0).unwrap();
            for source in 0..g.n() {
                let w = inverse_degree_paths(&g, source);
                for v in 0..g.n() {
                    if v != source {
                        assert!((0.0..1.0).contains(&w.sigma_hat[v]));
                    }
                }
            }
        }
    }

    #[test]
    fn hop_path_breaks_ties_lexicographically() {
        let g = generate(&Family::Cycle { n: 4 }, 0).unwrap();
        // Both 0-1-2 and 0-3-2 are shortest; the smaller sequence wins.
        assert_eq!(shortest_hop_path(&g, 0, 2), vec![0, 1, 2]);
        assert_eq!(shortest_hop_path(&g, 2, 0), vec![2, 1, 0]);
        assert_eq!(shortest_hop_path(&g, 1, 1), vec![1]);
    }

    #[test]
    fn degrees_along_shortest_path_stay_below_3n() {
        // Vertices on a shortest hop path have disjoint-ish neighbor
        // balls, capping the degree sum at 3n.
        let mut graphs = vec![
            generate(&Family::Complete { n: 9 }, 0).unwrap(),
            generate(&Family::Star { n: 33 }, 0).unwrap(),
            generate(&Family::Lollipop { n: 30 }, 0).unwrap(),
            generate(&Family::Grid { dim: 2, side: 5 }, 0).unwrap(),
        ];
        for seed in 0..5 {
            graphs.push(generate(&Family::RandomRegular { n: 40, d: 4 }, seed).unwrap());
        }
        for g in &graphs {
            for u in 0..g.n().min(12) {
                for v in 0..g.n() {
                    let path = shortest_hop_path(g, u, v);
                    let degree_sum: usize = path.iter().map(|&w| g.degree(w)).sum();
                    assert!(degree_sum <= 3 * g.n(), "degree sum {degree_sum}");
                }
            }
        }
    }
}
