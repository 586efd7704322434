//! Deterministic graph and vector generators for tests and batteries.
//!
//! Everything here is seeded ChaCha12, so a `(shape, seed)` pair always
//! produces the same fixture on every platform and run.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::graph::Graph;

/// Undirected path `0 - 1 - ... - n-1`, unit weights. `n >= 2`.
pub fn path_graph(n: usize) -> Graph {
    assert!(n >= 2, "path needs at least two nodes");
    let edges: Vec<(usize, usize, f64)> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
    Graph::from_edges(&edges, false).unwrap()
}

/// Undirected cycle on `n >= 3` nodes, unit weights.
pub fn cycle_graph(n: usize) -> Graph {
    assert!(n >= 3, "cycle needs at least three nodes");
    let edges: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
    Graph::from_edges(&edges, false).unwrap()
}

/// Star with center 0 and `leaves >= 1` leaves, unit weights.
pub fn star_graph(leaves: usize) -> Graph {
    assert!(leaves >= 1, "star needs at least one leaf");
    let edges: Vec<(usize, usize, f64)> = (1..=leaves).map(|i| (0, i, 1.0)).collect();
    Graph::from_edges(&edges, false).unwrap()
}

/// Complete undirected graph on `n >= 2` nodes, unit weights.
pub fn complete_graph(n: usize) -> Graph {
    assert!(n >= 2, "complete graph needs at least two nodes");
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            edges.push((i, j, 1.0));
        }
    }
    Graph::from_edges(&edges, false).unwrap()
}

/// Random weighted graph on `n >= 2` nodes: every node emits one to three
/// arcs to random targets with weights in `[0.1, 2)`. Self-loops and
/// disconnected results are possible and deliberate; dangling nodes are
/// repaired by construction.
pub fn random_graph(n: usize, directed: bool, seed: u64) -> Graph {
    assert!(n >= 2, "random graph needs at least two nodes");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        let arcs = rng.random_range(1..=3usize);
        for _ in 0..arcs {
            let j = rng.random_range(0..n);
            let w = 0.1 + 1.9 * rng.random::<f64>();
            edges.push((i, j, w));
        }
    }
    Graph::from_edges(&edges, directed).unwrap()
}

/// Random connected undirected graph: a uniformly attached spanning tree
/// plus `extra_edges` random chords, weights in `[0.5, 2)`.
pub fn random_connected(n: usize, extra_edges: usize, seed: u64) -> Graph {
    assert!(n >= 2, "connected graph needs at least two nodes");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 1..n {
        let parent = rng.random_range(0..i);
        let w = 0.5 + 1.5 * rng.random::<f64>();
        edges.push((parent, i, w));
    }
    for _ in 0..extra_edges {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if i != j {
            let w = 0.5 + 1.5 * rng.random::<f64>();
            edges.push((i, j, w));
        }
    }
    Graph::from_edges(&edges, false).unwrap()
}

/// Random strictly positive probability vector, entries bounded away from
/// zero by `0.05 / n` before normalization.
pub fn random_distribution(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..n).map(|_| 0.05 + rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Random per-node continuation probabilities, uniform in `[lo, hi)`.
pub fn random_alpha(n: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    assert!((0.0..=1.0).contains(&lo) && lo < hi && hi <= 1.0, "bad alpha range");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..n).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_have_expected_degrees() {
        let p = path_graph(4);
        assert_eq!(p.out_weights(), &[1.0, 2.0, 2.0, 1.0]);
        let c = cycle_graph(5);
        assert!(c.out_weights().iter().all(|&d| d == 2.0));
        let s = star_graph(3);
        assert_eq!(s.out_weight(0), 3.0);
        assert_eq!(s.out_weight(2), 1.0);
        let k = complete_graph(4);
        assert!(k.out_weights().iter().all(|&d| d == 3.0));
    }

    #[test]
    fn generators_are_deterministic() {
        let a = random_graph(20, true, 42);
        let b = random_graph(20, true, 42);
        assert_eq!(a.to_edge_list_string(), b.to_edge_list_string());
        let c = random_graph(20, true, 43);
        assert_ne!(a.to_edge_list_string(), c.to_edge_list_string());
        assert_eq!(random_distribution(8, 1), random_distribution(8, 1));
        assert_eq!(random_alpha(8, 0.1, 0.9, 2), random_alpha(8, 0.1, 0.9, 2));
    }

    #[test]
    fn random_connected_is_connected_and_symmetric() {
        for seed in 0..20 {
            let g = random_connected(30, 15, seed);
            assert!(g.is_weakly_connected(), "seed {seed}");
            assert!(g.is_symmetric(), "seed {seed}");
        }
    }

    #[test]
    fn random_vectors_are_valid() {
        let v = random_distribution(10, 3);
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(v.iter().all(|&x| x > 0.0));
        let a = random_alpha(10, 0.05, 0.95, 4);
        assert!(a.iter().all(|&x| (0.05..0.95).contains(&x)));
    }
}
