//! Weighted directed graphs and their random-walk transition matrices.
//!
//! Nodes are dense indices `0..n`. Construction merges parallel edges by
//! adding weights, drops explicit zero-weight arcs, and repairs dangling
//! nodes (no outgoing weight) by wiring them uniformly to every *other*
//! node. After construction every row of the walk matrix `P = D^{-1} W`
//! sums to one, so downstream code never has to special-case danglers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Graphs with at most this many nodes get dense matrices; larger ones
/// are stored compressed. 2048^2 doubles is 32 MiB, a safe dense ceiling.
pub const DENSE_LIMIT: usize = 2048;

/// A weighted directed graph with row-stochastic walk structure.
///
/// The weight matrix `W` is kept as per-node adjacency lists sorted by
/// destination. `out_weight[i]` caches the degree `d_i = sum_j W_ij`,
/// which is strictly positive for every node by construction.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<(usize, f64)>>,
    out_weight: Vec<f64>,
    labels: Option<Vec<String>>,
    symmetric: bool,
}

impl Graph {
    /// Builds a graph from `(src, dst, weight)` triples.
    ///
    /// The node count is `1 + max index`. With `directed = false` every
    /// triple also inserts the reverse arc, so the weight matrix comes out
    /// symmetric. Parallel edges merge additively; zero-weight arcs are
    /// dropped after merging; dangling nodes are repaired as described in
    /// the module docs.
    pub fn from_edges(edges: &[(usize, usize, f64)], directed: bool) -> Result<Self> {
        Self::build(edges, directed, None)
    }

    fn build(
        edges: &[(usize, usize, f64)],
        directed: bool,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut n = 0usize;
        for &(src, dst, w) in edges {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::BadWeight { src, dst, weight: w });
            }
            n = n.max(src + 1).max(dst + 1);
        }
        // BTreeMap keys keep the arc set ordered, which makes construction
        // deterministic and the per-row lists sorted by destination.
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(src, dst, w) in edges {
            *merged.entry((src, dst)).or_insert(0.0) += w;
            if !directed && src != dst {
                *merged.entry((dst, src)).or_insert(0.0) += w;
            }
        }
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (&(src, dst), &w) in &merged {
            if w > 0.0 {
                adj[src].push((dst, w));
            }
        }
        // Dangling repair: a node with no outgoing weight gets uniform
        // artificial arcs to all other nodes. A single isolated node has
        // no "other" node to point at, which we refuse.
        for (i, row) in adj.iter_mut().enumerate() {
            if row.is_empty() {
                if n == 1 {
                    return Err(Error::SingleNodeDangling);
                }
                let w = 1.0 / (n - 1) as f64;
                *row = (0..n).filter(|&j| j != i).map(|j| (j, w)).collect();
            }
        }
        let out_weight: Vec<f64> = adj
            .iter()
            .map(|row| row.iter().map(|&(_, w)| w).sum())
            .collect();
        let symmetric = is_symmetric(&adj);
        Ok(Graph {
            n,
            adj,
            out_weight,
            labels,
            symmetric,
        })
    }

    /// Parses the plain-text edge-list format: one `src dst [weight]` per
    /// line, whitespace-separated, `#` starting a comment line. Node names
    /// are arbitrary tokens and get dense indices in order of first
    /// appearance. A missing weight means 1.
    pub fn from_edge_list_str(text: &str, directed: bool) -> Result<Self> {
        let mut labels: Vec<String> = Vec::new();
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        let mut intern = |token: &str, labels: &mut Vec<String>| -> usize {
            *index.entry(token.to_string()).or_insert_with(|| {
                labels.push(token.to_string());
                labels.len() - 1
            })
        };
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 && fields.len() != 3 {
                return Err(Error::Parse(format!(
                    "line {}: expected `src dst [weight]`, got {} fields",
                    lineno + 1,
                    fields.len()
                )));
            }
            let src = intern(fields[0], &mut labels);
            let dst = intern(fields[1], &mut labels);
            let w = if fields.len() == 3 {
                fields[2].parse::<f64>().map_err(|_| {
                    Error::Parse(format!("line {}: bad weight `{}`", lineno + 1, fields[2]))
                })?
            } else {
                1.0
            };
            edges.push((src, dst, w));
        }
        Self::build(&edges, directed, Some(labels))
    }

    /// Reads [`Graph::from_edge_list_str`] input from a file.
    pub fn from_edge_list_path<P: AsRef<Path>>(path: P, directed: bool) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_edge_list_str(&text, directed)
    }

    /// Renders the graph back to edge-list text (one arc per line).
    pub fn to_edge_list_string(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            for &(j, w) in &self.adj[i] {
                let _ = writeln!(out, "{} {} {}", self.label(i), self.label(j), w);
            }
        }
        out
    }

    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Number of stored arcs (after merging, repair included).
    pub fn arc_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum()
    }

    /// Outgoing arcs of node `i`, sorted by destination.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[i]
    }

    /// Out-degree `d_i` (total outgoing weight), always > 0.
    pub fn out_weight(&self, i: usize) -> f64 {
        self.out_weight[i]
    }

    /// All out-degrees.
    pub fn out_weights(&self) -> &[f64] {
        &self.out_weight
    }

    /// Total weight `sum_i d_i`. Equals twice the edge weight on
    /// undirected graphs without self-loops.
    pub fn total_weight(&self) -> f64 {
        self.out_weight.iter().sum()
    }

    /// Weight of arc `i -> j`, 0 when absent.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        match self.adj[i].binary_search_by(|&(dst, _)| dst.cmp(&j)) {
            Ok(pos) => self.adj[i][pos].1,
            Err(_) => 0.0,
        }
    }

    /// Whether the stored weight matrix is exactly symmetric.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Display label of node `i` (its input token, else the index).
    pub fn label(&self, i: usize) -> String {
        match &self.labels {
            Some(labels) => labels[i].clone(),
            None => i.to_string(),
        }
    }

    /// Reverse lookup of a node by label; indices always work as labels,
    /// so unlabeled graphs resolve numeric strings.
    pub fn node_by_label(&self, token: &str) -> Option<usize> {
        match &self.labels {
            Some(labels) => labels.iter().position(|l| l == token),
            None => token.parse::<usize>().ok().filter(|&i| i < self.n),
        }
    }

    /// Whether the graph is weakly connected (connected when every arc is
    /// read as undirected). Disconnected graphs are legal everywhere; this
    /// exists so callers can warn about walks that cannot mix.
    pub fn is_weakly_connected(&self) -> bool {
        let mut undirected: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        for i in 0..self.n {
            for &(j, _) in &self.adj[i] {
                undirected[i].push(j);
                undirected[j].push(i);
            }
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for &j in &undirected[i] {
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    stack.push(j);
                }
            }
        }
        count == self.n
    }

    /// The walk matrix `P = D^{-1} W`, dense up to [`DENSE_LIMIT`] nodes
    /// and compressed sparse above.
    pub fn transition_matrix(&self) -> TransitionMatrix {
        if self.n <= DENSE_LIMIT {
            let mut m = DMatrix::<f64>::zeros(self.n, self.n);
            for i in 0..self.n {
                let d = self.out_weight[i];
                for &(j, w) in &self.adj[i] {
                    m[(i, j)] = w / d;
                }
            }
            TransitionMatrix::Dense(m)
        } else {
            TransitionMatrix::Sparse(self.walk_csr())
        }
    }

    /// The walk matrix in compressed sparse row form, any size.
    pub(crate) fn walk_csr(&self) -> CsrMatrix {
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        let mut col = Vec::with_capacity(self.arc_count());
        let mut val = Vec::with_capacity(self.arc_count());
        row_ptr.push(0);
        for i in 0..self.n {
            let d = self.out_weight[i];
            for &(j, w) in &self.adj[i] {
                col.push(j);
                val.push(w / d);
            }
            row_ptr.push(col.len());
        }
        CsrMatrix { n: self.n, row_ptr, col, val }
    }
}

fn is_symmetric(adj: &[Vec<(usize, f64)>]) -> bool {
    for (i, row) in adj.iter().enumerate() {
        for &(j, w) in row {
            let back = match adj[j].binary_search_by(|&(dst, _)| dst.cmp(&i)) {
                Ok(pos) => adj[j][pos].1,
                Err(_) => return false,
            };
            if back != w {
                return false;
            }
        }
    }
    true
}

/// Compressed sparse row matrix, only what the solvers need.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
}

impl CsrMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col[lo..hi].binary_search(&j) {
            Ok(pos) => self.val[lo + pos],
            Err(_) => 0.0,
        }
    }

    /// Accumulates `acc += scale * (row i)`.
    fn axpy_row(&self, i: usize, scale: f64, acc: &mut [f64]) {
        for k in self.row_ptr[i]..self.row_ptr[i + 1] {
            acc[self.col[k]] += scale * self.val[k];
        }
    }
}

/// A row-stochastic matrix in whichever storage fits.
///
/// `SparseRestart` represents the restart-augmented walk
/// `row_i = alpha_i * P_i + (1 - alpha_i) * v` without materializing the
/// dense rank-one part, which would defeat sparse storage.
#[derive(Debug, Clone)]
pub enum TransitionMatrix {
    Dense(DMatrix<f64>),
    Sparse(CsrMatrix),
    SparseRestart {
        walk: CsrMatrix,
        alpha: Vec<f64>,
        v: Vec<f64>,
    },
}

impl TransitionMatrix {
    pub fn n(&self) -> usize {
        match self {
            TransitionMatrix::Dense(m) => m.nrows(),
            TransitionMatrix::Sparse(m) => m.n(),
            TransitionMatrix::SparseRestart { walk, .. } => walk.n(),
        }
    }

    /// Entry `(i, j)`; sparse lookups cost a binary search.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            TransitionMatrix::Dense(m) => m[(i, j)],
            TransitionMatrix::Sparse(m) => m.get(i, j),
            TransitionMatrix::SparseRestart { walk, alpha, v } => {
                alpha[i] * walk.get(i, j) + (1.0 - alpha[i]) * v[j]
            }
        }
    }

    /// Row sums; all 1 up to round-off for matrices built by this crate.
    pub fn row_sums(&self) -> Vec<f64> {
        let n = self.n();
        match self {
            TransitionMatrix::Dense(m) => (0..n).map(|i| m.row(i).sum()).collect(),
            TransitionMatrix::Sparse(m) => (0..n)
                .map(|i| m.val[m.row_ptr[i]..m.row_ptr[i + 1]].iter().sum())
                .collect(),
            TransitionMatrix::SparseRestart { walk, alpha, v } => {
                let vsum: f64 = v.iter().sum();
                (0..n)
                    .map(|i| {
                        let walk_sum: f64 =
                            walk.val[walk.row_ptr[i]..walk.row_ptr[i + 1]].iter().sum();
                        alpha[i] * walk_sum + (1.0 - alpha[i]) * vsum
                    })
                    .collect()
            }
        }
    }

    /// Left product `x^T M`, the one operation iterative solvers need.
    pub fn left_mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        assert_eq!(x.len(), n, "left_mul: vector length mismatch");
        match self {
            TransitionMatrix::Dense(m) => {
                let mut y = vec![0.0; n];
                for i in 0..n {
                    let xi = x[i];
                    if xi != 0.0 {
                        for j in 0..n {
                            y[j] += xi * m[(i, j)];
                        }
                    }
                }
                y
            }
            TransitionMatrix::Sparse(m) => {
                let mut y = vec![0.0; n];
                for (i, &xi) in x.iter().enumerate() {
                    if xi != 0.0 {
                        m.axpy_row(i, xi, &mut y);
                    }
                }
                y
            }
            TransitionMatrix::SparseRestart { walk, alpha, v } => {
                let mut y = vec![0.0; n];
                let mut restart_mass = 0.0;
                for i in 0..n {
                    restart_mass += x[i] * (1.0 - alpha[i]);
                    let s = x[i] * alpha[i];
                    if s != 0.0 {
                        walk.axpy_row(i, s, &mut y);
                    }
                }
                for j in 0..n {
                    y[j] += restart_mass * v[j];
                }
                y
            }
        }
    }

    pub fn as_dense(&self) -> Option<&DMatrix<f64>> {
        match self {
            TransitionMatrix::Dense(m) => Some(m),
            _ => None,
        }
    }
}
