//! Restart models: node-dependent continuation probabilities plus a
//! restart distribution.
//!
//! A model holds `alpha[i]`, the probability that the walker at node `i`
//! keeps walking (it restarts with probability `1 - alpha[i]`), and the
//! distribution `v` it restarts from. The augmented chain is
//! `P~ = A P + (I - A) 1 v^T` with `A = diag(alpha)`.

use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, TransitionMatrix, DENSE_LIMIT};

/// How the per-node continuation probabilities were generated.
///
/// Carrying the generator (not just the resulting vectors) lets closed-form
/// solvers and the CLI recognize the structured families.
#[derive(Debug, Clone, PartialEq)]
pub enum RestartKind {
    /// Hand-supplied `alpha` vector.
    Custom,
    /// Classical damping: `alpha_i = alpha` everywhere.
    Constant(f64),
    /// `alpha_i = 1 - a * d_i^sigma`; restarts more likely where the
    /// degree-power is large (for positive `sigma`).
    DegreePower { a: f64, sigma: f64 },
    /// Random walk with jumps: jump weights `a_i` attached to each node,
    /// giving `alpha_i = d_i / (d_i + a_i)` and `v_i = a_i / sum(a)`.
    RandomWalkJumps(Vec<f64>),
}

impl fmt::Display for RestartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RestartKind::Custom => write!(f, "custom"),
            RestartKind::Constant(alpha) => write!(f, "constant(alpha={alpha})"),
            RestartKind::DegreePower { a, sigma } => {
                write!(f, "degree_power(a={a}, sigma={sigma})")
            }
            RestartKind::RandomWalkJumps(_) => write!(f, "rwj"),
        }
    }
}

/// A validated restart model bound to a graph size.
#[derive(Debug, Clone)]
pub struct RestartModel {
    alpha: Vec<f64>,
    v: Vec<f64>,
    kind: RestartKind,
}

impl RestartModel {
    /// Uniform damping `alpha in [0, 1)`, like ordinary personalized
    /// PageRank with factor `alpha`.
    pub fn constant(g: &Graph, alpha: f64, v: &Distribution) -> Result<Self> {
        if !alpha.is_finite() || !(0.0..1.0).contains(&alpha) {
            return Err(Error::AlphaOutOfRange { node: 0, value: alpha });
        }
        Ok(RestartModel {
            alpha: vec![alpha; g.node_count()],
            v: v.resolve(g)?,
            kind: RestartKind::Constant(alpha),
        })
    }

    /// Degree-power restarts `1 - alpha_i = a * d_i^sigma`. Requires
    /// `a * max_i d_i^sigma < 1` so every `alpha_i` stays in (0, 1).
    pub fn degree_power(g: &Graph, a: f64, sigma: f64, v: &Distribution) -> Result<Self> {
        if !a.is_finite() || a <= 0.0 {
            return Err(Error::BadDistribution(format!(
                "degree-power coefficient must be positive, got a = {a}"
            )));
        }
        if !sigma.is_finite() {
            return Err(Error::BadDistribution(format!(
                "degree-power exponent must be finite, got sigma = {sigma}"
            )));
        }
        let mut alpha = Vec::with_capacity(g.node_count());
        let mut worst = 0.0f64;
        for i in 0..g.node_count() {
            let restart = a * g.out_weight(i).powf(sigma);
            worst = worst.max(restart);
            alpha.push(1.0 - restart);
        }
        if !worst.is_finite() || worst >= 1.0 {
            return Err(Error::StabilityViolation(worst));
        }
        Ok(RestartModel {
            alpha,
            v: v.resolve(g)?,
            kind: RestartKind::DegreePower { a, sigma },
        })
    }

    /// Random walk with jumps: node `i` carries jump weight `a[i] > 0`.
    /// Both `alpha` and `v` are determined by the jump weights.
    pub fn random_walk_jumps(g: &Graph, a: &[f64]) -> Result<Self> {
        let n = g.node_count();
        if a.len() != n {
            return Err(Error::DimensionMismatch {
                what: "jump weight vector",
                got: a.len(),
                expected: n,
            });
        }
        for (i, &ai) in a.iter().enumerate() {
            if !ai.is_finite() || ai <= 0.0 {
                return Err(Error::NonpositiveJumpWeight { node: i, value: ai });
            }
        }
        let total: f64 = a.iter().sum();
        let alpha = (0..n)
            .map(|i| g.out_weight(i) / (g.out_weight(i) + a[i]))
            .collect();
        let v = a.iter().map(|&ai| ai / total).collect();
        Ok(RestartModel {
            alpha,
            v,
            kind: RestartKind::RandomWalkJumps(a.to_vec()),
        })
    }

    /// [`RestartModel::random_walk_jumps`] with the same weight at every node.
    pub fn random_walk_jumps_uniform(g: &Graph, a: f64) -> Result<Self> {
        Self::random_walk_jumps(g, &vec![a; g.node_count()])
    }

    /// Arbitrary per-node continuation probabilities in `[0, 1]`. Values
    /// of exactly 1 are legal here (the walker never restarts at such a
    /// node) but the exact solvers insist on `max alpha < 1`.
    pub fn custom(g: &Graph, alpha: Vec<f64>, v: &Distribution) -> Result<Self> {
        let n = g.node_count();
        if alpha.len() != n {
            return Err(Error::DimensionMismatch {
                what: "alpha vector",
                got: alpha.len(),
                expected: n,
            });
        }
        for (i, &ai) in alpha.iter().enumerate() {
            if !ai.is_finite() || !(0.0..=1.0).contains(&ai) {
                return Err(Error::AlphaOutOfRange { node: i, value: ai });
            }
        }
        Ok(RestartModel {
            alpha,
            v: v.resolve(g)?,
            kind: RestartKind::Custom,
        })
    }

    /// Continuation probabilities, one per node.
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Restart distribution, normalized to sum 1.
    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn kind(&self) -> &RestartKind {
        &self.kind
    }

    pub fn max_alpha(&self) -> f64 {
        self.alpha.iter().fold(0.0, |m, &a| m.max(a))
    }

    pub fn min_alpha(&self) -> f64 {
        self.alpha.iter().fold(1.0, |m, &a| m.min(a))
    }

    /// The restart-augmented transition matrix
    /// `P~ = A P + (I - A) 1 v^T`. Dense up to [`DENSE_LIMIT`] nodes;
    /// above that the rank-one restart part stays factored.
    pub fn augmented_matrix(&self, g: &Graph) -> Result<TransitionMatrix> {
        let n = g.node_count();
        if self.alpha.len() != n {
            return Err(Error::DimensionMismatch {
                what: "restart model",
                got: self.alpha.len(),
                expected: n,
            });
        }
        if n <= DENSE_LIMIT {
            let mut m = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                let restart = 1.0 - self.alpha[i];
                for j in 0..n {
                    m[(i, j)] = restart * self.v[j];
                }
                let scale = self.alpha[i] / g.out_weight(i);
                for &(j, w) in g.neighbors(i) {
                    m[(i, j)] += scale * w;
                }
            }
            Ok(TransitionMatrix::Dense(m))
        } else {
            Ok(TransitionMatrix::SparseRestart {
                walk: g.walk_csr(),
                alpha: self.alpha.clone(),
                v: self.v.clone(),
            })
        }
    }
}

/// Restart-distribution specification, resolved against a graph.
#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    /// `1/n` everywhere.
    Uniform,
    /// All mass on one node, looked up by label.
    Node(String),
    /// Explicit nonnegative weights, normalized on resolution.
    Weights(Vec<f64>),
}

impl Distribution {
    /// Point mass on a node given by anything label-like.
    pub fn node<S: Into<String>>(label: S) -> Self {
        Distribution::Node(label.into())
    }

    /// Turns the spec into a probability vector over the graph's nodes.
    pub fn resolve(&self, g: &Graph) -> Result<Vec<f64>> {
        let n = g.node_count();
        match self {
            Distribution::Uniform => Ok(vec![1.0 / n as f64; n]),
            Distribution::Node(label) => {
                let i = g.node_by_label(label).ok_or_else(|| {
                    Error::BadDistribution(format!("unknown node `{label}`"))
                })?;
                let mut v = vec![0.0; n];
                v[i] = 1.0;
                Ok(v)
            }
            Distribution::Weights(w) => {
                if w.len() != n {
                    return Err(Error::DimensionMismatch {
                        what: "restart weights",
                        got: w.len(),
                        expected: n,
                    });
                }
                for (i, &wi) in w.iter().enumerate() {
                    if !wi.is_finite() || wi < 0.0 {
                        return Err(Error::BadDistribution(format!(
                            "weight {wi} at node {i} must be nonnegative and finite"
                        )));
                    }
                }
                let total: f64 = w.iter().sum();
                if total <= 0.0 {
                    return Err(Error::BadDistribution(
                        "restart weights sum to zero".to_string(),
                    ));
                }
                Ok(w.iter().map(|&wi| wi / total).collect())
            }
        }
    }
}

/// JSON restart configuration, the on-disk form of a [`RestartModel`].
///
/// ```json
/// {"kind": "constant", "alpha": 0.85, "v": "uniform"}
/// {"kind": "degree_power", "a": 0.01, "sigma": 1.0, "v": "node:b"}
/// {"kind": "rwj", "a": 1.0}
/// {"kind": "custom", "alpha": [0.2, 0.9, 0.5], "v": [3, 1, 0]}
/// ```
///
/// `v` defaults to `"uniform"` and accepts `"uniform"`, `"node:<label>"`,
/// or an explicit weight array. The rwj kind takes a scalar or per-node
/// jump weights and derives both `alpha` and `v` itself.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RestartConfig {
    Constant {
        alpha: f64,
        #[serde(default)]
        v: DistributionSpec,
    },
    DegreePower {
        a: f64,
        sigma: f64,
        #[serde(default)]
        v: DistributionSpec,
    },
    Rwj { a: JumpSpec },
    Custom {
        alpha: Vec<f64>,
        #[serde(default)]
        v: DistributionSpec,
    },
}

/// `v` field of [`RestartConfig`]: a keyword string or a weight array.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum DistributionSpec {
    Named(String),
    Weights(Vec<f64>),
}

impl Default for DistributionSpec {
    fn default() -> Self {
        DistributionSpec::Named("uniform".to_string())
    }
}

impl DistributionSpec {
    fn parse(&self) -> Result<Distribution> {
        match self {
            DistributionSpec::Named(s) if s == "uniform" => Ok(Distribution::Uniform),
            DistributionSpec::Named(s) => match s.strip_prefix("node:") {
                Some(label) if !label.is_empty() => Ok(Distribution::node(label)),
                _ => Err(Error::Parse(format!(
                    "bad distribution spec `{s}`: expected \"uniform\", \"node:<label>\", or a weight array"
                ))),
            },
            DistributionSpec::Weights(w) => Ok(Distribution::Weights(w.clone())),
        }
    }
}

/// `a` field of the rwj kind: one weight for all nodes or one per node.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum JumpSpec {
    Scalar(f64),
    PerNode(Vec<f64>),
}

impl RestartConfig {
    /// Parses a JSON configuration document.
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("restart config: {e}")))
    }

    /// Reads [`RestartConfig::from_json_str`] input from a file.
    pub fn from_json_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// Instantiates the configuration against a concrete graph.
    pub fn build(&self, g: &Graph) -> Result<RestartModel> {
        match self {
            RestartConfig::Constant { alpha, v } => {
                RestartModel::constant(g, *alpha, &v.parse()?)
            }
            RestartConfig::DegreePower { a, sigma, v } => {
                RestartModel::degree_power(g, *a, *sigma, &v.parse()?)
            }
            RestartConfig::Rwj { a: JumpSpec::Scalar(a) } => {
                RestartModel::random_walk_jumps_uniform(g, *a)
            }
            RestartConfig::Rwj { a: JumpSpec::PerNode(a) } => {
                RestartModel::random_walk_jumps(g, a)
            }
            RestartConfig::Custom { alpha, v } => {
                RestartModel::custom(g, alpha.clone(), &v.parse()?)
            }
        }
    }
}

/// Checks the closed form of the random-walk-with-jumps transition matrix
/// against the assembled augmented matrix, returning the largest absolute
/// entry difference. For jump weights `a` the augmented chain should equal
/// `p_ij = (W_ij + a_i a_j / sum(a)) / (d_i + a_i)`; on an unweighted
/// undirected graph with uniform jumps this is the familiar
/// `(a + n * [i ~ j]) / (n (d_i + a))`.
pub fn rwj_transition_check(g: &Graph, a: &[f64]) -> Result<f64> {
    let n = g.node_count();
    if n > DENSE_LIMIT {
        return Err(Error::DenseOnly { n, max: DENSE_LIMIT });
    }
    let model = RestartModel::random_walk_jumps(g, a)?;
    let augmented = model.augmented_matrix(g)?;
    let total: f64 = a.iter().sum();
    let mut worst = 0.0f64;
    for i in 0..n {
        let denom = g.out_weight(i) + a[i];
        for j in 0..n {
            let expected = (g.weight(i, j) + a[i] * a[j] / total) / denom;
            worst = worst.max((augmented.get(i, j) - expected).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn path3() -> Graph {
        Graph::from_edges(&[(0, 1, 1.0), (1, 2, 1.0)], false).unwrap()
    }

    #[test]
    fn constant_model_fills_alpha() {
        let g = path3();
        let m = RestartModel::constant(&g, 0.85, &Distribution::Uniform).unwrap();
        assert_eq!(m.alpha(), &[0.85, 0.85, 0.85]);
        assert_eq!(m.v(), &[1.0 / 3.0; 3]);
        assert_eq!(m.max_alpha(), 0.85);
        assert!(matches!(m.kind(), RestartKind::Constant(_)));
        assert!(matches!(
            RestartModel::constant(&g, 1.0, &Distribution::Uniform),
            Err(Error::AlphaOutOfRange { .. })
        ));
        assert!(matches!(
            RestartModel::constant(&g, -0.1, &Distribution::Uniform),
            Err(Error::AlphaOutOfRange { .. })
        ));
    }

    #[test]
    fn degree_power_alphas_follow_degrees() {
        // Path degrees (1, 2, 1); a = 0.1, sigma = 1 gives
        // alpha = (0.9, 0.8, 0.9).
        let g = path3();
        let m = RestartModel::degree_power(&g, 0.1, 1.0, &Distribution::Uniform).unwrap();
        for (got, want) in m.alpha().iter().zip([0.9, 0.8, 0.9]) {
            assert!((got - want).abs() < 1e-15);
        }
        // sigma = 0 collapses to constant restart probability a.
        let m0 = RestartModel::degree_power(&g, 0.3, 0.0, &Distribution::Uniform).unwrap();
        for &ai in m0.alpha() {
            assert!((ai - 0.7).abs() < 1e-15);
        }
        // a * max(d) = 0.6 * 2 >= 1 is rejected.
        match RestartModel::degree_power(&g, 0.6, 1.0, &Distribution::Uniform) {
            Err(Error::StabilityViolation(x)) => assert!((x - 1.2).abs() < 1e-15),
            other => panic!("expected stability violation, got {other:?}"),
        }
    }

    #[test]
    fn rwj_derives_alpha_and_v() {
        // Path with unit jump weights: alpha = (1/2, 2/3, 1/2), v uniform.
        let g = path3();
        let m = RestartModel::random_walk_jumps_uniform(&g, 1.0).unwrap();
        for (got, want) in m.alpha().iter().zip([0.5, 2.0 / 3.0, 0.5]) {
            assert!((got - want).abs() < 1e-15);
        }
        for &vi in m.v() {
            assert!((vi - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!(matches!(
            RestartModel::random_walk_jumps(&g, &[1.0, 0.0, 1.0]),
            Err(Error::NonpositiveJumpWeight { node: 1, .. })
        ));
    }

    #[test]
    fn custom_model_validates() {
        let g = path3();
        // alpha = 1 at a node is allowed at the model level.
        let m = RestartModel::custom(&g, vec![0.2, 1.0, 0.5], &Distribution::Uniform).unwrap();
        assert_eq!(m.max_alpha(), 1.0);
        assert!(matches!(
            RestartModel::custom(&g, vec![0.2, 1.2, 0.5], &Distribution::Uniform),
            Err(Error::AlphaOutOfRange { node: 1, .. })
        ));
        assert!(matches!(
            RestartModel::custom(&g, vec![0.2, 0.5], &Distribution::Uniform),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn distributions_resolve() {
        let g = Graph::from_edge_list_str("a b\nb c\n", false).unwrap();
        assert_eq!(
            Distribution::node("b").resolve(&g).unwrap(),
            vec![0.0, 1.0, 0.0]
        );
        let w = Distribution::Weights(vec![3.0, 1.0, 0.0]).resolve(&g).unwrap();
        assert_eq!(w, vec![0.75, 0.25, 0.0]);
        assert!(matches!(
            Distribution::node("zzz").resolve(&g),
            Err(Error::BadDistribution(_))
        ));
        assert!(matches!(
            Distribution::Weights(vec![0.0, 0.0, 0.0]).resolve(&g),
            Err(Error::BadDistribution(_))
        ));
        assert!(matches!(
            Distribution::Weights(vec![1.0, -1.0, 1.0]).resolve(&g),
            Err(Error::BadDistribution(_))
        ));
    }

    #[test]
    fn config_json_builds_models() {
        let g = Graph::from_edge_list_str("a b\nb c\n", false).unwrap();
        let m = RestartConfig::from_json_str(r#"{"kind": "constant", "alpha": 0.85}"#)
            .unwrap()
            .build(&g)
            .unwrap();
        assert_eq!(m.alpha(), &[0.85; 3]);
        let m = RestartConfig::from_json_str(
            r#"{"kind": "degree_power", "a": 0.1, "sigma": 1.0, "v": "node:b"}"#,
        )
        .unwrap()
        .build(&g)
        .unwrap();
        assert_eq!(m.v(), &[0.0, 1.0, 0.0]);
        let m = RestartConfig::from_json_str(r#"{"kind": "rwj", "a": [1.0, 2.0, 1.0]}"#)
            .unwrap()
            .build(&g)
            .unwrap();
        assert_eq!(m.v(), &[0.25, 0.5, 0.25]);
        let m = RestartConfig::from_json_str(
            r#"{"kind": "custom", "alpha": [0.2, 0.9, 0.5], "v": [1, 1, 2]}"#,
        )
        .unwrap()
        .build(&g)
        .unwrap();
        assert_eq!(m.v(), &[0.25, 0.25, 0.5]);
    }

    #[test]
    fn config_json_rejects_garbage() {
        assert!(matches!(
            RestartConfig::from_json_str(r#"{"kind": "nope"}"#),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            RestartConfig::from_json_str(r#"{"kind": "constant"}"#),
            Err(Error::Parse(_))
        ));
        let g = path3();
        let cfg =
            RestartConfig::from_json_str(r#"{"kind": "constant", "alpha": 0.5, "v": "node:"}"#)
                .unwrap();
        assert!(matches!(cfg.build(&g), Err(Error::Parse(_))));
    }

    #[test]
    fn augmented_matrix_is_stochastic_and_mixes_restart() {
        let g = path3();
        let m = RestartModel::custom(
            &g,
            vec![0.5, 0.8, 0.3],
            &Distribution::Weights(vec![1.0, 1.0, 2.0]),
        )
        .unwrap();
        let p = m.augmented_matrix(&g).unwrap();
        for s in p.row_sums() {
            assert!((s - 1.0).abs() < 1e-12);
        }
        // Row 0: alpha * P[0] + (1 - alpha) * v
        //      = 0.5 * (0, 1, 0) + 0.5 * (0.25, 0.25, 0.5).
        assert!((p.get(0, 0) - 0.125).abs() < 1e-15);
        assert!((p.get(0, 1) - 0.625).abs() < 1e-15);
        assert!((p.get(0, 2) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn sparse_restart_matches_dense_augmented() {
        let g = Graph::from_edges(&[(0, 1, 2.0), (1, 2, 1.0), (2, 3, 3.0), (3, 0, 1.0)], false)
            .unwrap();
        let m = RestartModel::custom(
            &g,
            vec![0.3, 0.9, 0.5, 0.7],
            &Distribution::Weights(vec![1.0, 2.0, 3.0, 4.0]),
        )
        .unwrap();
        let dense = m.augmented_matrix(&g).unwrap();
        let sparse = TransitionMatrix::SparseRestart {
            walk: g.walk_csr(),
            alpha: m.alpha().to_vec(),
            v: m.v().to_vec(),
        };
        for i in 0..4 {
            for j in 0..4 {
                assert!((dense.get(i, j) - sparse.get(i, j)).abs() < 1e-15);
            }
        }
        let x = [0.1, 0.2, 0.3, 0.4];
        let yd = dense.left_mul(&x);
        let ys = sparse.left_mul(&x);
        for j in 0..4 {
            assert!((yd[j] - ys[j]).abs() < 1e-15);
        }
    }

    #[test]
    fn rwj_closed_form_matches_assembly() {
        // Unweighted square plus a chord, uniform jumps.
        let g = Graph::from_edges(
            &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0), (0, 2, 1.0)],
            false,
        )
        .unwrap();
        let dev = rwj_transition_check(&g, &[0.7; 4]).unwrap();
        assert!(dev < 1e-15, "deviation {dev}");
        // Heterogeneous jumps on a weighted graph also reproduce exactly.
        let h = Graph::from_edges(&[(0, 1, 2.5), (1, 2, 0.5)], false).unwrap();
        let dev = rwj_transition_check(&h, &[0.3, 1.0, 2.0]).unwrap();
        assert!(dev < 1e-15, "deviation {dev}");
    }
}
