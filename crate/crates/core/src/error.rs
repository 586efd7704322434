//! Error type shared by the whole crate.

use thiserror::Error;

/// Everything that can go wrong while building graphs and models or
/// running the solvers.
#[derive(Debug, Error)]
#[non_exhaustive]
pub enum Error {
    /// An edge carried a negative, NaN, or infinite weight.
    #[error("edge weight must be nonnegative and finite: ({src}, {dst}) has weight {weight}")]
    BadWeight { src: usize, dst: usize, weight: f64 },

    /// The edge list was empty.
    #[error("graph has no edges")]
    EmptyGraph,

    /// A one-node graph without a self-loop has nowhere to send its walker.
    #[error("single-node graph without a self-loop cannot be made stochastic")]
    SingleNodeDangling,

    /// A vector did not match the node count of the graph.
    #[error("{what} has length {got}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    /// A continuation probability fell outside [0, 1].
    #[error("continuation probability out of range at node {node}: alpha = {value}, need 0 <= alpha <= 1")]
    AlphaOutOfRange { node: usize, value: f64 },

    /// A restart distribution was empty, negative somewhere, or summed to zero.
    #[error("invalid restart distribution: {0}")]
    BadDistribution(String),

    /// Degree-power model would produce alpha >= 1 somewhere.
    #[error("degree-power model unstable: a * max(degree^sigma) = {0} >= 1")]
    StabilityViolation(f64),

    /// Jump weights in the random-walk-with-jumps model must be positive.
    #[error("jump weight must be positive and finite: a[{node}] = {value}")]
    NonpositiveJumpWeight { node: usize, value: f64 },

    /// Exact solvers require max_i alpha_i < 1 so that I - AP is invertible.
    #[error("solver requires max alpha < 1, got alpha[{node}] = {value}")]
    SolverPrecondition { node: usize, value: f64 },

    /// An iterative solve ran out of iterations.
    #[error("no convergence after {iterations} iterations, last residual {residual:e}")]
    NoConvergence { iterations: usize, residual: f64 },

    /// The path-sum oracle is deliberately restricted to tiny inputs.
    #[error("path-sum oracle limited to {max_nodes} nodes and path length {max_len}")]
    OracleSizeExceeded { max_nodes: usize, max_len: usize },

    /// The operation materializes dense matrices and refuses large graphs.
    #[error("operation requires dense mode (n <= {max}), graph has {n} nodes")]
    DenseOnly { n: usize, max: usize },

    /// The operation is only defined for symmetric weight matrices.
    #[error("operation requires an undirected graph (symmetric weights)")]
    NotUndirected,

    /// Symmetry checks need 0 < alpha < 1 strictly.
    #[error("alpha[{node}] = {value} is on the boundary; this check needs 0 < alpha < 1")]
    AlphaBoundary { node: usize, value: f64 },

    /// The bare walk has several closed classes, so no unique stationary law.
    #[error("walk has {0} closed communicating classes; stationary distribution is not unique")]
    NonUniqueStationary(usize),

    /// A walk produced no restarts, so the restart-location estimate is undefined.
    #[error("no restarts observed; empirical restart-location estimate undefined")]
    NoRestartsObserved,

    /// Malformed input text (edge list or JSON config).
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
