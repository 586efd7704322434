//! Exact solvers for the restart walk.
//!
//! Everything here reduces to one linear system. Writing `A = diag(alpha)`
//! and `P` for the walk matrix, the expected number of visits to `j`
//! before the first restart, starting from `i`, is the resolvent
//! `N = (I - A P)^{-1}`. The occupation score is the stationary law of the
//! augmented chain, recovered by normalizing `v^T N`; the restart-location
//! score reweights the same row by the restart probabilities,
//! `rho = v^T N (I - A)`, and needs no normalization; the expected time
//! between restarts is the row sum `v^T N 1`.
//!
//! `max_i alpha_i < 1` keeps `||A P||_inf < 1`, so the system is always
//! solvable and the fixed-point iteration `x <- rhs + x A P` is a
//! contraction. Residuals are reported in the L1 norm; the true L1 error
//! of a solve is at most `residual / (1 - max alpha)`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, TransitionMatrix, DENSE_LIMIT};
use crate::restart::RestartModel;

/// Route selection for the linear solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    /// Dense direct up to [`DENSE_LIMIT`] nodes, fixed-point above.
    Auto,
    /// Force the dense LU route (errors above [`DENSE_LIMIT`]).
    Dense,
    /// Force the fixed-point route regardless of size.
    Iterative,
}

/// Tolerances shared by all solver entry points.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// L1 residual target for iterative routes.
    pub tolerance: f64,
    /// Iteration cap before giving up with `NoConvergence`.
    pub max_iterations: usize,
    pub mode: SolveMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tolerance: 1e-12,
            max_iterations: 100_000,
            mode: SolveMode::Auto,
        }
    }
}

impl SolverConfig {
    pub fn with_mode(mode: SolveMode) -> Self {
        SolverConfig { mode, ..Self::default() }
    }
}

/// How a score vector was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    DenseDirect,
    FixedPoint,
    PowerIteration,
    ClosedForm,
    MonteCarlo,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::DenseDirect => "dense_direct",
            Method::FixedPoint => "fixed_point",
            Method::PowerIteration => "power_iteration",
            Method::ClosedForm => "closed_form",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

/// A per-node score vector with solve provenance. Negative round-off is
/// clamped to zero at construction; nothing else is rescaled.
#[derive(Debug, Clone, Serialize)]
pub struct ScoreVector {
    pub values: Vec<f64>,
    pub method: Method,
    /// L1 residual of the underlying solve (0 for closed forms; for
    /// Monte Carlo this is the standard-error scale `1/sqrt(steps)`).
    pub residual: f64,
}

impl ScoreVector {
    pub(crate) fn new(mut values: Vec<f64>, method: Method, residual: f64) -> Self {
        for v in &mut values {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        ScoreVector { values, method, residual }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Largest absolute componentwise difference.
    pub fn max_abs_diff(&self, other: &ScoreVector) -> f64 {
        assert_eq!(self.len(), other.len(), "score vectors differ in length");
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Result of one resolvent solve `x^T = rhs^T (I - A P)^{-1}`.
#[derive(Debug, Clone)]
pub struct Resolvent {
    pub x: Vec<f64>,
    /// L1 norm of `rhs + x A P - x` for the returned iterate.
    pub residual: f64,
    pub method: Method,
}

fn check_model(g: &Graph, m: &RestartModel) -> Result<()> {
    if m.alpha().len() != g.node_count() {
        return Err(Error::DimensionMismatch {
            what: "restart model",
            got: m.alpha().len(),
            expected: g.node_count(),
        });
    }
    Ok(())
}

fn check_solvable(m: &RestartModel) -> Result<()> {
    for (i, &a) in m.alpha().iter().enumerate() {
        if a >= 1.0 {
            return Err(Error::SolverPrecondition { node: i, value: a });
        }
    }
    Ok(())
}

/// One application of the affine map `x -> rhs + x A P`.
fn resolvent_step(g: &Graph, alpha: &[f64], rhs: &[f64], x: &[f64]) -> Vec<f64> {
    let mut y = rhs.to_vec();
    for i in 0..g.node_count() {
        let s = x[i] * alpha[i] / g.out_weight(i);
        if s != 0.0 {
            for &(j, w) in g.neighbors(i) {
                y[j] += s * w;
            }
        }
    }
    y
}

fn l1_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn dense_resolvent(g: &Graph, alpha: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = g.node_count();
    // Solve the transposed system (I - A P)^T x = rhs by LU.
    let mut mt = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        let scale = alpha[i] / g.out_weight(i);
        for &(j, w) in g.neighbors(i) {
            mt[(j, i)] -= scale * w;
        }
    }
    let x = mt
        .lu()
        .solve(&DVector::from_column_slice(rhs))
        .expect("I - AP is nonsingular when max alpha < 1");
    x.as_slice().to_vec()
}

fn iterative_resolvent(
    g: &Graph,
    alpha: &[f64],
    rhs: &[f64],
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, f64)> {
    let mut x = rhs.to_vec();
    let mut last = f64::INFINITY;
    for _ in 0..cfg.max_iterations {
        let y = resolvent_step(g, alpha, rhs, &x);
        let diff = l1_diff(&y, &x);
        x = y;
        if diff <= cfg.tolerance {
            // Report the residual of the iterate we actually return.
            let z = resolvent_step(g, alpha, rhs, &x);
            let residual = l1_diff(&z, &x);
            return Ok((x, residual));
        }
        last = diff;
    }
    Err(Error::NoConvergence {
        iterations: cfg.max_iterations,
        residual: last,
    })
}

/// Solves `x^T (I - A P) = rhs^T` for a single row vector.
///
/// This is the workhorse behind every score: `rhs = v` gives the expected
/// visit counts of the restart walk between consecutive restarts, and
/// `rhs = e_i` gives the visit counts started deterministically at `i`.
pub fn resolvent_row(
    g: &Graph,
    m: &RestartModel,
    rhs: &[f64],
    cfg: &SolverConfig,
) -> Result<Resolvent> {
    check_model(g, m)?;
    check_solvable(m)?;
    let n = g.node_count();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch {
            what: "right-hand side",
            got: rhs.len(),
            expected: n,
        });
    }
    let dense = match cfg.mode {
        SolveMode::Dense => {
            if n > DENSE_LIMIT {
                return Err(Error::DenseOnly { n, max: DENSE_LIMIT });
            }
            true
        }
        SolveMode::Auto => n <= DENSE_LIMIT,
        SolveMode::Iterative => false,
    };
    if dense {
        let x = dense_resolvent(g, m.alpha(), rhs);
        let check = resolvent_step(g, m.alpha(), rhs, &x);
        let residual = l1_diff(&check, &x);
        Ok(Resolvent { x, residual, method: Method::DenseDirect })
    } else {
        let (x, residual) = iterative_resolvent(g, m.alpha(), rhs, cfg)?;
        Ok(Resolvent { x, residual, method: Method::FixedPoint })
    }
}

/// Both scores from a single resolvent solve: `(occupation, location)`.
/// Cheaper than calling [`occupation_ppr`] and [`location_ppr`]
/// separately, which each solve the same system.
pub fn scores(
    g: &Graph,
    m: &RestartModel,
    cfg: &SolverConfig,
) -> Result<(ScoreVector, ScoreVector)> {
    let r = resolvent_row(g, m, m.v(), cfg)?;
    let total: f64 = r.x.iter().sum();
    let pi = r.x.iter().map(|&xi| xi / total).collect();
    let rho: Vec<f64> = r
        .x
        .iter()
        .zip(m.alpha())
        .map(|(&xi, &ai)| xi * (1.0 - ai))
        .collect();
    let rho_sum: f64 = rho.iter().sum();
    // One restart per excursion makes the location mass exactly 1; allow
    // the solve error (residual / (1 - max alpha)) plus a round-off floor.
    let slack = 2.0 * (r.residual / (1.0 - m.max_alpha())).max(1e-10);
    assert!(
        (rho_sum - 1.0).abs() <= slack,
        "restart-location mass {rho_sum} strayed from 1 beyond {slack:e}"
    );
    Ok((
        ScoreVector::new(pi, r.method, r.residual),
        ScoreVector::new(rho, r.method, r.residual),
    ))
}

/// Occupation-time score: the long-run fraction of steps the augmented
/// walk spends at each node. Computed as `v^T N` normalized to sum 1.
pub fn occupation_ppr(g: &Graph, m: &RestartModel, cfg: &SolverConfig) -> Result<ScoreVector> {
    Ok(scores(g, m, cfg)?.0)
}

/// Occupation-time score by normalized left power iteration on the
/// augmented chain, `x <- x P~`, stopping at L1 successive difference
/// `<= cfg.tolerance`. Independent of the resolvent route, hence useful
/// as a cross-check; the augmented matrix is applied in factored form and
/// never materialized.
pub fn occupation_ppr_power(
    g: &Graph,
    m: &RestartModel,
    cfg: &SolverConfig,
) -> Result<ScoreVector> {
    check_model(g, m)?;
    check_solvable(m)?;
    let chain = TransitionMatrix::SparseRestart {
        walk: g.walk_csr(),
        alpha: m.alpha().to_vec(),
        v: m.v().to_vec(),
    };
    let mut x = m.v().to_vec();
    let mut last = f64::INFINITY;
    for _ in 0..cfg.max_iterations {
        let mut y = chain.left_mul(&x);
        let total: f64 = y.iter().sum();
        for yi in &mut y {
            *yi /= total;
        }
        let diff = l1_diff(&y, &x);
        x = y;
        if diff <= cfg.tolerance {
            return Ok(ScoreVector::new(x, Method::PowerIteration, diff));
        }
        last = diff;
    }
    Err(Error::NoConvergence {
        iterations: cfg.max_iterations,
        residual: last,
    })
}

/// Restart-location score: the long-run distribution of the node the walk
/// occupies when a restart fires, `rho = v^T N (I - A)`. Sums to 1 by
/// itself (each excursion restarts exactly once), which [`scores`]
/// asserts rather than enforcing.
pub fn location_ppr(g: &Graph, m: &RestartModel, cfg: &SolverConfig) -> Result<ScoreVector> {
    Ok(scores(g, m, cfg)?.1)
}

/// Expected number of steps between restarts when excursions start from
/// the distribution `from`; equals the resolvent row sum. For constant
/// alpha this is the geometric mean time `1 / (1 - alpha)` regardless of
/// the graph.
pub fn expected_restart_time(
    g: &Graph,
    m: &RestartModel,
    from: &[f64],
    cfg: &SolverConfig,
) -> Result<f64> {
    let r = resolvent_row(g, m, from, cfg)?;
    Ok(r.x.iter().sum())
}

/// The full expected-visits matrix `N = (I - A P)^{-1}`: `N[(i, j)]` is
/// the expected number of visits to `j` strictly before the first restart,
/// starting at `i` (the start counts as a visit, so the diagonal is >= 1).
/// Materializes an `n x n` dense matrix, so only graphs up to
/// [`DENSE_LIMIT`] are accepted; `cfg.mode` picks between one LU inversion
/// and `n` fixed-point solves.
pub fn expected_visits_matrix(
    g: &Graph,
    m: &RestartModel,
    cfg: &SolverConfig,
) -> Result<DMatrix<f64>> {
    check_model(g, m)?;
    check_solvable(m)?;
    let n = g.node_count();
    if n > DENSE_LIMIT {
        return Err(Error::DenseOnly { n, max: DENSE_LIMIT });
    }
    let mut out = DMatrix::<f64>::zeros(n, n);
    match cfg.mode {
        SolveMode::Iterative => {
            let mut rhs = vec![0.0; n];
            for i in 0..n {
                rhs[i] = 1.0;
                let (x, _) = iterative_resolvent(g, m.alpha(), &rhs, cfg)?;
                rhs[i] = 0.0;
                for j in 0..n {
                    out[(i, j)] = x[j].max(0.0);
                }
            }
        }
        SolveMode::Auto | SolveMode::Dense => {
            let mut mat = DMatrix::<f64>::identity(n, n);
            for i in 0..n {
                let scale = m.alpha()[i] / g.out_weight(i);
                for &(j, w) in g.neighbors(i) {
                    mat[(i, j)] -= scale * w;
                }
            }
            let inv = mat
                .lu()
                .try_inverse()
                .expect("I - AP is nonsingular when max alpha < 1");
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] = inv[(i, j)].max(0.0);
                }
            }
        }
    }
    Ok(out)
}

/// Size guards for [`path_sum_oracle`].
pub const ORACLE_MAX_NODES: usize = 8;
pub const ORACLE_MAX_LEN: usize = 64;

/// Brute-force estimate of `N[(source, target)]` that never touches
/// linear algebra: it sums, level by level, the weight
/// `prod alpha_u P(u, u')` of every walk of length `<= k_max` from
/// `source` to `target`. Deliberately restricted to tiny inputs; the
/// truncation error is at most `max_alpha^(k_max + 1) / (1 - max_alpha)`.
pub fn path_sum_oracle(
    g: &Graph,
    m: &RestartModel,
    source: usize,
    target: usize,
    k_max: usize,
) -> Result<f64> {
    check_model(g, m)?;
    let n = g.node_count();
    if n > ORACLE_MAX_NODES || k_max > ORACLE_MAX_LEN {
        return Err(Error::OracleSizeExceeded {
            max_nodes: ORACLE_MAX_NODES,
            max_len: ORACLE_MAX_LEN,
        });
    }
    assert!(source < n && target < n, "oracle endpoints out of range");
    // weight[u] holds the total weight of all length-k walks source -> u;
    // extending every walk by one arc advances the level.
    let mut weight = vec![0.0; n];
    weight[source] = 1.0;
    let mut total = if source == target { 1.0 } else { 0.0 };
    for _ in 1..=k_max {
        let mut next = vec![0.0; n];
        for (u, &wu) in weight.iter().enumerate() {
            if wu != 0.0 {
                let s = wu * m.alpha()[u] / g.out_weight(u);
                for &(z, w) in g.neighbors(u) {
                    next[z] += s * w;
                }
            }
        }
        weight = next;
        total += weight[target];
    }
    Ok(total)
}

/// Closed-form scores for the random-walk-with-jumps model on an
/// undirected graph with jump weights `a`:
/// `pi_j = (d_j + a_j) / (sum_k d_k + sum_k a_k)` and
/// `rho_j = a_j / sum_k a_k`. Returns `(occupation, location)`.
pub fn rwj_closed_form(g: &Graph, a: &[f64]) -> Result<(ScoreVector, ScoreVector)> {
    if !g.is_symmetric() {
        return Err(Error::NotUndirected);
    }
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
    let jump_total: f64 = a.iter().sum();
    let grand_total = g.total_weight() + jump_total;
    let pi = (0..n).map(|j| (g.out_weight(j) + a[j]) / grand_total).collect();
    let rho = a.iter().map(|&aj| aj / jump_total).collect();
    Ok((
        ScoreVector::new(pi, Method::ClosedForm, 0.0),
        ScoreVector::new(rho, Method::ClosedForm, 0.0),
    ))
}
