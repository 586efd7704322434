//! Structural identities of the restart walk, checked numerically.
//!
//! On an undirected graph the expected-visit counts obey a reciprocity
//! law, `d_i N_ij / alpha_i = d_j N_ji / alpha_j`, which surfaces as two
//! symmetry relations between personalized scores:
//!
//! * occupation: `(d_i / (alpha_i K_i)) pi_j(i) = (d_j / (alpha_j K_j)) pi_i(j)`
//!   with `K_i` the reciprocal expected restart time from `i`,
//! * location: `((1-alpha_i)/alpha_i) d_i rho_j(i) = ((1-alpha_j)/alpha_j) d_j rho_i(j)`,
//!
//! where `pi(i)`, `rho(i)` are the scores personalized to restart at `i`.
//! Both degenerate into `0 = 0` or divide by zero on the alpha boundary,
//! so the checks insist on `0 < alpha < 1`.
//!
//! The degree-power family `1 - alpha_i = a d_i^sigma` admits a small-`a`
//! expansion `(I - A P)^{-1} = X_{-1}/a + X_0 + O(a)` whose terms are
//! computed here, together with the limiting scores it implies.

use nalgebra::DMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, DENSE_LIMIT};
use crate::restart::RestartModel;
use crate::solver::{
    expected_visits_matrix, location_ppr, occupation_ppr, Method, ScoreVector, SolveMode,
    SolverConfig,
};

/// Above this many nodes the symmetry checks sample pairs instead of
/// sweeping all of them.
pub const SYMMETRY_EXACT_LIMIT: usize = 500;

/// Pairs drawn in sampled mode, from a fixed internal seed so repeated
/// runs check the same pairs.
pub const SYMMETRY_SAMPLE_PAIRS: usize = 1000;

const SYMMETRY_SAMPLE_SEED: u64 = 0x5b3a_9c41;

/// Outcome of a symmetry sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SymmetryReport {
    /// Number of unordered node pairs compared.
    pub pairs_checked: usize,
    /// Largest absolute difference between the two sides.
    pub max_abs_deviation: f64,
    /// The pair attaining it.
    pub worst_pair: (usize, usize),
    /// Whether pairs were sampled rather than enumerated.
    pub sampled: bool,
}

enum Relation {
    Occupation,
    Location,
}

/// Checks the occupation-score symmetry relation on an undirected graph.
/// The model only contributes `alpha`; both sides re-personalize the
/// restart distribution to single nodes.
pub fn check_occupation_symmetry(
    g: &Graph,
    m: &RestartModel,
    cfg: &SolverConfig,
) -> Result<SymmetryReport> {
    check_symmetry(g, m, cfg, Relation::Occupation)
}

/// Checks the restart-location symmetry relation on an undirected graph.
pub fn check_location_symmetry(
    g: &Graph,
    m: &RestartModel,
    cfg: &SolverConfig,
) -> Result<SymmetryReport> {
    check_symmetry(g, m, cfg, Relation::Location)
}

fn check_symmetry(
    g: &Graph,
    m: &RestartModel,
    cfg: &SolverConfig,
    relation: Relation,
) -> Result<SymmetryReport> {
    if !g.is_symmetric() {
        return Err(Error::NotUndirected);
    }
    for (i, &a) in m.alpha().iter().enumerate() {
        if a <= 0.0 || a >= 1.0 {
            return Err(Error::AlphaBoundary { node: i, value: a });
        }
    }
    let n = g.node_count();
    // side(i, row_i) where row_i = e_i^T N: the weighted personalized
    // score of j when restarting at i.
    let side = |i: usize, row: &[f64], j: usize| -> f64 {
        let alpha = m.alpha();
        match relation {
            Relation::Occupation => {
                let row_sum: f64 = row.iter().sum();
                let k_i = 1.0 / row_sum; // reciprocal mean restart time
                let pi_j = row[j] / row_sum;
                g.out_weight(i) / (alpha[i] * k_i) * pi_j
            }
            Relation::Location => {
                let rho_j = row[j] * (1.0 - alpha[j]);
                (1.0 - alpha[i]) / alpha[i] * g.out_weight(i) * rho_j
            }
        }
    };
    let mut report = SymmetryReport {
        pairs_checked: 0,
        max_abs_deviation: 0.0,
        worst_pair: (0, 0),
        sampled: n > SYMMETRY_EXACT_LIMIT,
    };
    let record = |i: usize, j: usize, dev: f64, report: &mut SymmetryReport| {
        report.pairs_checked += 1;
        if dev > report.max_abs_deviation {
            report.max_abs_deviation = dev;
            report.worst_pair = (i, j);
        }
    };
    if !report.sampled {
        let nmat = expected_visits_matrix(g, m, cfg)?;
        let rows: Vec<Vec<f64>> = (0..n).map(|i| nmat.row(i).iter().copied().collect()).collect();
        for i in 0..n {
            for j in i + 1..n {
                let dev = (side(i, &rows[i], j) - side(j, &rows[j], i)).abs();
                record(i, j, dev, &mut report);
            }
        }
    } else {
        let mut rng = ChaCha12Rng::seed_from_u64(SYMMETRY_SAMPLE_SEED);
        let mut pairs = Vec::with_capacity(SYMMETRY_SAMPLE_PAIRS);
        while pairs.len() < SYMMETRY_SAMPLE_PAIRS {
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            if i != j {
                pairs.push((i, j));
            }
        }
        let mut sources: Vec<usize> = pairs.iter().flat_map(|&(i, j)| [i, j]).collect();
        sources.sort_unstable();
        sources.dedup();
        let rows = personalized_rows(g, m, cfg, &sources)?;
        let row_of = |node: usize| &rows[sources.binary_search(&node).unwrap()];
        for &(i, j) in &pairs {
            let dev = (side(i, row_of(i), j) - side(j, row_of(j), i)).abs();
            record(i, j, dev, &mut report);
        }
    }
    Ok(report)
}

/// Resolvent rows `e_s^T N` for the requested source nodes. Dense graphs
/// factor `(I - A P)^T` once and back-substitute per source; larger ones
/// run fixed-point solves across a thread pool.
/// Resolvent rows tagged with the source they belong to, as produced by
/// one worker thread.
type TaggedRows = Vec<(usize, Vec<f64>)>;

fn personalized_rows(
    g: &Graph,
    m: &RestartModel,
    cfg: &SolverConfig,
    sources: &[usize],
) -> Result<Vec<Vec<f64>>> {
    let n = g.node_count();
    if n <= DENSE_LIMIT && cfg.mode != SolveMode::Iterative {
        let mut mt = DMatrix::<f64>::identity(n, n);
        for i in 0..n {
            let scale = m.alpha()[i] / g.out_weight(i);
            for &(j, w) in g.neighbors(i) {
                mt[(j, i)] -= scale * w;
            }
        }
        let lu = mt.lu();
        let mut rows = Vec::with_capacity(sources.len());
        for &s in sources {
            let mut e = nalgebra::DVector::<f64>::zeros(n);
            e[s] = 1.0;
            let x = lu.solve(&e).expect("I - AP is nonsingular when max alpha < 1");
            rows.push(x.as_slice().to_vec());
        }
        Ok(rows)
    } else {
        let threads = crate::thread_budget().min(sources.len().max(1));
        let results: Vec<Result<TaggedRows>> = std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for t in 0..threads {
                let chunk: Vec<usize> =
                    sources.iter().copied().skip(t).step_by(threads).collect();
                handles.push(scope.spawn(move || {
                    let mut out = Vec::with_capacity(chunk.len());
                    for s in chunk {
                        let mut e = vec![0.0; n];
                        e[s] = 1.0;
                        let r = crate::solver::resolvent_row(g, m, &e, cfg)?;
                        out.push((s, r.x));
                    }
                    Ok(out)
                }));
            }
            handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
        });
        let mut by_source: Vec<Option<Vec<f64>>> = vec![None; sources.len()];
        for batch in results {
            for (s, row) in batch? {
                by_source[sources.binary_search(&s).unwrap()] = Some(row);
            }
        }
        Ok(by_source.into_iter().map(|r| r.expect("missing solve")).collect())
    }
}

/// Largest componentwise gap between the restart-location score and the
/// occupation score reweighted by restart probability,
/// `rho_j = pi_j (1 - alpha_j) / sum_i pi_i (1 - alpha_i)`.
/// Holds on any graph, directed or not.
pub fn rho_pi_relation_check(g: &Graph, m: &RestartModel, cfg: &SolverConfig) -> Result<f64> {
    let pi = occupation_ppr(g, m, cfg)?;
    let rho = location_ppr(g, m, cfg)?;
    Ok(rho_pi_gap(m, &pi, &rho))
}

/// The gap of the relation above for already-computed scores.
pub fn rho_pi_gap(m: &RestartModel, pi: &ScoreVector, rho: &ScoreVector) -> f64 {
    let weighted: Vec<f64> = pi
        .values
        .iter()
        .zip(m.alpha())
        .map(|(&p, &a)| p * (1.0 - a))
        .collect();
    let total: f64 = weighted.iter().sum();
    weighted
        .iter()
        .zip(&rho.values)
        .fold(0.0f64, |worst, (&w, &r)| worst.max((w / total - r).abs()))
}

/// Stationary distribution `xi` of the bare walk matrix `P`, by state
/// elimination (GTH), which uses no subtractions and is accurate to
/// machine precision. Transient nodes (outside the unique closed class)
/// get exactly 0. Errors with `NonUniqueStationary` when several closed
/// classes exist.
pub fn walk_stationary(g: &Graph) -> Result<Vec<f64>> {
    let n = g.node_count();
    if n > DENSE_LIMIT {
        return Err(Error::DenseOnly { n, max: DENSE_LIMIT });
    }
    let closed = closed_class(g)?;
    let k = closed.len();
    // Restrict P to the closed class; rows stay stochastic because no
    // arc leaves a closed class.
    let mut sub = DMatrix::<f64>::zeros(k, k);
    let mut position = vec![usize::MAX; n];
    for (idx, &node) in closed.iter().enumerate() {
        position[node] = idx;
    }
    for (idx, &node) in closed.iter().enumerate() {
        let d = g.out_weight(node);
        for &(j, w) in g.neighbors(node) {
            sub[(idx, position[j])] += w / d;
        }
    }
    let local = gth(&mut sub);
    let mut xi = vec![0.0; n];
    for (idx, &node) in closed.iter().enumerate() {
        xi[node] = local[idx];
    }
    Ok(xi)
}

/// GTH state elimination on an irreducible stochastic matrix (destroyed
/// in place). Returns the normalized stationary vector.
fn gth(p: &mut DMatrix<f64>) -> Vec<f64> {
    let k = p.nrows();
    for m in (1..k).rev() {
        let s: f64 = (0..m).map(|j| p[(m, j)]).sum();
        for i in 0..m {
            p[(i, m)] /= s;
        }
        for i in 0..m {
            let f = p[(i, m)];
            if f != 0.0 {
                for j in 0..m {
                    p[(i, j)] += f * p[(m, j)];
                }
            }
        }
    }
    let mut x = vec![0.0; k];
    x[0] = 1.0;
    for m in 1..k {
        x[m] = (0..m).map(|i| x[i] * p[(i, m)]).sum();
    }
    let total: f64 = x.iter().sum();
    for xi in &mut x {
        *xi /= total;
    }
    x
}

/// Nodes of the unique closed communicating class of the walk, or
/// `NonUniqueStationary` if there are several.
fn closed_class(g: &Graph) -> Result<Vec<usize>> {
    let n = g.node_count();
    let comp = strongly_connected_components(g);
    let classes = 1 + comp.iter().copied().max().unwrap_or(0);
    let mut is_closed = vec![true; classes];
    for i in 0..n {
        for &(j, _) in g.neighbors(i) {
            if comp[i] != comp[j] {
                is_closed[comp[i]] = false;
            }
        }
    }
    let closed_ids: Vec<usize> =
        (0..classes).filter(|&c| is_closed[c]).collect();
    if closed_ids.len() != 1 {
        return Err(Error::NonUniqueStationary(closed_ids.len()));
    }
    let target = closed_ids[0];
    Ok((0..n).filter(|&i| comp[i] == target).collect())
}

/// Strongly connected components by Kosaraju's two passes, iterative so
/// deep graphs cannot overflow the stack. Returns a component id per node.
fn strongly_connected_components(g: &Graph) -> Vec<usize> {
    let n = g.node_count();
    // Pass 1: finish order on the forward graph.
    let mut finish = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        seen[start] = true;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            if *next < g.neighbors(node).len() {
                let (child, _) = g.neighbors(node)[*next];
                *next += 1;
                if !seen[child] {
                    seen[child] = true;
                    stack.push((child, 0));
                }
            } else {
                finish.push(node);
                stack.pop();
            }
        }
    }
    // Pass 2: sweep the reverse graph in reverse finish order.
    let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for &(j, _) in g.neighbors(i) {
            reverse[j].push(i);
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut classes = 0;
    for &start in finish.iter().rev() {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        comp[start] = classes;
        while let Some(node) = stack.pop() {
            for &prev in &reverse[node] {
                if comp[prev] == usize::MAX {
                    comp[prev] = classes;
                    stack.push(prev);
                }
            }
        }
        classes += 1;
    }
    comp
}

/// Leading terms of the resolvent expansion for the degree-power family:
/// with `A = I - a D^sigma`,
/// `(I - A P)^{-1} = x_minus_one / a + x_zero + O(a)` as `a -> 0`.
#[derive(Debug, Clone)]
pub struct LaurentTerms {
    /// The exponent the terms were computed for; the expansion parameter
    /// is the restart coefficient `a`.
    pub sigma: f64,
    /// Stationary distribution of the bare walk.
    pub xi: Vec<f64>,
    /// Fundamental deviation matrix `H = (I - P + 1 xi^T)^{-1} - 1 xi^T`.
    pub fundamental: DMatrix<f64>,
    /// Pole term `1 xi^T / (xi^T D^sigma 1)`.
    pub x_minus_one: DMatrix<f64>,
    /// Constant term `(I - X_{-1} T_1) H (I - T_1 X_{-1})` with `T_1 = D^sigma P`.
    pub x_zero: DMatrix<f64>,
}

/// Computes [`LaurentTerms`] for a graph whose bare walk has a unique
/// stationary law. Dense-only.
pub fn laurent_terms(g: &Graph, sigma: f64) -> Result<LaurentTerms> {
    let n = g.node_count();
    if n > DENSE_LIMIT {
        return Err(Error::DenseOnly { n, max: DENSE_LIMIT });
    }
    let xi = walk_stationary(g)?;
    let p = g
        .transition_matrix()
        .as_dense()
        .expect("size-guarded graphs yield dense walk matrices")
        .clone();
    let ones_xi = DMatrix::<f64>::from_fn(n, n, |_, j| xi[j]);
    let inv = (DMatrix::<f64>::identity(n, n) - &p + &ones_xi)
        .lu()
        .try_inverse()
        .expect("I - P + 1 xi^T is nonsingular for a unichain walk");
    let fundamental = &inv - &ones_xi;
    // T_1 = D^sigma P, the first-order term of A P in a.
    let mut t1 = p;
    for i in 0..n {
        let scale = g.out_weight(i).powf(sigma);
        for j in 0..n {
            t1[(i, j)] *= scale;
        }
    }
    let denom: f64 = (0..n).map(|i| xi[i] * g.out_weight(i).powf(sigma)).sum();
    let x_minus_one = ones_xi / denom;
    let id = DMatrix::<f64>::identity(n, n);
    let x_zero = (&id - &x_minus_one * &t1) * &fundamental * (&id - &t1 * &x_minus_one);
    Ok(LaurentTerms {
        sigma,
        xi,
        fundamental,
        x_minus_one,
        x_zero,
    })
}

/// Small-`a` limits of the degree-power family on an undirected graph:
/// occupation tends to `d / sum(d)`, restart location to
/// `d^{1+sigma} / sum(d^{1+sigma})`, and the expected restart time grows
/// like `restart_time_coefficient / a`.
#[derive(Debug, Clone)]
pub struct DegreePowerLimits {
    pub pi: ScoreVector,
    pub rho: ScoreVector,
    pub restart_time_coefficient: f64,
}

/// Computes [`DegreePowerLimits`]; requires a symmetric weight matrix
/// with a single component, where the walk's stationary law is the
/// degree distribution.
pub fn degree_power_asymptotics(g: &Graph, sigma: f64) -> Result<DegreePowerLimits> {
    if !g.is_symmetric() {
        return Err(Error::NotUndirected);
    }
    // A second closed class would split the stationary law and void the
    // degree formulas; reuse the class analysis to reject that early.
    let _ = closed_class(g)?;
    let n = g.node_count();
    let degree_total = g.total_weight();
    let power_total: f64 = (0..n).map(|i| g.out_weight(i).powf(1.0 + sigma)).sum();
    let pi = (0..n).map(|i| g.out_weight(i) / degree_total).collect();
    let rho = (0..n)
        .map(|i| g.out_weight(i).powf(1.0 + sigma) / power_total)
        .collect();
    Ok(DegreePowerLimits {
        pi: ScoreVector::new(pi, Method::ClosedForm, 0.0),
        rho: ScoreVector::new(rho, Method::ClosedForm, 0.0),
        restart_time_coefficient: degree_total / power_total,
    })
}
