//! Random-walk centrality with node-dependent restart.
//!
//! Classical personalized PageRank interrupts a graph walk with a fixed
//! probability `1 - alpha` per step and teleports it back to a restart
//! distribution `v`. This crate generalizes the restart probability to a
//! per-node vector and exposes the two scores that stop coinciding once
//! restarts depend on location:
//!
//! * the **occupation score** ([`solver::occupation_ppr`]): the long-run
//!   fraction of time the walk spends at each node, and
//! * the **restart-location score** ([`solver::location_ppr`]): the
//!   long-run distribution of the node the walk is at when a restart
//!   fires.
//!
//! Both reduce to rows of the resolvent `(I - A P)^{-1}` with
//! `A = diag(alpha)`, solved either densely by LU or by a fixed-point
//! sweep ([`solver`]). Restart models — constant damping, degree-power
//! restarts, random walks with jumps, or custom vectors — live in
//! [`restart`]; structural identities and small-`a` asymptotics in
//! [`identities`]; a step-by-step simulation oracle in [`montecarlo`];
//! deterministic test fixtures in [`fixtures`].
//!
//! ```
//! use restart_rank::fixtures::path_graph;
//! use restart_rank::restart::RestartModel;
//! use restart_rank::solver::{occupation_ppr, location_ppr, SolverConfig};
//!
//! let g = path_graph(3);
//! let m = RestartModel::random_walk_jumps_uniform(&g, 1.0).unwrap();
//! let cfg = SolverConfig::default();
//! let pi = occupation_ppr(&g, &m, &cfg).unwrap();
//! let rho = location_ppr(&g, &m, &cfg).unwrap();
//! // Jump walks have closed forms: pi = (d + a) / (sum d + sum a).
//! assert!((pi.values[1] - 3.0 / 7.0).abs() < 1e-12);
//! assert!((rho.values[1] - 1.0 / 3.0).abs() < 1e-12);
//! ```

pub mod error;
pub mod fixtures;
pub mod graph;
pub mod identities;
pub mod montecarlo;
pub mod restart;
pub mod solver;

pub use error::{Error, Result};
pub use graph::{Graph, TransitionMatrix, DENSE_LIMIT};
pub use restart::{Distribution, RestartConfig, RestartKind, RestartModel};
pub use solver::{Method, ScoreVector, SolveMode, SolverConfig};

// Re-exported so downstream code can name the dense matrices returned by
// `solver::expected_visits_matrix` and `identities::laurent_terms`.
pub use nalgebra;

/// Worker threads for the parallel paths (sampled symmetry checks,
/// Monte Carlo walkers): `RESTART_RANK_THREADS` when set to a positive
/// integer, otherwise the machine's available parallelism.
pub(crate) fn thread_budget() -> usize {
    std::env::var("RESTART_RANK_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&t| t >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|p| p.get())
                .unwrap_or(1)
        })
}
