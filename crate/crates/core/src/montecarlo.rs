//! Monte Carlo oracle: simulate the restart walk one transition at a
//! time and tally what the exact solvers predict in closed form.
//!
//! The walk starts from the restart distribution. At each step the walker
//! at node `i` restarts with probability `1 - alpha_i` (the node is
//! credited in `pre_restart_counts` and the walker re-draws its position
//! from `v`); otherwise it moves along an outgoing arc with probability
//! proportional to arc weight. Every transition credits the *arrival*
//! node in `occupation_counts`, so the occupation tallies sum to `steps`
//! exactly.
//!
//! Randomness comes from ChaCha12 seeded with a caller-supplied value;
//! parallel walkers share the seed and take RNG stream `0, 1, 2, ...` by
//! walker index, which keeps any walker count reproducible.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::restart::RestartModel;
use crate::solver::{Method, ScoreVector};

/// Tallies of one or more simulated walks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkStats {
    /// Transitions taken (restarts included).
    pub steps: u64,
    /// Arrivals per node; sums to `steps`.
    pub occupation_counts: Vec<u64>,
    /// Restarts fired per node (the node the walker was leaving);
    /// sums to `restarts`.
    pub pre_restart_counts: Vec<u64>,
    /// Total restarts fired.
    pub restarts: u64,
    /// Seeds of the merged-in walks, one entry per [`simulate`] call
    /// (parallel walkers share one seed and differ by RNG stream).
    pub seeds: Vec<u64>,
}

impl WalkStats {
    fn empty(n: usize) -> Self {
        WalkStats {
            steps: 0,
            occupation_counts: vec![0; n],
            pre_restart_counts: vec![0; n],
            restarts: 0,
            seeds: Vec::new(),
        }
    }

    /// Folds another tally into this one. Merging is associative and,
    /// apart from the order of the seed list, commutative.
    pub fn merge(&mut self, other: &WalkStats) -> Result<()> {
        if self.occupation_counts.len() != other.occupation_counts.len() {
            return Err(Error::DimensionMismatch {
                what: "walk statistics",
                got: other.occupation_counts.len(),
                expected: self.occupation_counts.len(),
            });
        }
        self.steps += other.steps;
        self.restarts += other.restarts;
        for (a, b) in self.occupation_counts.iter_mut().zip(&other.occupation_counts) {
            *a += b;
        }
        for (a, b) in self.pre_restart_counts.iter_mut().zip(&other.pre_restart_counts) {
            *a += b;
        }
        self.seeds.extend_from_slice(&other.seeds);
        Ok(())
    }
}

/// Cumulative-weight table for drawing an index in O(log k).
struct Sampler {
    cum: Vec<f64>,
    total: f64,
}

impl Sampler {
    fn from_weights<I: Iterator<Item = f64>>(weights: I) -> Self {
        let mut cum = Vec::new();
        let mut total = 0.0;
        for w in weights {
            total += w;
            cum.push(total);
        }
        Sampler { cum, total }
    }

    fn draw(&self, rng: &mut ChaCha12Rng) -> usize {
        let r = rng.random::<f64>() * self.total;
        // First position with cumulative weight > r; the clamp absorbs
        // round-off at the top end.
        self.cum
            .partition_point(|&c| c <= r)
            .min(self.cum.len() - 1)
    }
}

/// Runs `steps >= 1` transitions of the restart walk from RNG stream 0 of
/// `seed`. Unlike the exact solvers this accepts `alpha_i = 1` nodes; the
/// walker simply never restarts there.
pub fn simulate(g: &Graph, m: &RestartModel, steps: u64, seed: u64) -> Result<WalkStats> {
    let rng = ChaCha12Rng::seed_from_u64(seed);
    let mut stats = walk(g, m, steps, rng)?;
    stats.seeds = vec![seed];
    Ok(stats)
}

/// Runs `walkers` independent walks of `steps_per_walker` transitions
/// each and merges their tallies. Walker `k` uses RNG stream `k` of the
/// shared seed, so results do not depend on how walkers are scheduled
/// across threads; the thread count itself comes from
/// `RESTART_RANK_THREADS` (default: available parallelism).
pub fn simulate_walkers(
    g: &Graph,
    m: &RestartModel,
    steps_per_walker: u64,
    seed: u64,
    walkers: usize,
) -> Result<WalkStats> {
    assert!(walkers >= 1, "need at least one walker");
    let threads = crate::thread_budget().min(walkers);
    let per_walker: Vec<Result<(usize, WalkStats)>> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for t in 0..threads {
            handles.push(scope.spawn(move || {
                let mut batch = Vec::new();
                for k in (t..walkers).step_by(threads) {
                    let mut rng = ChaCha12Rng::seed_from_u64(seed);
                    rng.set_stream(k as u64);
                    batch.push(walk(g, m, steps_per_walker, rng).map(|s| (k, s)));
                }
                batch
            }));
        }
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("walker thread panicked"))
            .collect()
    });
    let mut ordered: Vec<Option<WalkStats>> = vec![None; walkers];
    for item in per_walker {
        let (k, stats) = item?;
        ordered[k] = Some(stats);
    }
    let mut merged = WalkStats::empty(g.node_count());
    for stats in ordered {
        merged.merge(&stats.expect("missing walker"))?;
    }
    merged.seeds = vec![seed];
    Ok(merged)
}

fn walk(g: &Graph, m: &RestartModel, steps: u64, mut rng: ChaCha12Rng) -> Result<WalkStats> {
    assert!(steps >= 1, "need at least one step");
    let n = g.node_count();
    if m.alpha().len() != n {
        return Err(Error::DimensionMismatch {
            what: "restart model",
            got: m.alpha().len(),
            expected: n,
        });
    }
    let restart_sampler = Sampler::from_weights(m.v().iter().copied());
    let arc_samplers: Vec<Sampler> = (0..n)
        .map(|i| Sampler::from_weights(g.neighbors(i).iter().map(|&(_, w)| w)))
        .collect();
    let mut stats = WalkStats::empty(n);
    stats.steps = steps;
    let mut position = restart_sampler.draw(&mut rng);
    for _ in 0..steps {
        if rng.random::<f64>() < 1.0 - m.alpha()[position] {
            stats.pre_restart_counts[position] += 1;
            stats.restarts += 1;
            position = restart_sampler.draw(&mut rng);
        } else {
            let pick = arc_samplers[position].draw(&mut rng);
            position = g.neighbors(position)[pick].0;
        }
        stats.occupation_counts[position] += 1;
    }
    Ok(stats)
}

/// Empirical occupation score `occupation_counts / steps`. The residual
/// field carries the sampling scale `1 / sqrt(steps)`.
pub fn empirical_pi(stats: &WalkStats) -> ScoreVector {
    assert!(stats.steps > 0, "no steps recorded");
    let values = stats
        .occupation_counts
        .iter()
        .map(|&c| c as f64 / stats.steps as f64)
        .collect();
    ScoreVector::new(values, Method::MonteCarlo, 1.0 / (stats.steps as f64).sqrt())
}

/// Empirical restart-location score `pre_restart_counts / restarts`.
pub fn empirical_rho(stats: &WalkStats) -> Result<ScoreVector> {
    if stats.restarts == 0 {
        return Err(Error::NoRestartsObserved);
    }
    let values = stats
        .pre_restart_counts
        .iter()
        .map(|&c| c as f64 / stats.restarts as f64)
        .collect();
    Ok(ScoreVector::new(
        values,
        Method::MonteCarlo,
        1.0 / (stats.restarts as f64).sqrt(),
    ))
}

/// Observed fraction of steps that were restarts; converges to
/// `sum_j (1 - alpha_j) pi_j` almost surely.
pub fn restart_fraction(stats: &WalkStats) -> f64 {
    assert!(stats.steps > 0, "no steps recorded");
    stats.restarts as f64 / stats.steps as f64
}
