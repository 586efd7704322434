//! Acceptance battery: one test per release criterion, each printing a
//! single PASS line with the measured worst-case deviation (run with
//! `--nocapture` to see them) and failing loudly when a tolerance is
//! exceeded. Everything is seeded, so reruns measure identical numbers.

use std::collections::HashMap;
use std::path::Path;
use std::process::{Command, Output};

use restart_rank::fixtures::{
    complete_graph, cycle_graph, path_graph, random_alpha, random_connected,
    random_distribution, random_graph, star_graph,
};
use restart_rank::graph::Graph;
use restart_rank::identities::{
    check_location_symmetry, check_occupation_symmetry, degree_power_asymptotics, laurent_terms,
    rho_pi_gap,
};
use restart_rank::montecarlo::{empirical_pi, empirical_rho, restart_fraction, simulate};
use restart_rank::nalgebra::{DMatrix, DVector};
use restart_rank::restart::{Distribution, RestartModel};
use restart_rank::solver::{
    expected_restart_time, expected_visits_matrix, occupation_ppr_power, path_sum_oracle,
    rwj_closed_form, scores, SolverConfig,
};

/// Asserts `worst <= tol` and prints the criterion's PASS line.
fn gate(name: &str, detail: &str, worst: f64, tol: f64) {
    assert!(
        worst <= tol,
        "FAIL {name}: {detail} = {worst:.3e} exceeds {tol:.1e}"
    );
    println!("PASS {name}: {detail} = {worst:.3e} (tolerance {tol:.1e})");
}

/// The shared random battery: 100 graphs, directed and undirected,
/// n in [5, 200], heterogeneous alpha in [0, 0.95), random restart law.
fn battery() -> Vec<(Graph, RestartModel)> {
    (0..100u64)
        .map(|seed| {
            let n = if seed == 99 {
                200
            } else {
                5 + (seed as usize * 61) % 196
            };
            let g = random_graph(n, seed % 2 == 0, seed);
            let alpha = random_alpha(n, 0.0, 0.95, seed ^ 0xa5a5);
            let v = random_distribution(n, seed ^ 0x5a5a);
            let m = RestartModel::custom(&g, alpha, &Distribution::Weights(v))
                .expect("battery model is valid");
            (g, m)
        })
        .collect()
}

#[test]
fn c1_resolvent_and_power_iteration_agree() {
    let cfg = SolverConfig::default();
    let mut worst = 0.0f64;
    for (g, m) in battery() {
        let (pi, _) = scores(&g, &m, &cfg).unwrap();
        let power = occupation_ppr_power(&g, &m, &cfg).unwrap();
        worst = worst.max(pi.max_abs_diff(&power));
    }
    gate(
        "c1 resolvent vs power iteration",
        "max |pi_direct - pi_power| over 100 random graphs (n in [5, 200])",
        worst,
        1e-9,
    );
}

#[test]
fn c2_location_score_follows_from_occupation_score() {
    let cfg = SolverConfig::default();
    let mut worst = 0.0f64;
    for (g, m) in battery() {
        let (pi, rho) = scores(&g, &m, &cfg).unwrap();
        worst = worst.max(rho_pi_gap(&m, &pi, &rho));
    }
    gate(
        "c2 rho-from-pi identity",
        "max reweighting gap over the same 100-graph battery",
        worst,
        1e-12,
    );
}

#[test]
fn c3_symmetry_relations_on_undirected_fixtures() {
    let cfg = SolverConfig::default();
    let mut worst = 0.0f64;
    for seed in 0..50u64 {
        let n = 6 + (seed as usize * 11) % 35;
        let g = random_connected(n, n / 2, 1000 + seed);
        let alpha = random_alpha(n, 0.05, 0.95, 2000 + seed);
        let v = random_distribution(n, 3000 + seed);
        let m = RestartModel::custom(&g, alpha, &Distribution::Weights(v)).unwrap();
        let occ = check_occupation_symmetry(&g, &m, &cfg).unwrap();
        let loc = check_location_symmetry(&g, &m, &cfg).unwrap();
        worst = worst.max(occ.max_abs_deviation).max(loc.max_abs_deviation);
    }
    gate(
        "c3 degree-scaled symmetry",
        "max deviation across both relations on 50 undirected fixtures",
        worst,
        1e-9,
    );
}

#[test]
fn c4_constant_alpha_collapses_to_classic_ppr() {
    let cfg = SolverConfig::default();
    let fixtures = [path_graph(2), path_graph(3), cycle_graph(5)];
    let mut worst = 0.0f64;
    for g in &fixtures {
        let n = g.node_count();
        let v = random_distribution(n, 41);
        for &alpha in &[0.0, 0.5, 0.85, 0.99] {
            let m = RestartModel::constant(g, alpha, &Distribution::Weights(v.clone())).unwrap();
            let (pi, rho) = scores(g, &m, &cfg).unwrap();
            worst = worst.max(pi.max_abs_diff(&rho));

            // Classic personalized PageRank, solved independently:
            // pi = (1 - alpha) v^T (I - alpha P)^{-1}.
            let mut p = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                for &(j, w) in g.neighbors(i) {
                    p[(i, j)] = w / g.out_weight(i);
                }
            }
            let mat = DMatrix::<f64>::identity(n, n) - p.transpose() * alpha;
            let x = mat
                .lu()
                .solve(&DVector::from_column_slice(m.v()))
                .expect("I - alpha P is nonsingular for alpha < 1");
            for j in 0..n {
                worst = worst.max((pi.values[j] - (1.0 - alpha) * x[j]).abs());
            }

            let t = expected_restart_time(g, &m, m.v(), &cfg).unwrap();
            worst = worst.max((t - 1.0 / (1.0 - alpha)).abs());
        }
    }
    gate(
        "c4 constant-alpha reduction",
        "max of |pi - rho|, |pi - classic ppr|, |E[T] - 1/(1-alpha)| for alpha up to 0.99",
        worst,
        1e-12,
    );
}

#[test]
fn c5_random_walk_with_jumps_matches_closed_forms() {
    let cfg = SolverConfig::default();
    let mut worst_score = 0.0f64;
    let mut worst_time = 0.0f64;
    for seed in 0..20u64 {
        let g = match seed % 5 {
            0 => path_graph(4 + seed as usize % 5),
            1 => cycle_graph(5 + seed as usize % 5),
            2 => star_graph(3 + seed as usize % 5),
            3 => complete_graph(4 + seed as usize % 3),
            _ => random_connected(8 + seed as usize % 20, 6, 500 + seed),
        };
        let n = g.node_count();
        // Even seeds: one shared jump weight. Odd seeds: per-node weights.
        let a: Vec<f64> = if seed % 2 == 0 {
            vec![0.3 + 0.2 * (seed % 7) as f64; n]
        } else {
            random_distribution(n, 600 + seed)
                .iter()
                .map(|w| 0.2 + w * n as f64 * 0.5)
                .collect()
        };
        let m = RestartModel::random_walk_jumps(&g, &a).unwrap();
        let (pi, rho) = scores(&g, &m, &cfg).unwrap();
        let (pi_cf, rho_cf) = rwj_closed_form(&g, &a).unwrap();
        worst_score = worst_score
            .max(pi.max_abs_diff(&pi_cf))
            .max(rho.max_abs_diff(&rho_cf));

        // The closed forms written out longhand, straight off the degrees.
        let total = g.total_weight();
        let sum_a: f64 = a.iter().sum();
        for (j, &aj) in a.iter().enumerate() {
            worst_score = worst_score
                .max((pi.values[j] - (g.out_weight(j) + aj) / (total + sum_a)).abs())
                .max((rho.values[j] - aj / sum_a).abs());
        }
        let t = expected_restart_time(&g, &m, m.v(), &cfg).unwrap();
        worst_time = worst_time.max((t - (total + sum_a) / sum_a).abs());
    }
    assert!(
        worst_score <= 1e-12,
        "FAIL c5 jump-model closed forms: score deviation {worst_score:.3e} exceeds 1e-12"
    );
    assert!(
        worst_time <= 1e-10,
        "FAIL c5 jump-model closed forms: restart-time deviation {worst_time:.3e} exceeds 1e-10"
    );
    println!(
        "PASS c5 jump-model closed forms: score deviation {worst_score:.3e} (tolerance 1e-12), \
         restart-time deviation {worst_time:.3e} (tolerance 1e-10) on 20 undirected fixtures"
    );
}

#[test]
fn c6_degree_power_family_approaches_its_limits_linearly() {
    let cfg = SolverConfig::default();
    let grid = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
    let graphs = [
        ("star", star_graph(5)),
        ("path", path_graph(7)),
        ("random50", random_connected(50, 25, 4242)),
    ];
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (name, g) in &graphs {
        let n = g.node_count();
        let v = Distribution::Weights(random_distribution(n, 99));
        for &sigma in &[-1.0, 0.5, 1.0] {
            let limits = degree_power_asymptotics(g, sigma).unwrap();
            let terms = laurent_terms(g, sigma).unwrap();
            let mut err_pi = Vec::new();
            let mut err_rho = Vec::new();
            let mut err_rem = Vec::new();
            for &a in &grid {
                let m = RestartModel::degree_power(g, a, sigma, &v).unwrap();
                let (pi, rho) = scores(g, &m, &cfg).unwrap();
                err_pi.push(pi.max_abs_diff(&limits.pi));
                err_rho.push(rho.max_abs_diff(&limits.rho));
                let nmat = expected_visits_matrix(g, &m, &cfg).unwrap();
                let mut rem = 0.0f64;
                for i in 0..n {
                    for j in 0..n {
                        let two_term = terms.x_minus_one[(i, j)] / a + terms.x_zero[(i, j)];
                        rem = rem.max((nmat[(i, j)] - two_term).abs());
                    }
                }
                err_rem.push(rem);
            }
            for (what, series) in [("pi", &err_pi), ("rho", &err_rho), ("remainder", &err_rem)] {
                for w in series.windows(2) {
                    let ratio = w[1] / w[0];
                    assert!(
                        (0.3..=0.8).contains(&ratio),
                        "FAIL c6 degree-power asymptotics: {what} ratio {ratio:.3} outside \
                         [0.3, 0.8] on {name} with sigma {sigma} (series {series:?})"
                    );
                    lo = lo.min(ratio);
                    hi = hi.max(ratio);
                }
            }
        }
    }
    println!(
        "PASS c6 degree-power asymptotics: every halving of a shrinks pi/rho/remainder \
         errors by a factor in [0.3, 0.8] (observed [{lo:.3}, {hi:.3}])"
    );
}

#[test]
fn c7_monte_carlo_tallies_match_exact_scores() {
    let cfg = SolverConfig::default();
    let two = path_graph(2);
    let m_two =
        RestartModel::custom(&two, vec![0.5, 0.25], &Distribution::Weights(vec![1.0, 0.0]))
            .unwrap();
    let path = path_graph(3);
    let m_jump = RestartModel::random_walk_jumps_uniform(&path, 1.0).unwrap();
    let m_const = RestartModel::constant(&path, 0.85, &Distribution::Uniform).unwrap();
    let cases: [(&str, &Graph, &RestartModel, u64); 3] = [
        ("two-node", &two, &m_two, 7),
        ("path-jumps", &path, &m_jump, 8),
        ("constant-alpha", &path, &m_const, 9),
    ];
    let mut worst = 0.0f64;
    for (name, g, m, seed) in cases {
        let stats = simulate(g, m, 1_000_000, seed).unwrap();
        let (pi, rho) = scores(g, m, &cfg).unwrap();
        let frac_exact: f64 = pi
            .values
            .iter()
            .zip(m.alpha())
            .map(|(&p, &al)| p * (1.0 - al))
            .sum();
        let dev = pi
            .max_abs_diff(&empirical_pi(&stats))
            .max(rho.max_abs_diff(&empirical_rho(&stats).unwrap()))
            .max((restart_fraction(&stats) - frac_exact).abs());
        assert!(
            dev <= 5e-3,
            "FAIL c7 simulation oracle: deviation {dev:.3e} exceeds 5e-3 on {name}"
        );
        worst = worst.max(dev);
    }
    gate(
        "c7 simulation oracle",
        "max |empirical - exact| over pi, rho, restart fraction at 1e6 steps",
        worst,
        5e-3,
    );
}

#[test]
fn c8_resolvent_matches_truncated_path_sums() {
    let cfg = SolverConfig::default();
    let mut graphs: Vec<Graph> = Vec::new();
    for n in 2..=6 {
        graphs.push(path_graph(n));
        graphs.push(complete_graph(n));
        graphs.push(random_graph(n, true, 70 + n as u64));
        graphs.push(random_graph(n, false, 80 + n as u64));
    }
    for n in 3..=6 {
        graphs.push(cycle_graph(n));
        graphs.push(star_graph(n - 1));
    }
    let k_max = 40;
    let mut worst_excess = f64::NEG_INFINITY;
    for (idx, g) in graphs.iter().enumerate() {
        let n = g.node_count();
        let alpha = random_alpha(n, 0.1, 0.85, idx as u64);
        let m = RestartModel::custom(g, alpha, &Distribution::Uniform).unwrap();
        let nmat = expected_visits_matrix(g, &m, &cfg).unwrap();
        let bound = m.max_alpha().powi(k_max as i32 + 1) / (1.0 - m.max_alpha());
        for i in 0..n {
            for j in 0..n {
                let truncated = path_sum_oracle(g, &m, i, j, k_max).unwrap();
                worst_excess = worst_excess.max((nmat[(i, j)] - truncated).abs() - bound);
            }
        }
    }
    gate(
        "c8 path-sum oracle",
        "max (|N_ij - truncated sum| - geometric bound) over all graphs with n <= 6",
        worst_excess,
        1e-12,
    );
}

// ------------------------------------------------------------- criterion 9

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_restart-rank"))
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_str()
        .unwrap()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

/// A float token as `rank` prints it: one leading digit, sixteen after
/// the point, then an exponent.
fn has_17_digits(token: &str) -> bool {
    let Some((mantissa, exp)) = token.split_once('e') else {
        return false;
    };
    let Some((head, tail)) = mantissa.split_once('.') else {
        return false;
    };
    head.len() == 1
        && head.chars().all(|c| c.is_ascii_digit())
        && tail.len() == 16
        && tail.chars().all(|c| c.is_ascii_digit())
        && !exp.is_empty()
}

#[test]
fn c9_cli_emits_exact_tables_and_honest_exit_codes() {
    let graph = fixture("path3.txt");
    let config = fixture("rwj.json");
    let args = [
        "rank", "--graph", &graph, "--undirected", "--config", &config,
    ];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success(), "FAIL c9 cli contract: rank exited nonzero");
    assert_eq!(
        first.stdout, second.stdout,
        "FAIL c9 cli contract: rank output is not reproducible"
    );

    // Uniform jumps with weight 1 on the 3-path: occupation follows
    // degree + 1, restarts land uniformly.
    let expected: HashMap<&str, (f64, f64)> = HashMap::from([
        ("a", (2.0 / 7.0, 1.0 / 3.0)),
        ("b", (3.0 / 7.0, 1.0 / 3.0)),
        ("c", (2.0 / 7.0, 1.0 / 3.0)),
    ]);
    let text = String::from_utf8(first.stdout).unwrap();
    let mut worst = 0.0f64;
    let mut rows = 0;
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 4, "FAIL c9 cli contract: bad row `{line}`");
        assert!(
            has_17_digits(fields[2]) && has_17_digits(fields[3]),
            "FAIL c9 cli contract: `{line}` is not printed at 17-digit precision"
        );
        let (pi, rho) = expected[fields[1]];
        worst = worst
            .max((fields[2].parse::<f64>().unwrap() - pi).abs())
            .max((fields[3].parse::<f64>().unwrap() - rho).abs());
        rows += 1;
    }
    assert_eq!(rows, 3);
    assert!(
        worst <= 1e-14,
        "FAIL c9 cli contract: table deviates from the closed form by {worst:.3e}"
    );

    let healthy = run(&["verify", "--graph", &graph, "--undirected", "--config", &config]);
    assert_eq!(
        healthy.status.code(),
        Some(0),
        "FAIL c9 cli contract: verify rejected a healthy fixture"
    );
    let broken = run(&[
        "verify", "--graph", &graph, "--undirected", "--config", &config,
        "--perturb", "1e-3",
    ]);
    assert_eq!(
        broken.status.code(),
        Some(1),
        "FAIL c9 cli contract: verify missed an injected defect"
    );
    assert!(
        String::from_utf8(broken.stdout).unwrap().contains("FAIL"),
        "FAIL c9 cli contract: no FAIL line for the injected defect"
    );
    println!(
        "PASS c9 cli contract: table matches closed form within {worst:.3e} at 17-digit \
         precision, byte-stable output, verify exits 0 healthy / 1 perturbed"
    );
}
