//! Command-line frontend for the restart-rank library.
//!
//! Four subcommands: `rank` (both scores as a sorted table), `verify`
//! (structural identity checks with PASS/FAIL lines), `simulate` (Monte
//! Carlo tallies against exact scores), and `asymptotics` (small-restart
//! behavior of the degree-power family).
//!
//! Exit codes: 0 success, 1 a verify check failed, 2 bad input (files,
//! flags, graph or model validation), 3 solver failure (precondition
//! violated, no convergence, or a dense-only route refused the graph).
//! Floats are printed with 17 significant digits, so `rank` output parses
//! back to the exact computed bits; nothing nondeterministic (timings)
//! goes to stdout.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use restart_rank::error::{Error, Result};
use restart_rank::graph::Graph;
use restart_rank::identities::{
    check_location_symmetry, check_occupation_symmetry, degree_power_asymptotics, rho_pi_gap,
    SymmetryReport,
};
use restart_rank::montecarlo::{
    empirical_pi, empirical_rho, restart_fraction, simulate, simulate_walkers, WalkStats,
};
use restart_rank::restart::{Distribution, RestartConfig, RestartModel};
use restart_rank::solver::{expected_restart_time, scores, SolveMode, SolverConfig};

#[derive(Debug, Parser)]
#[command(
    name = "restart-rank",
    version,
    about = "Occupation-time and restart-location centrality for random walks \
             with node-dependent restart"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute both scores and print a ranked table
    Rank(RankArgs),
    /// Check structural identities and print PASS/FAIL per check
    Verify(VerifyArgs),
    /// Simulate the walk and compare tallies with the exact scores
    Simulate(SimulateArgs),
    /// Small-restart asymptotics of the degree-power family
    Asymptotics(AsymptoticsArgs),
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Edge-list file: one `src dst [weight]` per line, `#` comments
    #[arg(long)]
    pub graph: PathBuf,
    /// Treat edges as undirected (mirror every line)
    #[arg(long)]
    pub undirected: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Auto,
    Dense,
    Iterative,
}

impl From<ModeArg> for SolveMode {
    fn from(m: ModeArg) -> SolveMode {
        match m {
            ModeArg::Auto => SolveMode::Auto,
            ModeArg::Dense => SolveMode::Dense,
            ModeArg::Iterative => SolveMode::Iterative,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SortKey {
    Pi,
    Rho,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Restart model JSON file
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Which score orders the table
    #[arg(long, value_enum, default_value_t = SortKey::Pi)]
    pub by: SortKey,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
    /// Residual target for iterative solves
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Write the table here instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Restart model JSON file
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Deviation threshold for PASS
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
    /// Test hook: add this to the first restart-location entry before
    /// checking, to prove the checks can fail
    #[arg(long, hide = true, default_value_t = 0.0)]
    pub perturb: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Restart model JSON file
    #[arg(long)]
    pub config: PathBuf,
    /// Transitions to simulate (per walker)
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub steps: u64,
    /// RNG seed; identical seeds replay identical walks
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Independent walkers, assigned RNG streams 0, 1, ... by index
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..4096))]
    pub walkers: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Residual target for the exact reference solve
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
}

#[derive(Debug, Args)]
pub struct AsymptoticsArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Degree exponent of the restart probability `1 - alpha_i = a d_i^sigma`
    #[arg(long)]
    pub sigma: f64,
    /// Comma-separated restart coefficients to sweep
    #[arg(long = "a-grid", default_value = "1e-2,5e-3,2.5e-3,1.25e-3")]
    pub a_grid: String,
    /// Restart distribution: "uniform", "node:<label>", or comma weights
    #[arg(long, default_value = "uniform")]
    pub v: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Residual target for iterative solves
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
}

/// Maps library errors onto the documented exit codes.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::SolverPrecondition { .. }
        | Error::NoConvergence { .. }
        | Error::DenseOnly { .. } => 3,
        _ => 2,
    }
}

/// Runs a parsed command line; the returned code is the process exit
/// status for successful runs (verify returns 1 when a check fails).
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Rank(args) => cmd_rank(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Asymptotics(args) => cmd_asymptotics(args),
    }
}

fn load_graph(args: &GraphArgs) -> Result<Graph> {
    Graph::from_edge_list_path(&args.graph, !args.undirected)
}

fn load_model(g: &Graph, config: &PathBuf) -> Result<RestartModel> {
    RestartConfig::from_json_path(config)?.build(g)
}

fn solver_config(tol: f64, mode: ModeArg) -> SolverConfig {
    SolverConfig {
        tolerance: tol,
        mode: mode.into(),
        ..SolverConfig::default()
    }
}

/// 17 significant digits: enough for `str::parse::<f64>` to return the
/// exact same bits.
fn full(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Quotes a CSV field only when it needs it (labels are free-form).
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

// ---------------------------------------------------------------- rank

#[derive(Serialize)]
struct RankRow {
    rank: usize,
    node: String,
    pi: f64,
    rho: f64,
}

#[derive(Serialize)]
struct RankTable {
    nodes: usize,
    arcs: usize,
    model: String,
    method: &'static str,
    residual: f64,
    sorted_by: &'static str,
    rows: Vec<RankRow>,
}

fn cmd_rank(args: RankArgs) -> Result<i32> {
    let g = load_graph(&args.graph)?;
    let m = load_model(&g, &args.config)?;
    let cfg = solver_config(args.tol, args.mode);
    let start = Instant::now();
    let (pi, rho) = scores(&g, &m, &cfg)?;
    let elapsed = start.elapsed();
    let n = g.node_count();
    let mut order: Vec<usize> = (0..n).collect();
    let key = |i: usize| match args.by {
        SortKey::Pi => pi.values[i],
        SortKey::Rho => rho.values[i],
    };
    order.sort_by(|&a, &b| {
        key(b)
            .partial_cmp(&key(a))
            .expect("scores are never NaN")
            .then_with(|| g.label(a).cmp(&g.label(b)))
    });
    let table = RankTable {
        nodes: n,
        arcs: g.arc_count(),
        model: m.kind().to_string(),
        method: pi.method.name(),
        residual: pi.residual,
        sorted_by: match args.by {
            SortKey::Pi => "pi",
            SortKey::Rho => "rho",
        },
        rows: order
            .iter()
            .enumerate()
            .map(|(pos, &i)| RankRow {
                rank: pos + 1,
                node: g.label(i),
                pi: pi.values[i],
                rho: rho.values[i],
            })
            .collect(),
    };
    let text = match args.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&table).expect("table serializes");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::new();
            let _ = writeln!(s, "# nodes: {}", table.nodes);
            let _ = writeln!(s, "# arcs: {}", table.arcs);
            let _ = writeln!(s, "# model: {}", table.model);
            let _ = writeln!(s, "# method: {}", table.method);
            let _ = writeln!(s, "# residual: {}", full(table.residual));
            let _ = writeln!(s, "# sorted_by: {}", table.sorted_by);
            let _ = writeln!(s, "rank,node,pi,rho");
            for row in &table.rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{}",
                    row.rank,
                    csv_field(&row.node),
                    full(row.pi),
                    full(row.rho)
                );
            }
            s
        }
    };
    emit(&text, args.output.as_ref())?;
    // Timing is useful but nondeterministic: stderr only.
    eprintln!(
        "solved {} nodes via {} in {:.2} ms",
        n,
        table.method,
        elapsed.as_secs_f64() * 1e3
    );
    Ok(0)
}

// -------------------------------------------------------------- verify

#[derive(Serialize)]
struct CheckRow {
    check: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    deviation: Option<f64>,
    status: &'static str,
    #[serde(skip_serializing_if = "str::is_empty")]
    note: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pairs_checked: Option<usize>,
}

#[derive(Serialize)]
struct VerifyOutput {
    tol: f64,
    checks: Vec<CheckRow>,
    overall: &'static str,
}

fn cmd_verify(args: VerifyArgs) -> Result<i32> {
    let g = load_graph(&args.graph)?;
    let m = load_model(&g, &args.config)?;
    let cfg = solver_config(SolverConfig::default().tolerance, args.mode);
    let (pi, mut rho) = scores(&g, &m, &cfg)?;
    if args.perturb != 0.0 {
        rho.values[0] += args.perturb;
    }
    let mut checks = Vec::new();
    let push_value = |check: &'static str, dev: f64, checks: &mut Vec<CheckRow>| {
        checks.push(CheckRow {
            check,
            deviation: Some(dev),
            status: if dev <= args.tol { "PASS" } else { "FAIL" },
            note: "",
            pairs_checked: None,
        });
    };
    push_value("rho_pi_relation", rho_pi_gap(&m, &pi, &rho), &mut checks);
    push_value(
        "location_mass",
        (rho.values.iter().sum::<f64>() - 1.0).abs(),
        &mut checks,
    );
    let push_symmetry = |check: &'static str,
                             result: Result<SymmetryReport>,
                             checks: &mut Vec<CheckRow>|
     -> Result<()> {
        match result {
            Ok(report) => {
                checks.push(CheckRow {
                    check,
                    deviation: Some(report.max_abs_deviation),
                    status: if report.max_abs_deviation <= args.tol {
                        "PASS"
                    } else {
                        "FAIL"
                    },
                    note: "",
                    pairs_checked: Some(report.pairs_checked),
                });
                Ok(())
            }
            Err(Error::NotUndirected) => {
                checks.push(CheckRow {
                    check,
                    deviation: None,
                    status: "SKIPPED",
                    note: "directed graph",
                    pairs_checked: None,
                });
                Ok(())
            }
            Err(Error::AlphaBoundary { .. }) => {
                checks.push(CheckRow {
                    check,
                    deviation: None,
                    status: "SKIPPED",
                    note: "alpha on the boundary of (0, 1)",
                    pairs_checked: None,
                });
                Ok(())
            }
            Err(other) => Err(other),
        }
    };
    push_symmetry(
        "occupation_symmetry",
        check_occupation_symmetry(&g, &m, &cfg),
        &mut checks,
    )?;
    push_symmetry(
        "location_symmetry",
        check_location_symmetry(&g, &m, &cfg),
        &mut checks,
    )?;
    let failed = checks.iter().any(|c| c.status == "FAIL");
    let output = VerifyOutput {
        tol: args.tol,
        checks,
        overall: if failed { "FAIL" } else { "PASS" },
    };
    let text = match args.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&output).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::new();
            let _ = writeln!(s, "# tol: {}", full(output.tol));
            let _ = writeln!(s, "check,deviation,status,note");
            for c in &output.checks {
                let dev = c.deviation.map(full).unwrap_or_default();
                let _ = writeln!(s, "{},{},{},{}", c.check, dev, c.status, c.note);
            }
            let _ = writeln!(s, "# overall: {}", output.overall);
            s
        }
    };
    emit(&text, None)?;
    Ok(if failed { 1 } else { 0 })
}

// ------------------------------------------------------------ simulate

#[derive(Serialize)]
struct SimulateComparison {
    restart_fraction: f64,
    restart_fraction_exact: f64,
    pi_mc: Vec<f64>,
    pi_exact: Vec<f64>,
    max_pi_deviation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    rho_mc: Option<Vec<f64>>,
    rho_exact: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_rho_deviation: Option<f64>,
}

#[derive(Serialize)]
struct SimulateOutput {
    nodes: Vec<String>,
    stats: WalkStats,
    comparison: SimulateComparison,
}

fn cmd_simulate(args: SimulateArgs) -> Result<i32> {
    let g = load_graph(&args.graph)?;
    let m = load_model(&g, &args.config)?;
    let cfg = solver_config(args.tol, args.mode);
    let (pi_exact, rho_exact) = scores(&g, &m, &cfg)?;
    let stats = if args.walkers == 1 {
        simulate(&g, &m, args.steps, args.seed)?
    } else {
        simulate_walkers(&g, &m, args.steps, args.seed, args.walkers as usize)?
    };
    let pi_mc = empirical_pi(&stats);
    let rho_mc = match empirical_rho(&stats) {
        Ok(r) => Some(r),
        Err(Error::NoRestartsObserved) => None,
        Err(e) => return Err(e),
    };
    let fraction_exact: f64 = pi_exact
        .values
        .iter()
        .zip(m.alpha())
        .map(|(&p, &a)| p * (1.0 - a))
        .sum();
    let comparison = SimulateComparison {
        restart_fraction: restart_fraction(&stats),
        restart_fraction_exact: fraction_exact,
        max_pi_deviation: pi_exact.max_abs_diff(&pi_mc),
        pi_mc: pi_mc.values.clone(),
        pi_exact: pi_exact.values.clone(),
        max_rho_deviation: rho_mc.as_ref().map(|r| rho_exact.max_abs_diff(r)),
        rho_mc: rho_mc.as_ref().map(|r| r.values.clone()),
        rho_exact: rho_exact.values.clone(),
    };
    let n = g.node_count();
    let text = match args.format {
        Format::Json => {
            let output = SimulateOutput {
                nodes: (0..n).map(|i| g.label(i)).collect(),
                stats,
                comparison,
            };
            let mut s = serde_json::to_string_pretty(&output).expect("output serializes");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::new();
            let _ = writeln!(s, "# steps: {}", stats.steps);
            let _ = writeln!(s, "# walkers: {}", args.walkers);
            let _ = writeln!(s, "# seed: {}", args.seed);
            let _ = writeln!(s, "# restarts: {}", stats.restarts);
            let _ = writeln!(s, "# restart_fraction: {}", full(comparison.restart_fraction));
            let _ = writeln!(
                s,
                "# restart_fraction_exact: {}",
                full(comparison.restart_fraction_exact)
            );
            let _ = writeln!(s, "# max_pi_deviation: {}", full(comparison.max_pi_deviation));
            match comparison.max_rho_deviation {
                Some(dev) => {
                    let _ = writeln!(s, "# max_rho_deviation: {}", full(dev));
                }
                None => {
                    let _ = writeln!(s, "# max_rho_deviation: none (no restarts observed)");
                }
            }
            let _ = writeln!(
                s,
                "node,occupation_count,pi_mc,pi_exact,pi_abs_dev,restart_count,rho_mc,rho_exact,rho_abs_dev"
            );
            for i in 0..n {
                let pi_hat = comparison.pi_mc[i];
                let (rho_hat, rho_dev) = match &comparison.rho_mc {
                    Some(r) => (
                        full(r[i]),
                        full((r[i] - comparison.rho_exact[i]).abs()),
                    ),
                    None => (String::new(), String::new()),
                };
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{}",
                    csv_field(&g.label(i)),
                    stats.occupation_counts[i],
                    full(pi_hat),
                    full(comparison.pi_exact[i]),
                    full((pi_hat - comparison.pi_exact[i]).abs()),
                    stats.pre_restart_counts[i],
                    rho_hat,
                    full(comparison.rho_exact[i]),
                    rho_dev
                );
            }
            s
        }
    };
    emit(&text, None)?;
    Ok(0)
}

// --------------------------------------------------------- asymptotics

#[derive(Serialize)]
struct AsymptoticsRow {
    a: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pi_max_dev: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rho_max_dev: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    a_times_restart_time: Option<f64>,
    status: &'static str,
}

#[derive(Serialize)]
struct AsymptoticsOutput {
    sigma: f64,
    restart_time_coefficient: f64,
    pi_limit: Vec<f64>,
    rho_limit: Vec<f64>,
    rows: Vec<AsymptoticsRow>,
}

fn parse_distribution(spec: &str) -> Result<Distribution> {
    if spec == "uniform" {
        return Ok(Distribution::Uniform);
    }
    if let Some(label) = spec.strip_prefix("node:") {
        if label.is_empty() {
            return Err(Error::Parse("empty node label in --v".to_string()));
        }
        return Ok(Distribution::node(label));
    }
    let weights: std::result::Result<Vec<f64>, _> =
        spec.split(',').map(|t| t.trim().parse::<f64>()).collect();
    match weights {
        Ok(w) => Ok(Distribution::Weights(w)),
        Err(_) => Err(Error::Parse(format!(
            "bad --v `{spec}`: expected \"uniform\", \"node:<label>\", or comma weights"
        ))),
    }
}

fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let grid: std::result::Result<Vec<f64>, _> =
        text.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let grid = grid.map_err(|_| Error::Parse(format!("bad --a-grid `{text}`")))?;
    if grid.is_empty() || grid.iter().any(|&a| !a.is_finite() || a <= 0.0) {
        return Err(Error::Parse(
            "--a-grid needs positive finite coefficients".to_string(),
        ));
    }
    Ok(grid)
}

fn cmd_asymptotics(args: AsymptoticsArgs) -> Result<i32> {
    let g = load_graph(&args.graph)?;
    let grid = parse_grid(&args.a_grid)?;
    let dist = parse_distribution(&args.v)?;
    // Resolve eagerly so label typos surface as input errors.
    dist.resolve(&g)?;
    let limits = degree_power_asymptotics(&g, args.sigma)?;
    let cfg = solver_config(args.tol, args.mode);
    let mut rows = Vec::new();
    for &a in &grid {
        match RestartModel::degree_power(&g, a, args.sigma, &dist) {
            Err(Error::StabilityViolation(_)) => rows.push(AsymptoticsRow {
                a,
                pi_max_dev: None,
                rho_max_dev: None,
                a_times_restart_time: None,
                status: "REJECTED",
            }),
            Err(e) => return Err(e),
            Ok(m) => {
                let (pi, rho) = scores(&g, &m, &cfg)?;
                let t = expected_restart_time(&g, &m, m.v(), &cfg)?;
                rows.push(AsymptoticsRow {
                    a,
                    pi_max_dev: Some(pi.max_abs_diff(&limits.pi)),
                    rho_max_dev: Some(rho.max_abs_diff(&limits.rho)),
                    a_times_restart_time: Some(a * t),
                    status: "OK",
                });
            }
        }
    }
    let output = AsymptoticsOutput {
        sigma: args.sigma,
        restart_time_coefficient: limits.restart_time_coefficient,
        pi_limit: limits.pi.values.clone(),
        rho_limit: limits.rho.values.clone(),
        rows,
    };
    let text = match args.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&output).expect("output serializes");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::new();
            let _ = writeln!(s, "# sigma: {}", output.sigma);
            let _ = writeln!(
                s,
                "# restart_time_coefficient: {}",
                full(output.restart_time_coefficient)
            );
            let _ = writeln!(s, "# v: {}", args.v);
            let _ = writeln!(s, "a,pi_max_dev,rho_max_dev,a_times_restart_time,status");
            for row in &output.rows {
                let _ = writeln!(
                    s,
                    "{:e},{},{},{},{}",
                    row.a,
                    row.pi_max_dev.map(full).unwrap_or_default(),
                    row.rho_max_dev.map(full).unwrap_or_default(),
                    row.a_times_restart_time.map(full).unwrap_or_default(),
                    row.status
                );
            }
            s
        }
    };
    emit(&text, None)?;
    Ok(0)
}
