//! Command-line front end: run a single equivalence test, reproduce the
//! simulation study, query the limit-law oracle, and render sweep CSVs as
//! SVG line charts.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use equivboot::asymptotics::{covariance_sigma, limit_quantile};
use equivboot::bootstrap::{equivalence_test, TestConfig};
use equivboot::norms::{active_sets, norm_eval, NormKind, DEFAULT_TAU_ACT};
use equivboot::sampling::RngStream;
use equivboot::simplex::{theta, CountVector, ProbVector};
use equivboot::simulation::{
    default_delta_grid, parse_sweep_csv, sweep, sweep_to_csv, BuiltinScenario, Scenario,
    SweepCell,
};

mod plot;

#[derive(Parser)]
#[command(
    name = "equivboot",
    about = "Equivalence testing for two multinomial samples via a constrained parametric bootstrap",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test two observed count vectors for equivalence.
    Test(TestArgs),
    /// Estimate rejection probabilities over a scenario grid and write CSV.
    Simulate(SimulateArgs),
    /// Monte Carlo quantile of the limiting statistic (diagnostic oracle).
    Limit(LimitArgs),
    /// Render a sweep CSV as an SVG line chart.
    Plot(PlotArgs),
}

#[derive(Args)]
struct TestArgs {
    /// Counts of the first sample, comma-separated (e.g. 3,7,0).
    #[arg(long, value_name = "COUNTS", allow_hyphen_values = true)]
    x: Option<String>,
    /// Counts of the second sample.
    #[arg(long, value_name = "COUNTS", allow_hyphen_values = true)]
    y: Option<String>,
    /// JSON file with fields "x" and "y" instead of --x/--y.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["x", "y"])]
    input: Option<PathBuf>,
    /// Norm of the hypotheses: l1, linf or l2.
    #[arg(long)]
    norm: String,
    /// Equivalence margin.
    #[arg(long)]
    epsilon: f64,
    /// Nominal level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Number of bootstrap replicates.
    #[arg(long, default_value_t = 500)]
    bootstrap: usize,
    /// Root seed, decimal or 0x-prefixed hex.
    #[arg(long, default_value = "0", value_name = "U64")]
    seed: String,
    /// Emit compact JSON (the default).
    #[arg(long)]
    json: bool,
    /// Pretty-print the JSON report.
    #[arg(long, conflicts_with = "json")]
    pretty: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// Built-in scenario family: det15, det16, det17 or det18.
    #[arg(long, conflicts_with_all = ["p", "q"])]
    scenario: Option<String>,
    /// Custom true probabilities of the first population.
    #[arg(long, value_name = "PROBS", requires = "q")]
    p: Option<String>,
    /// Custom true probabilities of the second population.
    #[arg(long, value_name = "PROBS", requires = "p")]
    q: Option<String>,
    /// Separation parameters, comma-separated; defaults to a nine-point
    /// grid around the boundary.
    #[arg(long, value_name = "LIST")]
    deltas: Option<String>,
    /// First-sample sizes, comma-separated.
    #[arg(long, value_name = "LIST", default_value = "100,250,500,1000")]
    n: String,
    /// Second-sample size as a multiple of the first.
    #[arg(long, default_value_t = 1.0)]
    ratio: f64,
    /// Monte Carlo replications per grid cell.
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    /// Norm; defaults to the scenario's natural norm.
    #[arg(long)]
    norm: Option<String>,
    /// Equivalence margin.
    #[arg(long, default_value_t = 0.25)]
    epsilon: f64,
    /// Nominal level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Number of bootstrap replicates per test.
    #[arg(long, default_value_t = 500)]
    bootstrap: usize,
    /// Root seed, decimal or 0x-prefixed hex.
    #[arg(long, default_value = "0", value_name = "U64")]
    seed: String,
    /// Output CSV path; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LimitArgs {
    /// True probabilities of the first population.
    #[arg(long, value_name = "PROBS")]
    p: String,
    /// True probabilities of the second population.
    #[arg(long, value_name = "PROBS")]
    q: String,
    /// Norm: l1, linf or l2.
    #[arg(long)]
    norm: String,
    /// Quantile level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Monte Carlo draws of the limit statistic.
    #[arg(long, default_value_t = 100_000)]
    draws: usize,
    /// Relative weight n1/n of the first sample.
    #[arg(long, default_value_t = 0.5)]
    lambda1: f64,
    /// Root seed, decimal or 0x-prefixed hex.
    #[arg(long, default_value = "0", value_name = "U64")]
    seed: String,
    /// Pretty-print the JSON output.
    #[arg(long)]
    pretty: bool,
}

#[derive(Args)]
struct PlotArgs {
    /// Sweep CSV produced by `equivboot simulate`.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Output SVG path.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

/// JSON report of `equivboot test`.
#[derive(Serialize)]
struct TestOutput {
    d_hat: f64,
    quantile: f64,
    reject: bool,
    used_constrained: bool,
    constraint_residual: f64,
    epsilon: f64,
    alpha: f64,
    norm: String,
    b: u64,
    seed: u64,
}

/// JSON report of `equivboot limit`.
#[derive(Serialize)]
struct LimitOutput {
    q_alpha: f64,
    draws: u64,
    theta_norm: f64,
    fully_differentiable: bool,
}

#[derive(Deserialize)]
struct InputData {
    x: Vec<u64>,
    y: Vec<u64>,
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Test(args) => cmd_test(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Limit(args) => cmd_limit(args),
        Command::Plot(args) => cmd_plot(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

/// `EQUIVBOOT_THREADS` caps worker parallelism. It affects runtime only:
/// all randomness is path-derived, so outputs are identical at any thread
/// count.
fn init_thread_pool() {
    #[cfg(feature = "parallel")]
    if let Ok(value) = std::env::var("EQUIVBOOT_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn cmd_test(args: TestArgs) -> Result<(), String> {
    let (x, y) = match (&args.input, &args.x, &args.y) {
        (Some(path), _, _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let data: InputData =
                serde_json::from_str(&text).map_err(|e| format!("malformed input JSON: {e}"))?;
            (data.x, data.y)
        }
        (None, Some(x), Some(y)) => (parse_u64_list(x, "--x")?, parse_u64_list(y, "--y")?),
        _ => return Err("provide either --x and --y, or --input".to_string()),
    };
    let x = CountVector::new(x).map_err(|e| e.to_string())?;
    let y = CountVector::new(y).map_err(|e| e.to_string())?;

    let mut config = TestConfig::new(parse_norm(&args.norm)?, args.epsilon);
    config.alpha = args.alpha;
    config.bootstrap_b = args.bootstrap;
    config.seed = parse_seed(&args.seed)?;

    let report = equivalence_test(&x, &y, &config).map_err(|e| e.to_string())?;
    let output = TestOutput {
        d_hat: report.d_hat,
        quantile: report.quantile_hat,
        reject: report.reject,
        used_constrained: report.used_constrained,
        constraint_residual: report
            .fit
            .as_ref()
            .map_or(0.0, |fit| fit.constraint_residual),
        epsilon: config.epsilon,
        alpha: config.alpha,
        norm: config.norm.token().to_string(),
        b: config.bootstrap_b as u64,
        seed: config.seed,
    };
    print_json(&output, args.pretty)
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), String> {
    let sizes = parse_u64_list(&args.n, "--n")?;
    if sizes.is_empty() || sizes.contains(&0) {
        return Err("--n needs at least one positive sample size".to_string());
    }
    if !(args.ratio > 0.0 && args.ratio.is_finite()) {
        return Err("--ratio must be positive".to_string());
    }
    let seed = parse_seed(&args.seed)?;

    let (scenarios, norm) = match (&args.scenario, &args.p, &args.q) {
        (Some(name), None, None) => {
            let builtin: BuiltinScenario = name.parse().map_err(|e: equivboot::Error| e.to_string())?;
            let deltas = match &args.deltas {
                Some(list) => parse_f64_list(list, "--deltas")?,
                None => default_delta_grid(builtin, args.epsilon),
            };
            if deltas.is_empty() {
                return Err("--deltas must contain at least one value".to_string());
            }
            let mut scenarios = Vec::with_capacity(deltas.len());
            for &delta in &deltas {
                scenarios.push(Scenario::builtin(builtin, delta).map_err(|e| e.to_string())?);
            }
            let norm = match &args.norm {
                Some(n) => parse_norm(n)?,
                None => builtin.natural_norm(),
            };
            (scenarios, norm)
        }
        (None, Some(p), Some(q)) => {
            if args.deltas.is_some() {
                return Err("--deltas applies to built-in scenarios only".to_string());
            }
            let p = ProbVector::new(parse_f64_list(p, "--p")?).map_err(|e| e.to_string())?;
            let q = ProbVector::new(parse_f64_list(q, "--q")?).map_err(|e| e.to_string())?;
            let scenario = Scenario::custom(p, q).map_err(|e| e.to_string())?;
            let norm = match &args.norm {
                Some(n) => parse_norm(n)?,
                None => return Err("--norm is required with a custom scenario".to_string()),
            };
            (vec![scenario], norm)
        }
        _ => return Err("provide either --scenario, or --p and --q".to_string()),
    };
    if args.reps == 0 {
        return Err("--reps must be at least 1".to_string());
    }

    let mut config = TestConfig::new(norm, args.epsilon);
    config.alpha = args.alpha;
    config.bootstrap_b = args.bootstrap;
    config.seed = seed;
    config.validate().map_err(|e| e.to_string())?;

    let mut cells = Vec::new();
    for scenario in &scenarios {
        for &n1 in &sizes {
            let n2 = (n1 as f64 * args.ratio).round().max(1.0) as u64;
            cells.push(SweepCell {
                scenario: scenario.clone(),
                n1,
                n2,
            });
        }
    }
    let root = RngStream::from_seed(seed);
    let rows = sweep(&cells, args.reps, &config, &root).map_err(|e| e.to_string())?;
    let csv = sweep_to_csv(&rows);
    match &args.out {
        Some(path) => fs::write(path, csv)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_limit(args: LimitArgs) -> Result<(), String> {
    let p = ProbVector::new(parse_f64_list(&args.p, "--p")?).map_err(|e| e.to_string())?;
    let q = ProbVector::new(parse_f64_list(&args.q, "--q")?).map_err(|e| e.to_string())?;
    let norm = parse_norm(&args.norm)?;
    if args.draws == 0 {
        return Err("--draws must be at least 1".to_string());
    }
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err("--alpha must lie in (0, 1)".to_string());
    }
    let lambda1 = args.lambda1;
    let sigma =
        covariance_sigma(&p, &q, lambda1, 1.0 - lambda1).map_err(|e| e.to_string())?;
    let th = theta(&p, &q).map_err(|e| e.to_string())?;
    let stream = RngStream::from_seed(parse_seed(&args.seed)?).derive("limit", 0);
    let q_alpha =
        limit_quantile(norm, &th, &sigma, args.alpha, args.draws, &stream)
            .map_err(|e| e.to_string())?;
    let output = LimitOutput {
        q_alpha,
        draws: args.draws as u64,
        theta_norm: norm_eval(norm, &th),
        fully_differentiable: active_sets(norm, &th, DEFAULT_TAU_ACT).fully_differentiable,
    };
    print_json(&output, args.pretty)
}

fn cmd_plot(args: PlotArgs) -> Result<(), String> {
    let text = fs::read_to_string(&args.input)
        .map_err(|e| format!("cannot read {}: {e}", args.input.display()))?;
    let rows = parse_sweep_csv(&text).map_err(|e| e.to_string())?;
    if rows.is_empty() {
        return Err("CSV contains no data rows".to_string());
    }
    let svg = plot::render_svg(&rows);
    fs::write(&args.out, svg)
        .map_err(|e| format!("cannot write {}: {e}", args.out.display()))?;
    Ok(())
}

fn print_json<T: Serialize>(value: &T, pretty: bool) -> Result<(), String> {
    let text = if pretty {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    }
    .map_err(|e| e.to_string())?;
    println!("{text}");
    Ok(())
}

fn parse_norm(s: &str) -> Result<NormKind, String> {
    s.parse().map_err(|e: equivboot::Error| e.to_string())
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16)
    } else {
        s.parse()
    };
    parsed.map_err(|_| format!("--seed must be a decimal or 0x-hex 64-bit integer, got {s:?}"))
}

fn parse_u64_list(s: &str, flag: &str) -> Result<Vec<u64>, String> {
    if s.trim().is_empty() {
        return Err(format!("{flag} must not be empty"));
    }
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|_| format!("{flag}: {part:?} is not a nonnegative integer"))
        })
        .collect()
}

fn parse_f64_list(s: &str, flag: &str) -> Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Err(format!("{flag} must not be empty"));
    }
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| format!("{flag}: {part:?} is not a number"))
        })
        .collect()
}
