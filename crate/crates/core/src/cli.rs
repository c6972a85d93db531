//! Command-line interface.
//!
//! Every run writes one JSON document (to `--output` or stdout) that echoes
//! its configuration and seed. Exit status is 0 on success, 2 on usage
//! errors and 1 on data or numerical errors; failures print a one-line JSON
//! reason on stderr.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::asymptotics::{exp_pivot_ci, normal_ci, Regime, Target};
use crate::discrete::{discrete_report, discrete_residual_from_parts, DiscreteSample};
use crate::epskeys::{all_subsets, rank_candidates};
use crate::error::{Error, Result};
use crate::estimators::{estimate, heuristic_eps, EstimateConfig};
use crate::gof::{gof_statistic, DEFAULT_DELTA};
use crate::montecarlo::{run_plan, SimulationPlan, DEFAULT_SEED};
use crate::processes::{generate, ProcessSpec};
use crate::sample::SeriesSample;

#[derive(Debug, Parser)]
#[command(
    name = "qrenyi",
    version,
    about = "Quadratic Rényi entropy estimation for dependent samples"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate q2, h2 and variance ingredients from a CSV sample
    Estimate(EstimateArgs),
    /// Run a Monte Carlo plan read from JSON
    Simulate(SimulateArgs),
    /// Maximum-entropy goodness-of-fit statistic
    Gof(GofArgs),
    /// Rank attribute subsets of a table as approximate ε-keys
    Keys(KeysArgs),
    /// Generate a series from a process description
    Generate(GenerateArgs),
    /// Estimators for integer-valued (discrete) samples
    Discrete(DiscreteArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Write the JSON result here instead of stdout
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Seed recorded with the run (and used by commands that draw random numbers)
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long, short)]
    input: PathBuf,
    /// Radius for the pair count
    #[arg(long, required_unless_present = "alpha")]
    eps: Option<f64>,
    /// Radius for the triple counts (defaults to --eps)
    #[arg(long)]
    eps0: Option<f64>,
    /// Bound on the dependence range
    #[arg(long, default_value_t = 0)]
    r: usize,
    /// Choose eps = sd · n^(-2/(4α+d)) instead of passing --eps
    #[arg(long, conflicts_with = "eps")]
    alpha: Option<f64>,
    /// Confidence level for the reported intervals
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// JSON simulation plan
    #[arg(long)]
    plan: PathBuf,
    /// Override the plan's replicate count
    #[arg(long)]
    nsim: Option<usize>,
    /// Override the plan's sample size
    #[arg(long)]
    n: Option<usize>,
    /// Override the plan's seed
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the residuals as CSV
    #[arg(long)]
    residuals_csv: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GofArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long)]
    eps: f64,
    /// Reject when ratio < 1 - delta
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct KeysArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long)]
    eps: f64,
    /// Rank all subsets of this size
    #[arg(long, required_unless_present = "subsets")]
    size: Option<usize>,
    /// Explicit subsets, e.g. "0,1;0,2" (0-based columns)
    #[arg(long, conflicts_with = "size")]
    subsets: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Process description as a JSON file
    #[arg(long, required_unless_present = "spec_json")]
    spec: Option<PathBuf>,
    /// Process description as inline JSON
    #[arg(long, conflicts_with = "spec")]
    spec_json: Option<String>,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    stream: u64,
    /// CSV destination; without it the CSV goes to stdout and no JSON is written
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct DiscreteArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    r: usize,
    /// Known q2, for the pivotal residual
    #[arg(long, conflicts_with = "truth_h2")]
    truth_q2: Option<f64>,
    /// Known h2, for the pivotal residual
    #[arg(long)]
    truth_h2: Option<f64>,
    #[command(flatten)]
    common: Common,
}

/// Parses `argv` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            let line = json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{line}");
            1
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Gof(a) => cmd_gof(a),
        Command::Keys(a) => cmd_keys(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Discrete(a) => cmd_discrete(a),
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn read_sample(path: &Path) -> Result<SeriesSample> {
    SeriesSample::read_csv(open(path)?)
}

fn emit<T: Serialize>(doc: &T, output: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn cmd_estimate(a: EstimateArgs) -> Result<()> {
    let sample = read_sample(&a.input)?;
    let eps = match (a.eps, a.alpha) {
        (Some(e), _) => e,
        (None, Some(alpha)) => heuristic_eps(&sample, alpha)?,
        (None, None) => unreachable!("clap requires one of --eps and --alpha"),
    };
    let config = EstimateConfig::new(eps, a.r).with_eps0(a.eps0.unwrap_or(eps));
    let report = estimate(&sample, &config)?;
    let mut intervals = serde_json::Map::new();
    let candidates = [
        ("exp_pivot_q2", exp_pivot_ci(&sample, a.level)),
        ("normal_q2", normal_ci(&report, Target::Q2, Regime::Sqrtn, a.level)),
        ("normal_h2", normal_ci(&report, Target::H2, Regime::Sqrtn, a.level)),
        (
            "normal_q2_low_eps",
            normal_ci(&report, Target::Q2, Regime::Neps, a.level),
        ),
        (
            "normal_h2_low_eps",
            normal_ci(&report, Target::H2, Regime::Neps, a.level),
        ),
    ];
    for (name, ci) in candidates {
        intervals.insert(
            name.into(),
            match ci {
                Ok(ci) => serde_json::to_value(ci)?,
                Err(e) => json!({ "unavailable": e.to_string() }),
            },
        );
    }
    let doc = json!({
        "command": "estimate",
        "seed": a.common.seed,
        "input": path_str(&a.input),
        "config": { "eps": config.eps, "eps0": config.eps0, "r": config.r, "alpha": a.alpha, "level": a.level },
        "report": report,
        "intervals": Value::Object(intervals),
    });
    emit(&doc, a.common.output.as_deref())
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let mut plan: SimulationPlan = serde_json::from_reader(open(&a.plan)?)?;
    if let Some(n_sim) = a.nsim {
        plan.n_sim = n_sim;
    }
    if let Some(n) = a.n {
        plan.n = n;
    }
    if let Some(seed) = a.seed {
        plan.seed = seed;
    }
    let outcome = run_plan(&plan)?;
    if let Some(path) = &a.residuals_csv {
        let res = outcome
            .residuals
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("--residuals-csv needs a plan with a residual kind".into()))?;
        let file = File::create(path)?;
        res.write_residuals_csv(BufWriter::new(file))?;
    }
    let doc = json!({
        "command": "simulate",
        "seed": plan.seed,
        "plan": plan,
        "outcome": outcome,
    });
    emit(&doc, a.output.as_deref())
}

fn cmd_gof(a: GofArgs) -> Result<()> {
    let sample = read_sample(&a.input)?;
    let result = gof_statistic(&sample, a.eps)?;
    let doc = json!({
        "command": "gof",
        "seed": a.common.seed,
        "input": path_str(&a.input),
        "config": { "eps": a.eps, "delta": a.delta },
        "result": result,
        "rejects": result.rejects(a.delta),
    });
    emit(&doc, a.common.output.as_deref())
}

fn parse_subsets(text: &str) -> Result<Vec<Vec<usize>>> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|group| {
            group
                .split(',')
                .map(|c| {
                    c.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::InvalidConfig(format!("bad column index {c:?} in --subsets")))
                })
                .collect()
        })
        .collect()
}

fn cmd_keys(a: KeysArgs) -> Result<()> {
    let table = read_sample(&a.input)?;
    let subsets = match (&a.subsets, a.size) {
        (Some(text), _) => parse_subsets(text)?,
        (None, Some(size)) => all_subsets(table.dim(), size)?,
        (None, None) => unreachable!("clap requires one of --size and --subsets"),
    };
    let ranked = rank_candidates(&table, &subsets, a.eps)?;
    let doc = json!({
        "command": "keys",
        "seed": a.common.seed,
        "input": path_str(&a.input),
        "config": { "eps": a.eps, "size": a.size, "subsets": a.subsets },
        "n": table.len(),
        "columns": table.dim(),
        "candidates": ranked,
    });
    emit(&doc, a.common.output.as_deref())
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let spec: ProcessSpec = match (&a.spec, &a.spec_json) {
        (Some(path), _) => serde_json::from_reader(open(path)?)?,
        (None, Some(text)) => serde_json::from_str(text)?,
        (None, None) => unreachable!("clap requires one of --spec and --spec-json"),
    };
    let series = generate(&spec, a.n, a.common.seed, a.stream)?;
    match &a.csv {
        None => {
            let stdout = std::io::stdout();
            series.sample.write_csv(stdout.lock())
        }
        Some(path) => {
            series.sample.write_csv(BufWriter::new(File::create(path)?))?;
            let doc = json!({
                "command": "generate",
                "seed": series.seed,
                "stream_id": series.stream_id,
                "spec": series.spec,
                "n": a.n,
                "d": series.sample.dim(),
                "csv": path_str(path),
                "truth": spec.truth().ok(),
            });
            emit(&doc, a.common.output.as_deref())
        }
    }
}

fn cmd_discrete(a: DiscreteArgs) -> Result<()> {
    let sample = DiscreteSample::read_csv(open(&a.input)?)?;
    let report = discrete_report(&sample, a.r)?;
    let truth = match (a.truth_q2, a.truth_h2) {
        (Some(q), _) => Some((Target::Q2, q)),
        (None, Some(h)) => Some((Target::H2, h)),
        (None, None) => None,
    };
    let residual = match truth {
        Some((target, t)) => {
            match discrete_residual_from_parts(target, report.q2_hat, report.h2_hat, report.s2_hat, t, report.n) {
                Ok(r) => Some(r),
                Err(e @ Error::DegenerateVariance(_)) => {
                    eprintln!("warning: {e}");
                    None
                }
                Err(e) => return Err(e),
            }
        }
        None => None,
    };
    let doc = json!({
        "command": "discrete",
        "seed": a.common.seed,
        "input": path_str(&a.input),
        "config": { "r": a.r, "truth_q2": a.truth_q2, "truth_h2": a.truth_h2 },
        "report": report,
        "residual": residual,
        "degenerate_variance": report.s2_hat <= 0.0,
    });
    emit(&doc, a.common.output.as_deref())
}
