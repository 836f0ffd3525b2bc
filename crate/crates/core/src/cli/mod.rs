//! Command line front end.
//!
//! Subcommands: `allocate`, `simulate`, `bounds`, `sweep`, `truthfulness`.
//! Results go to stdout as JSON (default) or CSV, errors to stderr. Exit
//! status is 0 on success, 2 for usage errors and 1 for internal numeric
//! failures.

pub mod config;
pub mod result;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::bounds;
use crate::distributions::{solve_threshold_at, Convention, DistributionSpec, Family, THRESHOLD_QUANTILE};
use crate::mechanism::{self, CostVector};
use crate::row;
use crate::simulation::{self, default_trials, SimulationConfig};

pub use result::{num, ExperimentResult};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Internal(String),
    /// `--help` / `--version` text.
    #[error("{0}")]
    Display(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Display(_) => 0,
            CliError::Internal(_) => 1,
            CliError::Usage(_) => 2,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        if e.is_input_error() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Internal(e.to_string())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    N,
    Epsilon,
}

#[derive(Debug, Parser)]
#[command(name = "mechsched", version, about = "Average-case ratio of truthful single-task scheduling without payments")]
#[command(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct Common {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads for simulations; results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// CDF convention for thresholds: `paper` or `renormalized`.
    #[arg(long, default_value = "paper", value_parser = parse_convention)]
    convention: Convention,
    /// Flat `key = value` file with defaults for any flag.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct DistArgs {
    #[arg(long, default_value = "pareto", value_parser = parse_family)]
    family: Family,
    #[arg(long, default_value_t = 1.0)]
    shape: f64,
    #[arg(long = "tmin", default_value_t = 1.0)]
    t_min: f64,
    /// Override the 11/12 quantile that defines the threshold h.
    #[arg(long)]
    threshold_quantile: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Allocation probabilities and social cost of one instance.
    Allocate {
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        costs: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo estimate of the average-case ratio.
    Simulate {
        #[command(flatten)]
        dist: DistArgs,
        #[arg(long, default_value_t = 16)]
        n: usize,
        /// Defaults to 10^5 up to 64 machines and 10^4 above.
        #[arg(long)]
        trials: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Table of the closed-form bounds per machine count.
    Bounds {
        #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32,64,128,256")]
        ns: Vec<u32>,
        #[command(flatten)]
        dist: DistArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Average ratio across n, or worst-case ratio across epsilon.
    Sweep {
        #[arg(long, value_enum)]
        kind: SweepKind,
        #[arg(long, value_delimiter = ',', default_value = "4,16,64,256")]
        ns: Vec<usize>,
        #[arg(long)]
        trials: Option<u64>,
        /// Machine count for the epsilon sweep.
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        epsilons: Vec<f64>,
        #[command(flatten)]
        dist: DistArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Best misreport of one machine over a log-spaced grid.
    Truthfulness {
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        costs: Vec<f64>,
        #[arg(long)]
        machine: usize,
        /// Defaults to min(costs) / 100.
        #[arg(long, allow_negative_numbers = true)]
        grid_min: Option<f64>,
        /// Defaults to 100 * max(costs).
        #[arg(long)]
        grid_max: Option<f64>,
        #[arg(long, default_value_t = 100)]
        grid_points: usize,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Allocate { common, .. }
            | Command::Simulate { common, .. }
            | Command::Bounds { common, .. }
            | Command::Sweep { common, .. }
            | Command::Truthfulness { common, .. } => common,
        }
    }
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: crate::Error| e.to_string())
}

fn parse_convention(s: &str) -> Result<Convention, String> {
    s.parse().map_err(|e: crate::Error| e.to_string())
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, usize::from)
}

const SUBCOMMANDS: [&str; 5] = ["allocate", "simulate", "bounds", "sweep", "truthfulness"];

fn parse_cli(args: &[OsString]) -> Result<Cli, CliError> {
    Cli::try_parse_from(args).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp
        | clap::error::ErrorKind::DisplayVersion
        | clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            CliError::Display(e.to_string())
        }
        _ => CliError::Usage(e.to_string()),
    })
}

/// Parses `args` (including the program name), applying `--config` if given.
fn parse_with_config(args: &[OsString]) -> Result<Cli, CliError> {
    let cli = parse_cli(args)?;
    let Some(path) = cli.command.common().config.clone() else {
        return Ok(cli);
    };
    let injected = config::as_args(&config::load(&path)?);
    let sub = args
        .iter()
        .position(|a| a.to_str().is_some_and(|s| SUBCOMMANDS.contains(&s)))
        .ok_or_else(|| CliError::Usage("missing subcommand".into()))?;
    let mut merged: Vec<OsString> = args[..=sub].to_vec();
    merged.extend(injected.into_iter().map(OsString::from));
    merged.extend(args[sub + 1..].iter().cloned());
    parse_cli(&merged)
}

/// Runs one invocation and returns the rendered output.
pub fn run<I, T>(args: I) -> Result<String, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = parse_with_config(&args)?;
    let format = cli.command.common().format;
    let result = execute(cli.command)?;
    match format {
        Format::Json => Ok(result.to_json()),
        Format::Csv => result.to_csv(),
    }
}

fn execute(command: Command) -> Result<ExperimentResult, CliError> {
    match command {
        Command::Allocate { costs, common } => cmd_allocate(&costs, common.seed),
        Command::Simulate {
            dist,
            n,
            trials,
            common,
        } => {
            let spec = dist_spec(&dist, common.convention)?;
            let workers = common.workers.unwrap_or_else(default_workers);
            cmd_simulate(&spec, n, trials.unwrap_or_else(|| default_trials(n)), common.seed, workers, quantile(&dist))
        }
        Command::Bounds { ns, dist, common } => {
            let spec = dist_spec(&dist, common.convention)?;
            cmd_bounds(&ns, &spec, quantile(&dist), common.seed)
        }
        Command::Sweep {
            kind,
            ns,
            trials,
            n,
            epsilons,
            dist,
            common,
        } => match kind {
            SweepKind::N => {
                let spec = dist_spec(&dist, common.convention)?;
                let workers = common.workers.unwrap_or_else(default_workers);
                cmd_sweep_n(&spec, &ns, trials, common.seed, workers, quantile(&dist))
            }
            SweepKind::Epsilon => cmd_sweep_epsilon(n, &epsilons, common.seed),
        },
        Command::Truthfulness {
            costs,
            machine,
            grid_min,
            grid_max,
            grid_points,
            common,
        } => cmd_truthfulness(&costs, machine, grid_min, grid_max, grid_points, common.seed),
    }
}

fn dist_spec(d: &DistArgs, convention: Convention) -> Result<DistributionSpec, CliError> {
    Ok(DistributionSpec::new(d.family, d.shape, d.t_min, convention)?)
}

fn quantile(d: &DistArgs) -> f64 {
    d.threshold_quantile.unwrap_or(THRESHOLD_QUANTILE)
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| result::scalar_text(&num(*v)))
        .collect::<Vec<_>>()
        .join(",")
}

fn spec_params(r: &mut ExperimentResult, spec: &DistributionSpec, quantile: f64) {
    r.param("family", spec.family().as_str())
        .param("shape", num(spec.shape()))
        .param("t_min", num(spec.t_min()))
        .param("convention", spec.convention().as_str())
        .param("threshold_quantile", num(quantile));
}

pub fn cmd_allocate(costs: &[f64], seed: u64) -> Result<ExperimentResult, CliError> {
    let t = CostVector::new(costs.to_vec())?;
    let p = mechanism::allocate(&t)?;
    let outcome = mechanism::social_cost(&t)?;
    let mut r = ExperimentResult::new("allocate", seed);
    r.param("costs", join(costs));
    r.summarize("n", costs.len())
        .summarize("sum_probabilities", num(p.sum()))
        .summarize("social_cost", num(outcome.social_cost))
        .summarize("optimal_cost", num(outcome.optimal_cost))
        .summarize("ratio", num(outcome.ratio));
    for (i, (&c, &pi)) in costs.iter().zip(p.as_slice()).enumerate() {
        r.push(row! {"index" => i, "cost" => num(c), "probability" => num(pi)})?;
    }
    Ok(r)
}

pub fn cmd_simulate(
    spec: &DistributionSpec,
    n: usize,
    trials: u64,
    seed: u64,
    workers: usize,
    quantile: f64,
) -> Result<ExperimentResult, CliError> {
    let cfg = SimulationConfig::new(*spec, n, trials, seed)
        .with_workers(workers)
        .with_threshold_quantile(quantile);
    let est = simulation::estimate_average_ratio(&cfg)?;
    let q = spec.cdf_with(Convention::Renormalized, est.h * spec.t_min());
    let event_a_exact = bounds::event_a_probability(n as u32, q)?.prob_exact;
    let mut r = ExperimentResult::new("simulate", seed);
    spec_params(&mut r, spec, quantile);
    r.param("n", n).param("trials", trials).param("workers", workers);
    r.summarize("bound_satisfied", est.bound_satisfied());
    r.push(row! {
        "n" => n,
        "trials" => est.trials,
        "mean_ratio" => num(est.mean_ratio),
        "std_error" => num(est.std_error),
        "event_a_freq" => num(est.event_a_freq),
        "event_a_exact" => num(event_a_exact),
        "lemma1_violations" => est.lemma1_violations,
        "cap_violations" => est.cap_violations,
        "max_ratio_seen" => num(est.max_ratio_seen),
        "min_ratio_seen" => num(est.min_ratio_seen),
        "h" => num(est.h),
        "theorem1_bound" => num(est.theorem1_bound),
        "worst_case" => num(est.worst_case()),
        "bound_satisfied" => est.bound_satisfied(),
    })?;
    Ok(r)
}

pub fn cmd_bounds(ns: &[u32], spec: &DistributionSpec, quantile: f64, seed: u64) -> Result<ExperimentResult, CliError> {
    if ns.is_empty() {
        return Err(CliError::Usage("--ns must list at least one machine count".into()));
    }
    let threshold = solve_threshold_at(spec, quantile)?;
    let q = threshold.cdf_at_threshold;
    let mut r = ExperimentResult::new("bounds", seed);
    spec_params(&mut r, spec, quantile);
    r.param("ns", ns.iter().map(u32::to_string).collect::<Vec<_>>().join(","));
    r.summarize("h", num(threshold.h))
        .summarize("cdf_at_threshold", num(q))
        .summarize("theorem1_bound", num(threshold.theorem1_bound));
    for &n in ns {
        if n < 2 {
            return Err(CliError::Usage(format!("machine counts must be at least 2, got {n}")));
        }
        let central = bounds::central_binomial_bound(n).ok();
        let certified = central.and_then(|_| bounds::robbins_certificate(n).ok());
        let event_a = bounds::event_a_probability(n, q)?;
        let lemma3_holds = if n % 2 == 0 {
            Value::from(event_a.prob_exact >= event_a.lemma3_lower_bound)
        } else {
            Value::Null
        };
        r.push(row! {
            "n" => n,
            "binom_exact" => central.map_or(Value::Null, |c| num(c.exact)),
            "robbins_bound" => central.map_or(Value::Null, |c| num(c.robbins_bound)),
            "robbins_holds" => certified.map_or(Value::Null, Value::from),
            "k_half" => event_a.k_half,
            "q" => num(q),
            "event_a_exact" => num(event_a.prob_exact),
            "lemma3_lower_bound" => num(event_a.lemma3_lower_bound),
            "lemma3_holds" => lemma3_holds,
            "lemma4_bound" => num(bounds::lemma4_bound(n)),
            "worst_case" => num(simulation::worst_case_ratio(n as usize)),
            "h" => num(threshold.h),
            "theorem1_proof_bound" => num(bounds::theorem1_proof_bound(threshold.h, n)),
            "theorem1_bound" => num(threshold.theorem1_bound),
        })?;
    }
    Ok(r)
}

pub fn cmd_sweep_n(
    spec: &DistributionSpec,
    ns: &[usize],
    trials: Option<u64>,
    seed: u64,
    workers: usize,
    quantile: f64,
) -> Result<ExperimentResult, CliError> {
    if ns.is_empty() {
        return Err(CliError::Usage("--ns must list at least one machine count".into()));
    }
    let mut r = ExperimentResult::new("sweep", seed);
    r.param("kind", "n");
    spec_params(&mut r, spec, quantile);
    r.param("ns", ns.iter().map(usize::to_string).collect::<Vec<_>>().join(","))
        .param("trials", trials.map_or(Value::Null, Value::from))
        .param("workers", workers);
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    for n in ns {
        let cfg = SimulationConfig::new(*spec, n, trials.unwrap_or_else(|| default_trials(n)), seed)
            .with_workers(workers)
            .with_threshold_quantile(quantile);
        let est = simulation::estimate_average_ratio(&cfg)?;
        r.push(row! {
            "n" => n,
            "trials" => est.trials,
            "mean_ratio" => num(est.mean_ratio),
            "std_error" => num(est.std_error),
            "event_a_freq" => num(est.event_a_freq),
            "lemma1_violations" => est.lemma1_violations,
            "worst_case" => num(est.worst_case()),
            "bound" => num(est.theorem1_bound),
        })?;
    }
    Ok(r)
}

pub fn cmd_sweep_epsilon(n: usize, epsilons: &[f64], seed: u64) -> Result<ExperimentResult, CliError> {
    if epsilons.is_empty() {
        return Err(CliError::Usage("--epsilons must list at least one value".into()));
    }
    let rows = simulation::worst_case_sweep(n, epsilons)?;
    let mut r = ExperimentResult::new("sweep", seed);
    r.param("kind", "epsilon").param("n", n).param("epsilons", join(epsilons));
    let limit = simulation::worst_case_ratio(n);
    for (eps, ratio) in rows {
        r.push(row! {"epsilon" => num(eps), "ratio" => num(ratio), "limit" => num(limit)})?;
    }
    Ok(r)
}

pub fn cmd_truthfulness(
    costs: &[f64],
    machine: usize,
    grid_min: Option<f64>,
    grid_max: Option<f64>,
    grid_points: usize,
    seed: u64,
) -> Result<ExperimentResult, CliError> {
    let t = CostVector::new(costs.to_vec())?;
    if machine >= t.len() {
        return Err(crate::Error::MachineIndex { index: machine, n: t.len() }.into());
    }
    let lo = grid_min.unwrap_or_else(|| t.min() / 100.0);
    let hi = grid_max.unwrap_or_else(|| 100.0 * costs.iter().copied().fold(f64::MIN, f64::max));
    let grid = mechanism::log_grid(lo, hi, grid_points)?;
    let mut r = ExperimentResult::new("truthfulness", seed);
    r.param("costs", join(costs))
        .param("machine", machine)
        .param("grid_min", num(lo))
        .param("grid_max", num(hi))
        .param("grid_points", grid_points);
    let mut best: Option<crate::DeviationReport<f64>> = None;
    for &d in &grid {
        let report = mechanism::deviation_cost(&t, machine, d)?;
        r.push(row! {
            "declared" => num(d),
            "deviated_expected_cost" => num(report.deviated_expected_cost),
            "profitable" => report.profitable,
        })?;
        if best
            .as_ref()
            .is_none_or(|b| report.deviated_expected_cost < b.deviated_expected_cost)
        {
            best = Some(report);
        }
    }
    let best = best.expect("grid has at least two points");
    r.summarize("true_cost", num(best.true_cost))
        .summarize("truthful_expected_cost", num(best.truthful_expected_cost))
        .summarize("best_declaration", num(best.declared_cost))
        .summarize("best_deviated_expected_cost", num(best.deviated_expected_cost))
        .summarize("profitable", best.profitable);
    Ok(r)
}
