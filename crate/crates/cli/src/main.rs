//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation failure, 2 numerical failure,
//! 3 error-budget breach in `--check` mode.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lindsim::estimator::EstimateMode;
use lindsim::SimError;
use lindsim_cli::{config, experiment, presets};

#[derive(Parser)]
#[command(name = "lindsim", version, about = "Open-system observables from unitary evolution plus perturbative corrections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file or preset.
    Run(RunArgs),
    /// List the built-in presets.
    ListPresets,
    /// Parse and validate a config without running it.
    Validate(SourceArgs),
}

#[derive(Args)]
struct SourceArgs {
    /// Path to a TOML experiment config.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Name of a built-in preset.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the estimation mode.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<EstimateMode>,
    /// Override the truncation order K.
    #[arg(long)]
    orders: Option<usize>,
    /// Override the total error target ε (drives K and budgets).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Output directory for report.json and timeseries.csv.
    #[arg(long, default_value = "lindsim-out")]
    output: PathBuf,
    /// Override the oracle integrator resolution (steps per unit time).
    #[arg(long)]
    oracle_steps: Option<usize>,
    /// Suppress progress output.
    #[arg(long)]
    quiet: bool,
    /// Exit with code 3 if any grid point misses its error budget.
    #[arg(long)]
    check: bool,
}

fn parse_mode(s: &str) -> Result<EstimateMode, String> {
    match s {
        "shots" => Ok(EstimateMode::Shots),
        "exact-mean" => Ok(EstimateMode::ExactMean),
        "deterministic-quadrature" => Ok(EstimateMode::DeterministicQuadrature),
        other => Err(format!(
            "unknown mode \"{other}\" (shots | exact-mean | deterministic-quadrature)"
        )),
    }
}

fn load_config(source: &SourceArgs) -> Result<config::ExperimentConfig, SimError> {
    match (&source.config, &source.preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                SimError::Validation(format!("cannot read {}: {e}", path.display()))
            })?;
            config::parse_toml(&text)
        }
        (None, Some(name)) => presets::preset(name),
        _ => Err(SimError::Validation(
            "exactly one of --config or --preset is required".into(),
        )),
    }
}

fn exit_code_for(err: &SimError) -> u8 {
    match err {
        SimError::Validation(_) | SimError::Budget(_) => 1,
        _ => 2,
    }
}

fn worker_pool() -> Result<rayon::ThreadPool, SimError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("LINDSIM_WORKERS") {
        let n: usize = raw
            .parse()
            .map_err(|_| SimError::Validation(format!("bad LINDSIM_WORKERS value \"{raw}\"")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| SimError::Internal(format!("thread pool: {e}")))
}

fn run(args: &RunArgs) -> Result<bool, SimError> {
    let mut cfg = load_config(&args.source)?;
    if let Some(seed) = args.seed {
        cfg.run.seed = seed;
    }
    if let Some(mode) = args.mode {
        cfg.run.mode = mode;
    }
    if let Some(k) = args.orders {
        cfg.run.max_order = Some(k);
    }
    if let Some(eps) = args.epsilon {
        cfg.run.epsilon = Some(eps);
        if args.orders.is_none() {
            cfg.run.max_order = None;
        }
    }
    if let Some(steps) = args.oracle_steps {
        cfg.run.oracle_steps_per_unit = steps;
    }
    let pool = worker_pool()?;
    let artifacts = pool.install(|| experiment::run_experiment(&cfg))?;
    experiment::write_artifacts(&artifacts, &args.output)?;
    if !args.quiet {
        eprintln!(
            "wrote {} and {} (K = {}, {} grid point(s){})",
            args.output.join("report.json").display(),
            args.output.join("timeseries.csv").display(),
            artifacts.max_order,
            cfg.run.times.len(),
            if artifacts.breach {
                ", BUDGET BREACH"
            } else {
                ""
            }
        );
    }
    Ok(artifacts.breach)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run(args) => match run(args) {
            Ok(breach) => {
                if breach && args.check {
                    ExitCode::from(3)
                } else {
                    ExitCode::SUCCESS
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(exit_code_for(&e))
            }
        },
        Command::ListPresets => {
            for name in presets::preset_names() {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
        Command::Validate(source) => match load_config(source).and_then(|c| {
            config::validate(&c)?;
            Ok(c)
        }) {
            Ok(cfg) => {
                println!(
                    "ok: {} qubit(s), {} channel(s), {} grid point(s)",
                    cfg.model.qubits,
                    cfg.model.lindblads.len(),
                    cfg.run.times.len()
                );
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("invalid: {e}");
                ExitCode::from(exit_code_for(&e))
            }
        },
    }
}
