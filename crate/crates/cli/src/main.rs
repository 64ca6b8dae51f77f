use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rough_laplace_cli::schema::schema_markdown;
use rough_laplace_cli::{run, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(name = "rough-laplace", version, about = "Experiments on fractional Brownian rough paths and Laplace asymptotics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON configuration; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Root directory for run outputs.
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Sample fBm paths and their level-2 lifts.
    Simulate(RunArgs),
    /// Lift one sampled path and report Chen residuals.
    Lift(RunArgs),
    /// Exact p-variation of sampled paths for several p.
    Pvar(RunArgs),
    /// Solve a rough differential equation along sampled drivers.
    Rde(RunArgs),
    /// Remainder slopes of the stochastic Taylor expansion.
    TaylorSlope(RunArgs),
    /// Truncated Hessian at the minimiser, its spectrum and the HS tail.
    Hessian(RunArgs),
    /// Minimise F_Λ, estimate the expansion constants and run the MC table.
    Laplace(RunArgs),
    /// Scale-invariance check of the lifted Lévy area.
    ScaleTest(RunArgs),
    /// Exponent ladder of the asymptotic expansion.
    Kappa(RunArgs),
    /// Print the output schema of every experiment.
    Schema,
}

fn execute(kind: ExperimentKind, args: RunArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    match cfg.kind {
        Some(k) if k != kind => bail!("configuration is for `{k}` but the `{kind}` subcommand was used"),
        _ => cfg.kind = Some(kind),
    }
    if let Some(seed) = args.seed {
        cfg.seed = Some(seed);
    }
    let resolved = cfg.resolve()?;
    if args.workers == 0 {
        bail!("--workers must be at least 1");
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.workers).build()?;
    let dir = pool.install(|| run(&resolved, &args.out))?;
    println!("{}", dir.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Simulate(a) => (ExperimentKind::Simulate, a),
        Command::Lift(a) => (ExperimentKind::Lift, a),
        Command::Pvar(a) => (ExperimentKind::Pvar, a),
        Command::Rde(a) => (ExperimentKind::Rde, a),
        Command::TaylorSlope(a) => (ExperimentKind::TaylorSlope, a),
        Command::Hessian(a) => (ExperimentKind::Hessian, a),
        Command::Laplace(a) => (ExperimentKind::Laplace, a),
        Command::ScaleTest(a) => (ExperimentKind::ScaleTest, a),
        Command::Kappa(a) => (ExperimentKind::Kappa, a),
        Command::Schema => {
            print!("{}", schema_markdown(&ExperimentKind::ALL));
            return ExitCode::SUCCESS;
        }
    };
    match execute(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
