use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use riscc_core::feedback::{greedy_partition, se_loss_approx, se_loss_upper};
use riscc_core::harness::{AllocationSource, TrialOptions};
use riscc_core::scenario::Deployment;
use riscc_core::transceiver::NoiseModel;
use riscc_sim::experiments::{sweep, Experiment, SweepOptions};
use riscc_sim::output::{emit, Format};
use riscc_sim::{resolve_seed, scenario_file, validate, SEED_ENV};

#[derive(Parser)]
#[command(name = "riscc", version, about = "Multi-RIS channel customization simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseArg {
    Whitened,
    Raw,
}

#[derive(Clone, Copy, ValueEnum)]
enum AllocationArg {
    Perfect,
    Realized,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment and write its rows to a file.
    Simulate {
        /// Scenario JSON file, or `paper_default` for the bundled deployment.
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        experiment: Experiment,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Overrides the environment variable and the scenario file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "csv")]
        format: Format,
        /// Comma-separated sweep values replacing the experiment's default grid.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        grid: Option<Vec<f64>>,
        /// Noise covariance used when evaluating spectral efficiency.
        #[arg(long, value_enum, default_value = "whitened")]
        noise_model: NoiseArg,
        /// Gains the quantized regimes allocate power over.
        #[arg(long, value_enum, default_value = "perfect")]
        allocation_source: AllocationArg,
        /// Search every sampled RIS–Rx path instead of the pruned set.
        #[arg(long)]
        no_prune: bool,
    },
    /// Check the model invariants on one realization of a scenario.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Trial index of the realization to check.
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
    /// Print the greedy split of extra feedback bits and its SE-loss figures.
    Bitalloc {
        /// Average link quality of each stream (linear).
        #[arg(long, value_delimiter = ',', required = true)]
        cbar: Vec<f64>,
        #[arg(long)]
        extra: u32,
    },
}

fn env_seed() -> Option<String> {
    std::env::var(SEED_ENV).ok()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            scenario,
            experiment,
            trials,
            seed,
            out,
            format,
            grid,
            noise_model,
            allocation_source,
            no_prune,
        } => {
            let config = scenario_file::load(&scenario)?;
            let seed = resolve_seed(seed, env_seed().as_deref(), config.rng_seed)?;
            let options = SweepOptions {
                trials,
                seed,
                grid,
                trial: TrialOptions {
                    prune: !no_prune,
                    noise_model: match noise_model {
                        NoiseArg::Whitened => NoiseModel::Whitened,
                        NoiseArg::Raw => NoiseModel::Raw,
                    },
                    allocation_source: match allocation_source {
                        AllocationArg::Perfect => AllocationSource::PerfectGains,
                        AllocationArg::Realized => AllocationSource::RealizedGains,
                    },
                },
            };
            let result = sweep(&config, experiment, &options).with_context(|| format!("running {experiment}"))?;
            emit(&result, format, &out)?;
            eprintln!("wrote {} rows to {}", result.rows.len(), out.display());
            Ok(())
        }
        Command::Validate { scenario, seed, trial } => {
            let config = scenario_file::load(&scenario)?;
            let seed = resolve_seed(seed, env_seed().as_deref(), config.rng_seed)?;
            let deployment = Deployment::new(config)?;
            let checks = validate::run(&deployment, seed, trial)?;
            let failed = checks.iter().filter(|c| !c.passed).count();
            for c in &checks {
                let status = if c.passed { "ok  " } else { "FAIL" };
                if c.detail.is_empty() {
                    println!("{status} {}", c.name);
                } else {
                    println!("{status} {}: {}", c.name, c.detail);
                }
            }
            if failed > 0 {
                bail!("{failed} of {} invariant checks failed", checks.len());
            }
            Ok(())
        }
        Command::Bitalloc { cbar, extra } => {
            if cbar.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
                bail!("--cbar values must be finite and positive");
            }
            let plan = greedy_partition(&cbar, extra);
            println!("plan {plan:?}");
            println!("se_loss_approx {:.6}", se_loss_approx(&cbar, &plan));
            println!("se_loss_upper {:.6}", se_loss_upper(&plan));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
