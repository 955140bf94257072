use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ror_core::harness::{self, exit_code, ExperimentConfig};
use ror_core::Error;

/// Run, sweep and plot training-process experiments.
#[derive(Parser)]
#[command(name = "ror", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run(RunArgs),
    /// Run one replica per seed, each into `<out>/seed_<s>`.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Inclusive seed range such as `0..4`.
        #[arg(long)]
        seeds: String,
        /// Replicas executed concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Render `learning_curve.svg` from the CSVs in a run or sweep directory.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    task: Option<String>,
    #[arg(long)]
    trainer: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Extra `key=value` overrides.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl RunArgs {
    fn load(&self) -> Result<ExperimentConfig, Error> {
        let mut overrides = Vec::new();
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config { line: 0, message: format!("--set expects KEY=VALUE, got `{kv}`") })?;
            overrides.push((k.to_string(), v.to_string()));
        }
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                overrides.push((k.to_string(), v));
            }
        };
        push("task", self.task.clone());
        push("trainer", self.trainer.clone());
        push("seed", self.seed.map(|s| s.to_string()));
        push("budget_n", self.budget.map(|b| b.to_string()));
        push("output_dir", self.out.as_ref().map(|p| p.display().to_string()));
        harness::load_config(self.config.as_deref(), &overrides)
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.load()?;
            let m = harness::run_experiment(&cfg)?;
            println!(
                "{} {} seed {}: {} real samples, {} TPE steps, final return {}",
                cfg.task.name(),
                cfg.trainer.name(),
                cfg.seed,
                m.real_samples_used,
                m.tpe_steps,
                m.final_mean_return.map_or("n/a".into(), |r| format!("{r:.1}")),
            );
        }
        Command::Sweep { run, seeds, jobs } => {
            let cfg = run.load()?;
            let range = harness::parse_seed_range(&seeds)?;
            for m in harness::sweep(&cfg, range, jobs)? {
                println!(
                    "seed {}: final return {}, samples to target {}",
                    m.config.seed,
                    m.final_mean_return.map_or("n/a".into(), |r| format!("{r:.1}")),
                    m.samples_to_target.map_or("not reached".into(), |n| n.to_string()),
                );
            }
        }
        Command::Plot { input } => {
            let path = harness::plot(&input)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
