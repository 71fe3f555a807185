use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use lcv_bandit_cli::commands::{cmd_figures, cmd_run, cmd_sweep, quantile_table, FiguresOptions};
use lcv_bandit_cli::output::Manifest;
use lcv_bandit_cli::parse_config;

#[derive(Parser)]
#[command(name = "lcvb", version, about = "Bandits with limited control variates: experiments and figure data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment configuration (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Override a configuration key by dotted path; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Base seed, replacing the configured one.
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn overrides(&self) -> Vec<String> {
        let mut o = self.overrides.clone();
        o.extend(self.seed.map(|s| format!("seed={s}")));
        o
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[command(flatten)]
    workers: WorkerArgs,
}

#[derive(Args)]
struct WorkerArgs {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, env = "LCVB_WORKERS", value_parser = clap::value_parser!(u32).range(1..))]
    workers: Option<u32>,
}

impl WorkerArgs {
    fn resolve(&self) -> usize {
        self.workers
            .map(|w| w as usize)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured policy and write regret.csv and manifest.json.
    Run(RunArgs),
    /// Run the configured [sweep], one subdirectory per value.
    Sweep(RunArgs),
    /// Write the critical-value curves and the regret figure datasets.
    Figures {
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        #[command(flatten)]
        workers: WorkerArgs,
        /// Base seed for every preset.
        #[arg(long)]
        seed: Option<u64>,
        /// Override a preset key by dotted path, e.g. runs=10; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Only write the critical-value curves.
        #[arg(long)]
        no_experiments: bool,
    },
    /// Print t quantiles over a grid of percentiles and degrees of freedom.
    QuantileTable,
    /// Parse a configuration and print it fully resolved.
    Validate(ConfigArgs),
}

fn report(manifest: &Manifest, out: &std::path::Path) {
    eprintln!(
        "wrote {} files to {} in {:.2} s",
        manifest.files.len(),
        out.display(),
        manifest.duration_seconds
    );
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let config = parse_config(&args.config.config, &args.config.overrides())?;
            report(&cmd_run(&config, &args.out, args.workers.resolve())?, &args.out);
        }
        Command::Sweep(args) => {
            let config = parse_config(&args.config.config, &args.config.overrides())?;
            report(&cmd_sweep(&config, &args.out, args.workers.resolve())?, &args.out);
        }
        Command::Figures { out, workers, seed, mut overrides, no_experiments } => {
            overrides.extend(seed.map(|s| format!("seed={s}")));
            let options = FiguresOptions { overrides, skip_experiments: no_experiments };
            report(&cmd_figures(&out, &options, workers.resolve())?, &out);
        }
        Command::QuantileTable => print!("{}", quantile_table()?),
        Command::Validate(args) => {
            let config = parse_config(&args.config, &args.overrides())?;
            print!("{}", config.to_toml());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
