//! Command-line front end: run sweeps, validate configs, print presets.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::warn;
use rfthz::cli::{load_config, preset, run_sweep, ConfigError, MIN_TRIALS};

#[derive(Parser)]
#[command(
    name = "rfthz",
    version,
    about = "Mixed RF/THz relay link performance sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a sweep and write one CSV per metric.
    Run {
        config: PathBuf,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Monte Carlo trials per grid point.
        #[arg(long)]
        trials: Option<usize>,
        /// Base random seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Skip the simulation columns.
        #[arg(long)]
        no_mc: bool,
        /// Reject unknown config keys instead of warning.
        #[arg(long)]
        strict: bool,
    },
    /// Check a config and print its resolved form.
    Validate {
        config: PathBuf,
        #[arg(long)]
        strict: bool,
    },
    /// Print a replication config.
    Presets {
        #[arg(value_parser = ["fig2a", "fig2b", "fig2c"])]
        name: String,
    },
}

const CONFIG_ERROR: u8 = 1;
const PARTIAL_FAILURE: u8 = 2;

fn config_error(e: ConfigError) -> ExitCode {
    eprintln!("config error: {e}");
    ExitCode::from(CONFIG_ERROR)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Presets { name } => {
            print!("{}", preset(&name).expect("clap restricts preset names"));
            ExitCode::SUCCESS
        }
        Command::Validate { config, strict } => match load_config(&config, strict) {
            Ok((cfg, warnings)) => {
                warnings.iter().for_each(|w| warn!("{w}"));
                print!("{}", cfg.to_toml());
                ExitCode::SUCCESS
            }
            Err(e) => config_error(e),
        },
        Command::Run {
            config,
            out,
            trials,
            seed,
            no_mc,
            strict,
        } => {
            let mut cfg = match load_config(&config, strict) {
                Ok((cfg, warnings)) => {
                    warnings.iter().for_each(|w| warn!("{w}"));
                    cfg
                }
                Err(e) => return config_error(e),
            };
            if let Some(n) = trials {
                if n < MIN_TRIALS {
                    return config_error(ConfigError::Invalid {
                        field: "--trials".into(),
                        constraint: format!("at least {MIN_TRIALS}"),
                        value: n.to_string(),
                    });
                }
                cfg.mc_trials = n;
                cfg.file.simulation.trials = n;
            }
            if let Some(s) = seed {
                cfg.seed = s;
                cfg.file.simulation.seed = s;
            }
            if no_mc {
                cfg.mc_trials = 0;
                cfg.file.simulation.enabled = false;
            }
            let dir = out
                .or_else(|| cfg.file.output_dir.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out"));
            let output = run_sweep(&cfg);
            for artifact in &output.artifacts {
                match artifact.write_atomic(&dir) {
                    Ok(path) => println!("{}", path.display()),
                    Err(e) => {
                        eprintln!("cannot write {} output: {e}", artifact.metric.name());
                        return ExitCode::from(PARTIAL_FAILURE);
                    }
                }
            }
            let failed = output.failed_points();
            if failed > 0 {
                eprintln!("{failed} evaluation(s) failed; see the status column");
                return ExitCode::from(PARTIAL_FAILURE);
            }
            ExitCode::SUCCESS
        }
    }
}
