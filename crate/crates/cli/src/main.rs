//! `ata`: plan and run ancilla-train simulations from a TOML configuration.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::commands::LadderParam;
use crate::config::{EngineKind, RunConfig};
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "ata", version, about = "Ancilla-train simulation of open quantum systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Master seed (overrides the configuration).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for trajectory sampling.
    #[arg(long, env = "ATA_THREADS")]
    threads: Option<usize>,
    /// `pure`, `density`, `oscillator` or `oscillator:<levels>`.
    #[arg(long)]
    engine: Option<EngineArg>,
    /// Output directory (overrides the configuration).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the derived plan and resource estimate.
    Plan(Common),
    /// Run the engine and write trajectory.csv and plan.json.
    Run(Common),
    /// Sample classical colored-noise paths into noise.csv.
    Noise(Common),
    /// Rerun with one parameter scaled and report final-state distances.
    Converge {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        param: LadderParam,
        #[arg(long, value_delimiter = ',', default_value = "1,0.5,0.25")]
        factors: Vec<f64>,
    },
    /// Run the oracle self-tests.
    Check {
        #[arg(long, env = "ATA_THREADS")]
        threads: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug)]
struct EngineArg {
    kind: EngineKind,
    levels: Option<usize>,
}

impl FromStr for EngineArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (name, levels) = match s.split_once(':') {
            Some((n, l)) => (n, Some(l.parse::<usize>().map_err(|e| format!("levels {l:?}: {e}"))?)),
            None => (s, None),
        };
        let kind = match name {
            "pure" => EngineKind::Pure,
            "density" => EngineKind::Density,
            "oscillator" => EngineKind::Oscillator,
            _ => return Err(format!("unknown engine {name:?}")),
        };
        if levels.is_some() && kind != EngineKind::Oscillator {
            return Err("levels apply to the oscillator engine only".into());
        }
        Ok(Self { kind, levels })
    }
}

fn init_threads(threads: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::validation("threads must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::io(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn load(common: &Common) -> Result<(RunConfig, PathBuf), CliError> {
    init_threads(common.threads)?;
    let mut config = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(e) = common.engine {
        config.engine = e.kind;
        if let Some(l) = e.levels {
            config.levels = l;
        }
    }
    config.validate()?;
    let out = common.out.clone().unwrap_or_else(|| config.output.clone());
    Ok((config, out))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Plan(common) => {
            let (config, _) = load(&common)?;
            print!("{}", commands::plan_report(&config)?);
        }
        Command::Run(common) => {
            let (config, out) = load(&common)?;
            commands::run(&config, &out)?;
            eprintln!("wrote {}", out.display());
        }
        Command::Noise(common) => {
            let (config, out) = load(&common)?;
            commands::noise(&config, &out)?;
            eprintln!("wrote {}", out.display());
        }
        Command::Converge { common, param, factors } => {
            let (config, _) = load(&common)?;
            print!("{}", commands::converge(&config, param, &factors)?.report(param));
        }
        Command::Check { threads } => {
            init_threads(threads)?;
            let (lines, ok) = commands::check();
            for l in lines {
                println!("{l}");
            }
            if !ok {
                return Err(CliError::numerical("oracle self-test failed"));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
