mod commands;
mod config;
mod error;
mod output;

use clap::{Parser, Subcommand};
use config::RunConfig;
use error::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "asymcoll", version, about = "Particle systems with asymmetric collisions: simulations and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration (a manifest from an earlier run also works).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Replica count; overrides the config.
    #[arg(long, global = true)]
    replicas: Option<usize>,
    /// Output directory for CSV files and the manifest.
    #[arg(long, global = true, default_value = "asymcoll-out")]
    out: PathBuf,
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Parameter checks: validity, conditions (A) and (B), sign test, corner, jump assumption.
    Check {
        /// Fail unless condition (A) holds.
        #[arg(long = "require-condition-A", alias = "require-condition-a")]
        require_condition_a: bool,
    },
    /// Simulate ranked diffusions, the names system or jump systems.
    Simulate,
    /// Jump-to-diffusion convergence over a ladder of scales.
    Converge,
    /// Closed-form invariant law and a stationarity test.
    Invariant,
    /// Capital distribution curve at the stationary mean spacings.
    Curve,
    /// Determinantal transition density and its verification.
    Density,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Check { .. } => "check",
            Command::Simulate => "simulate",
            Command::Converge => "converge",
            Command::Invariant => "invariant",
            Command::Curve => "curve",
            Command::Density => "density",
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    cfg.manifest = None;
    if let Some(s) = cli.seed {
        cfg.seed = Some(s);
    }
    if let Some(r) = cli.replicas {
        cfg.replicas = Some(r);
    }
    cfg.seed.get_or_insert(0);
    #[cfg(feature = "parallel")]
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global().map_err(CliError::runtime)?;
    }
    let mut art = output::Artifacts::default();
    let verdict = match cli.command {
        Command::Check { require_condition_a } => commands::check::run(&mut cfg, require_condition_a, &mut art),
        Command::Simulate => commands::simulate::run(&mut cfg, &mut art),
        Command::Converge => commands::converge::run(&mut cfg, &mut art),
        Command::Invariant => commands::invariant::run(&mut cfg, &mut art),
        Command::Curve => commands::curve::run(&mut cfg, &mut art),
        Command::Density => commands::density::run(&mut cfg, &mut art),
    };
    // Partial results are still worth keeping when a check rejects.
    match &verdict {
        Ok(()) | Err(CliError::Rejected(_)) | Err(CliError::Runtime(_)) if art.names().next().is_some() => {
            art.write(&cli.out, &cfg, cli.command.name())?;
        }
        _ => {}
    }
    verdict
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("asymcoll {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}
