//! `meridian`: batch runs of the kernel, reconstruction, feasibility and
//! oscillation checks.
//!
//! Exit status: 0 when every checked property held, 1 when one was
//! violated, 2 for invalid configuration or numerical failure.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "meridian", version, about = "Numerical checks for axisymmetric Biot-Savart analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration; every key is optional.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Seed for randomized checks.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Run kernel scans on the grid and its twofold refinement.
    #[arg(long, global = true)]
    refine: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Supremum of kernel over envelope on a log grid.
    KernelScan,
    /// Far-field velocity trace for power-law vorticity, with a rate fit.
    Decay,
    /// Brute-force exponent feasibility against the explicit construction.
    Feasibility,
    /// Velocity to vorticity and back.
    Roundtrip,
    /// Normalized oscillations of ln r over dyadic cylinders.
    Bmo,
    /// Print the effective configuration as TOML.
    PrintConfig,
}

const DEFAULT_OUT: &str = "meridian-out";

fn load(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            RunConfig::parse(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.out = out.display().to_string();
    }
    if cfg.out.is_empty() {
        cfg.out = DEFAULT_OUT.into();
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.kernel_scan.refine |= cli.refine;
    match cli.command {
        Command::KernelScan => cfg.validate_kernel_scan(),
        Command::Decay => cfg.validate_decay(),
        Command::Feasibility => cfg.validate_feasibility(),
        Command::Roundtrip => cfg.validate_roundtrip(),
        Command::Bmo => cfg.validate_bmo(),
        Command::PrintConfig => Ok(()),
    }
    .context("invalid configuration")?;
    Ok(cfg)
}

fn run(cmd: Command, cfg: &RunConfig) -> Result<bool> {
    if cmd == Command::PrintConfig {
        print!("{}", cfg.to_toml()?);
        return Ok(true);
    }
    let out = Path::new(&cfg.out);
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    std::fs::write(out.join("config.toml"), cfg.to_toml()?)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build()?;
    pool.install(|| match cmd {
        Command::KernelScan => commands::kernel_scan(cfg, out),
        Command::Decay => commands::decay(cfg, out),
        Command::Feasibility => commands::feasibility(cfg, out),
        Command::Roundtrip => commands::roundtrip(cfg, out),
        Command::Bmo => commands::bmo(cfg, out),
        Command::PrintConfig => unreachable!(),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    match run(cli.command, &cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("check failed; see the reports in {}", cfg.out);
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
