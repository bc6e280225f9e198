//! Command-line front end: TOML configs in, CSV/JSON files plus a manifest out.

pub mod commands;
pub mod config;
pub mod error;
pub mod figures;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use config::{CachePolicy, Experiment, ExperimentConfig};
use error::CliError;
use output::OutputDir;

#[derive(Debug, Parser)]
#[command(
    name = "rydion",
    version,
    about = "Rydberg-dressed atom-ion gate simulations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML file; missing keys take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (default rydion-out/<command>).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Keep radial wavefunctions in memory only.
    #[arg(long)]
    pub no_cache: bool,
    /// Worker threads for the parallel parts.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Born-Oppenheimer curves around the target level.
    BoCurves(Common),
    /// Dressed potential, force and drive matching.
    Dressed(Common),
    /// Trap lengths, Mathieu exponent and crossover distance.
    TrapInfo(Common),
    /// Gate for the four product inputs.
    Gate(Common),
    /// Gate fidelity averaged over thermal motion.
    GateThermal(Common),
    /// Grid propagation with full rf micromotion.
    Micromotion {
        #[command(flatten)]
        common: Common,
        /// Extra zoom window T0:LEN in microseconds (repeatable).
        #[arg(long, value_parser = parse_zoom)]
        zoom: Vec<[f64; 2]>,
    },
    /// Classical orbits with the full and the third-order coupling.
    TaylorCheck(Common),
    /// Presets producing figure data: fig2, fig3, fig4, fig5mm, figA.
    Figures {
        id: String,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_zoom(s: &str) -> Result<[f64; 2], String> {
    let (a, b) = s.split_once(':').ok_or("expected T0:LEN in microseconds")?;
    let t0: f64 = a.trim().parse().map_err(|_| format!("bad start `{a}`"))?;
    let len: f64 = b.trim().parse().map_err(|_| format!("bad length `{b}`"))?;
    if !(t0 >= 0.0 && len > 0.0) {
        return Err("zoom needs T0 ≥ 0 and LEN > 0".into());
    }
    Ok([t0, len])
}

fn load(path: Option<&Path>, fallback: ExperimentConfig) -> Result<ExperimentConfig, CliError> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", p.display())))?;
            ExperimentConfig::parse(&text)
        }
        None => Ok(fallback),
    }
}

fn setup(common: &Common, cfg: &mut ExperimentConfig) -> Result<(), CliError> {
    if common.no_cache {
        cfg.cache = CachePolicy::Memory;
    }
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::Validation("--threads must be positive".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}

fn out_dir(common: &Common, cfg: &ExperimentConfig, name: &str) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| Path::new("rydion-out").join(name))
}

/// Runs one invocation and returns the manifest.
pub fn execute(cli: Cli) -> Result<serde_json::Value, CliError> {
    let (exp, common, zoom) = match cli.command {
        Command::BoCurves(c) => (Experiment::BoCurves, c, vec![]),
        Command::Dressed(c) => (Experiment::Dressed, c, vec![]),
        Command::TrapInfo(c) => (Experiment::TrapInfo, c, vec![]),
        Command::Gate(c) => (Experiment::Gate, c, vec![]),
        Command::GateThermal(c) => (Experiment::GateThermal, c, vec![]),
        Command::Micromotion { common, zoom } => (Experiment::Micromotion, common, zoom),
        Command::TaylorCheck(c) => (Experiment::TaylorCheck, c, vec![]),
        Command::Figures { id, common } => {
            figures::check_id(&id)?;
            let mut cfg = load(common.config.as_deref(), figures::preset(&id)?)?;
            setup(&common, &mut cfg)?;
            cfg.validate(figures::experiment_of(&id))?;
            let mut out = OutputDir::create(&out_dir(&common, &cfg, &id), &cfg.to_toml())?;
            figures::run(&id, &cfg, &mut out)?;
            return out.finish(&format!("figures {id}"));
        }
    };
    let mut cfg = load(common.config.as_deref(), ExperimentConfig::default())?;
    cfg.micromotion.zoom_us.extend(zoom);
    setup(&common, &mut cfg)?;
    cfg.validate(exp)?;
    let mut out = OutputDir::create(&out_dir(&common, &cfg, exp.name()), &cfg.to_toml())?;
    commands::run(exp, &cfg, &mut out)?;
    out.finish(exp.name())
}
