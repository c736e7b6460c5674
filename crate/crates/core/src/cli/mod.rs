//! The `pdeobs` command line: design, simulate, sweep, check-gain and the two
//! worked examples, all driven by a JSON scenario config.

mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use commands::{check_gain, design, example31, example32, simulate, sweep, Outcome};
pub use config::{apply_override, ScenarioConfig, SCHEMA_VERSION};

use crate::analysis::AnalysisError;
use crate::observer_design::{DesignError, Variant};
use crate::pde_simulator::SimError;
use crate::sturm_liouville::SlError;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {0}: {1}")]
    Read(String, String),
    #[error("invalid JSON: {0}")]
    Parse(String),
    #[error("at `{path}`: {message}")]
    Field { path: String, message: String },
    #[error("override `{0}`: {1}")]
    Override(String, String),
    #[error("{0}")]
    Missing(String),
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Spectral(#[from] SlError),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "pdeobs", version, about = "Sampled-data observers for 1-D parabolic PDEs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Scenario config (JSON). For the example commands: a parameter file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Override a config field, e.g. `--set analysis.omega=0.1` (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Exit with status 3 if any checked invariant fails.
    #[arg(long, global = true)]
    pub strict: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize the observer and its certificate.
    Design,
    /// Co-simulate plant and observer; write the trajectory and the bound checks.
    Simulate,
    /// Ω (and optionally simulations) over the config's sweep grids.
    Sweep,
    /// Evaluate Ω only.
    CheckGain,
    /// Heat equation with the output ∫x u.
    Example31(Example31Args),
    /// Boundary-derivative output via the derivative system.
    Example32(Example32Args),
}

#[derive(Debug, Args)]
pub struct Example31Args {
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long, value_parser = parse_variant)]
    pub variant: Option<Variant>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub nodes: Option<usize>,
}

#[derive(Debug, Args)]
pub struct Example32Args {
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub nodes: Option<usize>,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    match s {
        "predictor" => Ok(Variant::Predictor),
        "zoh" => Ok(Variant::Zoh),
        _ => Err(format!("unknown variant `{s}` (predictor or zoh)")),
    }
}

impl Cli {
    fn overrides(&self) -> Vec<String> {
        let mut all = self.set.clone();
        if let Some(seed) = self.seed {
            all.push(format!("seed={seed}"));
        }
        all
    }

    fn scenario(&self) -> Result<ScenarioConfig, ConfigError> {
        let path = self.config.as_ref().ok_or_else(|| ConfigError::Missing("--config PATH is required".into()))?;
        ScenarioConfig::load(path, &self.overrides())
    }
}

/// Runs one command; the outcome lists invariant violations found on the way.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Design => design(&cli.scenario()?, &cli.out),
        Command::Simulate => simulate(&cli.scenario()?, &cli.out),
        Command::Sweep => sweep(&cli.scenario()?, &cli.out),
        Command::CheckGain => check_gain(&cli.scenario()?),
        Command::Example31(a) => {
            let mut sets = Vec::new();
            let mut put = |k: &str, v: Option<String>| {
                if let Some(v) = v {
                    sets.push(format!("{k}={v}"));
                }
            };
            put("p", a.p.map(|v| v.to_string()));
            put("h", a.h.map(|v| v.to_string()));
            put("omega", a.omega.map(|v| v.to_string()));
            put("variant", a.variant.map(|v| v.to_string()));
            put("horizon", a.horizon.map(|v| v.to_string()));
            put("nodes", a.nodes.map(|v| v.to_string()));
            sets.extend(cli.overrides());
            example31(cli.config.as_deref(), &sets, &cli.out)
        }
        Command::Example32(a) => {
            let mut sets = Vec::new();
            let mut put = |k: &str, v: Option<f64>| {
                if let Some(v) = v {
                    sets.push(format!("{k}={v}"));
                }
            };
            put("p", a.p);
            put("q", a.q);
            put("h", a.h);
            put("omega", a.omega);
            put("horizon", a.horizon);
            put("nodes", a.nodes.map(|n| n as f64));
            sets.extend(cli.overrides());
            example32(cli.config.as_deref(), &sets, &cli.out)
        }
    }
}

/// Exit status for a finished run.
pub fn exit_status(result: &Result<Outcome, CliError>, strict: bool) -> i32 {
    match result {
        Ok(o) if strict && !o.violations.is_empty() => 3,
        Ok(_) => 0,
        Err(e) => e.exit_code(),
    }
}
