//! `qkdsim` subcommands.
//!
//! Exit codes: 0 success, 1 CHSH ran but did not witness entanglement,
//! 2 config file unreadable, 3 malformed config, 4 unknown config key,
//! 5 invariant violation, 6 output not writable, 64 bad command line,
//! 70 simulation error.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use qkdsim_core::sim::{fit_scan, run_chsh_experiment, run_configured_scan, MissionConfig, ScanAxis};

use crate::config::{parse_config, ConfigError};
use crate::output::{format_g6, mission_csv, scan_csv, write_atomic};
use crate::run_mission_parallel;

pub const USAGE_EXIT: u8 = 64;

#[derive(Debug, Parser)]
#[command(name = "qkdsim", version, about = "Entanglement-based intersatellite QKD simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the time-stepped mission and write one CSV row per step.
    Mission(CommonArgs),
    /// Scan one analyzer against a fixed one and fit the correlation curve.
    Scan {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum)]
        axis: Option<AxisArg>,
    },
    /// Estimate the CHSH value; exits 1 unless S - 4 stderr > 2.
    Chsh(CommonArgs),
    /// Check the configuration and exit.
    Validate(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML configuration; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides `run.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    Angle,
    Voltage,
}

impl From<AxisArg> for ScanAxis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::Angle => ScanAxis::Angle,
            AxisArg::Voltage => ScanAxis::Voltage,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("simulation failed: {0}")]
    Simulation(qkdsim_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(e) => e.exit_code(),
            CliError::Output { .. } => 6,
            CliError::Simulation(_) => 70,
        }
    }
}

fn load(args: &CommonArgs, axis: Option<AxisArg>) -> Result<MissionConfig, CliError> {
    let mut config = match &args.config {
        Some(path) => parse_config(path)?,
        None => MissionConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.run.seed = seed;
    }
    if let Some(axis) = axis {
        config.scan.axis = axis.into();
    }
    config.validate().map_err(ConfigError::Invalid)?;
    Ok(config)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, text).map_err(|source| CliError::Output { path: path.to_path_buf(), source }),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Output { path: PathBuf::from("<stdout>"), source }),
    }
}

/// Runs one invocation and returns the process exit code.
pub fn run(cli: &Cli) -> Result<u8, CliError> {
    match &cli.command {
        Command::Mission(args) => {
            let config = load(args, None)?;
            let records = run_mission_parallel(&config).map_err(CliError::Simulation)?;
            emit(args.out.as_deref(), &mission_csv(&records))?;
            Ok(0)
        }
        Command::Scan { common, axis } => {
            let config = load(common, *axis)?;
            let points = run_configured_scan(&config).map_err(CliError::Simulation)?;
            let fit = fit_scan(&config, config.scan.axis, &points).map_err(CliError::Simulation)?;
            emit(common.out.as_deref(), &scan_csv(&points, &fit))?;
            Ok(0)
        }
        Command::Chsh(args) => {
            let config = load(args, None)?;
            let est =
                run_chsh_experiment(&config, config.chsh.samples, config.chsh.temp).map_err(CliError::Simulation)?;
            let line = format!("S={} stderr={}\n", format_g6(est.s), format_g6(est.std_error));
            emit(args.out.as_deref(), &line)?;
            Ok(if est.witnesses_entanglement() { 0 } else { 1 })
        }
        Command::Validate(args) => {
            load(args, None)?;
            Ok(0)
        }
    }
}
