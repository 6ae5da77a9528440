//! Command-line front end: `simulate`, `billiard`, `verify` and `plot`.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 configuration or
//! I/O error, 3 numerical singularity.

pub mod commands;
pub mod config;
pub mod output;
pub mod plot;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::Error;
pub use commands::{Context, SUITES};
pub use config::RunConfig;
pub use output::{Check, OutputFormat, RunReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Numeric(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric(e) if e.is_singularity() => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "confocal", version, about = "Integrable flows and billiards on ellipsoids")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for random initial conditions (overrides the config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Format of bulk numeric output.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Comma-separated suite names for `verify`; an empty list runs nothing.
    #[arg(long, global = true)]
    pub suite: Option<String>,
    /// Comma-separated `name=value` tolerance overrides.
    #[arg(long, global = true)]
    pub tol_overrides: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a flow and report conservation.
    Simulate,
    /// Iterate the billiard map and report caustics and Lax invariance.
    Billiard,
    /// Run verification suites.
    Verify,
    /// Render an SVG figure.
    Plot {
        /// CSV with `x_i` columns (overrides `plot.input`).
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

fn parse_overrides(text: &str) -> Result<Vec<(String, f64)>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("tol-overrides: expected name=value, got '{item}'")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|e| CliError::Config(format!("tol-overrides.{}: {e}", k.trim())))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn parse_suites(text: &str) -> Vec<String> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

/// Run one invocation; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match execute(&cli) {
        Ok(report) => {
            for c in report.failures() {
                eprintln!("FAIL {}: {:e} > {:e}", c.name, c.value, c.threshold);
            }
            println!("{}: {} checks, {}", report.command, report.checks.len(), if report.pass { "pass" } else { "FAIL" });
            if report.pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<RunReport, CliError> {
    let config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig { schema: config::SCHEMA_VERSION, ..Default::default() },
    };
    let overrides = cli.tol_overrides.as_deref().map(parse_overrides).transpose()?.unwrap_or_default();
    let tol = config.tolerances(&overrides)?;
    let seed = cli.seed.or(config.seed).unwrap_or(0);
    std::fs::create_dir_all(&cli.out).map_err(|e| output::io_error(&cli.out, e))?;
    let ctx = Context { config: &config, seed, out: &cli.out, format: cli.format, tol };
    match &cli.command {
        Command::Simulate => commands::simulate(&ctx),
        Command::Billiard => commands::billiard(&ctx),
        Command::Verify => commands::verify(&ctx, cli.suite.as_deref().map(parse_suites)),
        Command::Plot { input } => {
            let mut cfg = config.clone();
            if let Some(p) = input {
                cfg.plot.get_or_insert_with(|| plot::default_section()).input = Some(p.clone());
            }
            let path = plot::plot(&cfg, &cli.out)?;
            log::info!("wrote {}", path.display());
            Ok(RunReport::new("plot", seed, vec![], serde_json::json!({ "output": path })))
        }
    }
}
