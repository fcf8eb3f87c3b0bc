//! Command-line workflow over `steadylab-core`: configuration, subcommand
//! dispatch and report emission.

pub mod commands;
pub mod config;
pub mod error;
pub mod initial;
pub mod sweep;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use commands::{Context, Outcome, Verdict};
use config::RunConfig;
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "steadylab", version, about = "Symmetric steady solutions of RKRLW-type equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the configured equation and write the trajectory.
    Simulate(RunArgs),
    /// Classify bounded symmetric steady profiles of the linear constraint.
    Classify(RunArgs),
    /// Check a single-frequency profile against the nonlinear constraint.
    Verify(RunArgs),
    /// Simulate and track the symmetry axis, decomposition and weak residuals.
    Monitor(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "steadylab-out")]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write gnuplot-ready two-column data files.
    #[arg(long)]
    pub emit_plot_data: bool,
    /// Exit with code 4 unless the verdict matches.
    #[arg(long, value_enum)]
    pub expect: Option<Verdict>,
    /// Coefficient grid for classify / verify, e.g. `b1=-1:1:5,b2=0.5|1`.
    #[arg(long)]
    pub sweep: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

impl Command {
    fn parts(&self) -> (&'static str, &RunArgs) {
        match self {
            Self::Simulate(a) => ("simulate", a),
            Self::Classify(a) => ("classify", a),
            Self::Verify(a) => ("verify", a),
            Self::Monitor(a) => ("monitor", a),
        }
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(path)
}

/// Runs one invocation; returns the paths written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let (name, args) = cli.command.parts();
    let (mut cfg, base) = RunConfig::load(&args.config)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.workers == 0 {
        return Err(CliError::Validation("--workers: must be at least 1".into()));
    }
    let ctx = Context { cfg, base };
    let f: fn(&Context) -> Result<Outcome, CliError> = match name {
        "simulate" => commands::simulate,
        "classify" => commands::classify_cmd,
        "verify" => commands::verify,
        _ => commands::monitor,
    };
    let outcome = match &args.sweep {
        Some(spec) if matches!(name, "classify" | "verify") => sweep::run(&ctx, name, spec, args.workers, f)?,
        Some(_) => {
            return Err(CliError::Validation(format!("--sweep: not available for {name}")));
        }
        None => f(&ctx)?,
    };
    std::fs::create_dir_all(&args.out).map_err(|source| CliError::Io {
        path: args.out.display().to_string(),
        source,
    })?;
    let mut written = vec![write(&args.out, &format!("{}.json", outcome.name), &outcome.report)?];
    for (n, c) in &outcome.files {
        written.push(write(&args.out, n, c)?);
    }
    if args.emit_plot_data {
        for (n, c) in &outcome.plots {
            written.push(write(&args.out, n, c)?);
        }
    }
    if let (Some(want), Some(got)) = (args.expect, outcome.verdict) {
        if want != got {
            return Err(CliError::ExpectMismatch {
                expected: want.name().into(),
                actual: got.name().into(),
            });
        }
    }
    Ok(written)
}
