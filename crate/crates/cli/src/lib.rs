//! The `rotacover` command line: experiment files in, JSON artifacts and rasters out.

pub mod commands;
pub mod config;
pub mod render;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

pub use config::ExperimentConfig;

/// Version of every JSON artifact layout.
pub const SCHEMA: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "rotacover", version, about = "Rotations of a fattened lattice covering the plane")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `[output] dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides the `seed` of the experiment file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for the parallel parts.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Report failures as one JSON object on stderr.
    #[arg(long, global = true)]
    pub json_errors: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Certify a polar region as covered or not and rasterise the verdicts.
    CoverCheck,
    /// Search for uncovered disks far from the origin under finite angle sets.
    FindHoles,
    /// Build a convergent good sequence shell by shell.
    BuildGood,
    /// Build a sequence accumulating at 0 that is good for a schedule of fattenings.
    BuildVeryGood,
    /// Build a convergent sequence together with holes it never covers.
    BuildBad,
    /// Build a nested arc tree (a perfect set) together with holes it never covers.
    BuildPerfect,
    /// Compare sampled transform sups of a circle measure with the δ threshold.
    FourierCheck,
    /// Run the staged Cantor-type construction and check its envelopes.
    CantorBuild,
    /// Finite dilates of a neighbourhood of the integers covering the line.
    DilateCover,
    /// Re-render a cover-check report as a raster.
    Render,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CoverCheck => "cover-check",
            Command::FindHoles => "find-holes",
            Command::BuildGood => "build-good",
            Command::BuildVeryGood => "build-very-good",
            Command::BuildBad => "build-bad",
            Command::BuildPerfect => "build-perfect",
            Command::FourierCheck => "fourier-check",
            Command::CantorBuild => "cantor-build",
            Command::DilateCover => "dilate-cover",
            Command::Render => "render",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] rotacover::Error),
    #[error("invariant check failed: {0}")]
    Invariant(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed artifact: {0}")]
    Artifact(#[from] serde_json::Error),
}

impl CliError {
    /// 1 for failed invariants, 2 for bad input, 3 for exhausted budgets.
    pub fn exit_code(&self) -> i32 {
        use rotacover::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) if e.is_budget() => 3,
            CliError::Core(E::InvalidArgument(_) | E::Precondition { .. } | E::RequiresArc | E::DegenerateLattice) => 2,
            CliError::Core(_) | CliError::Invariant(_) | CliError::Io(_) | CliError::Artifact(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Core(e) if e.is_budget() => "budget",
            CliError::Core(_) => "core",
            CliError::Invariant(_) => "invariant",
            CliError::Io(_) => "io",
            CliError::Artifact(_) => "artifact",
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({
            "schema": SCHEMA,
            "error": { "kind": self.kind(), "exit_code": self.exit_code(), "message": self.to_string() },
        })
        .to_string()
    }
}

/// Envelope of every JSON artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact<T> {
    pub schema: u32,
    pub command: String,
    pub config: ExperimentConfig,
    pub result: T,
}

/// Runs one subcommand and returns the human-readable summary.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::parse("")?,
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out)?;
    let ctx = commands::Context { cfg, out };
    let go = || commands::dispatch(cli.command, &ctx);
    match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {n} threads: {e}")))?
            .install(go),
        None => go(),
    }
}
