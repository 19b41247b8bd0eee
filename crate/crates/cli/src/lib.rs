//! The `minksum` command line: argument definitions, file formats and the
//! command implementations behind `main`.

pub mod checks;
pub mod commands;
pub mod format;
pub mod oracle;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use minksum::ndfilter::{DEFAULT_BUFFER_LIMIT, DEFAULT_PROVENANCE_CAP};
use minksum::{Configuration, LowerMode, DEFAULT_HYPERCUBE_MAX, DEFAULT_NODE_LIMIT};

/// Environment variable naming the default experiment output directory.
pub const OUT_DIR_ENV: &str = "MINKSUM_OUT_DIR";

pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const RESOURCE: i32 = 3;
    pub const INVARIANT: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Lib(#[from] minksum::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use minksum::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io { .. } | CliError::Csv(_) => exit::USAGE,
            CliError::Lib(E::ResourceCap { .. } | E::Unreachable { .. }) => exit::RESOURCE,
            CliError::Lib(_) => exit::USAGE,
            CliError::Invariant(_) => exit::INVARIANT,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "minksum", version, about = "Nondominated sums of Minkowski sums of stable sets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an instance file.
    Generate(GenerateArgs),
    /// Compute the ND sum `Yn` (rows, optional provenance section).
    Ndsum(NdsumArgs),
    /// Classify a local set or `Yn`. CSV: index,y1..yp,class
    Classify(ClassifyArgs),
    /// Minimum generator set. CSV: set,index,y1..yp,role,chosen,in_optima
    Mgs(MgsArgs),
    /// Redundant local vectors. CSV: set,index,y1..yp,redundant
    Redundancy(RedundancyArgs),
    /// Bounding-set pruning. CSV: set,yn,kept,removed,removed_indices
    Prune(PruneArgs),
    /// Run an experiment grid and write records, metrics and fits.
    Experiment(ExperimentArgs),
    /// Check invariants of an instance and optional result files.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Number of objectives.
    #[arg(long)]
    pub p: usize,
    /// Number of local sets.
    #[arg(long = "S")]
    pub num_sets: usize,
    /// Vectors per local set.
    #[arg(long)]
    pub n: usize,
    /// L, M, U or LU.
    #[arg(long, value_parser = parse_config)]
    pub config: Configuration,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_HYPERCUBE_MAX)]
    pub hypercube_max: i64,
    /// Output path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NdsumArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Buffer limit of the sequential fold.
    #[arg(long, default_value_t = DEFAULT_BUFFER_LIMIT)]
    pub buffer: usize,
    /// Append the provenance section.
    #[arg(long)]
    pub provenance: bool,
    #[arg(long, default_value_t = DEFAULT_PROVENANCE_CAP)]
    pub provenance_cap: u64,
    /// Use full enumeration instead.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Local set index (0-based); `Yn` when omitted.
    #[arg(long)]
    pub set: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MgsArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// CSV path; the summary then goes to stdout (else to stderr).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub enumerate_optima: bool,
    #[arg(long, default_value_t = 1000)]
    pub optima_cap: usize,
    #[arg(long, default_value_t = DEFAULT_NODE_LIMIT)]
    pub node_limit: u64,
    /// Exhaustive subset search instead.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Args)]
pub struct RedundancyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Enumerate every vector sum instead.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PruneArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// hull (p = 2 only) or exact.
    #[arg(long, value_parser = parse_lower)]
    pub lower: LowerMode,
    /// Percent of non-extreme vectors in the focus set's upper bound.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(0..=100))]
    pub lambda: u32,
    /// Percent of non-extreme vectors in the other sets' upper bounds.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(0..=100))]
    pub gamma: u32,
    /// Subset seed (defaults to the header seed, then 0).
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// TOML grid (every key optional).
    #[arg(long)]
    pub grid_spec: Option<PathBuf>,
    /// Defaults to $MINKSUM_OUT_DIR, then `minksum-results`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Keep wall times in records.jsonl and write timings.csv.
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// An `ndsum` output for this instance.
    #[arg(long)]
    pub ndsum: Option<PathBuf>,
    /// An `mgs` CSV for this instance.
    #[arg(long)]
    pub mgs: Option<PathBuf>,
    /// A `prune` CSV for this instance.
    #[arg(long)]
    pub prune: Option<PathBuf>,
}

fn parse_config(s: &str) -> Result<Configuration, String> {
    s.parse().map_err(|e: minksum::Error| e.to_string())
}

fn parse_lower(s: &str) -> Result<LowerMode, String> {
    s.parse().map_err(|e: minksum::Error| e.to_string())
}

/// Runs one command; returns the text destined for stdout.
pub fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Ndsum(a) => commands::ndsum(&a),
        Command::Classify(a) => commands::classify(&a),
        Command::Mgs(a) => commands::mgs(&a),
        Command::Redundancy(a) => commands::redundancy(&a),
        Command::Prune(a) => commands::prune(&a),
        Command::Experiment(a) => commands::experiment(&a),
        Command::Verify(a) => commands::verify(&a),
    }
}
