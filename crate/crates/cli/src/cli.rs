use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "padyn", version, about = "Exact analysis of p-adic maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coefficients, every criterion, censuses, cycles and the plot set.
    Analyze(AnalyzeArgs),
    /// Mahler coefficients with their valuations.
    Mahler(MahlerArgs),
    /// One coefficient criterion.
    Check(CheckArgs),
    /// Preimage census of the level maps f_k for k = 2..kmax.
    Preimages(PreimageArgs),
    /// Cycle structure of f mod p^m for m = 1..kmax.
    Cycles(CycleArgs),
    /// Iterates of f mod p^m from a starting residue.
    Orbit(OrbitArgs),
    /// Plot set E_1 u .. u E_kmax with box counts.
    Plotset(PlotArgs),
    /// Inspect an automaton file.
    #[command(subcommand)]
    Automaton(AutomatonCommand),
}

/// The map under study: an expression or an automaton file.
#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false, id = "source")]
pub struct MapSource {
    /// Map expression, e.g. "sigma(x^2 + x + 1)".
    #[arg(long, group = "source")]
    pub map: Option<String>,
    /// Automaton file; the map is the induced map of the automaton.
    #[arg(long, group = "source")]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// The prime (defaults to the automaton's prime with --file).
    #[arg(long)]
    pub p: Option<u64>,
    #[command(flatten)]
    pub source: MapSource,
}

#[derive(Debug, Clone, Args)]
pub struct Budget {
    /// Cap on the number of table entries any enumeration may build.
    #[arg(long, env = "PADYN_BUDGET")]
    pub budget: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Working precision: coefficients are known modulo p^K.
    #[arg(long = "K", default_value_t = 16)]
    pub k: u32,
    /// Complex-shift level.
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    /// Last Mahler coefficient index M.
    #[arg(long, default_value_t = 64)]
    pub mmax: u64,
    /// Deepest level for the residue-ring oracles and the plot set.
    #[arg(long, default_value_t = 6)]
    pub kmax: u32,
    /// Box-counting grid sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [16u32, 64])]
    pub grid: Vec<u32>,
    #[command(flatten)]
    pub budget: Budget,
    /// Apply the ergodicity tail clause from m = 1 as literally printed.
    #[arg(long)]
    pub strict_m1: bool,
    #[command(flatten)]
    pub out: Outputs,
}

#[derive(Debug, Clone, Args)]
pub struct Outputs {
    /// Write the JSON report here.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write the plot points as CSV here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Write the raster of the largest grid as plain PGM here.
    #[arg(long)]
    pub pgm: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct MahlerArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "K", default_value_t = 16)]
    pub k: u32,
    #[arg(long, default_value_t = 16)]
    pub mmax: u64,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Criterion {
    Bernoulli,
    LipschitzMp,
    LipschitzErgodic,
    Cs,
    CsMp,
    CsErgodic,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    pub criterion: Criterion,
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "K", default_value_t = 16)]
    pub k: u32,
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    #[arg(long, default_value_t = 64)]
    pub mmax: u64,
    #[arg(long)]
    pub strict_m1: bool,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PreimageArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    #[arg(long, default_value_t = 6)]
    pub kmax: u32,
    #[command(flatten)]
    pub budget: Budget,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CycleArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 8)]
    pub kmax: u32,
    #[command(flatten)]
    pub budget: Budget,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OrbitArgs {
    #[command(flatten)]
    pub common: Common,
    /// Starting residue.
    #[arg(long, default_value = "0")]
    pub x0: String,
    #[arg(long, default_value_t = 16)]
    pub steps: usize,
    /// Digits m: the orbit lives in Z/p^m.
    #[arg(long, default_value_t = 8)]
    pub m: u32,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    #[arg(long, default_value_t = 8)]
    pub kmax: u32,
    #[arg(long, value_delimiter = ',', default_values_t = [16u32, 64, 256])]
    pub grid: Vec<u32>,
    #[command(flatten)]
    pub budget: Budget,
    #[command(flatten)]
    pub out: Outputs,
}

#[derive(Debug, Subcommand)]
pub enum AutomatonCommand {
    /// Feed a word of digits (least significant first).
    Run(AutomatonRunArgs),
    /// Synchrony, nondegeneracy, guaranteed output lengths and lookahead.
    Check(AutomatonCheckArgs),
}

#[derive(Debug, Clone, Args)]
pub struct AutomatonRunArgs {
    #[arg(long)]
    pub file: PathBuf,
    /// Input digits, least significant first, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "x", required_unless_present = "x")]
    pub input: Vec<u32>,
    /// Input integer, expanded to --K digits.
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long = "K", default_value_t = 8)]
    pub k: u32,
}

#[derive(Debug, Clone, Args)]
pub struct AutomatonCheckArgs {
    #[arg(long)]
    pub file: PathBuf,
}
