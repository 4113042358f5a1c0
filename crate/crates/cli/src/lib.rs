//! Command-line front end: argument types, command implementations, and the
//! mapping from failures to exit codes.

pub mod commands;
pub mod input;
pub mod output;

use std::fmt;
use std::io;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use tropoclust_core::Arithmetic;

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "tropoclust", version, about = "Tropical k-means++ clustering of equidistant phylogenetic trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full asymmetric distance matrix (row = first argument).
    Distances(InputArgs),
    /// Tropical median consensus of all inputs.
    Median(InputArgs),
    /// Best-of-runs tropical k-means++ clustering.
    Cluster(ClusterArgs),
    /// Coarse-type census, clade support, MRCA depths, resolution gaps.
    Analyze(AnalyzeArgs),
    /// Random equidistant binary trees.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Newick file with one tree per line, or a vector CSV with --vectors.
    #[arg(long)]
    pub input: PathBuf,
    /// Read a CSV of pair vectors with an `id,<taxa…>` header.
    #[arg(long)]
    pub vectors: bool,
    #[arg(long, default_value = "exact", value_parser = parse_arithmetic)]
    pub arithmetic: Arithmetic,
    /// Output directory; without it the main result goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Comma-separated taxa; repeatable.
    #[arg(long)]
    pub clade: Vec<String>,
    /// Taxon pair `a:b` whose MRCA depths are sampled; repeatable.
    #[arg(long)]
    pub pair: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    /// Number of taxa.
    #[arg(long = "N")]
    pub n_taxa: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long)]
    pub omega: f64,
    #[arg(long = "Omega")]
    pub big_omega: f64,
    #[arg(long)]
    pub seed: u64,
    /// Root split such as `a,b|c,d,e`; every tree then has this coarse type.
    #[arg(long)]
    pub coarse_type: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_arithmetic(s: &str) -> Result<Arithmetic, String> {
    s.parse().map_err(|e: tropoclust_core::Error| e.to_string())
}

/// The best clustering run did not reach a stable assignment.
#[derive(Debug)]
pub struct NotConverged(pub String);

impl fmt::Display for NotConverged {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "not converged: {}", self.0)
    }
}

impl std::error::Error for NotConverged {}

pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.chain().any(|e| e.is::<NotConverged>()) {
        EXIT_NOT_CONVERGED
    } else if err.chain().any(|e| e.is::<io::Error>()) {
        EXIT_IO
    } else {
        EXIT_VALIDATION
    }
}

pub fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Distances(a) => commands::distances(a),
        Command::Median(a) => commands::median(a),
        Command::Cluster(a) => commands::cluster(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Gen(a) => commands::gen(a),
    }
}
