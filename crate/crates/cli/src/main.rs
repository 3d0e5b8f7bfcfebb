//! Command-line tools for covariance estimation under double sparsity:
//! chordal graph checks, local inverse/determinant formulas, Markov
//! completion, the constrained maximum-likelihood estimator, and a
//! benchmark comparing the local formulas against dense linear algebra.
//!
//! Exit codes: 0 success, 1 unreadable or malformed input, 2 invalid
//! mathematical input (non-chordal graph, non-PSD matrix, bad usage),
//! 3 numerical failure inside a block factorization, 4 estimator ran its
//! full iteration budget without converging (outputs are still written).

mod commands;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "dscov", version, about = "Doubly sparse covariance tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check whether a graph is chordal; report a PEO and cliques, or a witness cycle
    CheckChordal(CheckChordalArgs),
    /// Build the clique tree of a chordal graph
    CliqueTree(CliqueTreeArgs),
    /// Add fill edges until a graph is chordal (minimum-fill heuristic)
    Triangulate(TriangulateArgs),
    /// Invert a matrix through clique and separator blocks only
    LocalInverse(LocalInverseArgs),
    /// Log-determinant through clique and separator blocks only
    LocalLogdet(LocalLogdetArgs),
    /// Fill the off-pattern entries of an on-pattern matrix so the inverse
    /// becomes subordinate to the graph
    Complete(CompleteArgs),
    /// Constrained maximum-likelihood fit of a doubly sparse covariance
    Estimate(EstimateArgs),
    /// Draw Gaussian observation rows from a covariance matrix
    Simulate(SimulateArgs),
    /// Log returns from a price panel, regressed against an index column
    Residuals(ResidualsArgs),
    /// Export covariance and correlation heatmap data as (row,col,value) CSV
    Heatmap(HeatmapArgs),
    /// Time the local inverse against dense inversion on generated instances
    Bench(BenchArgs),
}

#[derive(Args)]
struct CheckChordalArgs {
    /// Graph JSON file ({"p": …, "edges": [[i,j], …]}, 1-based)
    #[arg(long)]
    graph: PathBuf,
    /// Optional output prefix; writes <out>.cliquetree.json when chordal
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CliqueTreeArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Output prefix; writes <out>.cliquetree.json
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TriangulateArgs {
    /// Graph JSON file; need not be chordal
    #[arg(long)]
    graph: PathBuf,
    /// Output prefix; writes <out>.graph.json
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LocalInverseArgs {
    /// Matrix file (CSV rows, or JSON with a .json extension)
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    graph: PathBuf,
    /// Output prefix; writes <out>.theta.csv and <out>.theta.json
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LocalLogdetArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    graph: PathBuf,
    /// Output prefix; writes <out>.logdet.json
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompleteArgs {
    /// Matrix whose off-pattern entries are placeholders to be filled
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    graph: PathBuf,
    /// Output prefix; writes <out>.completed.csv and <out>.completed.json
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    /// Sample covariance file (one of --cov, --data, --truth)
    #[arg(long)]
    cov: Option<PathBuf>,
    /// Observation CSV with a header of variable names, one row per draw
    #[arg(long)]
    data: Option<PathBuf>,
    /// Simulate observations from this covariance file, then fit them
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Number of rows to simulate (required with --truth)
    #[arg(long)]
    n: Option<usize>,
    /// RNG seed for --truth simulation
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Chordal graph JSON (one of --graph, --sector)
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Two-group sector spec JSON; variable names come from --data columns
    #[arg(long)]
    sector: Option<PathBuf>,
    /// Output prefix; writes <out>.mhat.csv, <out>.thetahat.csv, <out>.result.json
    #[arg(long)]
    out: PathBuf,
    /// Constraint tolerance on ‖M·L(M) − I‖_F
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_outer: Option<usize>,
    #[arg(long)]
    max_inner: Option<usize>,
    #[arg(long)]
    penalty_init: Option<f64>,
    #[arg(long)]
    penalty_growth: Option<f64>,
    /// Use central finite-difference gradients instead of analytic ones
    #[arg(long)]
    fd: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// Covariance matrix file to draw from
    #[arg(long)]
    truth: PathBuf,
    /// Number of observation rows
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Output prefix; writes <out>.data.csv and <out>.summary.json
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ResidualsArgs {
    /// Price CSV: header `date,TICKER1,TICKER2,…`; rows with missing cells are dropped
    #[arg(long)]
    prices: PathBuf,
    /// Ticker column to regress the others against
    #[arg(long)]
    index: String,
    /// Output prefix; writes <out>.residuals.csv and <out>.regression.json
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct HeatmapArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Comma-separated row/column labels; defaults to 1..p
    #[arg(long, value_delimiter = ',')]
    labels: Option<Vec<String>>,
    /// Output prefix; writes <out>.covariance.csv and <out>.correlation.csv
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, ValueEnum)]
enum BenchFamily {
    /// Bandwidth-b band pattern
    Banded,
    /// Two cliques joined through a two-vertex bridge
    TwoBlockBridge,
    /// Chain of equal cliques with fixed overlap
    PathOfCliques,
    /// Single clique (dense); local and dense computations coincide
    Complete,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    family: BenchFamily,
    /// Matrix sizes to run, comma separated
    #[arg(long, value_delimiter = ',', default_value = "100,400,1600")]
    sizes: Vec<usize>,
    /// Bandwidth for the banded family
    #[arg(long, default_value_t = 2)]
    band: usize,
    /// Clique count for the path-of-cliques family
    #[arg(long, default_value_t = 20)]
    cliques: usize,
    /// Overlap between consecutive cliques for the path-of-cliques family
    #[arg(long, default_value_t = 2)]
    overlap: usize,
    /// Timing repetitions per size (instance is fixed; only timing repeats)
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output prefix; writes <out>.bench.csv and <out>.bench.json
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::CheckChordal(a) => commands::check_chordal(&a),
        Command::CliqueTree(a) => commands::clique_tree(&a),
        Command::Triangulate(a) => commands::triangulate(&a),
        Command::LocalInverse(a) => commands::local_inverse(&a),
        Command::LocalLogdet(a) => commands::local_logdet(&a),
        Command::Complete(a) => commands::complete(&a),
        Command::Estimate(a) => commands::estimate(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Residuals(a) => commands::residuals(&a),
        Command::Heatmap(a) => commands::heatmap(&a),
        Command::Bench(a) => commands::bench(&a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &dscov::Error) -> u8 {
    if e.is_io_or_parse() {
        1
    } else if e.is_numerical() {
        3
    } else {
        // non-chordal graphs, non-PSD inputs, dimension mismatches, bad usage
        2
    }
}
