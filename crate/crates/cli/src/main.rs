// stdout write errors (a closed pipe, typically) are ignored
macro_rules! outln {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout(), $($t)*);
    }};
}

mod commands;
mod config;
mod exit;
mod fsio;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "seer", version, about = "Cost-aware selection of sparse matrix-vector kernels")]
struct Cli {
    /// Flat TOML file supplying defaults for any flag
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

/// Where benchmark data comes from: the CSV trio, or a directory of
/// Matrix Market files whose timings are simulated.
#[derive(Args, Debug, Default, Clone)]
pub struct DataArgs {
    /// Per-iteration runtimes, one column per kernel
    #[arg(long, value_name = "CSV")]
    pub elapsed: Option<PathBuf>,
    /// One-time preprocessing times, one column per kernel
    #[arg(long, value_name = "CSV")]
    pub preprocess: Option<PathBuf>,
    /// Density statistics and collection time per matrix
    #[arg(long, value_name = "CSV")]
    pub metadata: Option<PathBuf>,
    /// Directory holding elapsed.csv, preprocess.csv and metadata.csv
    #[arg(long, value_name = "DIR")]
    pub data: Option<PathBuf>,
    /// Directory of .mtx files (timings come from the cost model)
    #[arg(long, value_name = "DIR")]
    pub matrices: Option<PathBuf>,
    /// Corpus TOML with [machine] parameters and kernels for --matrices or synth
    #[arg(long, value_name = "FILE")]
    pub corpus: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Clone)]
pub struct CommonArgs {
    /// Seed for every random choice
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Deterministic clock: every timing reads as one fixed step
    #[arg(long)]
    pub fixed_clock: bool,
}

#[derive(Args, Debug, Default, Clone)]
pub struct TrainArgs {
    /// Iteration counts, e.g. 1,19 or 1..32
    #[arg(long)]
    pub iterations: Option<String>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub min_samples_leaf: Option<usize>,
    /// Training fraction of the seeded split
    #[arg(long)]
    pub split: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Lang {
    C,
    Rust,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Subset {
    Train,
    Test,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Measure density statistics of every .mtx file into metadata.csv
    Features {
        #[arg(long, value_name = "DIR")]
        matrices: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Generate a synthetic benchmark corpus
    Synth {
        #[arg(long, value_name = "FILE")]
        corpus: Option<PathBuf>,
        /// Also write each generated matrix under <out>/matrices
        #[arg(long)]
        write_matrices: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Train the three trees and write model.json
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        train: TrainArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Select a kernel for one matrix or feature row
    Predict {
        #[arg(long, value_name = "FILE")]
        model: Option<PathBuf>,
        /// Matrix Market file
        #[arg(long, value_name = "MTX", conflicts_with = "features")]
        matrix: Option<PathBuf>,
        /// Feature row: rows=..,cols=..,nnz=..[,max_density=..,...,collection_time=..]
        #[arg(long)]
        features: Option<String>,
        #[arg(long)]
        iterations: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Score the model against the oracle and fixed kernels
    Evaluate {
        #[arg(long, value_name = "FILE")]
        model: Option<PathBuf>,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        train: TrainArgs,
        /// Rows to evaluate on
        #[arg(long, value_enum)]
        subset: Option<Subset>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Emit the model as nested conditionals
    Emit {
        #[arg(long, value_name = "FILE")]
        model: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "c")]
        lang: Lang,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Kendall tau between features and kernel runtimes
    Correlate {
        #[command(flatten)]
        data: DataArgs,
        /// Print magnitudes instead of signed values
        #[arg(long)]
        abs_tau: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file = match &cli.config {
        Some(p) => config::FileConfig::load(p)?,
        None => config::FileConfig::default(),
    };
    match cli.command {
        Command::Features { matrices, common } => commands::features(&file, matrices, &common),
        Command::Synth {
            corpus,
            write_matrices,
            common,
        } => commands::synth(&file, corpus, write_matrices, &common),
        Command::Train { data, train, common } => commands::train(&file, &data, &train, &common),
        Command::Predict {
            model,
            matrix,
            features,
            iterations,
            common,
        } => commands::predict(&file, model, matrix, features, iterations, &common),
        Command::Evaluate {
            model,
            data,
            train,
            subset,
            common,
        } => commands::evaluate(&file, model, &data, &train, subset, &common),
        Command::Emit { model, lang, common } => commands::emit(&file, model, lang, &common),
        Command::Correlate { data, abs_tau, common } => commands::correlate(&file, &data, abs_tau, &common),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::code(&e))
        }
    }
}
