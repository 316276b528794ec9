//! File formats, experiment reports and the `coarse` command line.
//!
//! Exit codes: 0 holds / equivalent / valid / success, 1 usage or input
//! errors, 2 fails / not equivalent / invalid, 3 inconclusive.

pub mod codec;
mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use error::{exit, CliError};

#[derive(Debug, Parser)]
#[command(name = "coarse", version, about = "Coarse order and composition of double metrics")]
pub struct Cli {
    /// Add wall-clock timings to the report (excluded from the config hash).
    #[arg(long, global = true)]
    pub timings: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a metric or double document.
    Validate {
        file: PathBuf,
        /// Require a double document.
        #[arg(long)]
        double: bool,
    },
    /// Min-plus composition of two doubles over one base.
    Compose {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 0)]
        penalty: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Whether the first family controls the second.
    CheckOrder {
        f: PathBuf,
        g: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Whether two families control each other.
    CheckEquiv {
        f: PathBuf,
        g: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Extract and sparsify the witness of `B` failing to control `C`.
    Witness {
        b: PathBuf,
        c: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Diagonal bounds of `a b a*` against `a c a*` for the separating metric.
    LemmaMain {
        b: PathBuf,
        c: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Write `k,x,y,diag_aba,diag_aca,closed_form` rows here.
        #[arg(long)]
        emit_csv: Option<PathBuf>,
    },
    /// Separate two inequivalent families by the action on an idempotent.
    Fundamentality {
        s: PathBuf,
        t: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Evaluate a cross expression on one point pair.
    EvalDsl {
        expr: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
        x: Vec<i64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
        y: Vec<i64>,
        #[arg(long, default_value_t = 0)]
        dxy: u64,
    },
    /// Time one seeded min-plus product.
    Bench {
        #[arg(long, default_value_t = 512)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Ladder and checker overrides shared by the family commands.
#[derive(Debug, Clone, Default, Args)]
pub struct PipelineArgs {
    /// Comma-separated level sizes, replacing those in both configs.
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<usize>>,
    #[arg(long)]
    pub penalty: Option<u64>,
    /// Number of top levels a profile must stay stable over.
    #[arg(long)]
    pub window: Option<usize>,
    /// Per-level growth that counts as divergence.
    #[arg(long)]
    pub delta: Option<u64>,
    /// Shortest witness chain accepted as divergence.
    #[arg(long)]
    pub min_witness: Option<usize>,
}

/// What a command prints and how it exits.
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Reports go to stdout, diagnostics to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::ERROR } else { exit::OK };
        }
    };
    match commands::execute(&cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            out.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
