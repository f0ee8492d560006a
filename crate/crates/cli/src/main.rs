//! `hostnet` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error,
//! 3 numeric failure.

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "hostnet", version, about = "Gated R-GCN hostile-post classifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum Command {
    /// Train, apply or invert subword tokenizers
    #[command(subcommand)]
    Tokenizer(TokenizerCommand),
    /// Dependency-graph utilities
    #[command(subcommand)]
    Graph(GraphCommand),
    /// Train a classifier and write a checkpoint
    Train(TrainArgs),
    /// Score a checkpoint on a labelled dataset
    Eval(EvalArgs),
    /// Write per-record predictions
    Predict(PredictArgs),
    /// Project embeddings to two dimensions with PCA
    Project(ProjectArgs),
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum TokenizerCommand {
    /// Learn a model from a text corpus, one example per line (lines are cleaned first)
    Train(TokenizerTrainArgs),
    /// Write one line of space-separated ids per input line
    Encode(CodecArgs),
    /// Turn id lines back into text
    Decode(CodecArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Scheme {
    Bpe,
    Unigram,
}

#[derive(Debug, Args, Serialize)]
struct TokenizerTrainArgs {
    #[arg(long, value_enum)]
    scheme: Scheme,
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 20000)]
    vocab_size: usize,
    #[arg(long)]
    output: PathBuf,
    /// Unigram only: share of multi-character pieces dropped per pruning round
    #[arg(long, default_value_t = 0.2)]
    prune_fraction: f64,
}

#[derive(Debug, Args, Serialize)]
struct CodecArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum GraphCommand {
    /// Read CoNLL-U and write one JSON edge list per sentence
    Parse(GraphParseArgs),
}

#[derive(Debug, Args, Serialize)]
struct GraphParseArgs {
    #[arg(long)]
    conllu: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct TrainArgs {
    /// Training set (JSONL)
    #[arg(long)]
    data: PathBuf,
    /// Validation set (JSONL); selects the kept epoch
    #[arg(long)]
    valid: Option<PathBuf>,
    /// TOML file of config keys; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Random seed [default: 42]
    #[arg(long)]
    seed: Option<u64>,
    /// Number of epochs [default: 40]
    #[arg(long)]
    epochs: Option<usize>,
    /// Mini-batch size [default: 8]
    #[arg(long)]
    batch_size: Option<usize>,
    /// Adam learning rate [default: 0.001]
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Decision threshold [default: 0.5]
    #[arg(long)]
    threshold: Option<f64>,
    /// Comma-separated R-GCN layer widths [default: 256]
    #[arg(long, value_delimiter = ',')]
    layer_widths: Option<Vec<usize>>,
    /// Checkpoint output path
    #[arg(long)]
    out: PathBuf,
    /// Per-epoch metrics (JSONL)
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct EvalArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    ckpt: PathBuf,
    /// Report output (JSON); the table goes to stdout
    #[arg(long)]
    report: PathBuf,
    /// Decision threshold [default: the checkpoint's]
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
struct PredictArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    ckpt: PathBuf,
    /// Predictions output (JSONL)
    #[arg(long)]
    out: PathBuf,
    /// Decision threshold [default: the checkpoint's]
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Which {
    Rgcn,
    Context,
    Concat,
}

#[derive(Debug, Args, Serialize)]
struct ProjectArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    ckpt: PathBuf,
    #[arg(long, value_enum, default_value_t = Which::Concat)]
    which: Which,
    /// CSV output with columns id,label,x,y
    #[arg(long)]
    out: PathBuf,
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("HOSTNET_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("HOSTNET_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(argv: Vec<OsString>) -> u8 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return 1;
    }
    match commands::dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os().collect()))
}
