//! `irf`: index a collection, run judged-budget feedback sessions, evaluate and compare runs.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use irf_core::corpus_io::{CollectionFormat, StemmerKind, TopicField, TopicFormat};
use irf_core::eval::Metric;
use irf_core::feedback::FeedbackModel;

#[derive(Parser, Debug)]
#[command(name = "irf", version, about = "Iterative relevance feedback experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build an index from a TREC collection and print collection statistics.
    Index(IndexArgs),
    /// Run feedback sessions for every topic and write a TREC run plus a session log.
    Run(RunArgs),
    /// Score a run with MAP@1000 and NDCG@20.
    Eval(EvalArgs),
    /// Fisher randomization test between two runs.
    Compare(CompareArgs),
    /// Cross-validated grid search over model parameters.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct IndexArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value = "trectext")]
    format: CollectionFormat,
    #[arg(long)]
    output: PathBuf,
    /// `inquery`, `none` or a file with one word per line.
    #[arg(long, default_value = "inquery")]
    stoplist: String,
    #[arg(long, default_value = "krovetz")]
    stemmer: StemmerKind,
}

#[derive(Args, Debug, Clone)]
struct SessionArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    topics: PathBuf,
    #[arg(long, default_value = "trec_title")]
    topic_format: TopicFormat,
    #[arg(long, default_value = "title")]
    topic_field: TopicField,
    #[arg(long)]
    model: FeedbackModel,
    #[arg(long, default_value_t = 10)]
    docs_per_iter: usize,
    #[arg(long, default_value_t = 1)]
    iterations: usize,
    #[arg(long, default_value_t = 1000)]
    final_depth: usize,
    /// key=value parameter file.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Override one parameter, e.g. `--param mu=500`. Repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Worker threads for per-topic parallelism; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    session: SessionArgs,
    /// Qrels for simulated judgments.
    #[arg(long)]
    qrels: Option<PathBuf>,
    /// Ask for judgments on the terminal.
    #[arg(long, conflicts_with = "replay")]
    interactive: bool,
    /// Take judgments from an earlier session log.
    #[arg(long)]
    replay: Option<PathBuf>,
    /// Write the initial ranking only, without judgments.
    #[arg(long, conflicts_with_all = ["interactive", "replay"])]
    initial_only: bool,
    #[arg(long)]
    output: PathBuf,
    /// Recorded in the configuration echo.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    run: PathBuf,
    #[arg(long)]
    qrels: PathBuf,
    /// Write the per-query report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long)]
    run_a: PathBuf,
    #[arg(long)]
    run_b: PathBuf,
    #[arg(long)]
    qrels: PathBuf,
    /// Restrict to one metric; both by default.
    #[arg(long)]
    metric: Option<Metric>,
    /// Monte Carlo samples when there are more than 20 queries.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    session: SessionArgs,
    #[arg(long)]
    qrels: PathBuf,
    /// Replace one grid axis, e.g. `--grid mu=300,1000`. Repeatable.
    #[arg(long = "grid", value_name = "KEY=V1,V2,...")]
    grid: Vec<String>,
    /// Use only the values from --params/--param (a one-point grid).
    #[arg(long)]
    singleton: bool,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Index(a) => commands::index(a),
        Command::Run(a) => commands::run(a),
        Command::Eval(a) => commands::eval(a),
        Command::Compare(a) => commands::compare(a),
        Command::Sweep(a) => commands::sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
