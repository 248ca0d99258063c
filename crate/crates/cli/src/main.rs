mod commands;
mod config;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use ceoh_core::instance::Problem;
use ceoh_core::prompt::AugmentationMode;
use ceoh_core::search::DuplicatePolicy;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Evolve, evaluate and benchmark A* guiding heuristics.
#[derive(Parser, Debug)]
#[command(name = "ceoh", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an evolution experiment from a config file.
    Evolve(EvolveArgs),
    /// Compare heuristics on generated or stored instances.
    Bench(BenchArgs),
    /// Write instance files for a range of seeds.
    GenInstances(GenArgs),
    /// Summarise a finished run directory.
    Report(ReportArgs),
    /// Evaluate one heuristic and print per-instance results.
    Eval(EvalArgs),
}

#[derive(Args, Debug)]
struct EvolveArgs {
    config: PathBuf,
    /// Continue from a snapshot; the latest one in the output directory
    /// when no path is given.
    #[arg(long, num_args = 0..=1, default_missing_value = "")]
    resume: Option<PathBuf>,
    /// Render and count every prompt without calling the model.
    #[arg(long)]
    dry_run: bool,
    #[arg(long)]
    mode: Option<AugmentationMode>,
    #[arg(long)]
    problem: Option<Problem>,
    /// Override the run's random seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct InstanceArgs {
    #[arg(long)]
    problem: Problem,
    /// Seeds as a list with inclusive ranges, e.g. `0-9` or `1,4,7-9`.
    #[arg(long, default_value = "0-9")]
    seeds: String,
    /// Read instance files from this directory instead of generating.
    #[arg(long)]
    instances: Option<PathBuf>,
    /// Puzzle side length.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    shuffle_moves: Option<u32>,
    #[arg(long)]
    allow_inversions: bool,
    #[arg(long)]
    lanes: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    classes: Option<u8>,
    #[arg(long)]
    fill: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct LimitArgs {
    #[arg(long)]
    timeout: Option<f64>,
    #[arg(long)]
    max_nodes: Option<u64>,
    #[arg(long)]
    penalty: Option<u32>,
    #[arg(long, default_value = "paper")]
    policy: DuplicatePolicy,
    /// Worker command for programs that are not built in, split on
    /// whitespace.
    #[arg(long)]
    worker: Option<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    limits: LimitArgs,
    /// Built-in heuristic name; may repeat.
    #[arg(long = "heuristic")]
    heuristics: Vec<String>,
    /// Stored heuristic: a `.py` program or a JSON record with `code`.
    #[arg(long = "stored")]
    stored: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ReportArgs {
    run_dir: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Skip the CSV files.
    #[arg(long)]
    no_csv: bool,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    limits: LimitArgs,
    /// Built-in heuristic name.
    #[arg(long, conflicts_with = "code")]
    heuristic: Option<String>,
    /// Program file or JSON record.
    #[arg(long)]
    code: Option<PathBuf>,
}

/// The error and its causes, skipping causes already quoted by the
/// message above them.
fn describe(error: &anyhow::Error) -> String {
    let mut text = error.to_string();
    let mut last = text.clone();
    for cause in error.chain().skip(1) {
        let c = cause.to_string();
        if !last.contains(&c) {
            text.push_str(": ");
            text.push_str(&c);
        }
        last = c;
    }
    text
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Evolve(a) => {
            commands::evolve(&a.config, a.resume.as_deref(), a.dry_run, a.mode, a.problem, a.seed, a.output_dir)
        }
        Command::Bench(a) => commands::bench(&a.instance, &a.limits, &a.heuristics, &a.stored, a.format),
        Command::GenInstances(a) => commands::gen_instances(&a.instance, &a.out),
        Command::Report(a) => commands::report(&a.run_dir, a.format, !a.no_csv),
        Command::Eval(a) => commands::eval(&a.instance, &a.limits, a.heuristic.as_deref(), a.code.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", describe(&f.error));
            ExitCode::from(f.kind.code())
        }
    }
}
