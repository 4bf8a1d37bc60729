mod bench;
mod check;
mod eval;
mod input;
mod transform;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cfspanner::oracle::DEFAULT_BUDGET;

/// Context-free document spanners.
///
/// Spans are printed as `[i, j]` arrays: 1-based and half-open, so `[2, 4]`
/// covers the second and third characters and `[3, 3]` is the empty span
/// before the third character.
#[derive(Parser, Debug)]
#[command(name = "cfspanner", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a grammar on a document and print one JSON object per mapping.
    Eval(EvalArgs),
    /// Transform a grammar and print the result in the grammar DSL.
    Transform(TransformArgs),
    /// Report well-formedness, normal forms and functionality of a grammar.
    Check(CheckArgs),
    /// Time preprocessing and measure enumeration delay.
    Bench(BenchArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Constant-delay enumeration.
    Enum,
    /// Brute force over all valid ref-words.
    Naive,
    /// Run both and fail with exit code 4 if the sets differ.
    Compare,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Adjusted,
    Decorated,
}

#[derive(clap::Args, Debug)]
#[command(group = clap::ArgGroup::new("input").required(true).args(["doc", "text"]))]
pub struct EvalArgs {
    /// Grammar file.
    grammar: PathBuf,
    /// Document file. One trailing newline is ignored.
    #[arg(long)]
    doc: Option<PathBuf>,
    /// Inline document.
    #[arg(long)]
    text: Option<String>,
    #[arg(long, value_enum, default_value = "enum")]
    mode: Mode,
    /// Stop after this many mappings.
    #[arg(long)]
    limit: Option<usize>,
    /// Print an intermediate grammar to stderr.
    #[arg(long, value_enum)]
    dump_stage: Option<Stage>,
    /// Suppress repeated mappings even for grammars declared unambiguous.
    #[arg(long)]
    check_duplicates: bool,
    /// Maximum number of candidate ref-words the naive evaluator may visit.
    #[arg(long, env = "CFSPANNER_ORACLE_BUDGET", default_value_t = DEFAULT_BUDGET)]
    oracle_budget: u128,
}

#[derive(clap::Args, Debug)]
pub struct TransformArgs {
    /// Grammar file.
    grammar: PathBuf,
    /// `cnf`, `functional`, `project:<var,var,...>` or `union:<path>`.
    #[arg(long = "to")]
    target: String,
}

#[derive(clap::Args, Debug)]
pub struct CheckArgs {
    /// Grammar file.
    grammar: PathBuf,
}

#[derive(clap::Args, Debug)]
pub struct BenchArgs {
    /// Grammar file.
    grammar: PathBuf,
    /// Document files; each gives one entry of the report.
    #[arg(long)]
    doc: Vec<PathBuf>,
    /// Inline documents.
    #[arg(long)]
    text: Vec<String>,
    /// Runs per document; stage times are the minimum over runs.
    #[arg(long, default_value_t = 3)]
    repeats: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Eval(args) => eval::run(&args),
        Command::Transform(args) => transform::run(&args),
        Command::Check(args) => check::run(&args),
        Command::Bench(args) => bench::run(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(input::exit_code(&e))
        }
    }
}
