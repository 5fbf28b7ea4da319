//! Command-line harness around the spabm library.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

mod config;
mod errors;
mod evaluate;
mod fit;
mod generate;
mod ingest;
mod outfiles;
mod report;
mod select_k;
mod sweep;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "spabm",
    version,
    about = "Sparse popularity-adjusted block models: generate, fit, sweep, select K, ingest, evaluate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one synthetic network instance to disk
    Generate(generate::GenerateArgs),
    /// Cluster a network, recover supports, estimate probabilities
    Fit(fit::FitArgs),
    /// Run a parameter grid of generate-fit-evaluate rounds
    Sweep(sweep::SweepArgs),
    /// Pick the community count by penalized fit, repeatedly
    SelectK(select_k::SelectKArgs),
    /// Convert an edge list into an adjacency file
    Ingest(ingest::IngestArgs),
    /// Score estimated labels and probabilities against ground truth
    Evaluate(evaluate::EvaluateArgs),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version go to stdout and exit 0; genuine flag
            // mistakes go to stderr and exit 1.
            let code = i32::from(e.use_stderr());
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let outcome = match &cli.command {
        Command::Generate(args) => generate::run(args),
        Command::Fit(args) => fit::run(args),
        Command::Sweep(args) => sweep::run(args),
        Command::SelectK(args) => select_k::run(args),
        Command::Ingest(args) => ingest::run(args),
        Command::Evaluate(args) => evaluate::run(args),
    };
    if let Err(err) = outcome {
        eprintln!("error: {}", err.message());
        std::process::exit(err.exit_code());
    }
}
