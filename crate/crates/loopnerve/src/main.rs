use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process;

use loopnerve::cli::{
    cmd_analyze, cmd_export, cmd_sample, cmd_spectrum, cmd_verify, AnalyzeOpts, CliError,
    ExportOpts, Format, SampleOpts, SpectrumOpts, VerifyOpts,
};

/// Loop-nerve homology of RNA bi-secondary structures.
#[derive(Parser)]
#[command(name = "loopnerve", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute homology, generators, and the weight spectrum of one pair
    Analyze {
        /// Input pair: .bis file (two dot-bracket lines) or arc-list .json
        #[arg(long)]
        input: PathBuf,
        /// Write the homology JSON here
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run the lemma and theorem battery over a corpus or random instances
    Verify {
        /// Directory of .bis files
        #[arg(long)]
        input: Option<PathBuf>,
        /// Number of random instances to check instead of a corpus
        #[arg(long)]
        random: Option<usize>,
        /// Length for random instances
        #[arg(long, default_value_t = 40)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long = "min-gap", default_value_t = 0)]
        min_gap: usize,
        /// Also run the brute-force nerve and rational-rank oracles
        #[arg(long)]
        oracle: bool,
        /// Also measure the delta condition with S and T roles swapped
        #[arg(long = "swapped-delta")]
        swapped_delta: bool,
        /// Where to write a counterexample .bis on failure
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sample uniform pairs and histogram the second homology rank
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long = "min-gap", default_value_t = 0)]
        min_gap: usize,
        /// Write the histogram JSON here
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Per-level Betti table and persistence bars of the weight filtration
    Spectrum {
        #[arg(long)]
        input: PathBuf,
        /// Write the Betti table here (bars go to <output>.bars)
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Export the simplicial complex or the loop table
    Export {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Complex)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Analyze { input, output, format } => {
            cmd_analyze(&AnalyzeOpts { input, output, format })
        }
        Command::Verify {
            input,
            random,
            n,
            seed,
            min_gap,
            oracle,
            swapped_delta,
            output,
        } => cmd_verify(&VerifyOpts {
            input,
            random,
            n,
            seed,
            min_gap,
            oracle,
            swapped_delta,
            output,
        }),
        Command::Sample { n, count, seed, min_gap, output, format } => {
            cmd_sample(&SampleOpts { n, count, seed, min_gap, output, format })
        }
        Command::Spectrum { input, output, format } => {
            cmd_spectrum(&SpectrumOpts { input, output, format })
        }
        Command::Export { input, format, output } => {
            cmd_export(&ExportOpts { input, output, format })
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli.command) {
        eprintln!("error: {err}");
        process::exit(err.exit_code());
    }
}
