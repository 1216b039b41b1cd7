use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use toral_lab::runner::{run, Command, RunOptions, USAGE_EXIT_CODE};

#[derive(Parser)]
#[command(
    name = "toral-lab",
    version,
    about = "Invariance-principle experiments for toral automorphisms"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Directory for artifacts (default: `output.dir` of the config, relative to the config file).
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Memory budget for simulated ensembles, in MB.
    #[arg(long, global = true)]
    budget_mb: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify the matrix and verify the configured tail condition.
    Check { config: PathBuf },
    /// Exact correlations and long-run variance.
    Correlate { config: PathBuf },
    /// Simulate the partial-sum ensemble.
    Simulate { config: PathBuf },
    /// Run the statistical battery on a simulated ensemble.
    Test { config: PathBuf },
    /// Martingale-coboundary checks on the configured Markov chain.
    Martingale { config: PathBuf },
    /// Digest of every report in the output directory.
    Report { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE_EXIT_CODE as u8 } else { 0 });
        }
    };
    let (command, config) = match cli.command {
        Cmd::Check { config } => (Command::Check, config),
        Cmd::Correlate { config } => (Command::Correlate, config),
        Cmd::Simulate { config } => (Command::Simulate, config),
        Cmd::Test { config } => (Command::Test, config),
        Cmd::Martingale { config } => (Command::Martingale, config),
        Cmd::Report { config } => (Command::Report, config),
    };
    let opts = RunOptions {
        config,
        output_dir: cli.output_dir,
        jobs: cli.jobs,
        budget_mb: cli.budget_mb,
    };
    match run(command, opts) {
        Ok(summary) => {
            println!("{}", summary.message);
            for a in &summary.artifacts {
                eprintln!("wrote {}", a.display());
            }
            ExitCode::from(summary.outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(USAGE_EXIT_CODE as u8)
        }
    }
}
