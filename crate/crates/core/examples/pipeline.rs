// The config-driven pipeline behind the command-line tool, run in a
// scratch directory on the annotated example configuration.

use std::fs;
use toral_lab::runner::{run, Command, RunOptions};

fn main() -> toral_lab::Result<()> {
    let dir = tempfile::tempdir()?;
    let text = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/experiment.toml"))?;
    // a lighter ensemble than the documented one
    let text = text
        .replace("paths = 10000              # number of paths M", "paths = 1000")
        .replace("length = 4096              # path length N", "length = 1024");
    let config = dir.path().join("experiment.toml");
    fs::write(&config, text)?;

    for cmd in [
        Command::Check,
        Command::Correlate,
        Command::Simulate,
        Command::Test,
        Command::Martingale,
        Command::Report,
    ] {
        let summary = run(
            cmd,
            RunOptions {
                config: config.clone(),
                ..Default::default()
            },
        )?;
        println!(
            "{:<10} {:?}: {}",
            cmd.name(),
            summary.outcome,
            summary.message.lines().next().unwrap_or("")
        );
    }
    Ok(())
}
