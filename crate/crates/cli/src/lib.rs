//! Command-line front end: argument parsing, commands and report output.

pub mod args;
pub mod commands;
pub mod report;
pub mod suite;

use std::io::Write;

use args::{Cli, Command};
use commands::{Failure, Outcome};

pub fn execute(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Bounds(a) => commands::cmd_bounds(a),
        Command::Sdp(c) => commands::cmd_sdp(c),
        Command::Simulate(a) => commands::cmd_simulate(a),
        Command::PaperSuite(a) => suite::cmd_paper_suite(a),
        Command::List => commands::cmd_list(),
    }
}

/// Runs a parsed command line, prints and writes its outputs, and returns
/// the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let outcome = match execute(cli) {
        Ok(o) => o,
        Err(f) => {
            eprintln!("error: {}", f.message());
            return f.exit_code();
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let printed = if cli.output.json {
        out.write_all(outcome.bundle.to_canonical_json().as_bytes())
    } else {
        report::print_lines(&mut out, &outcome.lines)
    };
    if let Err(e) = printed {
        eprintln!("error: {e}");
        return 4;
    }
    if let Some(dir) = &cli.output.out {
        if let Err(e) = report::write_bundle(dir, &outcome.name, &outcome.bundle) {
            eprintln!("error: writing bundle to {}: {e}", dir.display());
            return 4;
        }
        if !outcome.csv_rows.is_empty() {
            if let Err(e) = report::append_csv(dir, &outcome.csv_rows) {
                eprintln!("error: appending CSV in {}: {e}", dir.display());
                return 4;
            }
        }
    }
    if outcome.bundle.passed {
        0
    } else {
        1
    }
}
