//! Command-line front end: simulation, classification, group inspection,
//! invariant suites and coupling sweeps.

pub mod args;
pub mod commands;
pub mod envelope;
pub mod verify;

use grf_core::Error;

pub use args::{Cli, Command};
pub use envelope::{AnyEnsemble, Meta, StateEnvelope};

use commands::{EXIT_DIVERGED, EXIT_OK, EXIT_USAGE};

fn verify_cmd(a: &args::VerifyArgs) -> grf_core::Result<u8> {
    let checks = verify::run_suite(&a.group, a.suite, a.seed, a.trials)?;
    let mut failed = 0;
    for c in &checks {
        println!("{c}");
        failed += usize::from(!c.pass());
    }
    println!("{} checks, {failed} failed", checks.len());
    Ok(if failed == 0 { EXIT_OK } else { EXIT_USAGE })
}

/// Runs one command and maps the outcome to an exit code.
pub fn run(cli: &Cli) -> u8 {
    let result = match &cli.command {
        Command::Simulate(a) => commands::simulate_cmd(a),
        Command::Classify(a) => commands::classify_cmd(a),
        Command::GroupInfo(a) => commands::group_info_cmd(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Sweep(a) => commands::sweep_cmd(a),
    };
    match result {
        Ok(code) => code,
        Err(e @ Error::Divergence { .. }) => {
            eprintln!("error: {e}");
            EXIT_DIVERGED
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
