//! `nspec`: train networks, extract their null spaces, build stego images and
//! analyze convolution nullity from the command line.
//!
//! Exit status: 0 on success, 1 when a verification check fails, 2 on usage or
//! IO errors. Every command prints a JSON report; with `--out` it also writes
//! `manifest.json` (first), `report.json` and any PGM images there.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::commands::Outcome;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
