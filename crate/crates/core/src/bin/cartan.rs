use std::process::ExitCode;

use clap::Parser;
use mroot_cartan::cli::{run, Cli};

fn main() -> ExitCode {
    ExitCode::from(run(Cli::parse()))
}
