use std::process::ExitCode;

use clap::Parser;
use lambshift_cli::{run, Cli};

fn main() -> ExitCode {
    run(&Cli::parse())
}
