use clap::Parser;
use pandora_core::cli::{run, Cli};

fn main() {
    std::process::exit(run(&Cli::parse()));
}
