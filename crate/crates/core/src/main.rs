use clap::Parser;
use preytaxis::cli::{main_with, Cli};

fn main() {
    std::process::exit(main_with(Cli::parse()));
}
