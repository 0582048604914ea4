use clap::Parser;
use polyrec_gateway::cli::{main_with, Cli};

fn main() {
    std::process::exit(main_with(Cli::parse()));
}
