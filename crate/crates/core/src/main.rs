use clap::Parser;
use pursuit_core::cli::{run, Cli};

fn main() {
    let code = run(Cli::parse());
    std::process::exit(code);
}
