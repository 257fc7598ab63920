use clap::Parser;
use scarf2d::cli::{configure_threads, run, CliArgs};

fn main() {
    configure_threads();
    let args = CliArgs::parse();
    std::process::exit(run(args));
}
