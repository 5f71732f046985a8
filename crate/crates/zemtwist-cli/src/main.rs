use clap::Parser;
use zemtwist_cli::commands::{configure_threads_from_env, dispatch, Cli};

fn main() {
    configure_threads_from_env();
    let cli = Cli::parse();
    std::process::exit(dispatch(&cli));
}
