use clap::Parser;
use photonsynth::cli::{exit_code, run, Cli};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    if let Err(err) = run(&cli, &args) {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}
