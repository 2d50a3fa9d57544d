use clap::Parser;

fn main() -> std::process::ExitCode {
    gaugeflow::cli::run(&gaugeflow::cli::Cli::parse())
}
