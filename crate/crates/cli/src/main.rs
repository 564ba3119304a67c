use clap::Parser;

fn main() {
    std::process::exit(pricer_cli::run(pricer_cli::Cli::parse()));
}
