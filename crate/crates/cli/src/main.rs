use clap::Parser;

fn main() {
    std::process::exit(estk_cli::run(estk_cli::Cli::parse()));
}
