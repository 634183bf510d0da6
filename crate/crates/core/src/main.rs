use clap::Parser;

fn main() {
    std::process::exit(fdhom::cli::run(fdhom::cli::Cli::parse()));
}
