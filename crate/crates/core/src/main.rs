use clap::Parser;

fn main() {
    let cli = simplexlab::cli::Cli::parse();
    std::process::exit(simplexlab::cli::run(cli));
}
