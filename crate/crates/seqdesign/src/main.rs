use clap::Parser;

fn main() {
    let cli = seqdesign::cli::Cli::parse();
    std::process::exit(seqdesign::cli::run(&cli));
}
