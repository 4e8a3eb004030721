use clap::Parser;

fn main() {
    let cli = qpv_lab::args::Cli::parse();
    std::process::exit(qpv_lab::run(&cli));
}
