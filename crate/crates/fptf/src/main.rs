use clap::Parser;

fn main() {
    let cli = fptf::Cli::parse();
    if let Err(e) = fptf::run(cli) {
        eprintln!("fptf: {e}");
        std::process::exit(e.code());
    }
}
