use clap::Parser;

fn main() {
    env_logger::init();
    let args = helfrich::cli::Args::parse();
    std::process::exit(helfrich::cli::main_with(args));
}
