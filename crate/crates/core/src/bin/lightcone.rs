use clap::Parser;
use lightcone::cli::{run, RunConfig};

fn main() {
    let cfg = RunConfig::parse();
    let code = run(&cfg, &mut std::io::stdout().lock());
    std::process::exit(code);
}
