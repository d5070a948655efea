// Builds the scenario files shipped next to the examples and loads one back.
//
// `cargo run --example scenario_files -- --write` rewrites them in place.

use std::error::Error;
use std::path::Path;

use lightcone::cli::builtin;
use lightcone::schema::{parse_scenario, serialize_scenario};

/// (file name, built-in scenario name)
pub const FILES: [(&str, &str); 4] = [
    ("eprb.json", "eprb"),
    ("counterexample.json", "counterexample"),
    ("dimension_change.json", "dimension-change"),
    ("teleported_eprb.json", "teleported-eprb"),
];

pub fn render() -> Vec<(&'static str, String)> {
    FILES
        .iter()
        .map(|&(file, name)| (file, serialize_scenario(&builtin(name).expect("built-in"))))
        .collect()
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples");
    let s = parse_scenario(&std::fs::read(dir.join("eprb.json"))?)?;
    let r = s.evaluate_in_order(&s.rest_order())?;
    println!(
        "eprb.json: {} stations, {} records",
        s.stations().len(),
        r.records.len()
    );
    println!("{}", serde_json::to_string_pretty(&r.to_json())?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    if std::env::args().any(|a| a == "--write") {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples");
        for (file, text) in render() {
            std::fs::write(dir.join(file), text)?;
            println!("wrote {file}");
        }
        return Ok(());
    }
    run_example()
}
