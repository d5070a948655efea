// Interventions that do not commute, placed at spacelike events, make record
// probabilities depend on the chosen order; the certifier flags it.

use std::error::Error;

use lightcone::certify::check_order_invariance;
use lightcone::scenarios::noncommuting_counterexample;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let s = noncommuting_counterexample();
    let report = check_order_invariance(&s, 1e-9)?;
    println!("ok = {}, worst spread = {:.12}", report.ok, report.worst);
    if let Some(w) = &report.witness {
        println!(
            "record {:?}: {:.12} in {:?}, {:.12} in {:?}",
            w.record, w.high, w.high_order, w.low, w.low_order
        );
    }
    if report.ok {
        return Err("counterexample was not flagged".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
