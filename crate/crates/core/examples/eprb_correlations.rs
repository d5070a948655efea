// Singlet correlations between two analyzers at spacelike-separated events.

use std::error::Error;
use std::f64::consts::PI;

use lightcone::scenarios::{correlation, eprb, standard_layout};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let s = eprb(0.0, 0.0, standard_layout())?;
    let r = s.evaluate_in_order(&s.rest_order())?;
    println!("equal analyzers:");
    for (a, b) in [("+", "+"), ("+", "-"), ("-", "+"), ("-", "-")] {
        println!("  p({a},{b}) = {:.12}", r.probability_of(&[("A", a), ("B", b)]));
    }

    println!("E(a, b) against -cos(a - b):");
    let mut worst = 0.0f64;
    for i in 0..6 {
        let b = i as f64 * PI / 6.0;
        let e = correlation(0.0, b);
        worst = worst.max((e + b.cos()).abs());
        println!("  b = {:>5.1} deg  E = {e:+.12}", b.to_degrees());
    }
    if worst > 1e-9 {
        return Err(format!("correlation deviates from -cos by {worst:e}").into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
