// CHSH combination of singlet correlations at the optimal analyzer settings.

use std::error::Error;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

use lightcone::scenarios::chsh;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // S = |E11 + E12 + E21 - E22|; the sign on E22 puts b2 at -45 degrees
    let s = chsh((0.0, FRAC_PI_2), (FRAC_PI_4, -FRAC_PI_4));
    println!("S = {s:.12} (classical bound 2, Tsirelson bound {:.12})", 2.0 * SQRT_2);
    if (s - 2.0 * SQRT_2).abs() > 1e-9 {
        return Err("CHSH value is not maximal".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
