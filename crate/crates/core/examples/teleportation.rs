// Teleporting each half of a singlet into a larger system: the state dimension
// grows differently along the two chronological orders, the records do not.

use std::error::Error;

use lightcone::certify::record_spread;
use lightcone::scenarios::{
    dimension_change_scenario, summed_channel_isometry, teleport_intervention, teleported_eprb,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let s = dimension_change_scenario();
    let ab = s.evaluate_in_order(&["A".into(), "B".into()])?;
    let ba = s.evaluate_in_order(&["B".into(), "A".into()])?;
    println!("A first: dimensions {:?}", ab.records[0].chain_dims);
    println!("B first: dimensions {:?}", ba.records[0].chain_dims);
    println!(
        "{} records, spread between orders {:.3e}",
        ab.records.len(),
        record_spread(&ab, &ba)
    );

    let (v, residual) = summed_channel_isometry(&teleport_intervention(3));
    println!(
        "summed channel = V rho V^dagger, V is {}x{}, |V^dagger V - I| = {:.3e}, residual {residual:.1e}",
        v.rows(),
        v.cols(),
        v.isometry_defect()
    );

    let t = teleported_eprb(0.0, 1.0);
    let r = t.evaluate_in_order(&t.rest_order())?;
    let e = r.correlation(&["A", "B"]);
    println!("teleported singlet: E = {e:+.12}, -cos(1) = {:+.12}", -(1.0f64).cos());
    if (e + 1f64.cos()).abs() > 1e-9 || v.isometry_defect() > 1e-9 {
        return Err("teleportation is not exact".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
