// Bob's marginal is unchanged by whatever Alice chooses to do.

use std::error::Error;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use lightcone::certify::check_no_signaling;
use lightcone::intervention::{Intervention, LocalIntervention};
use lightcone::scenarios::{eprb, standard_layout, AnalyzerDirection};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let s = eprb(0.0, 0.7, standard_layout())?;
    let alternatives = vec![
        LocalIntervention::new(0, AnalyzerDirection::new(FRAC_PI_2).measurement()),
        LocalIntervention::new(0, AnalyzerDirection::new(FRAC_PI_4).measurement()),
        LocalIntervention::new(0, Intervention::identity(2, "idle")),
    ];
    let r = check_no_signaling(&s, "B", "A", &alternatives, 1e-9)?;
    for (name, m) in ["sigma_z", "sigma_x", "45 degrees", "nothing"].iter().zip(&r.marginals) {
        println!("Alice measures {name:<10} -> Bob: {m:?}");
    }
    println!("worst marginal spread {:.3e}", r.worst);
    if !r.ok {
        return Err("Alice's choice is visible to Bob".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
