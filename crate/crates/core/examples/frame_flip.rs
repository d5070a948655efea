// Two inertial frames disagree on which analyzer fires first; the records do not.

use std::error::Error;

use lightcone::certify::record_spread;
use lightcone::scenarios::{eprb, standard_layout};
use lightcone::spacetime::{classify, Frame};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let (a, b) = standard_layout();
    let moving = Frame::new(-0.6)?;
    println!(
        "A = (t {}, x {}), B = (t {}, x {}): {:?}",
        a.t,
        a.x,
        b.t,
        b.x,
        classify(&a, &b)
    );
    for frame in [Frame::REST, moving] {
        let (a2, b2) = (a.boost(frame), b.boost(frame));
        println!(
            "  v = {:+.1}: t'_A = {:+.4}, t'_B = {:+.4}",
            frame.velocity(),
            a2.0,
            b2.0
        );
    }

    let s = eprb(0.4, 1.9, (a, b))?;
    let rest = s.evaluate_in_frame(Frame::REST)?;
    let boosted = s.evaluate_in_frame(moving)?;
    let spread = record_spread(&rest, &boosted);
    println!(
        "orders {:?} vs {:?}, record spread {spread:.3e}",
        rest.ordering, boosted.ordering
    );
    if rest.ordering == boosted.ordering || spread > 1e-12 {
        return Err("frames should reorder the stations without changing probabilities".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
