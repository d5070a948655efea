//! Executable checks on scenarios: record probabilities must not depend on
//! the chronological order chosen for spacelike stations, and one station's
//! outcome statistics must not depend on what a spacelike station does.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::complexmat::GATE_TOL;
use crate::experiment::{EvaluationResult, ExperimentError, Record, Result, Scenario};
use crate::intervention::LocalIntervention;
use crate::spacetime::{classify, linear_extensions, IntervalKind};

/// Default tolerance for both certifiers.
pub const CERTIFY_TOL: f64 = GATE_TOL;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub record: Record,
    pub high_order: Vec<String>,
    pub high: f64,
    pub low_order: Vec<String>,
    pub low: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub ok: bool,
    pub worst: f64,
    pub orders_checked: usize,
    /// Record with the largest spread and the two orders realizing it; absent when `ok`.
    pub witness: Option<Witness>,
}

#[derive(Clone)]
struct Spread {
    high: f64,
    high_order: usize,
    low: f64,
    low_order: usize,
}

impl Spread {
    fn single(p: f64, order: usize) -> Self {
        Self {
            high: p,
            high_order: order,
            low: p,
            low_order: order,
        }
    }

    fn merge(mut self, other: &Spread) -> Self {
        if other.high > self.high {
            self.high = other.high;
            self.high_order = other.high_order;
        }
        if other.low < self.low {
            self.low = other.low;
            self.low_order = other.low_order;
        }
        self
    }

    fn width(&self) -> f64 {
        self.high - self.low
    }
}

type Spreads = BTreeMap<Record, Spread>;

fn merge_spreads(mut a: Spreads, b: Spreads) -> Spreads {
    for (rec, s) in b {
        let merged = match a.remove(&rec) {
            Some(prev) => prev.merge(&s),
            None => s,
        };
        a.insert(rec, merged);
    }
    a
}

/// Non-identity evolutions must sit on segments that are adjacent in every
/// admissible order; otherwise different orders would apply different
/// unitaries and no invariance is expected.
fn check_evolutions_shared(s: &Scenario) -> Result<()> {
    let order = s.causal_order();
    let ids = order.ids();
    for e in s.evolutions() {
        if e.is_identity(GATE_TOL) {
            continue;
        }
        let shared = match (&e.from, &e.to) {
            (None, Some(to)) => ids.iter().all(|z| z == to || order.precedes(to, z)),
            (Some(from), None) => ids.iter().all(|z| z == from || order.precedes(z, from)),
            (Some(from), Some(to)) => {
                order.precedes(from, to)
                    && ids
                        .iter()
                        .all(|z| z == from || z == to || order.precedes(z, from) || order.precedes(to, z))
            }
            (None, None) => true,
        };
        if !shared {
            return Err(ExperimentError::Evolution {
                segment: e.segment(),
                reason: "non-identity unitary on a segment that is not adjacent in every admissible order".into(),
            });
        }
    }
    Ok(())
}

/// Evaluate `s` under every linear extension of its causal order and report
/// the largest spread of any record probability across them.
pub fn check_order_invariance(s: &Scenario, tol: f64) -> Result<InvarianceReport> {
    check_evolutions_shared(s)?;
    let orders = linear_extensions(s.causal_order())?;
    let spreads = orders
        .par_iter()
        .enumerate()
        .map(|(i, order)| {
            let r = s.evaluate_in_order(order)?;
            Ok::<_, ExperimentError>(
                r.records
                    .into_iter()
                    .map(|rec| (rec.outcomes, Spread::single(rec.probability, i)))
                    .collect::<Spreads>(),
            )
        })
        .try_reduce(Spreads::new, |a, b| Ok(merge_spreads(a, b)))?;

    // a record missing from some order has probability zero there
    let n_orders = orders.len();
    let worst = spreads.iter().max_by(|a, b| a.1.width().total_cmp(&b.1.width()));
    let (worst, witness) = match worst {
        Some((rec, sp)) => {
            let w = sp.width();
            let witness = (w > tol).then(|| Witness {
                record: rec.clone(),
                high_order: orders[sp.high_order].clone(),
                high: sp.high,
                low_order: orders[sp.low_order].clone(),
                low: sp.low,
            });
            (w, witness)
        }
        None => (0.0, None),
    };
    Ok(InvarianceReport {
        ok: worst <= tol,
        worst,
        orders_checked: n_orders,
        witness,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoSignalingReport {
    pub ok: bool,
    pub worst: f64,
    pub target: String,
    pub varied: String,
    /// Target marginal under the original intervention, then each alternative.
    pub marginals: Vec<BTreeMap<String, f64>>,
}

/// Marginal of `target` under the original scenario and with station
/// `varied` replaced by each of `alternatives`; reports the largest spread.
pub fn check_no_signaling(
    s: &Scenario,
    target: &str,
    varied: &str,
    alternatives: &[LocalIntervention],
    tol: f64,
) -> Result<NoSignalingReport> {
    let t = s.station(target)?;
    let v = s.station(varied)?;
    if target == varied || classify(&t.event, &v.event) != IntervalKind::Spacelike {
        return Err(ExperimentError::NotSpacelike(target.to_owned(), varied.to_owned()));
    }
    let order = s.rest_order();
    let mut scenarios = vec![s.clone()];
    for alt in alternatives {
        scenarios.push(s.with_station_intervention(varied, alt.clone())?);
    }
    let marginals = scenarios
        .par_iter()
        .map(|sc| sc.evaluate_in_order(&order)?.marginal(target))
        .collect::<Result<Vec<_>>>()?;

    let mut worst: f64 = 0.0;
    let labels: Vec<&String> = marginals.iter().flat_map(|m| m.keys()).collect();
    for label in labels {
        let values = marginals.iter().map(|m| m.get(label).copied().unwrap_or(0.0));
        let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p), hi.max(p)));
        worst = worst.max(hi - lo);
    }
    Ok(NoSignalingReport {
        ok: worst <= tol,
        worst,
        target: target.to_owned(),
        varied: varied.to_owned(),
        marginals,
    })
}

/// Largest pairwise spread of record probabilities between two evaluations.
pub fn record_spread(a: &EvaluationResult, b: &EvaluationResult) -> f64 {
    let mut worst: f64 = 0.0;
    for r in &a.records {
        worst = worst.max((r.probability - b.probability(&r.outcomes)).abs());
    }
    for r in &b.records {
        worst = worst.max((r.probability - a.probability(&r.outcomes)).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexmat::CMatrix;
    use crate::experiment::{record, Evolution, Station};
    use crate::intervention::Intervention;
    use crate::spacetime::Event;
    use num_complex::Complex64;

    fn sz() -> Intervention {
        Intervention::projective(
            2,
            vec![
                ("+", CMatrix::diag_real(&[1.0, 0.0])),
                ("-", CMatrix::diag_real(&[0.0, 1.0])),
            ],
        )
        .unwrap()
    }

    fn sx() -> Intervention {
        Intervention::projective(
            2,
            vec![
                ("+", CMatrix::from_real(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap()),
                ("-", CMatrix::from_real(&[&[0.5, -0.5], &[-0.5, 0.5]]).unwrap()),
            ],
        )
        .unwrap()
    }

    fn same_qubit() -> Scenario {
        Scenario::new(
            vec![2],
            CMatrix::diag_real(&[1.0, 0.0]),
            vec![
                Station::new(Event::new("Z", 0.0, 0.0), LocalIntervention::new(0, sz())),
                Station::new(Event::new("X", 0.0, 3.0), LocalIntervention::new(0, sx())),
            ],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn single_station_is_trivially_invariant() {
        let s = Scenario::new(
            vec![2],
            CMatrix::diag_real(&[0.3, 0.7]),
            vec![Station::new(Event::new("A", 0.0, 0.0), LocalIntervention::new(0, sz()))],
            vec![],
        )
        .unwrap();
        let r = check_order_invariance(&s, CERTIFY_TOL).unwrap();
        assert!(r.ok);
        assert_eq!(r.worst, 0.0);
        assert_eq!(r.orders_checked, 1);
    }

    #[test]
    fn shared_qubit_violates_invariance() {
        let s = same_qubit();
        let zx = s.evaluate_in_order(&["Z".into(), "X".into()]).unwrap();
        let xz = s.evaluate_in_order(&["X".into(), "Z".into()]).unwrap();
        let rec = record(&[("Z", "+"), ("X", "+")]);
        assert!((zx.probability(&rec) - 0.5).abs() < 1e-12);
        assert!((xz.probability(&rec) - 0.25).abs() < 1e-12);
        let r = check_order_invariance(&s, CERTIFY_TOL).unwrap();
        assert!(!r.ok);
        assert!(r.worst >= 0.25 - 1e-9);
        let w = r.witness.unwrap();
        assert_eq!(w.high_order.len(), 2);
        assert_ne!(w.high_order, w.low_order);
        assert!((record_spread(&zx, &xz) - r.worst).abs() < 1e-12);
    }

    #[test]
    fn reorderable_evolution_rejected() {
        let s = same_qubit();
        let x = CMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let s = Scenario::new(
            s.dims0().to_vec(),
            s.rho0().clone(),
            s.stations().to_vec(),
            vec![Evolution {
                from: Some("Z".into()),
                to: Some("X".into()),
                history: Record::new(),
                unitary: x,
            }],
        )
        .unwrap();
        assert!(matches!(
            check_order_invariance(&s, CERTIFY_TOL),
            Err(ExperimentError::Evolution { .. })
        ));
    }

    #[test]
    fn no_signaling_requires_spacelike_pair() {
        let s = Scenario::new(
            vec![2, 2],
            CMatrix::diag_real(&[1.0, 0.0, 0.0, 0.0]),
            vec![
                Station::new(Event::new("A", 0.0, 0.0), LocalIntervention::new(0, sz())),
                Station::new(Event::new("B", 2.0, 0.5), LocalIntervention::new(1, sz())),
            ],
            vec![],
        )
        .unwrap();
        assert!(matches!(
            check_no_signaling(&s, "B", "A", &[], CERTIFY_TOL),
            Err(ExperimentError::NotSpacelike(..))
        ));
        assert!(check_no_signaling(&s, "A", "A", &[], CERTIFY_TOL).is_err());
    }

    #[test]
    fn original_only_has_zero_spread() {
        let s = same_qubit();
        let r = check_no_signaling(&s, "X", "Z", &[], CERTIFY_TOL).unwrap();
        assert!(r.ok);
        assert_eq!(r.worst, 0.0);
        assert_eq!(r.marginals.len(), 1);
    }

    #[test]
    fn shared_subsystem_signals() {
        // two stations touching the same qubit can signal; the checker must see it
        let s = same_qubit();
        let plus = CMatrix::from_real(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        let s = Scenario::new(vec![2], plus, s.stations().to_vec(), vec![]).unwrap();
        let none = LocalIntervention::new(0, Intervention::identity(2, "skip"));
        let r = check_no_signaling(&s, "X", "Z", &[none], CERTIFY_TOL).unwrap();
        assert!(!r.ok);
        assert!((r.worst - 0.5).abs() < 1e-12);
    }

    #[test]
    fn product_marginal_unchanged_by_remote_choice() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = CMatrix::projector(&[
            Complex64::new(h, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(h, 0.0),
        ]);
        let s = Scenario::new(
            vec![2, 2],
            bell,
            vec![
                Station::new(Event::new("A", 0.0, -1.0), LocalIntervention::new(0, sz())),
                Station::new(Event::new("B", 0.0, 1.0), LocalIntervention::new(1, sz())),
            ],
            vec![],
        )
        .unwrap();
        let alts = vec![
            LocalIntervention::new(0, sx()),
            LocalIntervention::new(0, Intervention::identity(2, "idle")),
        ];
        let r = check_no_signaling(&s, "B", "A", &alts, CERTIFY_TOL).unwrap();
        assert!(r.ok, "{r:?}");
        assert!(r.worst < 1e-12);
    }
}
