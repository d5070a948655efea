//! Built-in scenarios and random scenario generators.
//!
//! - [`eprb`]: singlet pair, spin analyzers at two spacelike events.
//! - [`chsh`]: Bell-CHSH combination of four [`eprb`] correlations.
//! - [`dimension_change_scenario`]: each party teleports its spin-1/2 into a
//!   larger system (spin 1 for A, spin 2 for B), so the joint state grows
//!   4 -> 6 -> 15 or 4 -> 10 -> 15 depending on who acts first.
//! - [`noncommuting_counterexample`]: two spacelike stations on the same qubit.
//! - [`random_product_scenario`], [`random_causal_scenario`]: fuzz sources.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use num_complex::Complex64;
use rand::Rng;

use crate::complexmat::CMatrix;
use crate::experiment::{record, Evolution, ExperimentError, Record, Result, Scenario, Station};
use crate::intervention::{random_intervention, Intervention, LocalIntervention, Outcome};
use crate::random;
use crate::spacetime::{classify, Event, IntervalKind};

/// Spin analyzer direction in the x-z plane, measured from the z axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzerDirection(f64);

impl AnalyzerDirection {
    pub fn new(angle: f64) -> Self {
        Self(angle.rem_euclid(TAU))
    }

    pub fn angle(self) -> f64 {
        self.0
    }

    /// Projectors onto spin up / spin down along this direction.
    pub fn projectors(self) -> (CMatrix, CMatrix) {
        let (s, c) = self.0.sin_cos();
        let half = |sign: f64| {
            CMatrix::from_real(&[
                &[0.5 * (1.0 + sign * c), 0.5 * sign * s],
                &[0.5 * sign * s, 0.5 * (1.0 - sign * c)],
            ])
            .expect("2x2")
        };
        (half(1.0), half(-1.0))
    }

    /// Binary projective measurement with outcomes `+` and `-`.
    pub fn measurement(self) -> Intervention {
        let (up, down) = self.projectors();
        Intervention::projective(2, vec![("+", up), ("-", down)]).expect("projectors are complete")
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `(|01> - |10>) / sqrt 2` as a density matrix.
pub fn singlet() -> CMatrix {
    CMatrix::projector(&[c(0.0), c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2), c(0.0)])
}

/// Alice at `(t=0, x=1)`, Bob at `(t=0.5, x=-1)`: spacelike, and a boost
/// with `v = -0.6` puts Bob first.
pub fn standard_layout() -> (Event, Event) {
    (Event::new("A", 0.0, 1.0), Event::new("B", 0.5, -1.0))
}

fn require_spacelike(a: &Event, b: &Event) -> Result<()> {
    if classify(a, b) == IntervalKind::Spacelike {
        Ok(())
    } else {
        Err(ExperimentError::NotSpacelike(a.id.clone(), b.id.clone()))
    }
}

/// Singlet pair; station `layout.0` measures factor 0 along `angle_a`,
/// station `layout.1` measures factor 1 along `angle_b`.
pub fn eprb(angle_a: f64, angle_b: f64, layout: (Event, Event)) -> Result<Scenario> {
    let (ea, eb) = layout;
    require_spacelike(&ea, &eb)?;
    Scenario::new(
        vec![2, 2],
        singlet(),
        vec![
            Station::new(
                ea,
                LocalIntervention::new(0, AnalyzerDirection::new(angle_a).measurement()),
            ),
            Station::new(
                eb,
                LocalIntervention::new(1, AnalyzerDirection::new(angle_b).measurement()),
            ),
        ],
        vec![],
    )
}

/// `E(a, b)`: expectation of the product of the two `±1` outcomes.
pub fn correlation(angle_a: f64, angle_b: f64) -> f64 {
    let s = eprb(angle_a, angle_b, standard_layout()).expect("standard layout is spacelike");
    let order = s.rest_order();
    let r = s.evaluate_in_order(&order).expect("built-in scenario evaluates");
    r.correlation(&["A", "B"])
}

/// `S = |E(a1,b1) + E(a1,b2) + E(a2,b1) - E(a2,b2)|`.
pub fn chsh(angles_a: (f64, f64), angles_b: (f64, f64)) -> f64 {
    let (a1, a2) = angles_a;
    let (b1, b2) = angles_b;
    (correlation(a1, b1) + correlation(a1, b2) + correlation(a2, b1) - correlation(a2, b2)).abs()
}

pub const BELL_LABELS: [&str; 4] = ["Phi+", "Phi-", "Psi+", "Psi-"];

fn bell_vectors() -> [[Complex64; 4]; 4] {
    let h = FRAC_1_SQRT_2;
    [
        [c(h), c(0.0), c(0.0), c(h)],
        [c(h), c(0.0), c(0.0), c(-h)],
        [c(0.0), c(h), c(h), c(0.0)],
        [c(0.0), c(h), c(-h), c(0.0)],
    ]
}

/// Pauli correction for each Bell outcome, acting on the first two levels of
/// a `dim`-level system and as the identity on the rest.
fn correction(outcome: usize, dim: usize) -> CMatrix {
    let x = CMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]).expect("2x2");
    let z = CMatrix::diag_real(&[1.0, -1.0]);
    let qubit = match outcome {
        0 => CMatrix::identity(2),
        1 => z,
        2 => x,
        _ => z.matmul(&x).expect("2x2"),
    };
    let mut data = CMatrix::identity(dim).as_slice().to_vec();
    for i in 0..2 {
        for j in 0..2 {
            data[i * dim + j] = qubit[(i, j)];
        }
    }
    CMatrix::new(dim, dim, data).expect("shape")
}

/// Teleport an incoming qubit into the first two levels of a `dim`-level system.
///
/// The apparatus holds an ancilla qubit maximally entangled with levels 0 and
/// 1 of the output system. The incoming qubit and the ancilla qubit are
/// measured in the Bell basis (four outcomes), the output system receives the
/// outcome's Pauli correction, and both qubits are discarded. The discard is a
/// partial trace, contributing one Kraus matrix `<k| (x) I` per basis state
/// `k` of the two measured qubits; vanishing ones are dropped.
pub fn teleport_intervention(dim: usize) -> Intervention {
    assert!(dim >= 2, "output system needs at least two levels");
    let h = FRAC_1_SQRT_2;
    // W = I_2 (x) |Phi>, |Phi> = (|0,0> + |1,1>)/sqrt 2 on (ancilla, output)
    let mut phi = vec![c(0.0); 2 * dim];
    phi[0] = c(h);
    phi[dim + 1] = c(h);
    let phi = CMatrix::new(2 * dim, 1, phi).expect("shape");
    let prepare = CMatrix::identity(2).kron(&phi);

    let outcomes = bell_vectors()
        .iter()
        .enumerate()
        .map(|(mu, beta)| {
            let project = CMatrix::projector(beta).kron(&CMatrix::identity(dim));
            let correct = CMatrix::identity(4).kron(&correction(mu, dim));
            let branch = correct
                .matmul(&project)
                .and_then(|m| m.matmul(&prepare))
                .expect("shapes");
            let kraus = (0..4)
                .map(|k| {
                    let mut bra = vec![c(0.0); 4];
                    bra[k] = c(1.0);
                    let discard = CMatrix::new(1, 4, bra).expect("shape").kron(&CMatrix::identity(dim));
                    discard.matmul(&branch).expect("shapes")
                })
                .filter(|m| m.frobenius_norm_sqr() > 1e-24)
                .collect();
            Outcome::new(BELL_LABELS[mu], dim, kraus)
        })
        .collect();
    Intervention::new(2, outcomes).expect("teleportation is complete")
}

/// The isometry `V` with `sum_mu A_mu rho A_mu^dagger = V rho V^dagger`,
/// extracted from the Choi matrix of the summed channel, together with the
/// residual `max |Choi - v v^dagger|` (zero for a channel that really is an isometry).
pub fn summed_channel_isometry(iv: &Intervention) -> (CMatrix, f64) {
    let d_in = iv.d_in();
    let d_out = iv.outcomes()[0].d_out();
    assert!(
        iv.outcomes().iter().all(|o| o.d_out() == d_out),
        "outcomes must share d_out"
    );
    let n = d_in * d_out;
    let mut choi = CMatrix::zeros(n, n);
    for o in iv.outcomes() {
        for k in o.kraus() {
            // |k>> = sum_i |i> (x) K|i>
            let vec: Vec<Complex64> = (0..d_in).flat_map(|i| (0..d_out).map(move |r| k[(r, i)])).collect();
            choi.add_assign(&CMatrix::outer(&vec, &vec)).expect("shape");
        }
    }
    let pivot = (0..n)
        .max_by(|&a, &b| choi[(a, a)].re.total_cmp(&choi[(b, b)].re))
        .expect("non-empty");
    let norm = choi[(pivot, pivot)].re.sqrt();
    let v: Vec<Complex64> = (0..n).map(|i| choi[(i, pivot)] / norm).collect();
    let residual = choi.max_abs_diff(&CMatrix::outer(&v, &v)).expect("shape");
    let mut data = vec![c(0.0); d_out * d_in];
    for i in 0..d_in {
        for r in 0..d_out {
            data[r * d_in + i] = v[i * d_out + r];
        }
    }
    (CMatrix::new(d_out, d_in, data).expect("shape"), residual)
}

/// Singlet pair; A teleports its qubit into a spin 1 (3 levels), B into a
/// spin 2 (5 levels), at the [`standard_layout`] events.
pub fn dimension_change_scenario() -> Scenario {
    let (ea, eb) = standard_layout();
    Scenario::new(
        vec![2, 2],
        singlet(),
        vec![
            Station::new(ea, LocalIntervention::new(0, teleport_intervention(3))),
            Station::new(eb, LocalIntervention::new(1, teleport_intervention(5))),
        ],
        vec![],
    )
    .expect("built-in scenario is valid")
}

/// Spin measurement on the first two levels of a `dim`-level system, with a
/// third outcome `out` for population outside that subspace.
pub fn subspace_measurement(angle: f64, dim: usize) -> Intervention {
    let (up, down) = AnalyzerDirection::new(angle).projectors();
    let lift = |p: &CMatrix| {
        let mut data = vec![c(0.0); dim * dim];
        for i in 0..2 {
            for j in 0..2 {
                data[i * dim + j] = p[(i, j)];
            }
        }
        CMatrix::new(dim, dim, data).expect("shape")
    };
    let mut rest = vec![0.0; dim];
    rest[2..].iter_mut().for_each(|x| *x = 1.0);
    let mut branches = vec![("+", lift(&up)), ("-", lift(&down))];
    if dim > 2 {
        branches.push(("out", CMatrix::diag_real(&rest)));
    }
    Intervention::projective(dim, branches).expect("complete")
}

/// Singlet pair; station `T` teleports factor 0 into a spin 1, station `A`
/// later measures the embedded qubit along `angle_a`, station `B` measures
/// factor 1 along `angle_b`. `A` and `B` are spacelike.
pub fn teleported_eprb(angle_a: f64, angle_b: f64) -> Scenario {
    Scenario::new(
        vec![2, 2],
        singlet(),
        vec![
            Station::new(
                Event::new("T", 0.0, 1.0),
                LocalIntervention::new(0, teleport_intervention(3)),
            ),
            Station::new(
                Event::new("A", 1.0, 1.0),
                LocalIntervention::new(0, subspace_measurement(angle_a, 3)),
            ),
            Station::new(
                Event::new("B", 0.5, -1.0),
                LocalIntervention::new(1, AnalyzerDirection::new(angle_b).measurement()),
            ),
        ],
        vec![],
    )
    .expect("built-in scenario is valid")
}

/// One qubit in `|0>`; σ_z at A and σ_x at B, spacelike, both on factor 0.
/// Evaluations disagree between the two orders.
pub fn noncommuting_counterexample() -> Scenario {
    let (ea, eb) = standard_layout();
    let z = AnalyzerDirection::new(0.0).measurement();
    let x = AnalyzerDirection::new(std::f64::consts::FRAC_PI_2).measurement();
    Scenario::new(
        vec![2],
        CMatrix::diag_real(&[1.0, 0.0]),
        vec![
            Station::new(ea, LocalIntervention::new(0, z)),
            Station::new(eb, LocalIntervention::new(0, x)),
        ],
        vec![],
    )
    .expect("built-in scenario is valid")
}

pub const MAX_RANDOM_STATIONS: usize = 4;

fn random_local<R: Rng>(rng: &mut R, subsystem: usize, d_in: usize) -> LocalIntervention {
    let n_outcomes = rng.random_range(1..=3);
    let outcome_dims: Vec<usize> = (0..n_outcomes).map(|_| rng.random_range(1..=3)).collect();
    LocalIntervention::new(subsystem, random_intervention(d_in, &outcome_dims, rng.random()))
}

/// `n_stations` mutually spacelike stations on distinct subsystems of
/// dimension 2 or 3, random complete interventions (possibly
/// dimension-changing), random pure initial state, no evolutions.
pub fn random_product_scenario(seed: u64, n_stations: usize) -> Scenario {
    assert!(
        (1..=MAX_RANDOM_STATIONS).contains(&n_stations),
        "n_stations must be in 1..={MAX_RANDOM_STATIONS}"
    );
    let mut rng = random::rng(seed);
    let dims: Vec<usize> = (0..n_stations).map(|_| rng.random_range(2..=3)).collect();
    let total = dims.iter().product();
    let psi = random::pure_state(&mut rng, total);
    let stations = (0..n_stations)
        .map(|i| {
            let event = Event::new(format!("S{i}"), rng.random_range(0.0..1.0), 3.0 * i as f64);
            Station::new(event, random_local(&mut rng, i, dims[i]))
        })
        .collect();
    Scenario::new(dims, CMatrix::projector(&psi), stations, vec![]).expect("generated scenario is valid")
}

/// Timelike chain `P -> Q` followed by spacelike `A`, `B` on distinct
/// subsystems. `Q`'s intervention depends on `P`'s outcome, and random
/// unitaries run before `P` and between `P` and `Q` (keyed by `P`'s
/// outcome). Those segments are adjacent in every admissible order, so all
/// orders must agree.
pub fn random_causal_scenario(seed: u64) -> Scenario {
    let mut rng = random::rng(seed);
    let dims = vec![2, rng.random_range(2..=3), 2];
    let total: usize = dims.iter().product();
    let psi = random::pure_state(&mut rng, total);

    // P keeps dimensions so the follow-up unitaries have a definite size
    let p_sub = rng.random_range(0..dims.len());
    let p_iv = random_intervention(dims[p_sub], &[dims[p_sub], dims[p_sub]], rng.random());
    let q_sub = rng.random_range(0..dims.len());
    let q_default = random_local(&mut rng, q_sub, dims[q_sub]);
    let q_alt = random_local(&mut rng, q_sub, dims[q_sub]);

    let mut evolutions = vec![Evolution {
        from: None,
        to: Some("P".into()),
        history: Record::new(),
        unitary: random::unitary(&mut rng, total),
    }];
    for label in p_iv.labels() {
        evolutions.push(Evolution {
            from: Some("P".into()),
            to: Some("Q".into()),
            history: record(&[("P", label)]),
            unitary: random::unitary(&mut rng, total),
        });
    }
    let first_p = p_iv.labels().next().expect("outcome").to_owned();

    // A, B act after Q, so their input dimensions depend on Q's outcome; give
    // them subsystems Q does not touch
    let free: Vec<usize> = (0..dims.len()).filter(|&k| k != q_sub).collect();
    let a = random_local(&mut rng, free[0], dims[free[0]]);
    let b = random_local(&mut rng, free[1], dims[free[1]]);

    let stations = vec![
        Station::new(Event::new("P", -2.0, 0.0), LocalIntervention::new(p_sub, p_iv)),
        Station::new(Event::new("Q", -1.0, 0.0), q_default).with_conditional(record(&[("P", &first_p)]), q_alt),
        Station::new(Event::new("A", 0.0, -0.5), a),
        Station::new(Event::new("B", 0.2, 0.6), b),
    ];
    Scenario::new(dims, CMatrix::projector(&psi), stations, evolutions).expect("generated scenario is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::{check_order_invariance, CERTIFY_TOL};
    use crate::complexmat::GATE_TOL;

    #[test]
    fn analyzer_angle_reduced() {
        let d = AnalyzerDirection::new(-0.5);
        assert!((d.angle() - (TAU - 0.5)).abs() < 1e-15);
        assert!(AnalyzerDirection::new(7.0).angle() < TAU);
    }

    #[test]
    fn equal_angles_anticorrelate() {
        let s = eprb(0.7, 0.7, standard_layout()).unwrap();
        let r = s.evaluate_in_order(&s.rest_order()).unwrap();
        assert!(r.probability_of(&[("A", "+"), ("B", "+")]).abs() < 1e-12);
        assert!(r.probability_of(&[("A", "-"), ("B", "-")]).abs() < 1e-12);
    }

    #[test]
    fn sixty_degrees() {
        let s = eprb(0.0, std::f64::consts::FRAC_PI_3, standard_layout()).unwrap();
        let r = s.evaluate_in_order(&s.rest_order()).unwrap();
        assert!((r.probability_of(&[("A", "+"), ("B", "+")]) - 0.125).abs() < 1e-12);
    }

    #[test]
    fn eprb_rejects_timelike_layout() {
        let layout = (Event::new("A", 0.0, 0.0), Event::new("B", 2.0, 0.0));
        assert!(matches!(eprb(0.0, 0.0, layout), Err(ExperimentError::NotSpacelike(..))));
    }

    #[test]
    fn chsh_degenerate_cases() {
        assert!((chsh((0.3, 0.3), (0.3, 0.3)) - 2.0).abs() < 1e-12);
        let e = correlation(0.2, 1.1);
        assert!((chsh((0.2, 0.2), (1.1, 1.1)) - 2.0 * e.abs()).abs() < 1e-12);
    }

    #[test]
    fn chsh_sign_convention() {
        // with this sign pattern the maximal violation needs b2 = -pi/4
        use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
        assert!(chsh((0.0, FRAC_PI_2), (FRAC_PI_4, 3.0 * FRAC_PI_4)) < 1e-12);
        assert!((chsh((0.0, FRAC_PI_2), (FRAC_PI_4, -FRAC_PI_4)) - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn teleport_kraus_shapes() {
        let t = teleport_intervention(3);
        assert_eq!(t.outcomes().len(), 4);
        for o in t.outcomes() {
            assert_eq!(o.d_out(), 3);
            assert!(o.kraus().iter().all(|k| k.shape() == (3, 2)));
        }
        assert!(t.completeness_defect() < GATE_TOL);
    }

    #[test]
    fn teleport_net_channel_is_the_embedding() {
        for dim in [2, 3, 5] {
            let (v, residual) = summed_channel_isometry(&teleport_intervention(dim));
            assert!(residual < 1e-12);
            assert!(v.isometry_defect() < 1e-12);
            // up to a global phase V is |0><0| + |1><1| into the first levels
            let phase = v[(0, 0)];
            assert!((phase.norm() - 1.0).abs() < 1e-12);
            let mut expected = CMatrix::zeros(dim, 2);
            let mut data = expected.as_slice().to_vec();
            data[0] = phase;
            data[2 + 1] = phase;
            expected = CMatrix::new(dim, 2, data).unwrap();
            assert!(v.max_abs_diff(&expected).unwrap() < 1e-12);
        }
    }

    #[test]
    fn dimension_bookkeeping() {
        let s = dimension_change_scenario();
        let ab = s.evaluate_in_order(&["A".into(), "B".into()]).unwrap();
        let ba = s.evaluate_in_order(&["B".into(), "A".into()]).unwrap();
        assert_eq!(ab.records.len(), 16);
        for r in &ab.records {
            assert_eq!(r.chain_dims, vec![4, 6, 15]);
            assert_eq!(r.dims, vec![3, 5]);
        }
        for r in &ba.records {
            assert_eq!(r.chain_dims, vec![4, 10, 15]);
        }
        assert!(crate::certify::record_spread(&ab, &ba) < 1e-12);
    }

    #[test]
    fn counterexample_values() {
        let s = noncommuting_counterexample();
        let zx = s.evaluate_in_order(&["A".into(), "B".into()]).unwrap();
        let xz = s.evaluate_in_order(&["B".into(), "A".into()]).unwrap();
        assert!((zx.probability_of(&[("A", "+"), ("B", "+")]) - 0.5).abs() < 1e-12);
        assert!((xz.probability_of(&[("A", "+"), ("B", "+")]) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn random_generators_are_deterministic() {
        assert_eq!(random_product_scenario(11, 3), random_product_scenario(11, 3));
        assert_ne!(random_product_scenario(11, 3), random_product_scenario(12, 3));
        assert_eq!(random_causal_scenario(5), random_causal_scenario(5));
    }

    #[test]
    fn random_causal_scenarios_are_invariant() {
        for seed in 0..10 {
            let s = random_causal_scenario(seed);
            let r = check_order_invariance(&s, CERTIFY_TOL).unwrap();
            assert_eq!(r.orders_checked, 2);
            assert!(r.ok, "seed {seed}: {r:?}");
        }
    }

    #[test]
    fn teleported_singlet_keeps_correlations() {
        for (a, b) in [(0.0, 0.0), (0.4, 1.9), (2.5, -0.3)] {
            let s = teleported_eprb(a, b);
            let r = s.evaluate_in_order(&s.rest_order()).unwrap();
            assert!((r.correlation(&["A", "B"]) + (a - b).cos()).abs() < 1e-12);
        }
    }
}
