//! Kraus-operator interventions.
//!
//! An [`Intervention`] maps a `d_in`-dimensional state to one unnormalized
//! branch per outcome: `rho -> sum_m A_m rho A_m^dagger`. Kraus matrices may be
//! rectangular, and each outcome declares its own output dimension, so an
//! intervention can change the size of the system it acts on. A "no click"
//! result is an outcome like any other and must carry its own Kraus set.
//!
//! [`LocalIntervention`] addresses one tensor factor of a composite system;
//! [`LocalIntervention::embed`] lifts it to `I (x) a (x) I` on the whole
//! system, which is what makes interventions on distinct factors commute.

use std::collections::HashSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complexmat::{CMatrix, MatrixError, GATE_TOL};
use crate::random;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InterventionError {
    #[error("intervention has no outcomes")]
    NoOutcomes,
    #[error("outcome `{0}` has no Kraus matrices")]
    EmptyKraus(String),
    #[error("duplicate outcome label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown outcome label `{0}`")]
    UnknownLabel(String),
    #[error("dimensions must be positive")]
    ZeroDimension,
    #[error("outcome `{label}` Kraus matrix {index} is {got:?}, expected {expected:?} (d_out x d_in)")]
    KrausShape {
        label: String,
        index: usize,
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("completeness violated: sum of A^dagger A deviates from the identity by {defect:.3e}")]
    Incomplete { defect: f64 },
    #[error("state is {got}x{got} but the intervention expects input dimension {expected}")]
    InputDim { expected: usize, got: usize },
    #[error("state is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),
    #[error("subsystem index {index} out of range for {n} factors")]
    Subsystem { index: usize, n: usize },
    #[error("subsystem {index} has dimension {actual}, intervention expects {expected}")]
    FactorDim {
        index: usize,
        expected: usize,
        actual: usize,
    },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

pub type Result<T> = std::result::Result<T, InterventionError>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    label: String,
    d_out: usize,
    kraus: Vec<CMatrix>,
}

impl Outcome {
    pub fn new(label: impl Into<String>, d_out: usize, kraus: Vec<CMatrix>) -> Self {
        Self {
            label: label.into(),
            d_out,
            kraus,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }
}

/// Outcome-labelled Kraus sets sharing one input dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawIntervention")]
pub struct Intervention {
    d_in: usize,
    outcomes: Vec<Outcome>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutcome {
    label: String,
    d_out: usize,
    kraus: Vec<CMatrix>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntervention {
    d_in: usize,
    outcomes: Vec<RawOutcome>,
}

impl TryFrom<RawIntervention> for Intervention {
    type Error = InterventionError;

    fn try_from(raw: RawIntervention) -> Result<Self> {
        let outcomes = raw
            .outcomes
            .into_iter()
            .map(|o| Outcome::new(o.label, o.d_out, o.kraus))
            .collect();
        Intervention::new(raw.d_in, outcomes)
    }
}

impl Intervention {
    /// Validates shapes, labels and completeness (to [`GATE_TOL`]).
    pub fn new(d_in: usize, outcomes: Vec<Outcome>) -> Result<Self> {
        let iv = Self::new_unchecked(d_in, outcomes)?;
        let defect = iv.completeness_defect();
        if defect > GATE_TOL {
            return Err(InterventionError::Incomplete { defect });
        }
        Ok(iv)
    }

    /// Validates shapes and labels but not completeness.
    pub fn new_unchecked(d_in: usize, outcomes: Vec<Outcome>) -> Result<Self> {
        if d_in == 0 {
            return Err(InterventionError::ZeroDimension);
        }
        if outcomes.is_empty() {
            return Err(InterventionError::NoOutcomes);
        }
        let mut seen = HashSet::new();
        for o in &outcomes {
            if !seen.insert(o.label.as_str()) {
                return Err(InterventionError::DuplicateLabel(o.label.clone()));
            }
            if o.d_out == 0 {
                return Err(InterventionError::ZeroDimension);
            }
            if o.kraus.is_empty() {
                return Err(InterventionError::EmptyKraus(o.label.clone()));
            }
            for (index, k) in o.kraus.iter().enumerate() {
                if k.shape() != (o.d_out, d_in) {
                    return Err(InterventionError::KrausShape {
                        label: o.label.clone(),
                        index,
                        expected: (o.d_out, d_in),
                        got: k.shape(),
                    });
                }
            }
        }
        Ok(Self { d_in, outcomes })
    }

    /// Single outcome `label` with Kraus matrix `I`.
    pub fn identity(d: usize, label: &str) -> Self {
        Self::new(d, vec![Outcome::new(label, d, vec![CMatrix::identity(d)])]).expect("identity is complete")
    }

    /// One Kraus matrix per outcome, each a `d x d` operator (typically a projector).
    pub fn projective(d: usize, branches: Vec<(&str, CMatrix)>) -> Result<Self> {
        let outcomes = branches.into_iter().map(|(l, p)| Outcome::new(l, d, vec![p])).collect();
        Self::new(d, outcomes)
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.outcomes.iter().map(|o| o.label.as_str())
    }

    pub fn outcome(&self, label: &str) -> Result<&Outcome> {
        self.outcomes
            .iter()
            .find(|o| o.label == label)
            .ok_or_else(|| InterventionError::UnknownLabel(label.to_owned()))
    }

    /// POVM elements `E_mu = sum_m A_m^dagger A_m`.
    pub fn povm_elements(&self) -> Vec<(String, CMatrix)> {
        self.outcomes
            .iter()
            .map(|o| {
                let mut e = CMatrix::zeros(self.d_in, self.d_in);
                for k in &o.kraus {
                    e.add_assign(&k.dagger().matmul(k).expect("kraus shape"))
                        .expect("povm shape");
                }
                (o.label.clone(), e)
            })
            .collect()
    }

    /// Largest entrywise deviation of `sum_mu E_mu` from the identity.
    pub fn completeness_defect(&self) -> f64 {
        let mut total = CMatrix::zeros(self.d_in, self.d_in);
        for (_, e) in self.povm_elements() {
            total.add_assign(&e).expect("povm shape");
        }
        total
            .max_abs_diff(&CMatrix::identity(self.d_in))
            .expect("identity shape")
    }

    /// Unnormalized post-intervention state for outcome `label`; its trace is
    /// the probability of that outcome.
    pub fn apply(&self, rho: &CMatrix, label: &str) -> Result<CMatrix> {
        let outcome = self.outcome(label)?;
        if !rho.is_square() || rho.rows() != self.d_in {
            return Err(InterventionError::InputDim {
                expected: self.d_in,
                got: rho.rows(),
            });
        }
        let defect = rho.hermiticity_defect();
        if defect > GATE_TOL {
            return Err(InterventionError::NotHermitian(defect));
        }
        Ok(apply_kraus(outcome.kraus(), rho)?)
    }
}

/// `sum_m K_m rho K_m^dagger` without any validation beyond shapes.
pub(crate) fn apply_kraus(kraus: &[CMatrix], rho: &CMatrix) -> std::result::Result<CMatrix, MatrixError> {
    let mut out: Option<CMatrix> = None;
    for k in kraus {
        let term = k.sandwich(rho)?;
        match out.as_mut() {
            Some(acc) => acc.add_assign(&term)?,
            None => out = Some(term),
        }
    }
    Ok(out.expect("non-empty Kraus set"))
}

/// `sum_m (I (x) K_m (x) I) rho (I (x) K_m (x) I)^dagger` computed factor-wise,
/// never materializing the embedded operators. `dims[subsystem]` must equal
/// the Kraus column count.
pub(crate) fn apply_local_kraus(kraus: &[CMatrix], rho: &CMatrix, dims: &[usize], subsystem: usize) -> CMatrix {
    let before: usize = dims[..subsystem].iter().product();
    let after: usize = dims[subsystem + 1..].iter().product();
    let (d_out, d_in) = kraus[0].shape();
    debug_assert_eq!(d_in, dims[subsystem]);
    let n_in = before * d_in * after;
    let n_out = before * d_out * after;
    debug_assert_eq!(rho.rows(), n_in);
    let rho = rho.as_slice();
    let zero = Complex64::new(0.0, 0.0);

    let mut acc = vec![zero; n_out * n_out];
    let mut left = vec![zero; n_out * n_in];
    for k in kraus {
        let k = k.as_slice();
        // left = (I (x) K (x) I) rho
        left.iter_mut().for_each(|z| *z = zero);
        for p in 0..before {
            for r in 0..d_out {
                let row_out = (p * d_out + r) * after;
                for s in 0..d_in {
                    let c = k[r * d_in + s];
                    if c.re == 0.0 && c.im == 0.0 {
                        continue;
                    }
                    let row_in = (p * d_in + s) * after;
                    for q in 0..after {
                        let dst = &mut left[(row_out + q) * n_in..(row_out + q + 1) * n_in];
                        let src = &rho[(row_in + q) * n_in..(row_in + q + 1) * n_in];
                        for (d, x) in dst.iter_mut().zip(src) {
                            *d += c * x;
                        }
                    }
                }
            }
        }
        // acc += left (I (x) K (x) I)^dagger
        for i in 0..n_out {
            let lrow = &left[i * n_in..(i + 1) * n_in];
            let arow = &mut acc[i * n_out..(i + 1) * n_out];
            for p in 0..before {
                for r in 0..d_out {
                    let col_out = (p * d_out + r) * after;
                    for s in 0..d_in {
                        let c = k[r * d_in + s].conj();
                        if c.re == 0.0 && c.im == 0.0 {
                            continue;
                        }
                        let col_in = (p * d_in + s) * after;
                        for q in 0..after {
                            arow[col_out + q] += lrow[col_in + q] * c;
                        }
                    }
                }
            }
        }
    }
    CMatrix::new(n_out, n_out, acc).expect("finite product")
}

/// An intervention addressing one tensor factor of a composite system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalIntervention {
    pub subsystem: usize,
    #[serde(rename = "intervention")]
    pub local: Intervention,
}

impl LocalIntervention {
    pub fn new(subsystem: usize, local: Intervention) -> Self {
        Self { subsystem, local }
    }

    fn check(&self, dims: &[usize]) -> Result<()> {
        let actual = *dims.get(self.subsystem).ok_or(InterventionError::Subsystem {
            index: self.subsystem,
            n: dims.len(),
        })?;
        if actual != self.local.d_in {
            return Err(InterventionError::FactorDim {
                index: self.subsystem,
                expected: self.local.d_in,
                actual,
            });
        }
        Ok(())
    }

    /// Lift every local Kraus matrix `a` to `I_before (x) a (x) I_after`.
    pub fn embed(&self, dims: &[usize]) -> Result<Intervention> {
        self.check(dims)?;
        let before: usize = dims[..self.subsystem].iter().product();
        let after: usize = dims[self.subsystem + 1..].iter().product();
        let id_before = CMatrix::identity(before);
        let id_after = CMatrix::identity(after);
        let outcomes = self
            .local
            .outcomes
            .iter()
            .map(|o| {
                let kraus = o.kraus.iter().map(|a| id_before.kron(a).kron(&id_after)).collect();
                Outcome::new(o.label.clone(), before * o.d_out * after, kraus)
            })
            .collect();
        // completeness of I (x) E (x) I follows from that of E
        Intervention::new_unchecked(before * self.local.d_in * after, outcomes)
    }

    /// Factor dimensions after outcome `label` fires.
    pub fn output_dims(&self, dims: &[usize], label: &str) -> Result<Vec<usize>> {
        self.check(dims)?;
        let mut out = dims.to_vec();
        out[self.subsystem] = self.local.outcome(label)?.d_out;
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutationReport {
    pub ok: bool,
    pub worst: f64,
}

/// Pairwise commutation of two operator sets at a common dimension.
pub fn commutes(a_set: &[CMatrix], b_set: &[CMatrix], tol: f64) -> Result<CommutationReport> {
    let mut worst: f64 = 0.0;
    for a in a_set {
        for b in b_set {
            if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
                return Err(MatrixError::Shape {
                    op: "commutes",
                    lhs: a.shape(),
                    rhs: b.shape(),
                }
                .into());
            }
            worst = worst.max(a.matmul(b)?.max_abs_diff(&b.matmul(a)?)?);
        }
    }
    Ok(CommutationReport {
        ok: worst <= tol,
        worst,
    })
}

/// All Kraus matrices of an intervention, outcome by outcome.
pub fn all_kraus(iv: &Intervention) -> Vec<CMatrix> {
    iv.outcomes.iter().flat_map(|o| o.kraus.iter().cloned()).collect()
}

/// Random complete intervention with one outcome per entry of `outcome_dims`.
///
/// Each outcome gets `ceil(d_in / sum(outcome_dims))` Kraus matrices so the
/// stacked blocks have enough rows to form an isometry.
pub fn random_intervention(d_in: usize, outcome_dims: &[usize], seed: u64) -> Intervention {
    let total: usize = outcome_dims.iter().sum();
    let per = d_in.div_ceil(total.max(1)).max(1);
    let shapes: Vec<(usize, usize)> = outcome_dims.iter().map(|&d| (d, per)).collect();
    random_intervention_with(d_in, &shapes, seed)
}

/// Random complete intervention from `(d_out, kraus_count)` per outcome.
///
/// A random isometry from `d_in` into the direct sum of all Kraus output
/// spaces is sliced into row blocks; completeness holds by construction.
pub fn random_intervention_with(d_in: usize, shapes: &[(usize, usize)], seed: u64) -> Intervention {
    assert!(d_in > 0 && !shapes.is_empty(), "need d_in > 0 and at least one outcome");
    let rows: usize = shapes.iter().map(|&(d, n)| d * n).sum();
    assert!(
        rows >= d_in,
        "Kraus blocks provide {rows} rows, need at least d_in = {d_in}"
    );
    let v = random::isometry(&mut random::rng(seed), rows, d_in);
    let mut next = 0;
    let outcomes = shapes
        .iter()
        .enumerate()
        .map(|(i, &(d_out, n))| {
            let kraus = (0..n)
                .map(|_| {
                    let data: Vec<Complex64> = (next..next + d_out).flat_map(|r| v.row(r).iter().copied()).collect();
                    next += d_out;
                    CMatrix::new(d_out, d_in, data).expect("block shape")
                })
                .collect();
            Outcome::new(i.to_string(), d_out, kraus)
        })
        .collect();
    Intervention::new(d_in, outcomes).expect("isometry blocks are complete")
}
