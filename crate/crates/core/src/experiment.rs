//! Scenarios and the chain evaluator.
//!
//! A [`Scenario`] places local interventions ([`Station`]s) at spacetime
//! events. Given a chronological order of the stations,
//! [`Scenario::evaluate_in_order`] enumerates every record and computes the
//! unnormalized final state
//!
//! ```text
//! rho_f = sum over Kraus tuples of K rho_0 K^dagger,
//! K = U_{end,N} A_N ... U_{2,1} A_1 U_{1,start}
//! ```
//!
//! whose trace is the joint probability of that record. Inter-station
//! evolutions are looked up by segment and by the outcomes recorded so far.
//!
//! The certifiers built on top of it live in [`crate::certify`].

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::complexmat::{CMatrix, MatrixError, FIXTURE_TOL, GATE_TOL};
use crate::intervention::{apply_local_kraus, InterventionError, LocalIntervention};
use crate::spacetime::{
    causal_order, frame_ordering, CausalOrder, Event, Frame, FrameOrdering, SpacetimeError, TieReport,
};

/// Outcome label per station id.
pub type Record = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("initial state: {0}")]
    InitialState(String),
    #[error("unknown station `{0}`")]
    UnknownStation(String),
    #[error("station `{station}`: {source}")]
    Station {
        station: String,
        #[source]
        source: InterventionError,
    },
    #[error("station `{station}` conditions on `{on}`, which is not in its causal past")]
    NonCausalCondition { station: String, on: String },
    #[error("station `{station}`: {count} conditional interventions match record {record:?}")]
    AmbiguousCondition {
        station: String,
        count: usize,
        record: Record,
    },
    #[error("evolution {segment}: {reason}")]
    Evolution { segment: String, reason: String },
    #[error("ordering {order:?} is not a permutation of the stations consistent with their causal order")]
    InvalidOrder { order: Vec<String> },
    #[error("frame ordering is ambiguous: events share a boosted time")]
    Tie(TieReport),
    #[error("stations `{0}` and `{1}` are not spacelike separated")]
    NotSpacelike(String, String),
    #[error("{0}")]
    Precondition(String),
    #[error(transparent)]
    Spacetime(#[from] SpacetimeError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

/// An intervention used instead of the default when earlier outcomes match `history`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conditional {
    pub history: Record,
    pub local: LocalIntervention,
}

/// A local intervention at one spacetime event.
#[derive(Debug, Clone, PartialEq)]
pub struct Station {
    pub event: Event,
    pub local: LocalIntervention,
    pub conditional: Vec<Conditional>,
}

impl Station {
    pub fn new(event: Event, local: LocalIntervention) -> Self {
        Self {
            event,
            local,
            conditional: Vec::new(),
        }
    }

    /// Use `local` instead of the default whenever the record so far agrees with `history`.
    pub fn with_conditional(mut self, history: Record, local: LocalIntervention) -> Self {
        self.conditional.push(Conditional { history, local });
        self
    }

    pub fn id(&self) -> &str {
        &self.event.id
    }

    fn select(&self, record: &Record) -> Result<&LocalIntervention> {
        let hits: Vec<_> = self
            .conditional
            .iter()
            .filter(|c| history_matches(&c.history, record))
            .collect();
        match hits.len() {
            0 => Ok(&self.local),
            1 => Ok(&hits[0].local),
            count => Err(ExperimentError::AmbiguousCondition {
                station: self.id().to_owned(),
                count,
                record: record.clone(),
            }),
        }
    }
}

fn history_matches(history: &Record, record: &Record) -> bool {
    history.iter().all(|(k, v)| record.get(k) == Some(v))
}

/// Unitary evolution over the segment between two consecutive stations.
///
/// `from == None` is the preparation time, `to == None` the final time.
#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub from: Option<String>,
    pub to: Option<String>,
    pub history: Record,
    pub unitary: CMatrix,
}

impl Evolution {
    pub fn segment(&self) -> String {
        segment_name(self.from.as_deref(), self.to.as_deref())
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.unitary
            .max_abs_diff(&CMatrix::identity(self.unitary.rows()))
            .is_ok_and(|d| d <= tol)
    }
}

fn segment_name(from: Option<&str>, to: Option<&str>) -> String {
    format!("{} -> {}", from.unwrap_or("start"), to.unwrap_or("end"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    dims0: Vec<usize>,
    rho0: CMatrix,
    stations: Vec<Station>,
    evolutions: Vec<Evolution>,
    causal: CausalOrder,
}

impl Scenario {
    pub fn new(dims0: Vec<usize>, rho0: CMatrix, stations: Vec<Station>, evolutions: Vec<Evolution>) -> Result<Self> {
        if dims0.is_empty() || dims0.contains(&0) {
            return Err(ExperimentError::InitialState(format!(
                "dimensions {dims0:?} must be a non-empty list of positive integers"
            )));
        }
        let total: usize = dims0.iter().product();
        if rho0.shape() != (total, total) {
            return Err(ExperimentError::InitialState(format!(
                "rho0 is {:?}, dimensions {dims0:?} require {total}x{total}",
                rho0.shape()
            )));
        }
        let tr = rho0.trace()?;
        if (tr - Complex64::new(1.0, 0.0)).norm() > FIXTURE_TOL {
            return Err(ExperimentError::InitialState(format!("rho0 trace is {tr}, expected 1")));
        }
        let herm = rho0.hermiticity_defect();
        if herm > FIXTURE_TOL {
            return Err(ExperimentError::InitialState(format!(
                "rho0 is not Hermitian (defect {herm:.3e})"
            )));
        }
        let events: Vec<Event> = stations.iter().map(|s| s.event.clone()).collect();
        let causal = causal_order(&events)?;

        let known = |id: &str| stations.iter().any(|s| s.id() == id);
        for s in &stations {
            for c in &s.conditional {
                for on in c.history.keys() {
                    if !known(on) {
                        return Err(ExperimentError::UnknownStation(on.clone()));
                    }
                    if !causal.precedes(on, s.id()) {
                        return Err(ExperimentError::NonCausalCondition {
                            station: s.id().to_owned(),
                            on: on.clone(),
                        });
                    }
                }
            }
        }

        for e in &evolutions {
            let fail = |reason: String| ExperimentError::Evolution {
                segment: e.segment(),
                reason,
            };
            for id in e.from.iter().chain(e.to.iter()) {
                if !known(id) {
                    return Err(fail(format!("unknown station `{id}`")));
                }
            }
            if let (Some(a), Some(b)) = (&e.from, &e.to) {
                if a == b || causal.precedes(b, a) {
                    return Err(fail("segment runs backwards in causal order".into()));
                }
            }
            for on in e.history.keys() {
                let available = match &e.from {
                    Some(f) => on == f || causal.precedes(on, f),
                    None => false,
                };
                if !available {
                    return Err(fail(format!(
                        "history refers to `{on}`, which has not necessarily fired by this segment"
                    )));
                }
            }
            if !e.unitary.is_square() {
                return Err(fail(format!("matrix is {:?}, not square", e.unitary.shape())));
            }
            let defect = e.unitary.isometry_defect();
            if defect > GATE_TOL {
                return Err(fail(format!("matrix is not unitary (defect {defect:.3e})")));
            }
        }

        Ok(Self {
            dims0,
            rho0,
            stations,
            evolutions,
            causal,
        })
    }

    pub fn dims0(&self) -> &[usize] {
        &self.dims0
    }

    pub fn rho0(&self) -> &CMatrix {
        &self.rho0
    }

    pub fn stations(&self) -> &[Station] {
        &self.stations
    }

    pub fn evolutions(&self) -> &[Evolution] {
        &self.evolutions
    }

    pub fn causal_order(&self) -> &CausalOrder {
        &self.causal
    }

    pub fn events(&self) -> Vec<Event> {
        self.stations.iter().map(|s| s.event.clone()).collect()
    }

    pub fn station(&self, id: &str) -> Result<&Station> {
        self.stations
            .iter()
            .find(|s| s.id() == id)
            .ok_or_else(|| ExperimentError::UnknownStation(id.to_owned()))
    }

    /// Copy with station `id` performing `local` unconditionally.
    pub fn with_station_intervention(&self, id: &str, local: LocalIntervention) -> Result<Scenario> {
        let mut next = self.clone();
        let st = next
            .stations
            .iter_mut()
            .find(|s| s.id() == id)
            .ok_or_else(|| ExperimentError::UnknownStation(id.to_owned()))?;
        st.local = local;
        st.conditional.clear();
        Ok(next)
    }

    /// Chronological order in the reference frame (always admissible).
    pub fn rest_order(&self) -> Vec<String> {
        crate::spacetime::rest_frame_order(&self.events())
    }

    fn evolution(&self, from: Option<&str>, to: Option<&str>, record: &Record) -> Result<Option<&CMatrix>> {
        let hits: Vec<&Evolution> = self
            .evolutions
            .iter()
            .filter(|e| e.from.as_deref() == from && e.to.as_deref() == to)
            .filter(|e| history_matches(&e.history, record))
            .collect();
        match hits.len() {
            0 => Ok(None),
            1 => Ok(Some(&hits[0].unitary)),
            n => Err(ExperimentError::Evolution {
                segment: segment_name(from, to),
                reason: format!("{n} entries match record {record:?}"),
            }),
        }
    }

    /// Enumerate every record under the chronological `order`.
    pub fn evaluate_in_order(&self, order: &[String]) -> Result<EvaluationResult> {
        if !self.causal.admits(order) {
            return Err(ExperimentError::InvalidOrder { order: order.to_vec() });
        }
        let stations: Vec<&Station> = order.iter().map(|id| self.station(id)).collect::<Result<_>>()?;
        let mut records = Vec::new();
        let start = Branch {
            rho: self.rho0.clone(),
            dims: self.dims0.clone(),
            record: Record::new(),
            chain_dims: vec![self.rho0.rows()],
        };
        self.descend(&stations, 0, start, true, &mut records)?;
        Ok(EvaluationResult {
            ordering: order.to_vec(),
            records,
        })
    }

    /// Evaluate in the chronological order seen from `frame`.
    pub fn evaluate_in_frame(&self, frame: Frame) -> Result<EvaluationResult> {
        match frame_ordering(&self.events(), frame) {
            FrameOrdering::Total(order) => self.evaluate_in_order(&order),
            FrameOrdering::Tie(report) => Err(ExperimentError::Tie(report)),
        }
    }

    /// Branch states right after station `cut`, one per outcome history of
    /// the stations up to and including it.
    ///
    /// Only defined when every other station is causally before or after
    /// `cut`, so that the prefix of the chain is the same in every frame.
    /// Experimental.
    pub fn state_at_cut(&self, cut: &str) -> Result<Vec<RecordResult>> {
        self.station(cut)?;
        let mut prefix = Vec::new();
        for s in &self.stations {
            let id = s.id();
            if id != cut && self.causal.unordered(id, cut) {
                return Err(ExperimentError::Precondition(format!(
                    "station `{id}` is spacelike to `{cut}`; no frame-independent state exists there"
                )));
            }
        }
        for id in self.rest_order() {
            if id == cut || self.causal.precedes(&id, cut) {
                prefix.push(self.station(&id)?);
            }
        }
        let mut records = Vec::new();
        let start = Branch {
            rho: self.rho0.clone(),
            dims: self.dims0.clone(),
            record: Record::new(),
            chain_dims: vec![self.rho0.rows()],
        };
        self.descend(&prefix, 0, start, false, &mut records)?;
        Ok(records)
    }

    fn descend(
        &self,
        order: &[&Station],
        pos: usize,
        mut branch: Branch,
        close: bool,
        out: &mut Vec<RecordResult>,
    ) -> Result<()> {
        let prev = pos.checked_sub(1).map(|p| order[p].id());
        let Some(station) = order.get(pos) else {
            if close {
                self.evolve(&mut branch, prev, None)?;
            }
            out.push(branch.finish());
            return Ok(());
        };
        self.evolve(&mut branch, prev, Some(station.id()))?;

        let local = station.select(&branch.record)?;
        let at_station = |source| ExperimentError::Station {
            station: station.id().to_owned(),
            source,
        };
        // validates subsystem index and factor dimension
        local
            .output_dims(&branch.dims, local.local.labels().next().unwrap_or_default())
            .map_err(at_station)?;
        for outcome in local.local.outcomes() {
            let rho = apply_local_kraus(outcome.kraus(), &branch.rho, &branch.dims, local.subsystem);
            let mut dims = branch.dims.clone();
            dims[local.subsystem] = outcome.d_out();
            let mut record = branch.record.clone();
            record.insert(station.id().to_owned(), outcome.label().to_owned());
            let mut chain_dims = branch.chain_dims.clone();
            chain_dims.push(rho.rows());
            let next = Branch {
                rho,
                dims,
                record,
                chain_dims,
            };
            self.descend(order, pos + 1, next, close, out)?;
        }
        Ok(())
    }

    fn evolve(&self, branch: &mut Branch, from: Option<&str>, to: Option<&str>) -> Result<()> {
        if let Some(u) = self.evolution(from, to, &branch.record)? {
            if u.rows() != branch.rho.rows() {
                return Err(ExperimentError::Evolution {
                    segment: segment_name(from, to),
                    reason: format!(
                        "unitary is {}x{} but the state there is {}-dimensional",
                        u.rows(),
                        u.cols(),
                        branch.rho.rows()
                    ),
                });
            }
            branch.rho = u.sandwich(&branch.rho)?;
        }
        Ok(())
    }
}

struct Branch {
    rho: CMatrix,
    dims: Vec<usize>,
    record: Record,
    chain_dims: Vec<usize>,
}

impl Branch {
    fn finish(self) -> RecordResult {
        RecordResult {
            probability: self.rho.trace().expect("square state").re,
            outcomes: self.record,
            state: self.rho,
            dims: self.dims,
            chain_dims: self.chain_dims,
        }
    }
}

/// One record of an evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordResult {
    pub outcomes: Record,
    pub probability: f64,
    /// Unnormalized final state; its trace is `probability`.
    pub state: CMatrix,
    /// Factor dimensions of the final state.
    pub dims: Vec<usize>,
    /// Total state dimension before the first station and after each station.
    pub chain_dims: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationResult {
    pub ordering: Vec<String>,
    pub records: Vec<RecordResult>,
}

impl EvaluationResult {
    pub fn total_probability(&self) -> f64 {
        self.records.iter().map(|r| r.probability).sum()
    }

    pub fn get(&self, record: &Record) -> Option<&RecordResult> {
        self.records.iter().find(|r| &r.outcomes == record)
    }

    /// Probability of `record`; zero if it never occurs.
    pub fn probability(&self, record: &Record) -> f64 {
        self.get(record).map_or(0.0, |r| r.probability)
    }

    /// Probability of a record given as `(station, label)` pairs.
    pub fn probability_of(&self, pairs: &[(&str, &str)]) -> f64 {
        self.probability(&record(pairs))
    }

    /// Outcome distribution of one station, summed over all other outcomes.
    pub fn marginal(&self, station: &str) -> Result<BTreeMap<String, f64>> {
        if !self.ordering.iter().any(|s| s == station) {
            return Err(ExperimentError::UnknownStation(station.to_owned()));
        }
        let mut out = BTreeMap::new();
        for r in &self.records {
            *out.entry(r.outcomes[station].clone()).or_insert(0.0) += r.probability;
        }
        Ok(out)
    }

    /// `sum_records p * prod_stations sign(label)` for `+`/`-` labelled stations.
    pub fn correlation(&self, stations: &[&str]) -> f64 {
        self.records
            .iter()
            .map(|r| {
                let sign: f64 = stations
                    .iter()
                    .map(|s| match r.outcomes.get(*s).map(String::as_str) {
                        Some("+") => 1.0,
                        Some("-") => -1.0,
                        _ => 0.0,
                    })
                    .product();
                sign * r.probability
            })
            .sum()
    }

    /// JSON view: `{"ordering": [...], "records": [{"outcomes": {...}, "probability": p}]}`.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Rec<'a> {
            outcomes: &'a Record,
            probability: f64,
        }
        #[derive(Serialize)]
        struct View<'a> {
            ordering: &'a [String],
            records: Vec<Rec<'a>>,
        }
        serde_json::to_value(View {
            ordering: &self.ordering,
            records: self
                .records
                .iter()
                .map(|r| Rec {
                    outcomes: &r.outcomes,
                    probability: r.probability,
                })
                .collect(),
        })
        .expect("serializable")
    }
}

/// Build a [`Record`] from `(station, label)` pairs.
pub fn record(pairs: &[(&str, &str)]) -> Record {
    pairs.iter().map(|(s, l)| (s.to_string(), l.to_string())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intervention::Intervention;
    use crate::random;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

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

    fn singlet() -> CMatrix {
        CMatrix::projector(&[c(0.0), c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2), c(0.0)])
    }

    fn zz_singlet() -> Scenario {
        Scenario::new(
            vec![2, 2],
            singlet(),
            vec![
                Station::new(Event::new("A", 0.0, 1.0), LocalIntervention::new(0, sz())),
                Station::new(Event::new("B", 0.5, -1.0), LocalIntervention::new(1, sz())),
            ],
            vec![],
        )
        .unwrap()
    }

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    /// Brute-force joint probability: Tr[(P_a (x) P_b) rho] with explicit 4x4 matrices.
    fn brute_joint(rho: &CMatrix, pa: &CMatrix, pb: &CMatrix) -> f64 {
        let p = pa.kron(pb);
        let mut tr = Complex64::new(0.0, 0.0);
        for i in 0..4 {
            for k in 0..4 {
                tr += p[(i, k)] * rho[(k, i)];
            }
        }
        tr.re
    }

    #[test]
    fn single_identity_station() {
        let rho = random::mixed_state(&mut random::rng(4), 3, 3);
        let s = Scenario::new(
            vec![3],
            rho.clone(),
            vec![Station::new(
                Event::new("only", 0.0, 0.0),
                LocalIntervention::new(0, Intervention::identity(3, "done")),
            )],
            vec![],
        )
        .unwrap();
        let r = s.evaluate_in_order(&ids(&["only"])).unwrap();
        assert_eq!(r.records.len(), 1);
        assert!((r.records[0].probability - 1.0).abs() < 1e-12);
        assert!(r.records[0].state.max_abs_diff(&rho).unwrap() < 1e-12);
        assert_eq!(r.marginal("only").unwrap()["done"], r.records[0].probability);
    }

    #[test]
    fn singlet_zz_matches_brute_force() {
        let s = zz_singlet();
        let p = [CMatrix::diag_real(&[1.0, 0.0]), CMatrix::diag_real(&[0.0, 1.0])];
        let frozen = [[0.0, 0.5], [0.5, 0.0]];
        for order in [ids(&["A", "B"]), ids(&["B", "A"])] {
            let r = s.evaluate_in_order(&order).unwrap();
            assert_eq!(r.records.len(), 4);
            for (i, la) in ["+", "-"].iter().enumerate() {
                for (j, lb) in ["+", "-"].iter().enumerate() {
                    let brute = brute_joint(&singlet(), &p[i], &p[j]);
                    assert!((brute - frozen[i][j]).abs() < 1e-12);
                    let got = r.probability_of(&[("A", la), ("B", lb)]);
                    assert!((got - brute).abs() < 1e-12, "{la}{lb}");
                }
            }
            assert!((r.total_probability() - 1.0).abs() < 1e-12);
            let m = r.marginal("B").unwrap();
            assert!((m["+"] - 0.5).abs() < 1e-12 && (m["-"] - 0.5).abs() < 1e-12);
            assert!(matches!(r.marginal("C"), Err(ExperimentError::UnknownStation(_))));
        }
    }

    #[test]
    fn frame_evaluation_follows_boost() {
        let s = zz_singlet();
        let rest = s.evaluate_in_frame(Frame::REST).unwrap();
        let moving = s.evaluate_in_frame(Frame::new(-0.6).unwrap()).unwrap();
        assert_eq!(rest.ordering, ids(&["A", "B"]));
        assert_eq!(moving.ordering, ids(&["B", "A"]));
        assert_eq!(moving, s.evaluate_in_order(&ids(&["B", "A"])).unwrap());
        for r in &rest.records {
            let other = moving.get(&r.outcomes).unwrap();
            assert!((r.probability - other.probability).abs() < 1e-12);
            assert!(r.state.max_abs_diff(&other.state).unwrap() < 1e-12);
        }
    }

    #[test]
    fn tie_is_propagated() {
        let s = Scenario::new(
            vec![2, 2],
            singlet(),
            vec![
                Station::new(Event::new("A", 0.0, 1.0), LocalIntervention::new(0, sz())),
                Station::new(Event::new("B", 0.0, -1.0), LocalIntervention::new(1, sz())),
            ],
            vec![],
        )
        .unwrap();
        assert!(matches!(s.evaluate_in_frame(Frame::REST), Err(ExperimentError::Tie(_))));
    }

    #[test]
    fn causal_violation_rejected() {
        let s = Scenario::new(
            vec![2],
            CMatrix::diag_real(&[1.0, 0.0]),
            vec![
                Station::new(Event::new("P", 0.0, 0.0), LocalIntervention::new(0, sz())),
                Station::new(Event::new("Q", 1.0, 0.0), LocalIntervention::new(0, sz())),
            ],
            vec![],
        )
        .unwrap();
        assert!(s.evaluate_in_order(&ids(&["P", "Q"])).is_ok());
        assert!(matches!(
            s.evaluate_in_order(&ids(&["Q", "P"])),
            Err(ExperimentError::InvalidOrder { .. })
        ));
        assert!(s.evaluate_in_order(&ids(&["P"])).is_err());
    }

    #[test]
    fn dimension_mismatch_names_station() {
        let grow = Intervention::new(
            2,
            vec![crate::intervention::Outcome::new(
                "up",
                3,
                vec![CMatrix::from_real(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]]).unwrap()],
            )],
        )
        .unwrap();
        let s = Scenario::new(
            vec![2],
            CMatrix::diag_real(&[1.0, 0.0]),
            vec![
                Station::new(Event::new("P", 0.0, 0.0), LocalIntervention::new(0, grow)),
                Station::new(Event::new("Q", 1.0, 0.0), LocalIntervention::new(0, sz())),
            ],
            vec![],
        )
        .unwrap();
        let err = s.evaluate_in_order(&ids(&["P", "Q"])).unwrap_err();
        match err {
            ExperimentError::Station { station, .. } => assert_eq!(station, "Q"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn evolutions_keyed_by_history() {
        // P measures z on |0>; before Q, flip the qubit only if P saw "+"
        let x = CMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let s = Scenario::new(
            vec![2],
            CMatrix::diag_real(&[1.0, 0.0]),
            vec![
                Station::new(Event::new("P", 0.0, 0.0), LocalIntervention::new(0, sz())),
                Station::new(Event::new("Q", 1.0, 0.0), LocalIntervention::new(0, sz())),
            ],
            vec![Evolution {
                from: Some("P".into()),
                to: Some("Q".into()),
                history: record(&[("P", "+")]),
                unitary: x,
            }],
        )
        .unwrap();
        let r = s.evaluate_in_order(&ids(&["P", "Q"])).unwrap();
        assert!((r.probability_of(&[("P", "+"), ("Q", "-")]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conditional_interventions() {
        let flip = Intervention::new(
            2,
            vec![crate::intervention::Outcome::new(
                "flipped",
                2,
                vec![CMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()],
            )],
        )
        .unwrap();
        let s = Scenario::new(
            vec![2],
            CMatrix::diag_real(&[1.0, 0.0]),
            vec![
                Station::new(Event::new("P", 0.0, 0.0), LocalIntervention::new(0, sz())),
                Station::new(
                    Event::new("Q", 1.0, 0.0),
                    LocalIntervention::new(0, Intervention::identity(2, "kept")),
                )
                .with_conditional(record(&[("P", "+")]), LocalIntervention::new(0, flip.clone())),
                Station::new(Event::new("R", 2.0, 0.0), LocalIntervention::new(0, sz())),
            ],
            vec![],
        )
        .unwrap();
        let r = s.evaluate_in_order(&ids(&["P", "Q", "R"])).unwrap();
        assert!((r.probability_of(&[("P", "+"), ("Q", "flipped"), ("R", "-")]) - 1.0).abs() < 1e-12);

        let spacelike = Scenario::new(
            vec![2],
            CMatrix::diag_real(&[1.0, 0.0]),
            vec![
                Station::new(Event::new("P", 0.0, 0.0), LocalIntervention::new(0, sz())),
                Station::new(Event::new("Q", 0.0, 5.0), LocalIntervention::new(0, sz()))
                    .with_conditional(record(&[("P", "+")]), LocalIntervention::new(0, flip)),
            ],
            vec![],
        );
        assert!(matches!(spacelike, Err(ExperimentError::NonCausalCondition { .. })));
    }

    #[test]
    fn scenario_validation() {
        let st = || vec![Station::new(Event::new("A", 0.0, 0.0), LocalIntervention::new(0, sz()))];
        assert!(Scenario::new(vec![2], CMatrix::diag_real(&[0.5, 0.4]), st(), vec![]).is_err());
        assert!(Scenario::new(vec![3], CMatrix::diag_real(&[0.5, 0.5]), st(), vec![]).is_err());
        let skew = CMatrix::from_real(&[&[0.5, 0.1], &[0.0, 0.5]]).unwrap();
        assert!(Scenario::new(vec![2], skew, st(), vec![]).is_err());
        let not_unitary = Evolution {
            from: None,
            to: Some("A".into()),
            history: Record::new(),
            unitary: CMatrix::diag_real(&[1.0, 0.5]),
        };
        assert!(matches!(
            Scenario::new(vec![2], CMatrix::diag_real(&[0.5, 0.5]), st(), vec![not_unitary]),
            Err(ExperimentError::Evolution { .. })
        ));
        let dup = vec![
            Station::new(Event::new("A", 0.0, 0.0), LocalIntervention::new(0, sz())),
            Station::new(Event::new("A", 1.0, 0.0), LocalIntervention::new(0, sz())),
        ];
        assert!(Scenario::new(vec![2], CMatrix::diag_real(&[0.5, 0.5]), dup, vec![]).is_err());
    }

    #[test]
    fn cut_state_in_causal_chain() {
        let s = Scenario::new(
            vec![2],
            CMatrix::from_real(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap(),
            vec![
                Station::new(Event::new("P", 0.0, 0.0), LocalIntervention::new(0, sz())),
                Station::new(Event::new("Q", 1.0, 0.0), LocalIntervention::new(0, sz())),
            ],
            vec![],
        )
        .unwrap();
        let cut = s.state_at_cut("P").unwrap();
        assert_eq!(cut.len(), 2);
        assert!(cut[0].state.max_abs_diff(&CMatrix::diag_real(&[0.5, 0.0])).unwrap() < 1e-12);
        assert!(zz_singlet().state_at_cut("A").is_err());
    }

    #[test]
    fn json_view_shape() {
        let r = zz_singlet().evaluate_in_order(&ids(&["A", "B"])).unwrap();
        let v = r.to_json();
        assert_eq!(v["ordering"], serde_json::json!(["A", "B"]));
        assert_eq!(v["records"].as_array().unwrap().len(), 4);
        assert_eq!(v["records"][1]["outcomes"], serde_json::json!({"A": "+", "B": "-"}));
    }
}
