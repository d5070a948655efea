//! Events in 1+1 dimensional Minkowski spacetime (c = 1), Lorentz boosts,
//! interval classification and the chronological orderings a frame induces.
//!
//! Timelike and lightlike separations fix the order of two events in every
//! frame; spacelike pairs can be reordered by a boost. [`causal_order`] is the
//! resulting partial order and [`linear_extensions`] enumerates every
//! chronological ordering compatible with it.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance on boosted times below which two events count as simultaneous.
pub const TIE_TOL: f64 = 1e-12;

/// Upper bound on events for exhaustive enumeration of orderings.
pub const MAX_EXTENSION_EVENTS: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpacetimeError {
    #[error("boost velocity must satisfy |v| < 1, got {0}")]
    Velocity(f64),
    #[error("duplicate event id `{0}`")]
    DuplicateId(String),
    #[error("unknown event id `{0}`")]
    UnknownId(String),
    #[error("{n} events exceed the enumeration limit of {max}; sample frames with `frame_ordering` instead")]
    TooManyEvents { n: usize, max: usize },
    #[error("ordering relation contains a cycle through `{0}`")]
    Cycle(String),
    #[error("event coordinates must be finite (event `{0}`)")]
    NonFinite(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Event {
    pub id: String,
    pub t: f64,
    pub x: f64,
}

impl Event {
    pub fn new(id: impl Into<String>, t: f64, x: f64) -> Self {
        Self { id: id.into(), t, x }
    }

    /// Coordinates `(t', x')` of this event seen from `frame`.
    pub fn boost(&self, frame: Frame) -> (f64, f64) {
        let v = frame.velocity();
        let gamma = 1.0 / (1.0 - v * v).sqrt();
        (gamma * (self.t - v * self.x), gamma * (self.x - v * self.t))
    }

    /// The same event expressed in boosted coordinates.
    pub fn boosted(&self, frame: Frame) -> Event {
        let (t, x) = self.boost(frame);
        Event::new(self.id.clone(), t, x)
    }
}

/// Inertial frame moving with velocity `v` relative to the reference frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Frame {
    v: f64,
}

impl Frame {
    pub const REST: Frame = Frame { v: 0.0 };

    pub fn new(v: f64) -> Result<Self, SpacetimeError> {
        if v.is_finite() && v.abs() < 1.0 {
            Ok(Self { v })
        } else {
            Err(SpacetimeError::Velocity(v))
        }
    }

    pub fn velocity(self) -> f64 {
        self.v
    }

    /// Relativistic velocity addition: boosting by `self` then `other`.
    pub fn compose(self, other: Frame) -> Frame {
        Frame {
            v: (self.v + other.v) / (1.0 + self.v * other.v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum IntervalKind {
    Spacelike,
    TimelikeFuture,
    TimelikePast,
    LightlikeFuture,
    LightlikePast,
    Coincident,
}

impl IntervalKind {
    pub fn reversed(self) -> Self {
        use IntervalKind::*;
        match self {
            TimelikeFuture => TimelikePast,
            TimelikePast => TimelikeFuture,
            LightlikeFuture => LightlikePast,
            LightlikePast => LightlikeFuture,
            k => k,
        }
    }

    /// `true` when the second event lies in the causal future of the first.
    pub fn is_future(self) -> bool {
        matches!(self, IntervalKind::TimelikeFuture | IntervalKind::LightlikeFuture)
    }
}

/// Classify the separation of `e2` relative to `e1` by `s = dt^2 - dx^2`.
///
/// `s` within a relative `1e-12` of zero is treated as lightlike so that
/// the classification survives round-off under boosts.
pub fn classify(e1: &Event, e2: &Event) -> IntervalKind {
    let dt = e2.t - e1.t;
    let dx = e2.x - e1.x;
    if dt == 0.0 && dx == 0.0 {
        return IntervalKind::Coincident;
    }
    let s = dt * dt - dx * dx;
    let scale = dt * dt + dx * dx;
    if s.abs() <= 1e-12 * scale {
        if dt > 0.0 {
            IntervalKind::LightlikeFuture
        } else {
            IntervalKind::LightlikePast
        }
    } else if s < 0.0 {
        IntervalKind::Spacelike
    } else if dt > 0.0 {
        IntervalKind::TimelikeFuture
    } else {
        IntervalKind::TimelikePast
    }
}

/// A strict partial order over labelled items, stored transitively closed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalOrder {
    ids: Vec<String>,
    before: BTreeSet<(usize, usize)>,
}

impl CausalOrder {
    /// Build from generating pairs `(earlier, later)`; the transitive closure is taken.
    pub fn from_pairs<S: AsRef<str>>(ids: &[S], pairs: &[(S, S)]) -> Result<Self, SpacetimeError> {
        let ids: Vec<String> = ids.iter().map(|s| s.as_ref().to_owned()).collect();
        check_unique(&ids)?;
        let index = |id: &str| {
            ids.iter()
                .position(|x| x == id)
                .ok_or_else(|| SpacetimeError::UnknownId(id.to_owned()))
        };
        let mut before = BTreeSet::new();
        for (a, b) in pairs {
            before.insert((index(a.as_ref())?, index(b.as_ref())?));
        }
        let order = Self { ids, before }.closed();
        order.assert_acyclic()?;
        Ok(order)
    }

    fn closed(mut self) -> Self {
        let n = self.ids.len();
        let mut reach = vec![vec![false; n]; n];
        for &(a, b) in &self.before {
            reach[a][b] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if reach[i][k] {
                    let via = reach[k].clone();
                    for (r, v) in reach[i].iter_mut().zip(via) {
                        *r |= v;
                    }
                }
            }
        }
        self.before = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| reach[i][j])
            .collect();
        self
    }

    fn assert_acyclic(&self) -> Result<(), SpacetimeError> {
        match self.before.iter().find(|(a, b)| a == b) {
            Some(&(a, _)) => Err(SpacetimeError::Cycle(self.ids[a].clone())),
            None => Ok(()),
        }
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// All ordered pairs `(earlier, later)` by id.
    pub fn pairs(&self) -> Vec<(String, String)> {
        self.before
            .iter()
            .map(|&(a, b)| (self.ids[a].clone(), self.ids[b].clone()))
            .collect()
    }

    pub fn precedes(&self, a: &str, b: &str) -> bool {
        match (self.position(a), self.position(b)) {
            (Some(i), Some(j)) => self.before.contains(&(i, j)),
            _ => false,
        }
    }

    /// Neither precedes the other.
    pub fn unordered(&self, a: &str, b: &str) -> bool {
        a != b && !self.precedes(a, b) && !self.precedes(b, a)
    }

    fn position(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// Whether `order` is a permutation of the ids that respects every pair.
    pub fn admits(&self, order: &[String]) -> bool {
        if order.len() != self.ids.len() {
            return false;
        }
        let mut rank = vec![usize::MAX; self.ids.len()];
        for (r, id) in order.iter().enumerate() {
            match self.position(id) {
                Some(i) if rank[i] == usize::MAX => rank[i] = r,
                _ => return false,
            }
        }
        self.before.iter().all(|&(a, b)| rank[a] < rank[b])
    }
}

fn check_unique(ids: &[String]) -> Result<(), SpacetimeError> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(SpacetimeError::DuplicateId(id.clone()));
        }
    }
    Ok(())
}

/// Causal partial order of `events`: `(a, b)` whenever `b` lies in the
/// timelike or lightlike future of `a`.
pub fn causal_order(events: &[Event]) -> Result<CausalOrder, SpacetimeError> {
    let ids: Vec<String> = events.iter().map(|e| e.id.clone()).collect();
    check_unique(&ids)?;
    if let Some(e) = events.iter().find(|e| !e.t.is_finite() || !e.x.is_finite()) {
        return Err(SpacetimeError::NonFinite(e.id.clone()));
    }
    let mut before = BTreeSet::new();
    for (i, a) in events.iter().enumerate() {
        for (j, b) in events.iter().enumerate() {
            if i != j && classify(a, b).is_future() {
                before.insert((i, j));
            }
        }
    }
    let order = CausalOrder { ids, before };
    // the light cone relation is already transitive; closing is a no-op check
    debug_assert_eq!(order.clone().closed(), order);
    order.assert_acyclic()?;
    Ok(order)
}

/// Events that share a boosted time within [`TIE_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TieReport {
    pub velocity: f64,
    /// All events in boosted-time order, grouped; groups of size > 1 are ties.
    pub groups: Vec<Vec<String>>,
}

impl TieReport {
    pub fn tied(&self) -> impl Iterator<Item = &Vec<String>> {
        self.groups.iter().filter(|g| g.len() > 1)
    }

    /// Every total order obtained by resolving each tied group in all ways.
    pub fn resolutions(&self) -> Vec<Vec<String>> {
        let mut out: Vec<Vec<String>> = vec![Vec::new()];
        for group in &self.groups {
            let perms = permutations(group);
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    perms.iter().map(move |p| {
                        let mut o = prefix.clone();
                        o.extend(p.iter().cloned());
                        o
                    })
                })
                .collect();
        }
        out
    }
}

fn permutations(items: &[String]) -> Vec<Vec<String>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum FrameOrdering {
    Total(Vec<String>),
    Tie(TieReport),
}

/// Chronological order of `events` in `frame`, ascending boosted time.
pub fn frame_ordering(events: &[Event], frame: Frame) -> FrameOrdering {
    let mut timed: Vec<(f64, &str)> = events.iter().map(|e| (e.boost(frame).0, e.id.as_str())).collect();
    timed.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut groups: Vec<Vec<String>> = Vec::new();
    let mut last_t = f64::NEG_INFINITY;
    for (t, id) in timed {
        match groups.last_mut() {
            Some(g) if t - last_t <= TIE_TOL => g.push(id.to_owned()),
            _ => groups.push(vec![id.to_owned()]),
        }
        last_t = t;
    }
    if groups.iter().all(|g| g.len() == 1) {
        FrameOrdering::Total(groups.into_iter().flatten().collect())
    } else {
        FrameOrdering::Tie(TieReport {
            velocity: frame.velocity(),
            groups,
        })
    }
}

/// Every total order of the ids consistent with `order`, each exactly once.
pub fn linear_extensions(order: &CausalOrder) -> Result<Vec<Vec<String>>, SpacetimeError> {
    let n = order.len();
    if n > MAX_EXTENSION_EVENTS {
        return Err(SpacetimeError::TooManyEvents {
            n,
            max: MAX_EXTENSION_EVENTS,
        });
    }
    let mut preds = vec![0u16; n];
    for &(a, b) in &order.before {
        preds[b] |= 1 << a;
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    extend(&preds, 0, &mut current, &mut out);
    Ok(out
        .into_iter()
        .map(|ix| ix.into_iter().map(|i| order.ids[i].clone()).collect())
        .collect())
}

fn extend(preds: &[u16], placed: u16, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if current.len() == preds.len() {
        out.push(current.clone());
        return;
    }
    for i in 0..preds.len() {
        let bit = 1 << i;
        if placed & bit == 0 && preds[i] & !placed == 0 {
            current.push(i);
            extend(preds, placed | bit, current, out);
            current.pop();
        }
    }
}

/// Reference-frame chronological order, ties broken by input position.
/// Always a linear extension of [`causal_order`].
pub fn rest_frame_order(events: &[Event]) -> Vec<String> {
    let mut idx: Vec<usize> = (0..events.len()).collect();
    idx.sort_by(|&a, &b| events[a].t.total_cmp(&events[b].t).then(a.cmp(&b)));
    idx.into_iter().map(|i| events[i].id.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn identity_boost() {
        let e = Event::new("e", 0.3, -2.0);
        assert_eq!(e.boost(Frame::REST), (0.3, -2.0));
    }

    #[test]
    fn boost_fixture() {
        let (t, x) = Event::new("e", 0.5, -1.0).boost(Frame::new(0.6).unwrap());
        assert!((t - 1.375).abs() < 1e-12);
        assert!((x + 1.625).abs() < 1e-12);
    }

    #[test]
    fn order_flip_under_boost() {
        let a = Event::new("A", 0.0, 1.0);
        let b = Event::new("B", 0.5, -1.0);
        let f = Frame::new(-0.6).unwrap();
        assert!((a.boost(f).0 - 0.75).abs() < 1e-12);
        assert!((b.boost(f).0 + 0.125).abs() < 1e-12);
        let events = [a, b];
        assert_eq!(
            frame_ordering(&events, Frame::REST),
            FrameOrdering::Total(ids(&["A", "B"]))
        );
        assert_eq!(frame_ordering(&events, f), FrameOrdering::Total(ids(&["B", "A"])));
    }

    #[test]
    fn velocity_bounds() {
        assert!(Frame::new(1.0).is_err());
        assert!(Frame::new(-1.0).is_err());
        assert!(Frame::new(f64::NAN).is_err());
        assert!(Frame::new(0.999).is_ok());
    }

    #[test]
    fn classify_cases() {
        let o = Event::new("o", 0.0, 0.0);
        assert_eq!(classify(&o, &o), IntervalKind::Coincident);
        assert_eq!(
            classify(&Event::new("a", 0.0, 1.0), &Event::new("b", 0.5, -1.0)),
            IntervalKind::Spacelike
        );
        let f = Event::new("f", 1.0, 0.5);
        assert_eq!(classify(&o, &f), IntervalKind::TimelikeFuture);
        assert_eq!(classify(&f, &o), IntervalKind::TimelikePast);
        let l = Event::new("l", 2.0, -2.0);
        assert_eq!(classify(&o, &l), IntervalKind::LightlikeFuture);
        assert_eq!(classify(&l, &o), IntervalKind::LightlikePast);
    }

    #[test]
    fn causal_order_cases() {
        let spacelike = [
            Event::new("a", 0.0, 0.0),
            Event::new("b", 0.1, 5.0),
            Event::new("c", -0.1, 10.0),
        ];
        assert!(causal_order(&spacelike).unwrap().pairs().is_empty());

        let v = [
            Event::new("P", -1.0, 0.0),
            Event::new("A", 0.0, -0.5),
            Event::new("B", 0.0, 0.5),
        ];
        let o = causal_order(&v).unwrap();
        assert_eq!(
            o.pairs(),
            vec![("P".to_string(), "A".to_string()), ("P".to_string(), "B".to_string())]
        );

        let chain = [
            Event::new("1", 0.0, 0.0),
            Event::new("2", 1.0, 0.0),
            Event::new("3", 2.0, 0.0),
        ];
        let o = causal_order(&chain).unwrap();
        assert_eq!(o.pairs().len(), 3);
        assert!(o.precedes("1", "3"));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let v = [Event::new("a", 0.0, 0.0), Event::new("a", 1.0, 0.0)];
        assert_eq!(causal_order(&v), Err(SpacetimeError::DuplicateId("a".into())));
    }

    #[test]
    fn tie_is_reported() {
        let v = [
            Event::new("a", 0.0, 1.0),
            Event::new("b", 0.0, -1.0),
            Event::new("c", 1.0, 0.0),
        ];
        match frame_ordering(&v, Frame::REST) {
            FrameOrdering::Tie(r) => {
                assert_eq!(r.tied().count(), 1);
                assert_eq!(r.resolutions().len(), 2);
                for o in r.resolutions() {
                    assert_eq!(o[2], "c");
                }
            }
            other => panic!("expected tie, got {other:?}"),
        }
    }

    #[test]
    fn extensions_cases() {
        let empty = CausalOrder::from_pairs::<&str>(&["a", "b", "c"], &[]).unwrap();
        assert_eq!(linear_extensions(&empty).unwrap().len(), 6);

        let chain = CausalOrder::from_pairs(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        assert!(chain.precedes("a", "c"));
        assert_eq!(linear_extensions(&chain).unwrap(), vec![ids(&["a", "b", "c"])]);

        let vee = CausalOrder::from_pairs(&["P", "A", "B"], &[("P", "A"), ("P", "B")]).unwrap();
        assert_eq!(
            linear_extensions(&vee).unwrap(),
            vec![ids(&["P", "A", "B"]), ids(&["P", "B", "A"])]
        );
    }

    #[test]
    fn extension_guard() {
        let names: Vec<String> = (0..9).map(|i| i.to_string()).collect();
        let o = CausalOrder::from_pairs::<String>(&names, &[]).unwrap();
        assert!(matches!(
            linear_extensions(&o),
            Err(SpacetimeError::TooManyEvents { n: 9, .. })
        ));
        let names: Vec<String> = (0..8).map(|i| i.to_string()).collect();
        let o = CausalOrder::from_pairs::<String>(&names, &[]).unwrap();
        assert_eq!(linear_extensions(&o).unwrap().len(), 40320);
    }

    #[test]
    fn cycle_rejected() {
        let r = CausalOrder::from_pairs(&["a", "b"], &[("a", "b"), ("b", "a")]);
        assert!(matches!(r, Err(SpacetimeError::Cycle(_))));
    }

    #[test]
    fn admits_checks_permutation_and_pairs() {
        let vee = CausalOrder::from_pairs(&["P", "A", "B"], &[("P", "A"), ("P", "B")]).unwrap();
        assert!(vee.admits(&ids(&["P", "B", "A"])));
        assert!(!vee.admits(&ids(&["A", "P", "B"])));
        assert!(!vee.admits(&ids(&["P", "A"])));
        assert!(!vee.admits(&ids(&["P", "A", "A"])));
    }
}
