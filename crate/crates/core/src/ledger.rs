//! Comparison accounting.
//!
//! Every algorithm in this crate compares elements only through a
//! [`Session`], which forwards the question to an [`Oracle`] and charges one
//! comparison to each participant in the [`Ledger`]. The per-element counts
//! are the fragile complexity of a run; their half-sum is its work.
//!
//! Ids at or beyond [`Ledger::len`] but below [`Ledger::id_bound`] are
//! *virtual*: padding dummies and sentinels whose relative order is known in
//! advance. Comparisons touching a virtual id are answered by the oracle but
//! leave the ledger untouched.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stable identity of one input element for the lifetime of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementId(pub usize);

impl ElementId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// `ids(n)` is `[#0, #1, ..., #(n-1)]`.
pub fn ids(n: usize) -> Vec<ElementId> {
    (0..n).map(ElementId).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Less,
    Greater,
    Equal,
}

impl Outcome {
    pub fn reverse(self) -> Self {
        match self {
            Outcome::Less => Outcome::Greater,
            Outcome::Greater => Outcome::Less,
            Outcome::Equal => Outcome::Equal,
        }
    }
}

impl From<Ordering> for Outcome {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Less => Outcome::Less,
            Ordering::Greater => Outcome::Greater,
            Ordering::Equal => Outcome::Equal,
        }
    }
}

/// Per-element comparison counts plus total work.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ledger {
    counts: Vec<u64>,
    work: u64,
    events: Option<Vec<(ElementId, ElementId)>>,
    virtual_len: usize,
}

impl Ledger {
    pub fn new(n: usize) -> Self {
        Ledger { counts: vec![0; n], work: 0, events: None, virtual_len: 0 }
    }

    /// A ledger that also keeps the ordered list of compared pairs.
    pub fn with_events(n: usize) -> Self {
        Ledger { events: Some(Vec::new()), ..Ledger::new(n) }
    }

    /// Reserves `extra` virtual ids directly after the real ones and returns
    /// the first of them.
    pub fn add_virtual(&mut self, extra: usize) -> ElementId {
        let first = self.id_bound();
        self.virtual_len += extra;
        ElementId(first)
    }

    /// Number of real elements.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// One past the largest id (real or virtual) this ledger accepts.
    pub fn id_bound(&self) -> usize {
        self.counts.len() + self.virtual_len
    }

    #[inline]
    pub fn is_virtual(&self, id: ElementId) -> bool {
        id.0 >= self.counts.len()
    }

    pub fn count(&self, id: ElementId) -> u64 {
        self.counts.get(id.0).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn work(&self) -> u64 {
        self.work
    }

    pub fn events(&self) -> Option<&[(ElementId, ElementId)]> {
        self.events.as_deref()
    }

    /// `2 * work == sum(counts)`.
    pub fn is_conserved(&self) -> bool {
        let total: u64 = self.counts.iter().sum();
        total == 2 * self.work
    }

    fn check(&self, id: ElementId) -> Result<()> {
        if id.0 >= self.id_bound() {
            return Err(Error::OutOfRange { id, len: self.id_bound() });
        }
        Ok(())
    }

    #[inline]
    fn record(&mut self, i: ElementId, j: ElementId) {
        if self.is_virtual(i) || self.is_virtual(j) {
            return;
        }
        self.counts[i.0] += 1;
        self.counts[j.0] += 1;
        self.work += 1;
        if let Some(events) = &mut self.events {
            events.push((i, j));
        }
    }

    pub fn summary(&self, target: Option<ElementId>) -> Result<FragileSummary> {
        fragile_summary(self, target)
    }
}

/// Fragility figures read off a ledger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FragileSummary {
    pub f_target: Option<u64>,
    pub f_max_rest: u64,
    pub f_max: u64,
    pub work: u64,
}

pub fn fragile_summary(ledger: &Ledger, target: Option<ElementId>) -> Result<FragileSummary> {
    if let Some(t) = target {
        if t.0 >= ledger.len() {
            return Err(Error::OutOfRange { id: t, len: ledger.len() });
        }
    }
    let f_max = ledger.counts.iter().copied().max().unwrap_or(0);
    let f_max_rest = ledger
        .counts
        .iter()
        .enumerate()
        .filter(|&(i, _)| Some(ElementId(i)) != target)
        .map(|(_, &c)| c)
        .max()
        .unwrap_or(0);
    Ok(FragileSummary {
        f_target: target.map(|t| ledger.counts[t.0]),
        f_max_rest,
        f_max,
        work: ledger.work,
    })
}

#[derive(Serialize, Deserialize)]
struct LedgerRecord {
    n: usize,
    counts: Vec<u64>,
    work: u64,
}

impl Serialize for Ledger {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LedgerRecord { n: self.counts.len(), counts: self.counts.clone(), work: self.work }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Ledger {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = LedgerRecord::deserialize(d)?;
        if rec.counts.len() != rec.n {
            return Err(serde::de::Error::custom("counts length does not match n"));
        }
        Ok(Ledger { counts: rec.counts, work: rec.work, events: None, virtual_len: 0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleMode {
    ValueBacked,
    Adversarial,
}

/// Answers "how does element `i` compare to element `j`?".
pub trait Oracle {
    fn answer(&mut self, i: ElementId, j: ElementId) -> Result<Outcome>;

    fn mode(&self) -> OracleMode;
}

impl<O: Oracle + ?Sized> Oracle for &mut O {
    fn answer(&mut self, i: ElementId, j: ElementId) -> Result<Outcome> {
        (**self).answer(i, j)
    }

    fn mode(&self) -> OracleMode {
        (**self).mode()
    }
}

/// Oracle backed by a slice of values indexed by element id.
#[derive(Debug, Clone, Copy)]
pub struct ValueOracle<'a, T> {
    values: &'a [T],
}

impl<'a, T: Ord> ValueOracle<'a, T> {
    pub fn new(values: &'a [T]) -> Self {
        ValueOracle { values }
    }

    pub fn values(&self) -> &'a [T] {
        self.values
    }
}

impl<T: Ord> Oracle for ValueOracle<'_, T> {
    #[inline]
    fn answer(&mut self, i: ElementId, j: ElementId) -> Result<Outcome> {
        let (a, b) = match (self.values.get(i.0), self.values.get(j.0)) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                let bad = if i.0 >= self.values.len() { i } else { j };
                return Err(Error::OutOfRange { id: bad, len: self.values.len() });
            }
        };
        Ok(a.cmp(b).into())
    }

    fn mode(&self) -> OracleMode {
        OracleMode::ValueBacked
    }
}

/// Where padding dummies sit relative to every real element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DummyPlacement {
    BelowAll,
    AboveAll,
}

/// Extends an oracle over `real` elements with dummies at ids `real..`,
/// all below or all above the real elements and ordered among themselves
/// by id.
#[derive(Debug)]
pub struct PaddedOracle<O> {
    inner: O,
    real: usize,
    placement: DummyPlacement,
}

impl<O: Oracle> PaddedOracle<O> {
    pub fn new(inner: O, real: usize, placement: DummyPlacement) -> Self {
        PaddedOracle { inner, real, placement }
    }
}

impl<O: Oracle> Oracle for PaddedOracle<O> {
    fn answer(&mut self, i: ElementId, j: ElementId) -> Result<Outcome> {
        let dummy_i = i.0 >= self.real;
        let dummy_j = j.0 >= self.real;
        let dummy_first = match self.placement {
            DummyPlacement::BelowAll => Outcome::Less,
            DummyPlacement::AboveAll => Outcome::Greater,
        };
        match (dummy_i, dummy_j) {
            (false, false) => self.inner.answer(i, j),
            (true, true) => Ok(i.cmp(&j).into()),
            (true, false) => Ok(dummy_first),
            (false, true) => Ok(dummy_first.reverse()),
        }
    }

    fn mode(&self) -> OracleMode {
        self.inner.mode()
    }
}

/// An oracle and a ledger bound together for one run.
pub struct Session<'a> {
    oracle: &'a mut dyn Oracle,
    ledger: &'a mut Ledger,
}

impl<'a> Session<'a> {
    pub fn new(oracle: &'a mut dyn Oracle, ledger: &'a mut Ledger) -> Self {
        Session { oracle, ledger }
    }

    /// The one counted primitive.
    #[inline]
    pub fn compare(&mut self, i: ElementId, j: ElementId) -> Result<Outcome> {
        if i == j {
            return Err(Error::IdenticalIds(i));
        }
        self.ledger.check(i)?;
        self.ledger.check(j)?;
        let outcome = self.oracle.answer(i, j)?;
        self.ledger.record(i, j);
        Ok(outcome)
    }

    /// `i < j`, with equal values ordered by id.
    #[inline]
    pub fn less(&mut self, i: ElementId, j: ElementId) -> Result<bool> {
        Ok(match self.compare(i, j)? {
            Outcome::Less => true,
            Outcome::Greater => false,
            Outcome::Equal => i < j,
        })
    }

    /// Returns `(smaller, larger)`.
    #[inline]
    pub fn order(&mut self, i: ElementId, j: ElementId) -> Result<(ElementId, ElementId)> {
        Ok(if self.less(i, j)? { (i, j) } else { (j, i) })
    }

    /// Asks the oracle without charging the ledger. Diagnostics only: it
    /// bypasses the accounting every algorithm is measured by.
    pub fn probe_unrecorded(&mut self, i: ElementId, j: ElementId) -> Result<bool> {
        Ok(match self.oracle.answer(i, j)? {
            Outcome::Less => true,
            Outcome::Greater => false,
            Outcome::Equal => i < j,
        })
    }

    pub fn ledger(&self) -> &Ledger {
        self.ledger
    }

    pub fn oracle_mode(&self) -> OracleMode {
        self.oracle.mode()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: usize) -> ElementId {
        ElementId(i)
    }

    #[test]
    fn new_ledger_is_zeroed() {
        for n in [0, 1, 4] {
            let l = Ledger::new(n);
            assert_eq!(l.counts(), vec![0; n].as_slice());
            assert_eq!(l.work(), 0);
            assert!(l.events().is_none());
        }
    }

    #[test]
    fn compare_counts_both_participants() {
        let values = [5, 3];
        let mut oracle = ValueOracle::new(&values);
        let mut ledger = Ledger::new(2);
        let mut s = Session::new(&mut oracle, &mut ledger);
        assert_eq!(s.compare(e(0), e(1)).unwrap(), Outcome::Greater);
        assert_eq!(s.ledger().counts(), &[1, 1]);
        assert_eq!(s.ledger().work(), 1);
        s.compare(e(0), e(1)).unwrap();
        assert_eq!(s.ledger().counts(), &[2, 2]);
        assert_eq!(s.ledger().work(), 2);
    }

    #[test]
    fn duplicates_compare_equal_and_break_ties_by_id() {
        let values = [7, 7];
        let mut oracle = ValueOracle::new(&values);
        let mut ledger = Ledger::new(2);
        let mut s = Session::new(&mut oracle, &mut ledger);
        assert_eq!(s.compare(e(0), e(1)).unwrap(), Outcome::Equal);
        assert!(s.less(e(0), e(1)).unwrap());
        assert!(!s.less(e(1), e(0)).unwrap());
        assert_eq!(s.ledger().counts(), &[3, 3]);
    }

    #[test]
    fn bad_ids_are_rejected_without_charge() {
        let values = [1, 2, 3];
        let mut oracle = ValueOracle::new(&values);
        let mut ledger = Ledger::new(3);
        let mut s = Session::new(&mut oracle, &mut ledger);
        assert_eq!(s.compare(e(1), e(1)), Err(Error::IdenticalIds(e(1))));
        assert!(matches!(s.compare(e(0), e(3)), Err(Error::OutOfRange { .. })));
        assert_eq!(s.ledger().work(), 0);
    }

    #[test]
    fn virtual_comparisons_are_free() {
        let values = [4, 1];
        let mut oracle = PaddedOracle::new(ValueOracle::new(&values), 2, DummyPlacement::BelowAll);
        let mut ledger = Ledger::new(2);
        let first = ledger.add_virtual(2);
        assert_eq!(first, e(2));
        let mut s = Session::new(&mut oracle, &mut ledger);
        assert!(s.less(e(2), e(0)).unwrap());
        assert!(s.less(e(2), e(3)).unwrap());
        assert!(!s.less(e(1), e(3)).unwrap());
        assert_eq!(s.ledger().counts(), &[0, 0]);
        assert_eq!(s.ledger().work(), 0);
        assert!(s.less(e(1), e(0)).unwrap());
        assert_eq!(s.ledger().counts(), &[1, 1]);
    }

    #[test]
    fn summary_after_tournament_on_eight() {
        // Ascending values: #0 beats #1, #2, #4; #4 reaches the final.
        // Knockout counts [3,1,2,1,3,1,2,1]; the playoff among #1, #2, #4
        // adds (1 vs 2), (1 vs 4).
        let values: Vec<i32> = (0..8).collect();
        let mut oracle = ValueOracle::new(&values);
        let mut ledger = Ledger::new(8);
        let mut s = Session::new(&mut oracle, &mut ledger);
        let r = crate::minimum::tournament_minimum(&ids(8), &mut s).unwrap();
        assert_eq!((r.minimum, r.second), (e(0), Some(e(1))));
        assert_eq!(ledger.counts(), &[3, 3, 3, 1, 4, 1, 2, 1]);
        let sum = ledger.summary(Some(e(0))).unwrap();
        assert_eq!(sum.f_target, Some(3));
        assert_eq!(sum.f_max_rest, 4);
        assert_eq!(sum.work, 9);
        assert!(ledger.is_conserved());
    }

    #[test]
    fn summary_direct_max() {
        let ledger: Ledger =
            serde_json::from_str(r#"{"n":4,"counts":[2,2,1,1],"work":3}"#).unwrap();
        let s = ledger.summary(Some(e(2))).unwrap();
        assert_eq!(s.f_target, Some(1));
        assert_eq!(s.f_max_rest, 2);
        assert_eq!(s.f_max, 2);
        let s = Ledger::new(2).summary(None).unwrap();
        assert_eq!((s.f_target, s.f_max, s.work), (None, 0, 0));
        assert!(matches!(ledger.summary(Some(e(4))), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn ledger_json_shape() {
        let mut ledger = Ledger::new(2);
        ledger.record(e(0), e(1));
        let json = serde_json::to_string(&ledger).unwrap();
        assert_eq!(json, r#"{"n":2,"counts":[1,1],"work":1}"#);
        let back: Ledger = serde_json::from_str(&json).unwrap();
        assert_eq!(back, ledger);
    }
}
