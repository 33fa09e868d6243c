//! Adaptive adversaries that answer comparisons so as to force many of them
//! onto one element, while always staying consistent with some total order.
//!
//! * [`MinAdversary`] keeps the answer digraph of a minimum search and
//!   always lets the more-compared of two candidate minima win.
//! * [`MergeAdversary`] fixes everything about a merge except where its
//!   scapegoat lands, and keeps that position as uncertain as possible.
//! * [`MergesortAdversary`] runs a merge adversary at every node of the
//!   standard mergesort tree and passes each node's scapegoat up to its
//!   parent.

use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::cmp::Reverse;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::{ElementId, Oracle, OracleMode, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeColor {
    /// Both endpoints were sinks when compared.
    Red,
    Black,
}

/// Answer digraph for a minimum search. An edge `u -> v` records that `v`
/// was declared smaller than `u`, so the sinks are the elements still in
/// the running for minimum.
#[derive(Debug, Clone)]
pub struct MinAdversary {
    /// `smaller[u]`: heads of the edges leaving `u`.
    smaller: Vec<Vec<ElementId>>,
    in_degree: Vec<u32>,
    /// Nodes that reach this one along red edges, itself included.
    red_reach: Vec<u64>,
    answers: Vec<(ElementId, ElementId, EdgeColor)>,
}

impl MinAdversary {
    pub fn new(n: usize) -> Self {
        MinAdversary {
            smaller: vec![Vec::new(); n],
            in_degree: vec![0; n],
            red_reach: vec![1; n],
            answers: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.smaller.len()
    }

    pub fn is_empty(&self) -> bool {
        self.smaller.is_empty()
    }

    pub fn is_sink(&self, i: ElementId) -> bool {
        self.smaller[i.0].is_empty()
    }

    pub fn sinks(&self) -> Vec<ElementId> {
        (0..self.len()).map(ElementId).filter(|&i| self.is_sink(i)).collect()
    }

    pub fn in_degree(&self, i: ElementId) -> u32 {
        self.in_degree[i.0]
    }

    pub fn red_reach(&self, i: ElementId) -> u64 {
        self.red_reach[i.0]
    }

    /// Every answer so far as `(smaller, larger, color)`.
    pub fn answers(&self) -> &[(ElementId, ElementId, EdgeColor)] {
        &self.answers
    }

    /// `r_i <= 2^{d_i}` at every sink.
    pub fn invariant_holds(&self) -> bool {
        (0..self.len()).map(ElementId).filter(|&i| self.is_sink(i)).all(|i| {
            let d = self.in_degree[i.0];
            d >= 64 || self.red_reach[i.0] <= 1u64 << d
        })
    }

    /// Whether `from` has a directed path to `to`, i.e. `to` is known to be
    /// smaller than `from`.
    fn reaches(&self, from: ElementId, to: ElementId) -> bool {
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([from]);
        seen[from.0] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &self.smaller[u.0] {
                if v == to {
                    return true;
                }
                if !seen[v.0] {
                    seen[v.0] = true;
                    queue.push_back(v);
                }
            }
        }
        false
    }

    fn check(&self, i: ElementId) -> Result<()> {
        if i.0 >= self.len() {
            return Err(Error::OutOfRange { id: i, len: self.len() });
        }
        Ok(())
    }

    /// Decides `i` against `j` and records the edge.
    pub fn answer_pair(&mut self, i: ElementId, j: ElementId) -> Result<Outcome> {
        self.check(i)?;
        self.check(j)?;
        if i == j {
            return Err(Error::IdenticalIds(i));
        }
        let (sink_i, sink_j) = (self.is_sink(i), self.is_sink(j));
        let i_smaller = match (sink_i, sink_j) {
            (true, true) => {
                let (di, dj) = (self.in_degree[i.0], self.in_degree[j.0]);
                di > dj || (di == dj && i < j)
            }
            (true, false) => true,
            (false, true) => false,
            (false, false) => {
                if self.reaches(i, j) {
                    false
                } else if self.reaches(j, i) {
                    true
                } else {
                    i < j
                }
            }
        };
        let (small, large) = if i_smaller { (i, j) } else { (j, i) };
        let color = if sink_i && sink_j { EdgeColor::Red } else { EdgeColor::Black };
        self.smaller[large.0].push(small);
        self.in_degree[small.0] += 1;
        if color == EdgeColor::Red {
            self.red_reach[small.0] += self.red_reach[large.0];
        }
        self.answers.push((small, large, color));
        Ok(if i_smaller { Outcome::Less } else { Outcome::Greater })
    }

    /// A total order (smallest first) consistent with every answer, provided
    /// the run ended with `claimed` as the only sink.
    pub fn certify(&self, claimed: ElementId) -> Result<Vec<ElementId>> {
        self.check(claimed)?;
        let sinks = self.sinks();
        if sinks.len() != 1 {
            return Err(Error::MultipleSinks(sinks.len()));
        }
        if sinks[0] != claimed {
            return Err(Error::InconsistentClaim { claimed, sink: sinks[0] });
        }
        // Kahn's algorithm from the sinks upward, smallest id first
        let mut larger: Vec<Vec<ElementId>> = vec![Vec::new(); self.len()];
        let mut pending: Vec<usize> = self.smaller.iter().map(Vec::len).collect();
        for (u, heads) in self.smaller.iter().enumerate() {
            for &v in heads {
                larger[v.0].push(ElementId(u));
            }
        }
        let mut ready: BinaryHeap<Reverse<ElementId>> =
            sinks.into_iter().map(Reverse).collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(Reverse(v)) = ready.pop() {
            order.push(v);
            for &u in &larger[v.0] {
                pending[u.0] -= 1;
                if pending[u.0] == 0 {
                    ready.push(Reverse(u));
                }
            }
        }
        debug_assert_eq!(order.len(), self.len(), "answers are acyclic");
        Ok(order)
    }
}

impl Oracle for MinAdversary {
    fn answer(&mut self, i: ElementId, j: ElementId) -> Result<Outcome> {
        self.answer_pair(i, j)
    }

    fn mode(&self) -> OracleMode {
        OracleMode::Adversarial
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Member {
    A(usize),
    B(usize),
}

/// Merge adversary for sorted runs `A` and `B` with scapegoat `x` in `B`.
///
/// Elements of `B` below `x` lose to all of `A`, those above `x` beat all of
/// `A`, and runs are internally ordered by position. The only open question
/// is which of the `|A| + 1` gaps of `A` holds `x`; each comparison of `x`
/// with `A` keeps the larger half of the gaps still possible.
#[derive(Debug, Clone)]
pub struct MergeAdversary {
    a: Vec<ElementId>,
    b: Vec<ElementId>,
    x: usize,
    members: HashMap<ElementId, Member>,
    /// Gap `g` means `A[..g] < x < A[g..]`; gaps `lo..=hi` remain possible.
    lo: usize,
    hi: usize,
}

impl MergeAdversary {
    /// Scapegoat at the middle of `B`.
    pub fn new(a: &[ElementId], b: &[ElementId]) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::EmptyInput);
        }
        Self::with_scapegoat(a, b, b[b.len() / 2])
    }

    pub fn with_scapegoat(a: &[ElementId], b: &[ElementId], x: ElementId) -> Result<Self> {
        let x = b.iter().position(|&y| y == x).ok_or(Error::OutOfRange { id: x, len: b.len() })?;
        let members = a
            .iter()
            .enumerate()
            .map(|(i, &e)| (e, Member::A(i)))
            .chain(b.iter().enumerate().map(|(i, &e)| (e, Member::B(i))))
            .collect();
        Ok(MergeAdversary { a: a.to_vec(), b: b.to_vec(), x, members, lo: 0, hi: a.len() })
    }

    pub fn scapegoat(&self) -> ElementId {
        self.b[self.x]
    }

    /// Gaps of `A` that could still hold the scapegoat.
    pub fn open_gaps(&self) -> (usize, usize) {
        (self.lo, self.hi)
    }

    pub fn is_resolved(&self) -> bool {
        self.lo == self.hi
    }

    fn member(&self, e: ElementId) -> Result<Member> {
        self.members.get(&e).copied().ok_or(Error::OutOfRange { id: e, len: self.members.len() })
    }

    /// Whether `i < j`.
    pub fn decide(&mut self, i: ElementId, j: ElementId) -> Result<bool> {
        if i == j {
            return Err(Error::IdenticalIds(i));
        }
        Ok(match (self.member(i)?, self.member(j)?) {
            (Member::A(p), Member::A(q)) | (Member::B(p), Member::B(q)) => p < q,
            (Member::B(p), Member::A(q)) => self.b_below_a(p, q),
            (Member::A(p), Member::B(q)) => !self.b_below_a(q, p),
        })
    }

    fn b_below_a(&mut self, b: usize, a: usize) -> bool {
        if b != self.x {
            return b < self.x;
        }
        // x < A[a] holds in gaps lo..=a, x > A[a] in gaps a+1..=hi
        let below = (a + 1).saturating_sub(self.lo).min(self.hi - self.lo + 1);
        let above = (self.hi - self.lo + 1) - below;
        if below >= above {
            self.hi = self.lo + below - 1;
            true
        } else {
            self.lo += below;
            false
        }
    }

    /// The merged order implied by the answers, with the scapegoat in the
    /// lowest gap still open.
    pub fn merged(&self) -> Vec<ElementId> {
        let mut out = Vec::with_capacity(self.a.len() + self.b.len());
        out.extend_from_slice(&self.b[..self.x]);
        out.extend_from_slice(&self.a[..self.lo]);
        out.push(self.b[self.x]);
        out.extend_from_slice(&self.a[self.lo..]);
        out.extend_from_slice(&self.b[self.x + 1..]);
        out
    }
}

impl Oracle for MergeAdversary {
    fn answer(&mut self, i: ElementId, j: ElementId) -> Result<Outcome> {
        Ok(if self.decide(i, j)? { Outcome::Less } else { Outcome::Greater })
    }

    fn mode(&self) -> OracleMode {
        OracleMode::Adversarial
    }
}

#[derive(Debug, Clone)]
enum NodeState {
    /// Children not yet merged (or a leaf before anything happened).
    Waiting,
    Merging(MergeAdversary),
    Done { order: Vec<ElementId>, rank: HashMap<ElementId, usize> },
}

#[derive(Debug, Clone)]
struct Node {
    lo: usize,
    hi: usize,
    children: Option<(usize, usize)>,
    scapegoat: ElementId,
    state: NodeState,
}

/// Scapegoat adversary for this crate's top-down [`crate::sorting::mergesort`]
/// run on `ids(n)`: element `i` starts at input position `i`, and node
/// `[lo, hi)` splits at `lo + ceil((hi - lo) / 2)`.
///
/// Each comparison is routed to the lowest node containing both elements.
/// The first comparison at a node freezes its children's orders and starts
/// a [`MergeAdversary`] there whose scapegoat is the scapegoat of the larger
/// child (the left one on ties), so the same element is hunted at every
/// level.
#[derive(Debug, Clone)]
pub struct MergesortAdversary {
    nodes: Vec<Node>,
}

impl MergesortAdversary {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(crate::error::invalid("n", "the mergesort adversary needs at least 2 elements"));
        }
        let mut nodes = Vec::new();
        build_node(&mut nodes, 0, n);
        Ok(MergesortAdversary { nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes[0].hi
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The element hunted by the final merge.
    pub fn root_scapegoat(&self) -> ElementId {
        self.nodes[0].scapegoat
    }

    /// Final sorted order, once the root merge has resolved its scapegoat.
    pub fn final_order(&self) -> Option<Vec<ElementId>> {
        match &self.nodes[0].state {
            NodeState::Merging(m) if m.is_resolved() => Some(m.merged()),
            NodeState::Done { order, .. } => Some(order.clone()),
            _ => None,
        }
    }

    fn lowest_common(&self, i: usize, j: usize) -> usize {
        let mut v = 0;
        while let Some((l, r)) = self.nodes[v].children {
            let in_left = |p: usize| p < self.nodes[l].hi;
            match (in_left(i), in_left(j)) {
                (true, true) => v = l,
                (false, false) => v = r,
                _ => break,
            }
        }
        v
    }

    /// Freezes node `v`, which must be a leaf or a finished merge.
    fn finish(&mut self, v: usize, i: ElementId, j: ElementId) -> Result<()> {
        let order = match &self.nodes[v].state {
            NodeState::Done { .. } => return Ok(()),
            NodeState::Waiting if self.nodes[v].children.is_none() => {
                vec![ElementId(self.nodes[v].lo)]
            }
            NodeState::Merging(m) if m.is_resolved() => m.merged(),
            _ => return Err(Error::UnsupportedAccessPattern(i, j)),
        };
        let rank = order.iter().enumerate().map(|(r, &e)| (e, r)).collect();
        self.nodes[v].state = NodeState::Done { order, rank };
        Ok(())
    }

    fn sorted(&self, v: usize) -> &[ElementId] {
        match &self.nodes[v].state {
            NodeState::Done { order, .. } => order,
            _ => unreachable!("finished before use"),
        }
    }

    pub fn decide(&mut self, i: ElementId, j: ElementId) -> Result<bool> {
        let n = self.len();
        for e in [i, j] {
            if e.0 >= n {
                return Err(Error::OutOfRange { id: e, len: n });
            }
        }
        if i == j {
            return Err(Error::IdenticalIds(i));
        }
        let v = self.lowest_common(i.0, j.0);
        if let NodeState::Done { rank, .. } = &self.nodes[v].state {
            return Ok(rank[&i] < rank[&j]);
        }
        if let NodeState::Waiting = self.nodes[v].state {
            let (l, r) = self.nodes[v].children.expect("two elements share only inner nodes");
            self.finish(l, i, j)?;
            self.finish(r, i, j)?;
            let (big, small) = if self.nodes[r].hi - self.nodes[r].lo > self.nodes[l].hi - self.nodes[l].lo {
                (r, l)
            } else {
                (l, r)
            };
            let merge = MergeAdversary::with_scapegoat(
                self.sorted(small),
                self.sorted(big),
                self.nodes[big].scapegoat,
            )?;
            self.nodes[v].state = NodeState::Merging(merge);
        }
        match &mut self.nodes[v].state {
            NodeState::Merging(m) => m.decide(i, j),
            _ => unreachable!("started above"),
        }
    }
}

fn build_node(nodes: &mut Vec<Node>, lo: usize, hi: usize) -> usize {
    let v = nodes.len();
    nodes.push(Node { lo, hi, children: None, scapegoat: ElementId(lo), state: NodeState::Waiting });
    if hi - lo >= 2 {
        let mid = lo + (hi - lo + 1) / 2;
        let l = build_node(nodes, lo, mid);
        let r = build_node(nodes, mid, hi);
        let big = if hi - mid > mid - lo { r } else { l };
        nodes[v].children = Some((l, r));
        nodes[v].scapegoat = nodes[big].scapegoat;
    }
    v
}

impl Oracle for MergesortAdversary {
    fn answer(&mut self, i: ElementId, j: ElementId) -> Result<Outcome> {
        Ok(if self.decide(i, j)? { Outcome::Less } else { Outcome::Greater })
    }

    fn mode(&self) -> OracleMode {
        OracleMode::Adversarial
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::{ids, Ledger, Session};
    use crate::minimum::{knockout, tournament_minimum};
    use crate::sorting::{merge, mergesort, MergeVariant};

    fn replay_agrees(adv: &MinAdversary, order: &[ElementId]) -> bool {
        let mut pos = vec![0; order.len()];
        for (r, e) in order.iter().enumerate() {
            pos[e.0] = r;
        }
        adv.answers().iter().all(|&(small, large, _)| pos[small.0] < pos[large.0])
    }

    #[test]
    fn first_comparison_is_a_red_tie_break() {
        let mut adv = MinAdversary::new(2);
        assert_eq!(adv.answer_pair(ElementId(0), ElementId(1)).unwrap(), Outcome::Less);
        assert_eq!(adv.answers(), &[(ElementId(0), ElementId(1), EdgeColor::Red)]);
        assert_eq!(adv.red_reach(ElementId(0)), 2);
        assert_eq!(adv.in_degree(ElementId(0)), 1);
        assert!(!adv.is_sink(ElementId(1)));
    }

    #[test]
    fn tournament_on_eight_is_pinned_at_log() {
        let mut adv = MinAdversary::new(8);
        let mut ledger = Ledger::new(8);
        let result = {
            let mut s = Session::new(&mut adv, &mut ledger);
            tournament_minimum(&ids(8), &mut s).unwrap()
        };
        assert_eq!(ledger.count(result.minimum), 3);
        assert_eq!(adv.red_reach(result.minimum), 8);
        let order = adv.certify(result.minimum).unwrap();
        assert_eq!(order[0], result.minimum);
        assert!(replay_agrees(&adv, &order));
    }

    /// A deliberately lopsided minimum scan: the running winner meets every
    /// other element in turn.
    fn linear_scan(xs: &[ElementId], s: &mut Session<'_>) -> Result<ElementId> {
        let mut best = xs[0];
        for &x in &xs[1..] {
            best = s.order(best, x)?.0;
        }
        Ok(best)
    }

    #[test]
    fn every_complete_run_pays_log_of_its_red_reach() {
        type Alg = fn(&[ElementId], &mut Session<'_>) -> Result<ElementId>;
        let algs: [Alg; 3] = [
            |xs, s| tournament_minimum(xs, s).map(|r| r.minimum),
            knockout,
            linear_scan,
        ];
        for alg in algs {
            for n in 2..=20 {
                let mut adv = MinAdversary::new(n);
                let mut ledger = Ledger::new(n);
                let m = {
                    let mut s = Session::new(&mut adv, &mut ledger);
                    alg(&ids(n), &mut s).unwrap()
                };
                assert!(adv.invariant_holds());
                let r = adv.red_reach(m);
                assert!(ledger.count(m) as f64 >= (r as f64).log2().ceil(), "n={n}");
                assert!(replay_agrees(&adv, &adv.certify(m).unwrap()));
            }
        }
    }

    #[test]
    fn invariant_holds_after_every_answer() {
        let mut adv = MinAdversary::new(16);
        let pairs = [(0, 1), (2, 3), (1, 3), (4, 5), (0, 2), (6, 7), (5, 7), (3, 7), (8, 0), (9, 3)];
        for (i, j) in pairs {
            adv.answer_pair(ElementId(i), ElementId(j)).unwrap();
            assert!(adv.invariant_holds());
        }
    }

    #[test]
    fn certify_rejects_unfinished_runs_and_wrong_claims() {
        let mut adv = MinAdversary::new(4);
        adv.answer_pair(ElementId(0), ElementId(1)).unwrap();
        adv.answer_pair(ElementId(2), ElementId(3)).unwrap();
        assert_eq!(adv.certify(ElementId(0)), Err(Error::MultipleSinks(2)));
        adv.answer_pair(ElementId(0), ElementId(2)).unwrap();
        assert_eq!(
            adv.certify(ElementId(2)),
            Err(Error::InconsistentClaim { claimed: ElementId(2), sink: ElementId(0) })
        );
        assert_eq!(adv.certify(ElementId(0)).unwrap()[0], ElementId(0));
    }

    #[test]
    fn non_sink_pairs_follow_the_partial_order() {
        let mut adv = MinAdversary::new(4);
        adv.answer_pair(ElementId(0), ElementId(1)).unwrap(); // 0 < 1
        adv.answer_pair(ElementId(2), ElementId(1)).unwrap(); // sink 2 < 1
        adv.answer_pair(ElementId(0), ElementId(2)).unwrap(); // 0 < 2
        adv.answer_pair(ElementId(3), ElementId(0)).unwrap(); // 0 < 3
        // 2 and 1 are both non-sinks and 1 > 2 is already known
        assert_eq!(adv.answer_pair(ElementId(1), ElementId(2)).unwrap(), Outcome::Greater);
        // 1 and 3 are incomparable: ordered by id
        assert_eq!(adv.answer_pair(ElementId(3), ElementId(1)).unwrap(), Outcome::Greater);
        let order = adv.certify(ElementId(0)).unwrap();
        assert!(replay_agrees(&adv, &order));
    }

    fn run_merge(a_len: usize, b_len: usize, variant: MergeVariant) -> (MergeAdversary, Ledger, Vec<ElementId>) {
        let a: Vec<ElementId> = (0..a_len).map(ElementId).collect();
        let b: Vec<ElementId> = (a_len..a_len + b_len).map(ElementId).collect();
        let mut adv = MergeAdversary::new(&a, &b).unwrap();
        let mut ledger = Ledger::new(a_len + b_len);
        let out = {
            let mut s = Session::new(&mut adv, &mut ledger);
            merge(&a, &b, variant, &mut s).unwrap()
        };
        (adv, ledger, out)
    }

    #[test]
    fn scapegoat_is_hunted_log_times() {
        for variant in [MergeVariant::Linear, MergeVariant::Exponential] {
            for a_len in 1..=40 {
                for b_len in [1, 2, 7, a_len] {
                    let (adv, ledger, out) = run_merge(a_len, b_len, variant);
                    let floor = (a_len as f64).log2().floor() as u64 + 1;
                    assert!(adv.is_resolved());
                    assert!(ledger.count(adv.scapegoat()) >= floor, "|A|={a_len} {variant:?}");
                    assert_eq!(out, adv.merged());
                }
            }
        }
    }

    #[test]
    fn scapegoat_interval_shrinks_at_most_by_half() {
        let a = ids(8);
        let b = vec![ElementId(8)];
        let mut adv = MergeAdversary::new(&a, &b).unwrap();
        let mut width = 9;
        for probe in [4, 2, 6, 0, 7, 1, 3, 5] {
            adv.decide(ElementId(8), ElementId(probe)).unwrap();
            let (lo, hi) = adv.open_gaps();
            assert!(2 * (hi - lo + 1) >= width);
            width = hi - lo + 1;
        }
        assert!(adv.is_resolved());
    }

    #[test]
    fn mergesort_adversary_stacks_the_scapegoat() {
        for k in 1..=8 {
            let n = 1usize << k;
            let mut adv = MergesortAdversary::new(n).unwrap();
            let mut ledger = Ledger::new(n);
            let out = {
                let mut s = Session::new(&mut adv, &mut ledger);
                mergesort(&ids(n), MergeVariant::Linear, &mut s).unwrap()
            };
            let want = (k * (k - 1) / 2 + k) as u64;
            assert!(ledger.count(adv.root_scapegoat()) >= want, "k={k}");
            assert_eq!(adv.final_order().unwrap(), out);
        }
    }

    #[test]
    fn mergesort_adversary_handles_odd_sizes_and_exponential_merging() {
        for n in 2..=40 {
            for variant in [MergeVariant::Linear, MergeVariant::Exponential] {
                let mut adv = MergesortAdversary::new(n).unwrap();
                let mut ledger = Ledger::new(n);
                let out = {
                    let mut s = Session::new(&mut adv, &mut ledger);
                    mergesort(&ids(n), variant, &mut s).unwrap()
                };
                assert_eq!(adv.final_order().unwrap(), out);
                assert!(ledger.count(adv.root_scapegoat()) >= 1);
            }
        }
    }

    #[test]
    fn mergesort_adversary_rejects_foreign_access_patterns() {
        let mut adv = MergesortAdversary::new(4).unwrap();
        // positions 0 and 2 meet at the root before either half is merged
        assert_eq!(
            adv.decide(ElementId(0), ElementId(2)),
            Err(Error::UnsupportedAccessPattern(ElementId(0), ElementId(2)))
        );
        assert!(MergesortAdversary::new(1).is_err());
    }
}
