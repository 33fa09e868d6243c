//! Median and rank selection.
//!
//! [`det_median`] runs the alternating halver cascade: halve, keep one side,
//! halve again, keep the other side, and so on for an even number of
//! stages. The middle half of the sorted last stage then serves as pivots
//! that certainly lie above the median, and the mirrored cascade yields
//! pivots below it. Elements beaten by a pivot are discarded in balanced
//! pairs and the cascade members are set aside until the final sort, so no
//! element goes through more than one sort of a cascade stage.
//!
//! [`r_median`] samples and sorts `k(n)` elements, cuts the sample into
//! buckets around its median and funnels every other element through the
//! bucket cascade from the outside in. Whatever survives the innermost
//! buckets becomes a median candidate, and the candidates are handled
//! recursively.
//!
//! Neither algorithm assumes its halvers or samples behave: each result is
//! checked against the pivots it relied on, and a failed check falls back
//! to a slower exact path. Both return the lower median for even sizes.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::{DummyPlacement, ElementId, Ledger, Oracle, OracleMode, PaddedOracle, Session};
use crate::minimum::{floor_two_thirds_power, sample_front};
use crate::networks::{build_halver, network_sort, HalverVariant};

/// Inputs up to this size are sorted outright.
pub const DET_BASE_CASE: usize = 16;

fn log2(n: usize) -> f64 {
    (n as f64).log2()
}

/// 0-based position of the lower median in a sorted sequence of `len`.
fn lower_median_index(len: usize) -> usize {
    (len + 1) / 2 - 1
}

fn sorted_median(xs: &[ElementId], s: &mut Session<'_>) -> Result<ElementId> {
    if xs.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(network_sort(xs, s)?[lower_median_index(xs.len())])
}

/// Cascade length `2 * floor(log log m / 2)`.
pub fn stage_count(m: usize) -> usize {
    if m < 4 {
        return 0;
    }
    2 * (log2(m).log2() / 2.0).floor() as usize
}

/// One halver pass; smaller elements drift to the front. Random halvers need
/// an even width, so an odd last element stays where it is.
fn halve(xs: &[ElementId], variant: HalverVariant, s: &mut Session<'_>) -> Result<Vec<ElementId>> {
    match variant {
        HalverVariant::ExactSort => network_sort(xs, s),
        HalverVariant::RandomMatching { .. } => {
            let even = xs.len() & !1;
            let mut out = build_halver(even, variant)?.execute(s, &xs[..even])?;
            out.extend_from_slice(&xs[even..]);
            Ok(out)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

/// Stages `S_1..S_k` starting from `first`. Each stage is the left or the
/// right half of the halved previous stage; the right cascade keeps the left
/// half after odd stages, the left cascade mirrors that.
fn cascade(
    first: Vec<ElementId>,
    k: usize,
    side: Side,
    variant: HalverVariant,
    s: &mut Session<'_>,
) -> Result<Vec<Vec<ElementId>>> {
    let mut stages = vec![first];
    for i in 1..k {
        let cur = stages.last().expect("non-empty");
        let out = halve(cur, variant, s)?;
        let h = (cur.len() + 1) / 2;
        let keep_left = (i % 2 == 1) == (side == Side::Right);
        let next = if keep_left { out[..h].to_vec() } else { out[out.len() - h..].to_vec() };
        stages.push(next);
    }
    Ok(stages)
}

/// The middle `ceil(q/2)` of a sorted sequence of length `q`.
fn middle_half(sorted: &[ElementId]) -> &[ElementId] {
    let h = (sorted.len() + 1) / 2;
    let start = (sorted.len() - h) / 2;
    &sorted[start..start + h]
}

/// Ranks (1-based) of `xs` within `xs`, from uncounted oracle probes.
fn probe_ranks(xs: &[ElementId], s: &mut Session<'_>) -> Result<HashMap<ElementId, usize>> {
    let mut sorted = xs.to_vec();
    let mut failure = None;
    sorted.sort_by(|&a, &b| {
        if a == b {
            return std::cmp::Ordering::Equal;
        }
        match s.probe_unrecorded(a, b) {
            Ok(true) => std::cmp::Ordering::Less,
            Ok(false) => std::cmp::Ordering::Greater,
            Err(e) => {
                failure.get_or_insert(e);
                std::cmp::Ordering::Equal
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(sorted.into_iter().enumerate().map(|(r, x)| (x, r + 1)).collect())
}

/// Diagnostics for one round of [`det_median`]. Rank fields are filled only
/// under a value-backed oracle and are computed without charging the ledger.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTrace {
    pub size: usize,
    pub stages: usize,
    pub stage_sizes: Vec<usize>,
    pub pivots: usize,
    pub marked_left: usize,
    pub marked_right: usize,
    pub discarded_pairs: usize,
    pub set_aside: usize,
    /// Elements of each right-cascade stage `S_{i+1}` that an exact halver
    /// would have put on the other side of `S_i`.
    pub stage_mistakes: Option<Vec<usize>>,
    /// Lowest and highest rank, within this round's set, of the right pivots.
    pub right_pivot_ranks: Option<(usize, usize)>,
    pub left_pivot_ranks: Option<(usize, usize)>,
}

fn rank_span(pivots: &[ElementId], ranks: &HashMap<ElementId, usize>) -> (usize, usize) {
    let rs = pivots.iter().map(|p| ranks[p]);
    (rs.clone().min().unwrap_or(0), rs.max().unwrap_or(0))
}

fn stage_mistakes(
    stages: &[Vec<ElementId>],
    side: Side,
    s: &mut Session<'_>,
) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(stages.len().saturating_sub(1));
    for (i, pair) in stages.windows(2).enumerate() {
        let (cur, next) = (&pair[0], &pair[1]);
        let ranks = probe_ranks(cur, s)?;
        let keep_left = ((i + 1) % 2 == 1) == (side == Side::Right);
        let misplaced = next
            .iter()
            .filter(|x| {
                let r = ranks[x];
                if keep_left { r > next.len() } else { r <= cur.len() - next.len() }
            })
            .count();
        out.push(misplaced);
    }
    Ok(out)
}

/// Deterministic lower median.
pub fn det_median(
    xs: &[ElementId],
    variant: HalverVariant,
    s: &mut Session<'_>,
) -> Result<ElementId> {
    det_median_inner(xs, variant, s, None)
}

/// [`det_median`] plus one [`RoundTrace`] per filtering round.
pub fn det_median_traced(
    xs: &[ElementId],
    variant: HalverVariant,
    s: &mut Session<'_>,
) -> Result<(ElementId, Vec<RoundTrace>)> {
    let mut trace = Vec::new();
    let m = det_median_inner(xs, variant, s, Some(&mut trace))?;
    Ok((m, trace))
}

fn det_median_inner(
    xs: &[ElementId],
    variant: HalverVariant,
    s: &mut Session<'_>,
    mut trace: Option<&mut Vec<RoundTrace>>,
) -> Result<ElementId> {
    let n = xs.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let stop = if n < 4 { n as f64 } else { n as f64 / log2(n) };
    let diagnose = trace.is_some() && s.oracle_mode() == OracleMode::ValueBacked;

    let mut survivors = xs.to_vec();
    let mut kept = Vec::new();
    // (largest left pivot, smallest right pivot) of every round
    let mut pivot_bounds = Vec::new();
    loop {
        let m = survivors.len();
        let k = stage_count(m);
        if m <= DET_BASE_CASE || m as f64 <= stop || k < 2 {
            break;
        }
        // both first stages avoid the median itself, so equal-sized
        // cascades keep the median of what remains
        let h = (m - 1) / 2;
        let out = halve(&survivors, variant, s)?;
        let right = cascade(out[m - h..].to_vec(), k, Side::Right, variant, s)?;
        let left = cascade(out[..h].to_vec(), k, Side::Left, variant, s)?;
        let right_k = network_sort(right.last().expect("k >= 1"), s)?;
        let left_k = network_sort(left.last().expect("k >= 1"), s)?;
        let right_pivots = middle_half(&right_k);
        let left_pivots = middle_half(&left_k);

        let round_ranks = if diagnose { Some(probe_ranks(&survivors, s)?) } else { None };

        let aside: HashSet<ElementId> = right_k.iter().chain(&left_k).copied().collect();
        let mut marked_right = Vec::new();
        let mut marked_left = Vec::new();
        let mut rest = Vec::new();
        let candidates = survivors.iter().copied().filter(|y| !aside.contains(y));
        for (idx, y) in candidates.enumerate() {
            if s.less(right_pivots[idx % right_pivots.len()], y)? {
                marked_right.push(y);
            } else if s.less(y, left_pivots[idx % left_pivots.len()])? {
                marked_left.push(y);
            } else {
                rest.push(y);
            }
        }
        let pairs = marked_left.len().min(marked_right.len());
        rest.extend_from_slice(&marked_left[pairs..]);
        rest.extend_from_slice(&marked_right[pairs..]);

        if let Some(trace) = trace.as_deref_mut() {
            let (stage_mistakes, right_pivot_ranks, left_pivot_ranks) = match &round_ranks {
                Some(ranks) => (
                    Some(stage_mistakes(&right, Side::Right, s)?),
                    Some(rank_span(right_pivots, ranks)),
                    Some(rank_span(left_pivots, ranks)),
                ),
                None => (None, None, None),
            };
            trace.push(RoundTrace {
                size: m,
                stages: k,
                stage_sizes: right.iter().map(Vec::len).collect(),
                pivots: right_pivots.len(),
                marked_left: marked_left.len(),
                marked_right: marked_right.len(),
                discarded_pairs: pairs,
                set_aside: aside.len(),
                stage_mistakes,
                right_pivot_ranks,
                left_pivot_ranks,
            });
        }

        pivot_bounds.push((*left_pivots.last().expect("non-empty"), right_pivots[0]));
        kept.extend(right_k);
        kept.extend(left_k);
        survivors = rest;
    }
    kept.extend(survivors);
    let median = sorted_median(&kept, s)?;

    // Exact halvers put every pivot on the correct side by construction.
    // Approximate ones might not, and then a discarded pair may straddle the
    // wrong element, so the pivots get checked against the answer. The
    // answer may be a pivot itself, which still bounds the marked elements.
    if matches!(variant, HalverVariant::RandomMatching { .. }) {
        for (left_max, right_min) in pivot_bounds {
            let below = left_max == median || s.less(left_max, median)?;
            if !(below && (median == right_min || s.less(median, right_min)?)) {
                return sorted_median(xs, s);
            }
        }
    }
    Ok(median)
}

/// Rank-`t` element (1-based) via [`det_median`] on the input padded with
/// free dummies: below every element when `t <= n/2`, above otherwise. The
/// dummies live in virtual id space, so the ledger never charges them.
pub fn det_select(
    xs: &[ElementId],
    t: usize,
    variant: HalverVariant,
    oracle: &mut dyn Oracle,
    ledger: &mut Ledger,
) -> Result<ElementId> {
    let n = xs.len();
    if t == 0 || t > n {
        return Err(Error::RankOutOfRange { rank: t, len: n });
    }
    let pad = n + 1 - 2 * t.min(n + 1 - t);
    if pad == 0 {
        let mut s = Session::new(oracle, ledger);
        return det_median(xs, variant, &mut s);
    }
    let placement = if 2 * t <= n { DummyPlacement::BelowAll } else { DummyPlacement::AboveAll };
    let first = ledger.add_virtual(pad);
    let mut padded = PaddedOracle::new(oracle, first.0, placement);
    let mut all = xs.to_vec();
    all.extend((first.0..first.0 + pad).map(ElementId));
    let mut s = Session::new(&mut padded, ledger);
    det_median(&all, variant, &mut s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// `k = n^(2/3)`, `d = n^(1/12)`: cheap for the median, costly for the
    /// innermost pivots.
    LogLog,
    /// `k = n / log n`, `d = log n`: every element stays polylogarithmic.
    SubLog,
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::LogLog => "loglog",
            Preset::SubLog => "sublog",
        })
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "loglog" => Ok(Preset::LogLog),
            "sublog" => Ok(Preset::SubLog),
            other => Err(crate::error::invalid("preset", format!("unknown preset `{other}`"))),
        }
    }
}

/// Sample size `k(n)` and bucket growth `d(n)` for [`r_median`].
#[derive(Debug, Clone, Copy)]
pub struct SelectionParams {
    name: &'static str,
    k: fn(usize) -> usize,
    d: fn(usize) -> f64,
}

fn loglog_k(n: usize) -> usize {
    floor_two_thirds_power(n)
}

fn loglog_d(n: usize) -> f64 {
    (n as f64).powf(1.0 / 12.0)
}

fn sublog_k(n: usize) -> usize {
    if n < 2 { n } else { (n as f64 / log2(n)).floor() as usize }
}

fn sublog_d(n: usize) -> f64 {
    log2(n.max(1))
}

impl SelectionParams {
    pub const LOGLOG: SelectionParams = SelectionParams { name: "loglog", k: loglog_k, d: loglog_d };
    pub const SUBLOG: SelectionParams = SelectionParams { name: "sublog", k: sublog_k, d: sublog_d };

    pub fn custom(name: &'static str, k: fn(usize) -> usize, d: fn(usize) -> f64) -> Self {
        SelectionParams { name, k, d }
    }

    pub fn preset(p: Preset) -> Self {
        match p {
            Preset::LogLog => Self::LOGLOG,
            Preset::SubLog => Self::SUBLOG,
        }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    /// `k(n)` clamped to `1..=n`.
    pub fn sample_size(&self, n: usize) -> usize {
        (self.k)(n).clamp(1, n.max(1))
    }

    /// `d(n)`, at least 2.
    pub fn growth(&self, n: usize) -> f64 {
        (self.d)(n).max(2.0)
    }
}

/// Pivots of one bucket, handed out least-loaded first. A pivot, once
/// chosen, serves `window` consecutive comparisons before the pool is asked
/// again.
#[derive(Debug, Default)]
struct Bucket {
    members: Vec<ElementId>,
    marked: Vec<bool>,
    pool: BinaryHeap<Reverse<(u64, usize)>>,
    current: Option<usize>,
    uses_left: usize,
}

impl Bucket {
    fn from_sample(pivots: &[ElementId], ledger: &Ledger) -> Self {
        let mut b = Bucket::default();
        for &p in pivots {
            b.add(p, false, ledger);
        }
        b
    }

    fn add(&mut self, x: ElementId, marked: bool, ledger: &Ledger) {
        self.pool.push(Reverse((ledger.count(x), self.members.len())));
        self.members.push(x);
        self.marked.push(marked);
    }

    fn discard(&mut self, x: ElementId) {
        self.members.push(x);
        self.marked.push(true);
    }

    fn pivot(&mut self, window: usize, ledger: &Ledger) -> (ElementId, bool) {
        if self.uses_left == 0 || self.current.is_none() {
            if let Some(cur) = self.current.take() {
                self.pool.push(Reverse((ledger.count(self.members[cur]), cur)));
            }
            let Reverse((_, idx)) = self.pool.pop().expect("filter buckets are never empty");
            self.current = Some(idx);
            self.uses_left = window;
        }
        self.uses_left -= 1;
        let idx = self.current.expect("set above");
        (self.members[idx], self.marked[idx])
    }
}

/// How one [`r_median`] level ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LevelOutcome {
    /// Too small to bucket: the whole input was sorted.
    Direct,
    /// Candidates below `log^4 N`: sorted.
    BaseCase,
    Recursed,
    FallbackImbalanced,
    FallbackNoProgress,
    /// The recursive answer did not sit strictly between the innermost
    /// sample pivots.
    FallbackUncertified,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RMedianLevel {
    pub n: usize,
    pub sample: usize,
    pub buckets: usize,
    pub left: usize,
    pub right: usize,
    pub center: usize,
    pub recursed_on: usize,
    pub outcome: LevelOutcome,
}

/// Randomized lower median. Always correct; only the costs are random.
pub fn r_median<R: Rng + ?Sized>(
    xs: &[ElementId],
    params: &SelectionParams,
    s: &mut Session<'_>,
    rng: &mut R,
) -> Result<ElementId> {
    let mut levels = Vec::new();
    r_median_traced_into(xs, params, s, rng, &mut levels)
}

/// [`r_median`] plus one record per recursion level, outermost first.
pub fn r_median_traced<R: Rng + ?Sized>(
    xs: &[ElementId],
    params: &SelectionParams,
    s: &mut Session<'_>,
    rng: &mut R,
) -> Result<(ElementId, Vec<RMedianLevel>)> {
    let mut levels = Vec::new();
    let m = r_median_traced_into(xs, params, s, rng, &mut levels)?;
    Ok((m, levels))
}

fn r_median_traced_into<R: Rng + ?Sized>(
    xs: &[ElementId],
    params: &SelectionParams,
    s: &mut Session<'_>,
    rng: &mut R,
    levels: &mut Vec<RMedianLevel>,
) -> Result<ElementId> {
    if xs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let base = log2(xs.len().max(2)).powi(4);
    r_median_level(xs, params, base, s, rng, levels)
}

fn r_median_level<R: Rng + ?Sized>(
    xs: &[ElementId],
    params: &SelectionParams,
    base_case: f64,
    s: &mut Session<'_>,
    rng: &mut R,
    levels: &mut Vec<RMedianLevel>,
) -> Result<ElementId> {
    let n = xs.len();
    let slot = levels.len();
    levels.push(RMedianLevel {
        n,
        sample: 0,
        buckets: 0,
        left: 0,
        right: 0,
        center: 0,
        recursed_on: 0,
        outcome: LevelOutcome::Direct,
    });

    let k = params.sample_size(n);
    let half = k / 2;
    let lg = log2(n.max(2));
    let root = (k as f64 * lg).sqrt();
    let n0 = (2.0 * root).ceil() as usize;
    if n0 >= half {
        return sorted_median(xs, s);
    }

    // sampling phase
    let mut pool = xs.to_vec();
    sample_front(&mut pool, k, rng);
    let (sample, rest) = pool.split_at_mut(k);
    let sorted = network_sort(sample, s)?;

    // n_0, n_1, ..., n_b with b the first index reaching half the sample,
    // and at least 2 so the cascade has a filter level
    let d = params.growth(n);
    let mut widths = vec![n0, (3.0 * root).ceil() as usize];
    while *widths.last().expect("non-empty") < half || widths.len() < 3 {
        let next = (d * *widths.last().expect("non-empty") as f64).ceil() as usize;
        widths.push(next);
    }
    let b = widths.iter().position(|&w| w >= half).expect("pushed above").max(2);
    let mut left: Vec<Bucket> = (0..=b).map(|_| Bucket::default()).collect();
    let mut right: Vec<Bucket> = (0..=b).map(|_| Bucket::default()).collect();
    for i in 1..=b {
        let lo = if i == b { 0 } else { half.saturating_sub(widths[i]) };
        let hi = half.saturating_sub(widths[i - 1]);
        left[i] = Bucket::from_sample(&sorted[lo..hi.max(lo)], s.ledger());
        let lo = (half + widths[i - 1]).min(k);
        let hi = if i == b { k } else { (half + widths[i]).min(k) };
        right[i] = Bucket::from_sample(&sorted[lo..hi.max(lo)], s.ledger());
    }
    let mut center: Vec<ElementId> = sorted[half - n0..half + n0].to_vec();
    let s_lo = sorted[half - n0 - 1];
    let s_hi = sorted[half + n0];

    // probing phase
    let window = d.round().max(1.0) as usize;
    rest.shuffle(rng);
    'probe: for &x in rest.iter() {
        for j in (1..b).rev() {
            let (p, marked) = left[j].pivot(window, s.ledger());
            if s.less(x, p)? {
                let c = if marked { 1 } else { 2 };
                if j + c < b {
                    left[j + c].add(x, true, s.ledger());
                } else {
                    left[b].discard(x);
                }
                continue 'probe;
            }
            let (p, marked) = right[j].pivot(window, s.ledger());
            if s.less(p, x)? {
                let c = if marked { 1 } else { 2 };
                if j + c < b {
                    right[j + c].add(x, true, s.ledger());
                } else {
                    right[b].discard(x);
                }
                continue 'probe;
            }
        }
        center.push(x);
    }

    let n_left: usize = left.iter().map(|b| b.members.len()).sum();
    let n_right: usize = right.iter().map(|b| b.members.len()).sum();
    let center_before = center.len();
    let fallback = |outcome, s: &mut Session<'_>, levels: &mut Vec<RMedianLevel>| {
        levels[slot].outcome = outcome;
        det_median(xs, HalverVariant::ExactSort, s)
    };
    levels[slot] = RMedianLevel {
        n,
        sample: k,
        buckets: b,
        left: n_left,
        right: n_right,
        center: center_before,
        recursed_on: 0,
        outcome: LevelOutcome::Recursed,
    };
    if 2 * n_left.max(n_right) > n {
        return fallback(LevelOutcome::FallbackImbalanced, s, levels);
    }

    // move the surplus side's elements into the candidates, outermost first
    let (surplus, extra) = if n_left >= n_right {
        (&left, n_left - n_right)
    } else {
        (&right, n_right - n_left)
    };
    center.extend(surplus.iter().rev().flat_map(|b| b.members.iter().copied()).take(extra));
    levels[slot].recursed_on = center.len();
    if center.len() >= n {
        return fallback(LevelOutcome::FallbackNoProgress, s, levels);
    }

    let candidate = if (center.len() as f64) < base_case {
        levels[slot].outcome = LevelOutcome::BaseCase;
        sorted_median(&center, s)?
    } else {
        r_median_level(&center, params, base_case, s, rng, levels)?
    };

    // Every discarded element is at most s_lo or at least s_hi, and the two
    // sides were balanced, so a candidate strictly between them is the
    // median of the whole input.
    let above_lo = candidate == s_lo || s.less(s_lo, candidate)?;
    let below_hi = candidate == s_hi || s.less(candidate, s_hi)?;
    if above_lo && below_hi {
        Ok(candidate)
    } else {
        fallback(LevelOutcome::FallbackUncertified, s, levels)
    }
}
