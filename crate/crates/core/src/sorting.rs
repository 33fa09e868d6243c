//! Mergesort with linear or exponential merging, and Floyd's bottom-up heap
//! construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::{ElementId, Session};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MergeVariant {
    /// The textbook two-finger merge.
    Linear,
    /// Alternating galloping: the head of one run gallops through the other
    /// (probing positions 1, 2, 4, ...) and then binary-searches the last
    /// gap, after which the two runs swap roles.
    Exponential,
}

/// Merges two runs that are sorted under the session's oracle.
pub fn merge(
    a: &[ElementId],
    b: &[ElementId],
    variant: MergeVariant,
    s: &mut Session<'_>,
) -> Result<Vec<ElementId>> {
    match variant {
        MergeVariant::Linear => merge_linear(a, b, s),
        MergeVariant::Exponential => merge_exponential(a, b, s),
    }
}

fn merge_linear(a: &[ElementId], b: &[ElementId], s: &mut Session<'_>) -> Result<Vec<ElementId>> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if s.less(b[j], a[i])? {
            out.push(b[j]);
            j += 1;
        } else {
            out.push(a[i]);
            i += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Ok(out)
}

fn merge_exponential(
    a: &[ElementId],
    b: &[ElementId],
    s: &mut Session<'_>,
) -> Result<Vec<ElementId>> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut head, mut other) = (a, b);
    while !head.is_empty() && !other.is_empty() {
        let x = head[0];
        let taken = gallop(x, other, s)?;
        out.extend_from_slice(&other[..taken]);
        out.push(x);
        let rest_of_head = &head[1..];
        head = &other[taken..];
        other = rest_of_head;
    }
    out.extend_from_slice(head);
    out.extend_from_slice(other);
    Ok(out)
}

/// Number of leading elements of `run` that are smaller than `x`.
///
/// Probes `run[2^i - 1]` for `i = 0, 1, ...` until one exceeds `x`; past the
/// end of the run sits an implicit +inf that costs nothing. The gap between
/// the last two probes is then binary-searched.
fn gallop(x: ElementId, run: &[ElementId], s: &mut Session<'_>) -> Result<usize> {
    // `lo` elements are known smaller, position `hi` (1-based) is known larger
    let mut lo = 0;
    let mut hi = run.len() + 1;
    let mut probe = 1;
    while probe <= run.len() {
        if s.less(x, run[probe - 1])? {
            hi = probe;
            break;
        }
        lo = probe;
        probe *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if s.less(run[mid - 1], x)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// [`merge`] after checking, with uncounted probes, that both runs are
/// sorted. Reports the first out-of-order position, counting `a` then `b`.
pub fn merge_diagnostic(
    a: &[ElementId],
    b: &[ElementId],
    variant: MergeVariant,
    s: &mut Session<'_>,
) -> Result<Vec<ElementId>> {
    for (offset, run) in [(0, a), (a.len(), b)] {
        for (i, w) in run.windows(2).enumerate() {
            if s.probe_unrecorded(w[1], w[0])? {
                return Err(Error::UnsortedInput(offset + i + 1));
            }
        }
    }
    merge(a, b, variant, s)
}

/// Top-down mergesort: sorts the first `ceil(n/2)` and the last
/// `floor(n/2)` elements, then merges them.
pub fn mergesort(
    xs: &[ElementId],
    variant: MergeVariant,
    s: &mut Session<'_>,
) -> Result<Vec<ElementId>> {
    if xs.len() <= 1 {
        return Ok(xs.to_vec());
    }
    let mid = (xs.len() + 1) / 2;
    let left = mergesort(&xs[..mid], variant, s)?;
    let right = mergesort(&xs[mid..], variant, s)?;
    merge(&left, &right, variant, s)
}

/// `(n, 1, 2, ..., n-1)`: the largest value is merged last at every level,
/// so linear merging compares it against half the input.
pub fn worst_case_linear_input(n: usize) -> Vec<u64> {
    if n == 0 {
        return Vec::new();
    }
    std::iter::once(n as u64).chain(1..n as u64).collect()
}

/// Min-heap in the implicit layout: the children of slot `i` are `2i+1`
/// and `2i+2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeapArray {
    pub slots: Vec<ElementId>,
}

impl HeapArray {
    /// Heap order under `values`, indexed by element id.
    pub fn is_heap_ordered<T: Ord>(&self, values: &[T]) -> bool {
        (1..self.slots.len()).all(|c| values[self.slots[(c - 1) / 2].0] <= values[self.slots[c].0])
    }
}

/// Floyd's construction: sift down every internal node, last one first.
/// Each level of a sift costs two comparisons: the children against each
/// other, then the parent against the smaller child.
pub fn floyd_heapify(xs: &[ElementId], s: &mut Session<'_>) -> Result<HeapArray> {
    let mut slots = xs.to_vec();
    let n = slots.len();
    for start in (0..n / 2).rev() {
        let mut i = start;
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && s.less(slots[r], slots[l])? { r } else { l };
            if s.less(slots[c], slots[i])? {
                slots.swap(c, i);
                i = c;
            } else {
                break;
            }
        }
    }
    Ok(HeapArray { slots })
}
