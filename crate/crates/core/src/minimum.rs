//! Minimum finding: the balanced knockout tournament, the sampling
//! recursion that keeps the minimum's expected comparison count constant,
//! and the degree-Δ tree of sampling minima that trades the minimum's
//! fragility against everyone else's.

use rand::Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::ledger::{ElementId, Session};

// Tree nodes hand groups of Δ elements to the routines below; keeping
// those on the stack avoids an allocation per node.
const INLINE: usize = 32;
type Group = SmallVec<[ElementId; INLINE]>;

/// The smallest and, when the input has at least two elements, the second
/// smallest element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinResult {
    pub minimum: ElementId,
    pub second: Option<ElementId>,
}

#[cfg(test)]
impl MinResult {
    fn single(x: ElementId) -> Self {
        MinResult { minimum: x, second: None }
    }
}

/// Degree of the tournament tree used by [`tree_minimum`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    delta: usize,
}

impl TreeParams {
    pub fn new(delta: usize) -> Result<Self> {
        if delta < 2 {
            return Err(crate::error::invalid("delta", format!("{delta} < 2")));
        }
        Ok(TreeParams { delta })
    }

    pub fn delta(&self) -> usize {
        self.delta
    }
}

/// Plain knockout; returns the winner only. Byes go to the last element of
/// an odd round.
pub fn knockout(xs: &[ElementId], s: &mut Session<'_>) -> Result<ElementId> {
    if xs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut cur: Group = xs.iter().copied().collect();
    while cur.len() > 1 {
        let len = cur.len();
        for k in 0..len / 2 {
            cur[k] = s.order(cur[2 * k], cur[2 * k + 1])?.0;
        }
        if len % 2 == 1 {
            cur[len / 2] = cur[len - 1];
        }
        cur.truncate(len.div_ceil(2));
    }
    Ok(cur[0])
}

/// Knockout tournament followed by a playoff among the opponents the
/// winner beat. The winner plays exactly one match per round it does not
/// sit out, so for `|xs| = 2^k` it is compared exactly `k` times.
pub fn tournament_minimum(xs: &[ElementId], s: &mut Session<'_>) -> Result<MinResult> {
    if xs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut cur: Group = xs.iter().copied().collect();
    // (winner, loser) per match, in play order
    let mut matches: SmallVec<[(ElementId, ElementId); INLINE]> = SmallVec::with_capacity(xs.len());
    while cur.len() > 1 {
        let len = cur.len();
        for k in 0..len / 2 {
            let (w, l) = s.order(cur[2 * k], cur[2 * k + 1])?;
            matches.push((w, l));
            cur[k] = w;
        }
        if len % 2 == 1 {
            cur[len / 2] = cur[len - 1];
        }
        cur.truncate(len.div_ceil(2));
    }
    let winner = cur[0];
    let beaten: Group =
        matches.iter().filter(|&&(w, _)| w == winner).map(|&(_, l)| l).collect();
    let second = if beaten.is_empty() { None } else { Some(knockout(&beaten, s)?) };
    Ok(MinResult { minimum: winner, second })
}

/// Merges two (minimum, second) pairs. The overall minimum takes part in
/// exactly one comparison.
fn combine(p: MinResult, q: MinResult, s: &mut Session<'_>) -> Result<MinResult> {
    let (winner, loser) = if s.less(p.minimum, q.minimum)? { (p, q) } else { (q, p) };
    let second = match winner.second {
        Some(w2) => s.order(loser.minimum, w2)?.0,
        None => loser.minimum,
    };
    Ok(MinResult { minimum: winner.minimum, second: Some(second) })
}

/// `floor(n^(2/3))`, exactly.
pub(crate) fn floor_two_thirds_power(n: usize) -> usize {
    let sq = (n as u128) * (n as u128);
    let mut b = (sq as f64).cbrt() as u128;
    while b * b * b > sq {
        b -= 1;
    }
    while (b + 1) * (b + 1) * (b + 1) <= sq {
        b += 1;
    }
    b as usize
}

/// Moves a uniform random subset of size `k` to the front of `buf`
/// (partial Fisher-Yates).
pub(crate) fn sample_front<T, R: Rng + ?Sized>(buf: &mut [T], k: usize, rng: &mut R) {
    let n = buf.len();
    for i in 0..k.min(n) {
        let j = rng.gen_range(i..n);
        buf.swap(i, j);
    }
}

/// Randomised minimum and second minimum. The minimum is compared at most
/// `3 * ceil(log2 |xs|)` times on every run and 9 times in expectation.
pub fn sample_minimum<R: Rng + ?Sized>(
    xs: &[ElementId],
    s: &mut Session<'_>,
    rng: &mut R,
) -> Result<MinResult> {
    let n = xs.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if n <= 8 {
        return tournament_minimum(xs, s);
    }

    // buf = [ B | A \ B | X \ A ]
    let a_len = n.div_ceil(2);
    let b_len = floor_two_thirds_power(n);
    debug_assert!(b_len >= 4 && b_len <= a_len);
    let mut buf: Group = xs.iter().copied().collect();
    sample_front(&mut buf, a_len, rng);
    sample_front(&mut buf[..a_len], b_len, rng);
    let (a_part, rest) = buf.split_at(a_len);
    let (b_part, a_minus_b) = a_part.split_at(b_len);

    let from_b = sample_minimum(b_part, s, rng)?;
    let b2 = from_b.second.expect("|B| >= 4");

    let mut d = Group::new();
    for &x in a_minus_b {
        if s.less(x, b2)? {
            d.push(x);
        }
    }
    let from_a = if d.is_empty() {
        from_b
    } else {
        let from_d = sample_minimum(&d, s, rng)?;
        combine(from_d, from_b, s)?
    };

    let a2 = from_a.second.expect("A contributes two elements");
    let mut c = Group::new();
    for &x in rest {
        if s.less(x, a2)? {
            c.push(x);
        }
    }
    if c.is_empty() {
        return Ok(from_a);
    }
    let from_c = tournament_minimum(&c, s)?;
    combine(from_a, from_c, s)
}

/// Minimum via a left-packed Δ-ary tournament tree whose internal nodes
/// run [`sample_minimum`] over their children's minima. A trailing node with
/// a single child passes it up uncompared.
pub fn tree_minimum<R: Rng + ?Sized>(
    xs: &[ElementId],
    params: TreeParams,
    s: &mut Session<'_>,
    rng: &mut R,
) -> Result<ElementId> {
    if xs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut level = xs.to_vec();
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(params.delta));
        for group in level.chunks(params.delta) {
            next.push(match group {
                [only] => *only,
                _ => sample_minimum(group, s, rng)?.minimum,
            });
        }
        level = next;
    }
    Ok(level[0])
}

/// Height of the tree built by [`tree_minimum`].
pub fn tree_height(n: usize, delta: usize) -> u32 {
    let mut h = 0;
    let mut len = n;
    while len > 1 {
        len = len.div_ceil(delta);
        h += 1;
    }
    h
}
