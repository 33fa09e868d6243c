//! Comparator networks: construction, counted execution, exhaustive 0-1
//! verification, halvers and output signatures.
//!
//! A comparator moves the smaller of its two inputs to `low` and the larger
//! to `high`. `low` usually has the smaller wire index, but relabelled
//! networks may point the other way. Outputs are read by wire index: an
//! `n`-sorting network leaves the `t`-th smallest input on wire `t - 1`.
//!
//! Everything that enumerates 0-1 inputs caps the width at 24 wires (16M
//! inputs).

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::{ElementId, Session};

pub const MAX_EXHAUSTIVE_WIDTH: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Comparator {
    pub low: usize,
    pub high: usize,
}

impl Comparator {
    pub fn new(low: usize, high: usize) -> Self {
        Comparator { low, high }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparatorNetwork {
    width: usize,
    layers: Vec<Vec<Comparator>>,
}

impl ComparatorNetwork {
    pub fn empty(width: usize) -> Self {
        ComparatorNetwork { width, layers: Vec::new() }
    }

    pub fn from_layers(width: usize, layers: Vec<Vec<Comparator>>) -> Result<Self> {
        let net = ComparatorNetwork { width, layers };
        net.validate()?;
        Ok(net)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn layers(&self) -> &[Vec<Comparator>] {
        &self.layers
    }

    pub fn comparators(&self) -> impl Iterator<Item = Comparator> + '_ {
        self.layers.iter().flatten().copied()
    }

    pub fn size(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    /// Checks wire bounds and wire-disjointness within every layer.
    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![usize::MAX; self.width];
        for (l, layer) in self.layers.iter().enumerate() {
            for c in layer {
                if c.low == c.high {
                    return Err(Error::MalformedNetwork(format!(
                        "layer {l}: comparator on a single wire {}",
                        c.low
                    )));
                }
                for w in [c.low, c.high] {
                    if w >= self.width {
                        return Err(Error::MalformedNetwork(format!(
                            "layer {l}: wire {w} outside width {}",
                            self.width
                        )));
                    }
                    if seen[w] == l {
                        return Err(Error::MalformedNetwork(format!(
                            "layer {l}: wire {w} used twice"
                        )));
                    }
                    seen[w] = l;
                }
            }
        }
        Ok(())
    }

    /// Re-layers the comparators greedily: each goes into the earliest layer
    /// after the last one touching either of its wires. The layer count of
    /// the result is the longest comparator path.
    pub fn packed(&self) -> ComparatorNetwork {
        let mut ready = vec![0usize; self.width];
        let mut layers: Vec<Vec<Comparator>> = Vec::new();
        for c in self.comparators() {
            let at = ready[c.low].max(ready[c.high]);
            if at == layers.len() {
                layers.push(Vec::new());
            }
            layers[at].push(c);
            ready[c.low] = at + 1;
            ready[c.high] = at + 1;
        }
        ComparatorNetwork { width: self.width, layers }
    }

    /// `(depth, size)`; depth is the layer count after packing.
    pub fn depth_and_size(&self) -> Result<(usize, usize)> {
        self.validate()?;
        Ok((self.packed().layers.len(), self.size()))
    }

    /// Runs the network as a comparison-based algorithm: one counted
    /// comparison per comparator, layer by layer. `arrangement[w]` is the
    /// element entering on wire `w`; the result is the element leaving on
    /// each wire.
    pub fn execute(
        &self,
        s: &mut Session<'_>,
        arrangement: &[ElementId],
    ) -> Result<Vec<ElementId>> {
        if arrangement.len() != self.width {
            return Err(Error::WidthMismatch { width: self.width, got: arrangement.len() });
        }
        let mut wires = arrangement.to_vec();
        for c in self.comparators() {
            let (a, b) = (wires[c.low], wires[c.high]);
            if s.less(b, a)? {
                wires[c.low] = b;
                wires[c.high] = a;
            }
        }
        Ok(wires)
    }

    /// Uncounted simulation on plain values; equal values never swap.
    pub fn apply<T: PartialOrd + Copy>(&self, values: &mut [T]) {
        assert_eq!(values.len(), self.width, "width mismatch");
        for c in self.comparators() {
            if values[c.high] < values[c.low] {
                values.swap(c.low, c.high);
            }
        }
    }

    /// Simulation on a 0-1 input packed into the low `width` bits.
    #[inline]
    pub fn apply_bits(&self, mut bits: u32) -> u32 {
        for c in self.comparators() {
            // swap iff low holds 1 and high holds 0
            if (bits >> c.low) & 1 == 1 && (bits >> c.high) & 1 == 0 {
                bits ^= (1 << c.low) | (1 << c.high);
            }
        }
        bits
    }

    /// Renames wire `w` to `perm[w]` throughout.
    pub fn relabel(&self, perm: &[usize]) -> Result<ComparatorNetwork> {
        if perm.len() != self.width {
            return Err(Error::WidthMismatch { width: self.width, got: perm.len() });
        }
        let layers = self
            .layers
            .iter()
            .map(|layer| layer.iter().map(|c| Comparator::new(perm[c.low], perm[c.high])).collect())
            .collect();
        ComparatorNetwork::from_layers(self.width, layers)
    }

    /// `width n layers L` header followed by one `layer low high` line per
    /// comparator.
    pub fn to_text(&self) -> String {
        let mut out = format!("width {} layers {}\n", self.width, self.layers.len());
        for (l, layer) in self.layers.iter().enumerate() {
            for c in layer {
                let _ = writeln!(out, "{l} {} {}", c.low, c.high);
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<ComparatorNetwork> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("missing header".into()))?;
        let tokens: Vec<&str> = header.split_whitespace().collect();
        let (width, layer_count) = match tokens.as_slice() {
            ["width", w, "layers", l] => (parse_num(w)?, parse_num(l)?),
            _ => return Err(Error::Parse(format!("bad header `{header}`"))),
        };
        let mut layers = vec![Vec::new(); layer_count];
        for line in lines {
            let nums: Vec<usize> =
                line.split_whitespace().map(parse_num).collect::<Result<_>>()?;
            let [l, low, high] = nums[..] else {
                return Err(Error::Parse(format!("bad comparator line `{line}`")));
            };
            if l >= layer_count {
                return Err(Error::Parse(format!("layer {l} beyond declared {layer_count}")));
            }
            layers[l].push(Comparator::new(low, high));
        }
        ComparatorNetwork::from_layers(width, layers)
    }
}

fn parse_num(s: &str) -> Result<usize> {
    s.parse().map_err(|_| Error::Parse(format!("not a number: `{s}`")))
}

/// Batcher's odd-even mergesort network on `n = 2^k` wires: depth
/// `k(k+1)/2`.
pub fn batcher_odd_even(n: usize) -> Result<ComparatorNetwork> {
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(odd_even_merge_sort(n))
}

/// Odd-even mergesort for any width: the power-of-two network with every
/// comparator that touches a wire `>= n` dropped. Padding wires would hold
/// +inf and sit at the high end, so the dropped comparators never swap.
pub fn odd_even_merge_sort(n: usize) -> ComparatorNetwork {
    let mut layers = Vec::new();
    let mut layer = Vec::new();
    odd_even_visit(n, |step| {
        match step {
            Some((low, high)) => layer.push(Comparator::new(low, high)),
            None if !layer.is_empty() => layers.push(std::mem::take(&mut layer)),
            None => {}
        }
        Ok(())
    })
    .expect("visitor never fails");
    ComparatorNetwork { width: n, layers }
}

/// Walks the odd-even mergesort comparators of width `n` in layer order,
/// calling `f(Some((low, high)))` per comparator and `f(None)` at the end of
/// every layer. Lets large sorts run without materializing the network.
fn odd_even_visit<F>(n: usize, mut f: F) -> Result<()>
where
    F: FnMut(Option<(usize, usize)>) -> Result<()>,
{
    let mut p = 1;
    while p < n {
        let mut k = p;
        while k >= 1 {
            let mut j = k % p;
            while j + k < n {
                for i in 0..k.min(n - j - k) {
                    if (i + j) / (2 * p) == (i + j + k) / (2 * p) {
                        f(Some((i + j, i + j + k)))?;
                    }
                }
                j += 2 * k;
            }
            f(None)?;
            k /= 2;
        }
        p *= 2;
    }
    Ok(())
}

/// Depth of [`odd_even_merge_sort`] on `n` wires without building it.
pub fn odd_even_depth(n: usize) -> usize {
    if n < 2 {
        return 0;
    }
    let k = n.next_power_of_two().trailing_zeros() as usize;
    k * (k + 1) / 2
}

/// Sorts `xs` with an odd-even mergesort network, counting every comparator.
pub fn network_sort(xs: &[ElementId], s: &mut Session<'_>) -> Result<Vec<ElementId>> {
    let mut wires = xs.to_vec();
    odd_even_visit(xs.len(), |step| {
        if let Some((low, high)) = step {
            let (a, b) = (wires[low], wires[high]);
            if s.less(b, a)? {
                wires[low] = b;
                wires[high] = a;
            }
        }
        Ok(())
    })?;
    Ok(wires)
}

fn exhaustive_width(net: &ComparatorNetwork) -> Result<usize> {
    if net.width > MAX_EXHAUSTIVE_WIDTH {
        return Err(Error::TooWide(net.width));
    }
    Ok(net.width)
}

/// True iff the network sorts every 0-1 input, hence every input.
pub fn verify_sorting(net: &ComparatorNetwork) -> Result<bool> {
    net.validate()?;
    let n = exhaustive_width(net)?;
    let full = (1u64 << n) - 1;
    for input in 0..(1u64 << n) {
        let ones = input.count_ones() as usize;
        let want = (full ^ ((1u64 << (n - ones)) - 1)) as u32;
        if net.apply_bits(input as u32) != want {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HalverVariant {
    /// A full odd-even mergesort: an exact (ε = 0) halver.
    ExactSort,
    /// `rounds` layers, each a uniformly random perfect matching between the
    /// left-half and right-half wires.
    RandomMatching { rounds: usize, seed: u64 },
}

pub fn build_halver(n: usize, variant: HalverVariant) -> Result<ComparatorNetwork> {
    if n % 2 == 1 {
        return Err(Error::OddWidth(n));
    }
    match variant {
        HalverVariant::ExactSort => Ok(odd_even_merge_sort(n)),
        HalverVariant::RandomMatching { rounds, seed } => {
            if rounds == 0 {
                return Err(crate::error::invalid("rounds", "must be at least 1"));
            }
            let half = n / 2;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut right: Vec<usize> = (half..n).collect();
            let layers = (0..rounds)
                .map(|_| {
                    right.shuffle(&mut rng);
                    (0..half).map(|i| Comparator::new(i, right[i])).collect()
                })
                .collect();
            ComparatorNetwork::from_layers(n, layers)
        }
    }
}

/// Worst fraction of misplaced elements over all 0-1 inputs: zeros landing
/// in the right half when there are at most `n/2` zeros, ones landing in the
/// left half when there are at most `n/2` ones. Divided by `n`.
pub fn measure_halver_epsilon(net: &ComparatorNetwork) -> Result<f64> {
    net.validate()?;
    let n = exhaustive_width(net)?;
    if n % 2 == 1 {
        return Err(Error::OddWidth(n));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let half = n / 2;
    let left_mask = (1u32 << half) - 1;
    let right_mask = (((1u64 << n) - 1) as u32) & !left_mask;
    let mut worst = 0u32;
    for input in 0..(1u64 << n) {
        let out = net.apply_bits(input as u32);
        let ones = input.count_ones() as usize;
        if n - ones <= half {
            // zeros in the right half
            worst = worst.max((!out & right_mask).count_ones());
        }
        if ones <= half {
            worst = worst.max((out & left_mask).count_ones());
        }
    }
    Ok(worst as f64 / n as f64)
}

/// One bit per position: 0 iff the value is at most the threshold.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature(pub Vec<u8>);

pub fn signature<T: PartialOrd>(values: &[T], a: &T) -> Signature {
    Signature(values.iter().map(|v| u8::from(v > a)).collect())
}

/// Wire that carries the rank-`t` value on the identity input `1..=n`.
fn probe_selection_wire(net: &ComparatorNetwork, t: usize) -> Result<usize> {
    if t == 0 || t > net.width {
        return Err(Error::RankOutOfRange { rank: t, len: net.width });
    }
    let mut probe: Vec<u32> = (1..=net.width as u32).collect();
    net.apply(&mut probe);
    Ok(probe.iter().position(|&v| v == t as u32).expect("permutation"))
}

fn signature_without(out: &[u32], skip: usize, a: u32) -> Signature {
    Signature(
        out.iter()
            .enumerate()
            .filter(|&(w, _)| w != skip)
            .map(|(_, &v)| u8::from(v > a))
            .collect(),
    )
}

/// For each input permutation of `1..=n` and each of its `n - 1`
/// rank-neighbouring swaps, checks that the selection wire carries `t` and
/// that the signature (w.r.t. `t`) of the remaining `n - 1` outputs does not
/// change. The selection wire is the one carrying `t` on the identity input.
pub fn check_signature_invariance_on<I>(net: &ComparatorNetwork, t: usize, inputs: I) -> Result<bool>
where
    I: IntoIterator<Item = Vec<u32>>,
{
    net.validate()?;
    let n = net.width;
    let sel = probe_selection_wire(net, t)?;
    let a = t as u32;
    let run = |input: &[u32]| -> Result<Vec<u32>> {
        let mut out = input.to_vec();
        net.apply(&mut out);
        if out[sel] != a {
            return Err(Error::NotSelectionNetwork(t));
        }
        Ok(out)
    };
    for input in inputs {
        if input.len() != n {
            return Err(Error::WidthMismatch { width: n, got: input.len() });
        }
        let base = signature_without(&run(&input)?, sel, a);
        let mut pos = vec![0usize; n + 1];
        for (w, &v) in input.iter().enumerate() {
            pos[v as usize] = w;
        }
        for v in 1..n {
            let mut swapped = input.clone();
            swapped.swap(pos[v], pos[v + 1]);
            if signature_without(&run(&swapped)?, sel, a) != base {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// [`check_signature_invariance_on`] over `trials` uniformly random inputs.
pub fn check_signature_invariance(
    net: &ComparatorNetwork,
    t: usize,
    trials: usize,
    seed: u64,
) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = net.width as u32;
    let inputs = (0..trials).map(move |_| {
        let mut v: Vec<u32> = (1..=n).collect();
        v.shuffle(&mut rng);
        v
    });
    check_signature_invariance_on(net, t, inputs)
}

/// Whether wire `sel` carries the rank-`t` value on every 0-1 input.
fn selects_on_all_bit_inputs(net: &ComparatorNetwork, sel: usize, t: usize) -> bool {
    let n = net.width;
    (0..(1u64 << n)).all(|input| {
        let zeros = n - input.count_ones() as usize;
        let bit = (net.apply_bits(input as u32) >> sel) & 1;
        (bit == 0) == (zeros >= t)
    })
}

/// Output rewiring that turns an `(n, t)`-selection network into an
/// `(n, t)`-partition network: `perm[p]` is the wire read as output `p`, and
/// outputs `0..t` carry the `t` smallest inputs. Found from the signature of
/// a single probe; selection is first checked on all 0-1 inputs (or on 1000
/// random permutations past the exhaustive width cap).
pub fn selection_to_partition(net: &ComparatorNetwork, t: usize) -> Result<Vec<usize>> {
    net.validate()?;
    let sel = probe_selection_wire(net, t)?;
    let is_selection = if net.width <= MAX_EXHAUSTIVE_WIDTH {
        selects_on_all_bit_inputs(net, sel, t)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5e1ec7);
        (0..1000).all(|_| {
            let mut v: Vec<u32> = (1..=net.width as u32).collect();
            v.shuffle(&mut rng);
            net.apply(&mut v);
            v[sel] == t as u32
        })
    };
    if !is_selection {
        return Err(Error::NotSelectionNetwork(t));
    }
    let mut probe: Vec<u32> = (1..=net.width as u32).collect();
    net.apply(&mut probe);
    let sig = signature(&probe, &(t as u32));
    let mut perm: Vec<usize> = (0..net.width).filter(|&w| sig.0[w] == 0).collect();
    perm.extend((0..net.width).filter(|&w| sig.0[w] == 1));
    Ok(perm)
}

/// Whether reading outputs through `perm` puts the `t` smallest inputs
/// first, on every 0-1 input.
pub fn is_partition_rewiring(net: &ComparatorNetwork, perm: &[usize], t: usize) -> Result<bool> {
    let n = exhaustive_width(net)?;
    Ok((0..(1u64 << n)).all(|input| {
        let zeros = n - input.count_ones() as usize;
        let out = net.apply_bits(input as u32);
        let head_ones = perm[..t].iter().filter(|&&w| (out >> w) & 1 == 1).count();
        // the head holds min(zeros, t) zeros
        t - head_ones == zeros.min(t)
    }))
}
