//! Randomised checks of every algorithm against a plain sort of the values.

use fragile_core::ledger::{ids, ElementId, Ledger, Session, ValueOracle};
use fragile_core::minimum::{sample_minimum, tournament_minimum, tree_minimum, TreeParams};
use fragile_core::networks::{network_sort, HalverVariant};
use fragile_core::selection::{det_median, det_select, r_median, Preset, SelectionParams};
use fragile_core::sorting::{floyd_heapify, merge, mergesort, MergeVariant};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn values(max_len: usize) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(any::<u32>(), 1..=max_len)
}

fn distinct(max_len: usize) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::hash_set(any::<u32>(), 1..=max_len).prop_map(|s| s.into_iter().collect())
}

fn ranked(vs: &[u32], k: usize) -> u32 {
    let mut sorted = vs.to_vec();
    sorted.sort_unstable();
    sorted[k]
}

fn lower_median(vs: &[u32]) -> u32 {
    ranked(vs, (vs.len() + 1) / 2 - 1)
}

/// Runs `f` on all ids of `vs` and returns its result with the ledger.
fn run<T>(vs: &[u32], f: impl FnOnce(&[ElementId], &mut Session<'_>) -> T) -> (T, Ledger) {
    let mut oracle = ValueOracle::new(vs);
    let mut ledger = Ledger::new(vs.len());
    let out = f(&ids(vs.len()), &mut Session::new(&mut oracle, &mut ledger));
    (out, ledger)
}

fn as_values(vs: &[u32], out: &[ElementId]) -> Vec<u32> {
    out.iter().map(|e| vs[e.0]).collect()
}

fn sorted(vs: &[u32]) -> Vec<u32> {
    let mut s = vs.to_vec();
    s.sort_unstable();
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn network_sort_matches_sort(vs in values(70)) {
        let (out, ledger) = run(&vs, |xs, s| network_sort(xs, s).unwrap());
        prop_assert_eq!(as_values(&vs, &out), sorted(&vs));
        prop_assert!(ledger.is_conserved());
    }

    #[test]
    fn mergesort_matches_sort(vs in values(200), exponential in any::<bool>()) {
        let variant = if exponential { MergeVariant::Exponential } else { MergeVariant::Linear };
        let (out, ledger) = run(&vs, |xs, s| mergesort(xs, variant, s).unwrap());
        prop_assert_eq!(as_values(&vs, &out), sorted(&vs));
        prop_assert!(ledger.is_conserved());
    }

    #[test]
    fn merge_of_sorted_runs_is_sorted(mut a in values(60), mut b in values(60), exponential in any::<bool>()) {
        a.sort_unstable();
        b.sort_unstable();
        let vs: Vec<u32> = a.iter().chain(&b).copied().collect();
        let variant = if exponential { MergeVariant::Exponential } else { MergeVariant::Linear };
        let (out, ledger) = run(&vs, |xs, s| merge(&xs[..a.len()], &xs[a.len()..], variant, s).unwrap());
        prop_assert_eq!(as_values(&vs, &out), sorted(&vs));
        prop_assert!(ledger.is_conserved());
    }

    #[test]
    fn heapify_orders_a_permutation(vs in values(200)) {
        let (heap, ledger) = run(&vs, |xs, s| floyd_heapify(xs, s).unwrap());
        prop_assert!(heap.is_heap_ordered(&vs));
        let mut slots: Vec<usize> = heap.slots.iter().map(|e| e.0).collect();
        slots.sort_unstable();
        prop_assert_eq!(slots, (0..vs.len()).collect::<Vec<_>>());
        prop_assert!(ledger.is_conserved());
    }

    #[test]
    fn minimum_finders_agree_with_min(vs in distinct(300), seed in any::<u64>(), delta in 2usize..20) {
        let want = *vs.iter().min().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (t, l1) = run(&vs, |xs, s| tournament_minimum(xs, s).unwrap().minimum);
        let (m, l2) = run(&vs, |xs, s| sample_minimum(xs, s, &mut rng).unwrap().minimum);
        let params = TreeParams::new(delta).unwrap();
        let (r, l3) = run(&vs, |xs, s| tree_minimum(xs, params, s, &mut rng).unwrap());
        prop_assert_eq!(vs[t.0], want);
        prop_assert_eq!(vs[m.0], want);
        prop_assert_eq!(vs[r.0], want);
        prop_assert!(l1.is_conserved() && l2.is_conserved() && l3.is_conserved());
    }

    #[test]
    fn det_median_is_lower_median(vs in distinct(120), rounds in 1usize..6, seed in any::<u64>(), exact in any::<bool>()) {
        let variant = if exact { HalverVariant::ExactSort } else { HalverVariant::RandomMatching { rounds, seed } };
        let (m, ledger) = run(&vs, |xs, s| det_median(xs, variant, s).unwrap());
        prop_assert_eq!(vs[m.0], lower_median(&vs));
        prop_assert!(ledger.is_conserved());
    }

    #[test]
    fn det_select_returns_rank(vs in distinct(80), pick in any::<prop::sample::Index>()) {
        let t = pick.index(vs.len()) + 1;
        let mut oracle = ValueOracle::new(&vs);
        let mut ledger = Ledger::new(vs.len());
        let got = det_select(&ids(vs.len()), t, HalverVariant::ExactSort, &mut oracle, &mut ledger).unwrap();
        prop_assert_eq!(vs[got.0], ranked(&vs, t - 1));
        prop_assert!(ledger.is_conserved());
    }

    #[test]
    fn r_median_is_lower_median(vs in distinct(3000), seed in any::<u64>(), loglog in any::<bool>()) {
        let params = SelectionParams::preset(if loglog { Preset::LogLog } else { Preset::SubLog });
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (m, ledger) = run(&vs, |xs, s| r_median(xs, &params, s, &mut rng).unwrap());
        prop_assert_eq!(vs[m.0], lower_median(&vs));
        prop_assert!(ledger.is_conserved());
    }
}

/// A random halver can leave the lower median of the kept set on a pivot.
#[test]
fn det_median_answer_may_be_a_pivot() {
    let vs: Vec<u32> = vec![
        2049090206, 1320881243, 1956377589, 418238246, 948284807, 537991553, 4291360459, 3501177733,
        3430428649, 3545023955, 3779907056, 29134425, 913948809, 2176975961, 3736471617, 2631250033,
        2163912533, 1978630924, 691522203, 3459595852, 1056162114, 2348779130, 1854124157, 491739151,
        3730115162, 1124008389, 3348703988, 1511124689, 2201813276, 1024114410, 2989700624, 4237479955,
        2256756480, 100664280, 3665576667, 2525816662, 2128783326, 1272715674, 724702771, 4053301296,
        215004796, 842776681, 3249956520, 3313682001, 3326214428, 2139208901, 1866627616, 1027759661,
        3965277145, 1784276439, 3030171778, 1700828306, 1173835144, 4075808527, 3609650627, 3134271188,
        203150570, 3992375185, 1599823751, 865694621, 292286053, 2111477638, 3064943117, 1174651407,
        4234457212, 4117082904, 2204838603,
    ];
    let variant = HalverVariant::RandomMatching { rounds: 5, seed: 14409543106726882791 };
    let (m, ledger) = run(&vs, |xs, s| det_median(xs, variant, s).unwrap());
    assert_eq!(vs[m.0], lower_median(&vs));
    assert!(ledger.is_conserved());
}
