//! Browser bindings for three interactive views: a comparator network with
//! a sample input flowing through it, a histogram of how often the minimum
//! gets compared, and a per-element count profile of one mergesort run.
//!
//! Every export returns a JSON string. The `*_json` functions hold the logic
//! and are plain Rust so they can be tested natively.

use rand::seq::SliceRandom;
use serde::Serialize;
use wasm_bindgen::prelude::*;

use fragile_core::harness::{make_input, run_trial, trial_rng, Algorithm, ExperimentConfig, InputKind};
use fragile_core::ledger::ids;
use fragile_core::networks::{batcher_odd_even, build_halver, measure_halver_epsilon, HalverVariant};
use fragile_core::sorting::{mergesort, MergeVariant};
use fragile_core::{Error, Ledger, Session, ValueOracle};

/// Widths above this are refused; the page draws every wire.
pub const MAX_DRAWN_WIDTH: usize = 64;
/// Halvers up to this width get their epsilon measured exhaustively.
const EPSILON_WIDTH: usize = 16;
pub const MAX_TRIALS: usize = 20_000;
pub const MAX_PROFILE_SIZE: usize = 1 << 14;

fn to_js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

fn too_large(field: &str, limit: usize) -> Error {
    Error::InvalidConfig { field: field.into(), reason: format!("the demo caps this at {limit}") }
}

#[derive(Serialize)]
struct NetworkView {
    width: usize,
    depth: usize,
    size: usize,
    layers: Vec<Vec<(usize, usize)>>,
    /// Wire values before the first layer and after each layer.
    states: Vec<Vec<u32>>,
    epsilon: Option<f64>,
}

/// `kind` is `batcher` or `halver`; a halver with `rounds == 0` is exact.
pub fn network_json(kind: &str, n: usize, rounds: usize, seed: u64) -> Result<String, Error> {
    if n > MAX_DRAWN_WIDTH {
        return Err(too_large("n", MAX_DRAWN_WIDTH));
    }
    let net = match kind {
        "batcher" => batcher_odd_even(n)?,
        "halver" if rounds == 0 => build_halver(n, HalverVariant::ExactSort)?,
        "halver" => build_halver(n, HalverVariant::RandomMatching { rounds, seed })?,
        other => {
            return Err(Error::InvalidConfig { field: "kind".into(), reason: format!("unknown kind `{other}`") })
        }
    };
    let (depth, size) = net.depth_and_size()?;
    let mut wires: Vec<u32> = (1..=n as u32).collect();
    wires.shuffle(&mut trial_rng(seed, n, 0));
    let mut states = vec![wires.clone()];
    for layer in net.layers() {
        for c in layer {
            if wires[c.low] > wires[c.high] {
                wires.swap(c.low, c.high);
            }
        }
        states.push(wires.clone());
    }
    let epsilon = if kind == "halver" && n <= EPSILON_WIDTH { Some(measure_halver_epsilon(&net)?) } else { None };
    let view = NetworkView {
        width: n,
        depth,
        size,
        layers: net.layers().iter().map(|l| l.iter().map(|c| (c.low, c.high)).collect()).collect(),
        states,
        epsilon,
    };
    Ok(serde_json::to_string(&view)?)
}

#[derive(Serialize)]
struct Histogram {
    algorithm: String,
    n: usize,
    trials: usize,
    /// `counts[f]` is the number of trials in which the minimum took part in
    /// `f` comparisons.
    counts: Vec<usize>,
    mean: f64,
    max: u64,
    /// The largest count any other element reached, averaged over trials.
    mean_rest: f64,
}

/// `algorithm` is `tournament`, `sample-min` or `tree-min`.
pub fn minimum_histogram_json(algorithm: &str, n: usize, trials: usize, seed: u64, delta: usize) -> Result<String, Error> {
    if trials > MAX_TRIALS {
        return Err(too_large("trials", MAX_TRIALS));
    }
    let alg: Algorithm = algorithm.parse()?;
    if !matches!(alg, Algorithm::Tournament | Algorithm::SampleMin | Algorithm::TreeMin) {
        return Err(Error::InvalidConfig { field: "algorithm".into(), reason: format!("{alg} does not find a minimum") });
    }
    let mut cfg = ExperimentConfig::new(alg, vec![n], trials, seed);
    cfg.delta = Some(delta);
    cfg.validate()?;
    let samples = (0..trials).map(|t| run_trial(&cfg, n, t)).collect::<Result<Vec<_>, _>>()?;
    let fs: Vec<u64> = samples.iter().map(|s| s.f_target.unwrap_or(0)).collect();
    let max = fs.iter().copied().max().unwrap_or(0);
    let mut counts = vec![0; max as usize + 1];
    for &f in &fs {
        counts[f as usize] += 1;
    }
    let view = Histogram {
        algorithm: alg.to_string(),
        n,
        trials,
        counts,
        mean: fs.iter().sum::<u64>() as f64 / trials as f64,
        max,
        mean_rest: samples.iter().map(|s| s.f_max_rest as f64).sum::<f64>() / trials as f64,
    };
    Ok(serde_json::to_string(&view)?)
}

#[derive(Serialize)]
struct Profile {
    n: usize,
    values: Vec<u64>,
    /// Comparisons per element, indexed by input position.
    counts: Vec<u64>,
    work: u64,
    f_max: u64,
}

/// `variant` is `linear` or `exponential`; `input` is `random`, `sorted`,
/// `reverse` or `worst-linear`.
pub fn mergesort_profile_json(variant: &str, n: usize, input: &str, seed: u64) -> Result<String, Error> {
    if n > MAX_PROFILE_SIZE {
        return Err(too_large("n", MAX_PROFILE_SIZE));
    }
    let variant = match variant {
        "linear" => MergeVariant::Linear,
        "exponential" => MergeVariant::Exponential,
        other => {
            return Err(Error::InvalidConfig { field: "variant".into(), reason: format!("unknown merge `{other}`") })
        }
    };
    let kind: InputKind = input.parse()?;
    let values = make_input(kind, n, &mut trial_rng(seed, n, 0));
    let mut oracle = ValueOracle::new(&values);
    let mut ledger = Ledger::new(n);
    mergesort(&ids(n), variant, &mut Session::new(&mut oracle, &mut ledger))?;
    let view = Profile {
        n,
        counts: ledger.counts().to_vec(),
        work: ledger.work(),
        f_max: ledger.counts().iter().copied().max().unwrap_or(0),
        values,
    };
    Ok(serde_json::to_string(&view)?)
}

#[wasm_bindgen(js_name = networkLayout)]
pub fn network_layout(kind: &str, n: usize, rounds: usize, seed: u64) -> Result<String, JsError> {
    network_json(kind, n, rounds, seed).map_err(to_js)
}

#[wasm_bindgen(js_name = minimumHistogram)]
pub fn minimum_histogram(algorithm: &str, n: usize, trials: usize, seed: u64, delta: usize) -> Result<String, JsError> {
    minimum_histogram_json(algorithm, n, trials, seed, delta).map_err(to_js)
}

#[wasm_bindgen(js_name = mergesortProfile)]
pub fn mergesort_profile(variant: &str, n: usize, input: &str, seed: u64) -> Result<String, JsError> {
    mergesort_profile_json(variant, n, input, seed).map_err(to_js)
}
