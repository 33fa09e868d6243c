use fragile_wasm::{mergesort_profile_json, minimum_histogram_json, network_json};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn batcher_eight_layout() {
    let v = parse(network_json("batcher", 8, 0, 1).unwrap());
    assert_eq!((v["width"].as_u64(), v["depth"].as_u64(), v["size"].as_u64()), (Some(8), Some(6), Some(19)));
    assert_eq!(v["layers"][0][0], serde_json::json!([0, 1]));
    let states = v["states"].as_array().unwrap();
    assert_eq!(states.len(), 7);
    let last: Vec<u64> = states[6].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    assert_eq!(last, (1..=8).collect::<Vec<_>>());
    assert!(v["epsilon"].is_null());
}

#[test]
fn halver_layout_reports_epsilon() {
    let v = parse(network_json("halver", 8, 3, 5).unwrap());
    assert_eq!(v["depth"], 3);
    let eps = v["epsilon"].as_f64().unwrap();
    assert!((0.0..=0.5).contains(&eps));
    let exact = parse(network_json("halver", 8, 0, 5).unwrap());
    assert_eq!(exact["epsilon"].as_f64(), Some(0.0));
}

#[test]
fn network_inputs_are_checked() {
    assert!(network_json("batcher", 6, 0, 0).is_err());
    assert!(network_json("halver", 7, 2, 0).is_err());
    assert!(network_json("bitonic", 8, 0, 0).is_err());
    assert!(network_json("batcher", 128, 0, 0).is_err());
}

#[test]
fn tournament_histogram_is_a_spike() {
    let v = parse(minimum_histogram_json("tournament", 64, 50, 2, 16).unwrap());
    assert_eq!(v["max"], 6);
    assert_eq!(v["counts"][6], 50);
    assert_eq!(v["mean"].as_f64(), Some(6.0));
}

#[test]
fn sample_min_histogram_sums_to_trials() {
    let v = parse(minimum_histogram_json("sample-min", 1000, 300, 7, 16).unwrap());
    let total: u64 = v["counts"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).sum();
    assert_eq!(total, 300);
    assert!(v["max"].as_u64().unwrap() <= 30);
    assert!(minimum_histogram_json("heapify", 10, 1, 0, 16).is_err());
    assert!(minimum_histogram_json("tree-min", 10, 1, 0, 1).is_err());
}

#[test]
fn mergesort_profile_counts_balance() {
    let v = parse(mergesort_profile_json("linear", 1024, "worst-linear", 0).unwrap());
    let counts: Vec<u64> = v["counts"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).collect();
    assert_eq!(counts.iter().sum::<u64>(), 2 * v["work"].as_u64().unwrap());
    assert!(v["f_max"].as_u64().unwrap() >= 256);
    let exp = parse(mergesort_profile_json("exponential", 1024, "worst-linear", 0).unwrap());
    assert!(exp["f_max"].as_u64().unwrap() <= 400);
    assert!(mergesort_profile_json("timsort", 8, "random", 0).is_err());
    assert!(mergesort_profile_json("linear", 8, "zigzag", 0).is_err());
}
