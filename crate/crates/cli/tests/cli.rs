use std::fs;
use std::process::{Command, Output};

fn fragile(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fragile"))
        .args(args)
        .env_remove("FRAGILE_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn run_emits_a_json_report() {
    let out = fragile(&["run", "--alg", "tournament", "--n", "8", "--trials", "1"]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["per_size"][0]["n"], 8);
    assert_eq!(json["per_size"][0]["f_target"]["max"], 3);
}

#[test]
fn reruns_are_byte_identical() {
    let args = ["run", "--alg", "r-median", "--n", "500,2000", "--trials", "3", "--seed", "11"];
    assert_eq!(fragile(&args).stdout, fragile(&args).stdout);
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"algorithm":"det-select","sizes":[20,40],"rank":3,"halver":"random:6"}"#).unwrap();
    let out = fragile(&["run", "--config", cfg.to_str().unwrap(), "--n", "30", "--format", "csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.lines().skip(1).all(|l| l.starts_with("30,")));
}

#[test]
fn invalid_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"algorithm":"heapify","sizes":[8],"trials":0}"#).unwrap();
    for args in [
        vec!["run", "--config", cfg.to_str().unwrap()],
        vec!["run", "--alg", "det-select", "--n", "8"],
        vec!["run", "--alg", "bogo", "--n", "8"],
        vec!["run", "--alg", "tree-min", "--n", "8", "--delta", "1"],
        vec!["run", "--alg", "det-median", "--n", "8", "--halver", "random:0"],
        vec!["run", "--n", "8"],
    ] {
        let out = fragile(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("invalid config"), "{args:?}");
    }
}

#[test]
fn check_mode_passes_on_sound_algorithms() {
    for alg in ["tournament", "sample-min", "tree-min", "mergesort-exp", "heapify"] {
        let out = fragile(&["run", "--alg", alg, "--n", "64,1000", "--trials", "5", "--check"]);
        assert_eq!(out.status.code(), Some(0), "{alg}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn out_dir_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_fragile"))
        .args(["run", "--alg", "heapify", "--n", "16", "--seed", "4", "--format", "csv"])
        .env("FRAGILE_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written = fs::read_to_string(dir.path().join("heapify-seed4.csv")).unwrap();
    assert!(written.starts_with("n,metric,"));
}

#[test]
fn report_merge_combines_and_rejects_overlaps() {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    for (name, n) in [("a.json", "16"), ("b.json", "64,256"), ("c.json", "64")] {
        let out = fragile(&["run", "--alg", "tournament", "--n", n, "--trials", "2", "-o", &path(name)]);
        assert!(out.status.success());
    }
    let merged = fragile(&["report", "merge", &path("a.json"), &path("b.json")]);
    assert!(merged.status.success());
    let whole = fragile(&["run", "--alg", "tournament", "--n", "16,64,256", "--trials", "2"]);
    assert_eq!(stdout(&merged), stdout(&whole));
    let clash = fragile(&["report", "merge", &path("b.json"), &path("c.json")]);
    assert_eq!(clash.status.code(), Some(2));
}

#[test]
fn network_roundtrip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let text = dir.path().join("b8.txt");
    let json = dir.path().join("b8.json");
    assert!(fragile(&["network", "build", "--kind", "batcher", "--n", "8", "-o", text.to_str().unwrap()]).status.success());
    let args = ["network", "build", "--kind", "batcher", "--n", "8", "--format", "json", "-o", json.to_str().unwrap()];
    assert!(fragile(&args).status.success());
    for file in [&text, &json] {
        let stats = stdout(&fragile(&["network", "stats", "--file", file.to_str().unwrap()]));
        assert_eq!(stats, "width 8\ndepth 6\nsize 19\n");
        let verify = fragile(&["network", "verify", "--file", file.to_str().unwrap(), "--check"]);
        assert_eq!(stdout(&verify), "sorting: yes\n");
        assert!(verify.status.success());
    }
}

#[test]
fn non_sorting_network_fails_the_check() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.txt");
    fs::write(&file, "width 3 layers 1\n0 0 1\n").unwrap();
    let out = fragile(&["network", "verify", "--file", file.to_str().unwrap(), "--check"]);
    assert_eq!(stdout(&out), "sorting: no\n");
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn malformed_network_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.txt");
    fs::write(&file, "width 4 layers 1\n0 2 9\n").unwrap();
    let out = fragile(&["network", "stats", "--file", file.to_str().unwrap()]);
    assert!(!out.status.success());
}

#[test]
fn adversaries_meet_their_floors() {
    let cases: [&[&str]; 5] = [
        &["--target", "min", "--alg", "tournament", "--n", "64"],
        &["--target", "min", "--alg", "sample-min", "--n", "100", "--seed", "3"],
        &["--target", "merge", "--alg", "linear", "--n", "40"],
        &["--target", "merge", "--alg", "exponential", "--n", "40"],
        &["--target", "mergesort", "--alg", "mergesort-linear", "--n", "256"],
    ];
    for case in cases {
        let mut args = vec!["adversary", "--check"];
        args.extend_from_slice(case);
        let out = fragile(&args);
        assert_eq!(out.status.code(), Some(0), "{case:?}");
        assert!(stdout(&out).contains("forced count"));
    }
    let tour = stdout(&fragile(&["adversary", "--target", "min", "--alg", "tournament", "--n", "64"]));
    assert!(tour.contains("forced count 6\n") && tour.contains("certified"));
}
