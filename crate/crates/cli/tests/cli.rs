use std::process::{Command, Output};

use serde_json::Value;

fn cantor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cantor-cvt"))
        .args(args)
        .env_remove("CANTOR_CVT_MAX_DEPTH")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = cantor(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--output", "json"]);
    serde_json::from_str(&stdout(&all)).unwrap()
}

#[test]
fn moments_at_four_ninths() {
    let v = json(&["moments", "--r", "4/9"]);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["mean"]["fraction"], "1/2");
    assert_eq!(v["variance"]["fraction"], "5/52");
    assert_eq!(v["second_moment"]["fraction"], "9/26");
}

#[test]
fn formal_beta_distortion() {
    let text = stdout(&["distortion", "--family", "beta", "--n", "3", "--r", "formal"]);
    assert!(text.contains("(-r^5 + r^4 - r^3 + r^2)/(8r + 8)"), "{text}");
}

#[test]
fn certified_formal_distortion_needs_a_stable_window() {
    let ok = cantor(&["distortion", "--family", "alpha", "--n", "3", "--r", "formal", "--window", "0.437,0.45"]);
    assert!(ok.status.success());
    let bad = cantor(&["distortion", "--family", "alpha", "--n", "3", "--r", "formal", "--window", "0.3,0.45"]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("--window"));
}

#[test]
fn thresholds_table() {
    let v = json(&["thresholds"]);
    let list = v["thresholds"].as_array().unwrap();
    assert_eq!(list.len(), 7);
    let expected = [
        "0.4364590141",
        "0.4512271429",
        "0.4384471872",
        "0.4371985206",
        "0.4332840530",
        "0.4486234903",
        "0.4307442489",
    ];
    for (t, e) in list.iter().zip(expected) {
        assert_eq!(t["decimals"], e, "{}", t["name"]);
    }
    let csv = stdout(&["thresholds", "--output", "csv"]);
    assert_eq!(csv.lines().count(), 8);
}

#[test]
fn codebook_json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (family, n) in [("alpha", "3"), ("delta", "5"), ("beta", "6")] {
        let path = dir.path().join(format!("{family}{n}.json"));
        let record = stdout(&["codebook", "--family", family, "--n", n, "--r", "4/9", "--output", "json"]);
        std::fs::write(&path, record).unwrap();
        let direct = json(&["verify", "--family", family, "--n", n, "--r", "4/9"]);
        let loaded = json(&["verify", "--codebook", path.to_str().unwrap()]);
        assert_eq!(direct, loaded, "{family} {n}");
    }
}

#[test]
fn verify_reports_gap_witnesses() {
    let v = json(&["verify", "--family", "alpha", "--n", "3", "--r", "4/9"]);
    assert_eq!(v["status"], "valid");
    assert_eq!(v["gap_witnesses"], serde_json::json!(["122", "2"]));
    let beta = json(&["verify", "--family", "beta", "--n", "3", "--r", "9/20"]);
    assert_eq!(beta["status"], "invalid");
}

#[test]
fn explicit_points() {
    let v = json(&["distortion", "--points", "1/6,5/6", "--r", "1/3"]);
    assert_eq!(v["distortion"]["exact"], true);
}

/// Each validity flip in the sweep lies within one grid step of a threshold.
#[test]
fn sweep_flips_bracket_thresholds() {
    let csv = stdout(&["compare", "--sweep", "0.42:0.455:0.001", "--output", "csv"]);
    let rows: Vec<Vec<String>> = csv.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect();
    let thresholds = [0.4364590141, 0.4512271429, 0.4384471872, 0.4332840530, 0.4486234903];
    let mut flips = 0;
    for col in 4..7 {
        for w in rows.windows(2) {
            if w[0][col] != w[1][col] {
                flips += 1;
                let lo: f64 = w[0][0].parse().unwrap();
                let hi: f64 = w[1][0].parse().unwrap();
                assert!(thresholds.iter().any(|t| lo <= *t && *t <= hi), "flip in column {col} between {lo} and {hi}");
            }
        }
    }
    assert_eq!(flips, 5);
}

#[test]
fn enumerate_counts_match() {
    let v = json(&["enumerate", "--family", "delta", "--n", "7"]);
    assert_eq!(v["count_matches"], true);
    let v = json(&["enumerate", "--family", "alpha", "--n", "6", "--r", "4/9", "--verify", "--parallel", "2"]);
    assert!(v["codebooks"].as_array().unwrap().iter().all(|c| c["status"] == "valid"));
}

#[test]
fn oracle_matches_delta() {
    let v = json(&["oracle", "--r", "4/9", "--n", "3", "--level", "8"]);
    assert_eq!(v["optimal"]["points"][1]["fraction"], "255448/531441");
}

#[test]
fn usage_errors_name_the_flag() {
    for (args, flag) in [
        (vec!["moments", "--r", "0.6"], "--r"),
        (vec!["thresholds", "--tol=-1"], "--tol"),
        (vec!["verify", "--family", "alpha", "--n", "3", "--r", "4/9", "--depth", "0"], "--depth"),
        (vec!["compare", "--sweep", "0.4:0.3:0.01"], "--sweep"),
        (vec!["thresholds", "--output", "yaml"], "--output"),
    ] {
        let out = cantor(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains(flag), "{args:?}");
    }
    let out = cantor(&["verify", "--family", "alpha", "--n", "3", "--r", "4/9", "--output", "csv"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--output csv"));
}

#[test]
fn depth_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_cantor-cvt"))
        .args(["verify", "--family", "alpha", "--n", "3", "--r", "4/9", "--output", "json"])
        .env("CANTOR_CVT_MAX_DEPTH", "2")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["status"], "undecided");
    assert_eq!(v["depth"], 2);
}
