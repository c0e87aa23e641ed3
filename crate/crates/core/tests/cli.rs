use std::path::Path;
use std::process::{Command, Output};

fn crossdiff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crossdiff"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const MINIMAL: &str = r#"{
  "model": {
    "n": 2,
    "a": [[0.1251, 0.25], [1.0, 2.0]],
    "pi": [4.0, 1.0],
    "sigma": 0.0001,
    "kernels": {"default": {"shape": "indicator", "radius": 0.3}},
    "mobility": "upwind",
    "hypothesis_mode": "strict"
  },
  "mesh": {"cells": 16},
  "time": {"end": 0.0625, "dt": 0.015625},
  "initial": {"preset": "trig_pair"},
  "outputs": {"snapshot_times": [0.03125], "run_id": "mini"}
}"#;

#[test]
fn lists_all_test_cases() {
    let o = crossdiff(&["list-testcases"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 17);
    for name in ["13", "21", "NLTL3", "SEG2"] {
        assert!(
            text.lines()
                .any(|l| l.split_whitespace().next() == Some(name)),
            "{name} missing"
        );
    }
}

#[test]
fn counterexample_certificate() {
    let o = crossdiff(&["verify-counterexample", "--N", "8"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("-0.500000 dx^2"), "{text}");
    assert!(text.trim_end().ends_with("PASS"));

    let odd = crossdiff(&["verify-counterexample", "--N", "7"]);
    assert!(!odd.status.success());
}

#[test]
fn run_writes_artifacts_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("mini.json");
    std::fs::write(&cfg, MINIMAL).unwrap();
    let out = dir.path().join("out");
    let o = crossdiff(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in [
        "mini_entropy.csv",
        "mini_config.json",
        "mini_t0.031250.csv",
        "mini_t0.062500.csv",
        "manifest.json",
    ] {
        assert!(Path::new(&out).join(name).exists(), "{name} missing");
    }
    let manifest = std::fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("mini_entropy.csv"));
    let entropy = std::fs::read_to_string(out.join("mini_entropy.csv")).unwrap();
    // header plus the initial level and four steps
    assert_eq!(entropy.lines().count(), 6);
    let hb: Vec<f64> = entropy
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(hb
        .windows(2)
        .all(|w| w[1] <= w[0] + 1e-8 * (1.0 + w[0].abs())));
}

#[test]
fn invalid_configuration_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, MINIMAL.replace("\"sigma\"", "\"sigmaa\"")).unwrap();
    let o = crossdiff(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));

    std::fs::write(&cfg, MINIMAL.replace("[4.0, 1.0]", "[0.0, 1.0]")).unwrap();
    let o = crossdiff(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));

    let o = crossdiff(&["run", "--preset", "99"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn source_flags_are_exclusive() {
    assert!(!crossdiff(&["run"]).status.success());
    assert!(!crossdiff(&["run", "--preset", "13", "--config", "x.json"])
        .status
        .success());
}
