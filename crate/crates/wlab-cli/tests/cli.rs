use std::path::Path;
use std::process::{Command, Output};

fn wlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wlab")).args(args).output().expect("wlab runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&wlab(&["verify", "nope"])), 2);
    assert_eq!(code(&wlab(&["experiment", "nope"])), 2);
    assert_eq!(code(&wlab(&["frobnicate"])), 2);
    assert_eq!(code(&wlab(&["verify", "cz", "--seed", "minus-one"])), 2);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"seed": 1, "unknown": true}"#).unwrap();
    assert_eq!(code(&wlab(&["verify", "cz", "--config", path(&bad)])), 2);
    assert_eq!(code(&wlab(&["verify", "cz", "--config", path(&dir.path().join("missing.json"))])), 2);
    assert_eq!(code(&wlab(&["experiment", "theta-boundary", "--config", path(&bad)])), 2);
}

#[test]
fn verify_reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cz.json");
    std::fs::write(&cfg, r#"{"fields": 40}"#).unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = wlab(&["verify", "cz", "--config", path(&cfg), "--seed", "11", "--out", path(out)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ja = std::fs::read(&a).unwrap();
    assert_eq!(ja, std::fs::read(&b).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&ja).unwrap();
    assert_eq!(v["suite"], "cz");
    assert_eq!(v["environment"]["seed"], 11);
    assert_eq!(v["aggregate"]["failures"], 0);
    for case in v["cases"].as_array().unwrap() {
        assert!(case["bound"].is_string() && case["tolerance"].is_number() && case["budget"].is_number());
    }
    let csv = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert!(csv.starts_with("case,x,y\n"));

    // Without --out the report goes to stdout.
    let o = wlab(&["verify", "sobolev"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["suite"], "sobolev");
}

#[test]
fn failing_cases_exit_1() {
    // Too few paths for the moment checks is still a valid run; the weak
    // residual identities fail regardless.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("kernel.json");
    std::fs::write(&cfg, r#"{"paths": 200}"#).unwrap();
    let out = dir.path().join("kernel-report.json");
    let o = wlab(&["verify", "kernel", "--config", path(&cfg), "--out", path(&out)]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL kernel/weak-residual"));
}

#[test]
fn experiment_series_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("theta.json");
    std::fs::write(&cfg, r#"{"thetas": [1.5, 0.5, 1.0], "n1": 8, "refinements": 2}"#).unwrap();
    let out = dir.path().join("theta-report.json");
    let o = wlab(&["experiment", "theta-boundary", "--config", path(&cfg), "--out", path(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.with_extension("csv")).unwrap();
    let thetas: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(!thetas.is_empty());
    assert!(thetas.windows(2).all(|w| w[0] <= w[1]), "{thetas:?}");
}

#[test]
fn solve_writes_a_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("heat.json");
    std::fs::write(
        &cfg,
        r#"{"L": 3, "n1": 24, "T": 0.5, "nt": 8, "p": 2, "theta": 1, "A": [[[[1]]]],
            "forcing": {"kind": "bump", "time": [0.05, 0.45], "space": [[0.5, 1.5]], "amplitude": [1]}}"#,
    )
    .unwrap();
    let out = dir.path().join("run");
    let o = wlab(&["solve", "parabolic", "--config", path(&cfg), "--out", path(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["time_slices"], 9);
    assert!(out.join("u_00008.txt").exists());

    let o = wlab(&["solve", "elliptic", "--config", path(&cfg), "--out", path(&dir.path().join("e"))]);
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("e/u.txt").exists());

    std::fs::write(&cfg, r#"{"L": 3, "n1": 8, "p": 2, "theta": 1, "A": [[[[-1]]]], "forcing": {"kind": "bump", "space": [[0.5, 1.5]], "amplitude": [1]}}"#).unwrap();
    assert_eq!(code(&wlab(&["solve", "elliptic", "--config", path(&cfg), "--out", path(&out)])), 2);
    assert_eq!(code(&wlab(&["solve", "hyperbolic", "--config", path(&cfg), "--out", path(&out)])), 2);
}
