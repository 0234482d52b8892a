use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_freqbeam"))
}

fn circuit(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("circuits")
        .join(name)
}

#[test]
fn run_writes_json_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("result.json");
    let status = bin()
        .args([
            "run",
            circuit("biexciton_rectifier.json").to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert!((value["metrics"]["concurrence"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn scenario_csv() {
    let out = bin()
        .args([
            "scenario",
            "biexciton-fbs-prime",
            "--alpha",
            "0.8",
            "--absorption",
            "0.0005",
            "--output",
            "csv",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("outcome,probability"));
    assert!(text.contains("0.63936"));
}

#[test]
fn validation_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"bins": [{"label": "w1", "frequency_hz": 3e14}, {"label": "w2", "frequency_hz": 3.00001e14}],
            "modes": ["a@w1", "a@w2"],
            "initial_state": [{"amplitude": [1, 0], "occupation": {"a@w1": 1}}],
            "components": [{"type": "aom", "pairs": [["a@w1", "a@w2"]], "theta": 1, "modulation_hz": 2e9}]}"#,
    )
    .unwrap();
    let out = bin().args(["run", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(
        err.contains("components[0]") && err.contains("2000000000"),
        "{err}"
    );

    let out = bin()
        .args(["scenario", "biexciton-fbs-prime", "--alpha", "1.5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn runtime_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let doc = dir.path().join("click.json");
    std::fs::write(
        &doc,
        r#"{"bins": [{"label": "w", "frequency_hz": 2e14}], "modes": ["a@w", "b@w"],
            "initial_state": [{"amplitude": [1, 0], "occupation": {"a@w": 1}}],
            "components": [{"type": "herald", "modes": ["b@w"], "postselect": "click"}]}"#,
    )
    .unwrap();
    let out = bin().args(["run", doc.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_and_oracle() {
    let out = bin()
        .args([
            "sweep",
            circuit("two_source_interference.json").to_str().unwrap(),
            "--param",
            "fbs.theta",
            "--from",
            "0",
            "--to",
            "0.7853981633974483",
            "--steps",
            "3",
            "--metric",
            "coincidence.directions",
            "--output",
            "csv",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 4);

    let out = bin()
        .args([
            "oracle",
            circuit("two_source_interference.json").to_str().unwrap(),
            "--random",
            "5",
            "--seed",
            "7",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["checks"].as_array().unwrap().len(), 6);
}

#[test]
fn device_report() {
    let out = bin()
        .args(["device", "gap", "--target-theta", "0.7853981633974483"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let r = v["interaction_r_s"].as_f64().unwrap();
    assert!((1e-16..1e-14).contains(&r));
    assert!(v["required_intensity_w_per_m2"].as_f64().unwrap() > 0.0);
}
