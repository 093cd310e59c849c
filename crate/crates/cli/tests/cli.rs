use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn negativity(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_negativity"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn config_arg(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

fn write_config(dir: &Path, json: &str) -> String {
    let p = dir.join("cfg.json");
    fs::write(&p, json).unwrap();
    p.to_string_lossy().into_owned()
}

/// The CSV without its trailing runtime columns.
fn stable_csv(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| {
            let cells: Vec<&str> = l.split(',').collect();
            cells[..cells.len() - 2].join(",")
        })
        .collect()
}

#[test]
fn compare_passes_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = negativity(&[
        "compare",
        "--config",
        &config_arg("haar_l6.json"),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("PASS"), "{stdout}");
    for f in ["results.csv", "results.json", "plot.csv"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    // t = 0, 1, 2 for one seed; t = 2 is out of regime, so the dual is skipped.
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.contains("skipped: regime"));
}

#[test]
fn identical_configs_give_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<PathBuf> = (0..2).map(|k| dir.path().join(format!("r{k}"))).collect();
    for out in &runs {
        let o = negativity(&["quench", "--config", &config_arg("disordered_l6.json"), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(stable_csv(&runs[0].join("results.csv")), stable_csv(&runs[1].join("results.csv")));
}

#[test]
fn invalid_partition_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"d":2,"L":6,"t_max":1,"gate_family":"haar","partition":{"l_a":2,"l_b":2,"l_c":3}}"#,
    );
    let o = negativity(&["quench", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("partition"));
}

#[test]
fn schema_error_reports_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"d":2,"L":6,"t_max":1,"gate_family":"haar","partition":{"l_a":2,"l_b":2,"l_c":2},"tolerances":{"relation":"tight"}}"#,
    );
    let o = negativity(&["compare", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tolerances.relation"));
}

#[test]
fn missing_config_file_exits_with_two() {
    let o = negativity(&["dual", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn clifford_family_needs_qubits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"d":3,"L":3,"t_max":1,"gate_family":"clifford","partition":{"l_a":1,"l_b":1,"l_c":1}}"#,
    );
    assert_eq!(negativity(&["clifford", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn mps_scan_refuses_ghz() {
    let o = negativity(&["mps-scan", "--config", &config_arg("ghz.json")]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("not injective") && err.contains("I(1/2) = 0.693147"), "{err}");
}

#[test]
fn mps_scan_decays_with_block_length() {
    let dir = tempfile::tempdir().unwrap();
    let o = negativity(&["mps-scan", "--config", &config_arg("mps_scan.json"), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("mps_scan.json")).unwrap()).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 3);
    assert_eq!(report["monotone"], true);
}

#[test]
fn replica_check_passes() {
    let o = negativity(&["replica-check", "--config", &config_arg("haar_l6.json"), "--seed", "1", "--orders", "1,2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 4);
}

#[test]
fn clifford_sweep_passes() {
    let o = negativity(&["clifford", "--config", &config_arg("clifford_l6.json"), "--threads", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
}
