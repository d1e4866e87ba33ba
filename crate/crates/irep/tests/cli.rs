use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn irep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_irep"))
        .args(args)
        .output()
        .expect("irep runs")
}

fn default_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/default.json")
}

fn write_config(dir: &Path, value: &Value) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn run(cmd: &str, config: &Path, out: &Path) -> Output {
    irep(&[
        cmd,
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ])
}

#[test]
fn negative_k_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &json!({"schema": 1, "concentration": {"k": -5}}),
    );
    let out = run("concentration", &cfg, &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("irep:"));
}

#[test]
fn unknown_keys_and_bad_schema_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for doc in [
        json!({"schema": 1, "pog": {"templatez": 3}}),
        json!({"schema": 7}),
        json!({"schema": 1, "seed": "x"}),
    ] {
        let cfg = write_config(dir.path(), &doc);
        assert_eq!(
            run("pog", &cfg, &dir.path().join("out")).status.code(),
            Some(2),
            "{doc}"
        );
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(
        irep(&["bogus", "--config", "x.json"]).status.code(),
        Some(2)
    );
    assert_eq!(irep(&["pog"]).status.code(), Some(2));
}

#[test]
fn missing_output_dir_is_a_config_error() {
    let out = irep(&["pog", "--config", default_config().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_file_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("pog", &dir.path().join("nope.json"), dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn pog_writes_json_and_crlf_tensor_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("pog", &default_config(), dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));

    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("pog.json")).unwrap())
            .unwrap();
    assert_eq!(report["schema"], 1);
    assert_eq!(report["experiment"], "pog");
    assert_eq!(report["localized"].as_array().unwrap().len(), 50);

    let csv = std::fs::read_to_string(dir.path().join("pog_tensor_Z8.csv")).unwrap();
    assert!(csv.starts_with("g,i,j,value\r\n"));
    // 8 base points, 4 templates and 16 bins
    assert_eq!(csv.lines().count(), 1 + 8 * 4 * 16);
    assert!(dir.path().join("pog_tensor_torus4.csv").exists());
}

#[test]
fn seed_flag_overrides_config_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &json!({"schema": 1}));
    let out = irep(&[
        "hierarchy",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--seed",
        "99",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("hierarchy.json")).unwrap())
            .unwrap();
    let expected = irep_core::random::substream(99, 4);
    assert_eq!(report["seed"], expected);
}

#[test]
fn contract_failure_exits_1_and_names_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    let doc = json!({
        "schema": 1,
        "concentration": {"k": 2, "k_ref": 2000, "signals": 6, "epsilon": 0.001, "max_violation_fraction": 0.001}
    });
    let cfg = write_config(dir.path(), &doc);
    let out = run("concentration", &cfg, dir.path());
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("FAIL") && stdout.contains("violation fraction"),
        "{stdout}"
    );
    let csv = std::fs::read_to_string(dir.path().join("concentration_pairs.csv")).unwrap();
    assert!(csv.starts_with("pair,a,b,d,d_hat,deviation\r\n"));
    assert_eq!(csv.lines().count(), 1 + 15);
}
