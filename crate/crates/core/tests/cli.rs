use std::fs;
use std::process::{Command, Output};

fn modesim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modesim")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn error_json(o: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&o.stderr);
    serde_json::from_str(text.lines().last().unwrap()).unwrap()
}

#[test]
fn thresholds_for_qubits() {
    let o = modesim(&["thresholds", "--dim", "2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "BB84 11.00%, MUB 12.62%");
}

#[test]
fn thresholds_table_lists_every_dimension() {
    let o = modesim(&["thresholds"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 6);
    assert!(stdout(&o).contains("d=8: BB84 24.70%, MUB 30.77%"));
}

#[test]
fn bases_certify_for_qudit_five() {
    let o = modesim(&["bases", "--dim", "5", "--certify"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("d = 5: 6 bases"));
    assert!(text.contains("max unbiasedness deviation"));
    assert!(text.contains("MUB certification: pass"));
}

#[test]
fn bases_json_export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bases.json");
    let o = modesim(&["bases", "--dim", "3", "--sic", "--json", path.to_str().unwrap()]);
    assert!(o.status.success());
    let docs: Vec<serde_json::Value> = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(docs.len(), 5);
    let basis = modesim::hilbert::basis_from_json(&docs[4].to_string()).unwrap();
    assert_eq!(basis.len(), 9);
}

#[test]
fn missing_config_is_a_json_error() {
    let o = modesim(&["simulate", "--config", "missing.json"]);
    assert!(!o.status.success());
    let e = error_json(&o);
    assert_eq!(e["error"], "io");
    assert!(e["message"].as_str().unwrap().contains("missing.json"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = modesim(&["thresholds", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"], "usage");
}

#[test]
fn invalid_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    fs::write(&path, r#"{"dimensions": [10]}"#).unwrap();
    let o = modesim(&["simulate", "--config", path.to_str().unwrap()]);
    assert!(!o.status.success());
    assert_eq!(error_json(&o)["error"], "config");
}

#[test]
fn simulate_writes_reproducible_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    fs::write(&config, r#"{"dimensions": [2, 3], "realizations": 5, "grid": {"n": 128}}"#).unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = Command::new(env!("CARGO_BIN_EXE_modesim"))
            .env("MODESIM_THREADS", threads)
            .args(["simulate", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--dump-fields"])
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let a = run("a", "1");
    let b = run("b", "3");
    let report_a = fs::read(a.join("report.json")).unwrap();
    assert_eq!(report_a, fs::read(b.join("report.json")).unwrap());
    assert_eq!(
        fs::read(a.join("qder_summary.csv")).unwrap(),
        fs::read(b.join("qder_summary.csv")).unwrap()
    );
    let report: serde_json::Value = serde_json::from_slice(&report_a).unwrap();
    assert_eq!(report["config"]["grid"]["n"], 128);
    assert_eq!(report["config"]["realizations"], 5);
    assert_eq!(report["config_hash"].as_str().unwrap().len(), 64);
    assert!(report.get("timing").is_none());
    assert!(a.join("timing.json").exists());
    assert!(a.join("crosstalk_d3_MUB2_ao-off.csv").exists());
    assert!(a.join("fields").join("d2_MUB1_0.json").exists());
}

#[test]
fn screen_dumps_match_requested_count() {
    let dir = tempfile::tempdir().unwrap();
    let o = modesim(&["screen", "--count", "2", "--out", dir.path().to_str().unwrap(), "--stride", "16"]);
    assert!(o.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("screen_1.json")).unwrap()).unwrap();
    assert_eq!(doc["coeffs"].as_array().unwrap().len(), 32);
    let phase: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("phase_0.json")).unwrap()).unwrap();
    assert_eq!(phase["n"], 32);
}

#[test]
fn calibrate_rejects_unreachable_target() {
    let o = modesim(&["calibrate", "--target", "0.5", "--log10-hi", "-16"]);
    assert!(!o.status.success());
    assert_eq!(error_json(&o)["error"], "calibration_failed");
}
