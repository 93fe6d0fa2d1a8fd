use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn qawg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qawg"))
        .args(args)
        .output()
        .expect("run qawg")
}

fn scenario(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name);
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &TempDir, name: &str, v: &Value) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn small(mut v: Value) -> Value {
    v["run"]["n_events"] = json!(400);
    v
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn design_filter_writes_outputs_with_metadata() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", &scenario("experiment_balanced_time_bin.json"));
    let out = dir.path().join("out");
    let o = qawg(&[
        "design-filter",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("design_report.json")).unwrap()).unwrap();
    assert!(report["mode_match"].as_f64().unwrap() >= 0.999);
    for key in ["config_hash", "seed", "convention", "version"] {
        assert!(!report["meta"][key].is_null(), "meta.{key} missing");
    }
    let csv = fs::read_to_string(out.join("transfer.csv")).unwrap();
    assert!(csv.starts_with('#'));
    assert!(csv.contains("W_vac(0,0)=1/pi"));
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let mut v = scenario("experiment_time_bin.json");
    v["squeezing"]["rr"] = json!(0.4);
    let cfg = write_config(&dir, "c.json", &v);
    let o = qawg(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("rr"), "{}", stderr(&o));
}

#[test]
fn malformed_json_reports_position() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, "{\n  \"schema\": \"qawg.scenario/1\",\n  \"label\" \"x\"\n}\n").unwrap();
    let o = qawg(&[
        "design-filter",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("line 3") && e.contains("column"), "{e}");
}

#[test]
fn missing_config_is_a_config_error() {
    let o = qawg(&["simulate", "--config", "/nonexistent/qawg.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn active_filter_is_rejected() {
    let dir = TempDir::new().unwrap();
    let mut v = scenario("experiment_time_bin.json");
    v["filter"] = json!({
        "iir": { "hwhm_hz": 8.2e6 },
        "fir": { "kappas": [1.0, 3.0, 0.0], "thetas_rad": [0.0, 0.0, 0.0], "delay_s": 2e-8 }
    });
    let cfg = write_config(&dir, "c.json", &v);
    let o = qawg(&[
        "design-filter",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("passive"));
}

#[test]
fn mismatched_filter_is_a_band_violation() {
    let dir = TempDir::new().unwrap();
    let mut v = scenario("experiment_time_bin.json");
    let d = (-2.0 * std::f64::consts::PI * 8.2e6 * 20e-9f64).exp();
    v["filter"] = json!({
        "iir": { "hwhm_hz": 8.2e6 },
        "fir": { "kappas": [1.0, 1.0 + d, d], "thetas_rad": [0.0, std::f64::consts::PI, 0.0], "delay_s": 2e-8 }
    });
    let cfg = write_config(&dir, "c.json", &v);
    let o = qawg(&[
        "design-filter",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).contains("below 0.999"));
}

#[test]
fn corrupt_records_are_a_data_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", &scenario("experiment_time_bin.json"));
    let rec = dir.path().join("records.bin");
    fs::write(&rec, b"QAWGREC1\x01\x00\x00\x00truncated").unwrap();
    let o = qawg(&[
        "analyze",
        "--config",
        cfg.to_str().unwrap(),
        "--records",
        rec.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let missing = qawg(&[
        "analyze",
        "--config",
        cfg.to_str().unwrap(),
        "--records",
        "/nonexistent/records.bin",
    ]);
    assert_eq!(missing.status.code(), Some(3));
}

fn simulate_and_analyze(dir: &TempDir, v: &Value) -> Value {
    let cfg = write_config(dir, "c.json", v);
    let sim = dir.path().join("sim");
    let o = qawg(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        sim.to_str().unwrap(),
        "--records",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let ana = dir.path().join("ana");
    let o = qawg(&[
        "analyze",
        "--config",
        cfg.to_str().unwrap(),
        "--records",
        sim.join("records.bin").to_str().unwrap(),
        "--out",
        ana.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    serde_json::from_str(&fs::read_to_string(ana.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn vacuum_records_identify_no_mode() {
    let dir = TempDir::new().unwrap();
    let mut v = small(scenario("experiment_time_bin.json"));
    v["squeezing"]["r"] = json!(1e-3);
    v["herald_pattern"] = json!([0]);
    v["run"]["background"] = json!("vacuum");
    let s = simulate_and_analyze(&dir, &v);
    assert_eq!(s["summary"], "no mode identified");
    assert_eq!(s["mode_identified"], false);
}

#[test]
fn single_phase_warning_is_surfaced() {
    let dir = TempDir::new().unwrap();
    let mut v = small(scenario("experiment_time_bin.json"));
    v["run"]["n_events"] = json!(1500);
    v["run"]["phases_deg"] = json!([0]);
    let s = simulate_and_analyze(&dir, &v);
    let warnings: Vec<&str> = s["warnings"]
        .as_array()
        .unwrap()
        .iter()
        .filter_map(Value::as_str)
        .collect();
    assert!(
        warnings.contains(
            &"samples span only 1 distinct LO phase(s); reconstruction unidentifiable up to phase-insensitive mixtures"
        ),
        "{warnings:?}"
    );
}

#[test]
fn runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", &small(scenario("experiment_balanced_time_bin.json")));
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = qawg(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--records",
            "--seed",
            seed,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        out
    };
    let a = run("a", "7");
    let b = run("b", "7");
    let c = run("c", "8");
    for f in [
        "records.bin",
        "records.json",
        "state.json",
        "cat_report.json",
        "wigner.csv",
    ] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert_ne!(
        fs::read(a.join("records.bin")).unwrap(),
        fs::read(c.join("records.bin")).unwrap()
    );
    let side: Value = serde_json::from_str(&fs::read_to_string(c.join("records.json")).unwrap()).unwrap();
    assert_eq!(side["meta"]["seed"], 8);
}

#[test]
fn reproduce_paper_prints_table() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("rp");
    let o = qawg(&[
        "reproduce-paper",
        "--skip-closed-loop",
        "--seed",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = String::from_utf8(o.stdout).unwrap();
    assert!(table.contains("seed 5"), "{table}");
    assert!(table.contains("-0.070") && table.contains("-0.068"), "{table}");
    assert!(out.join("comparison.csv").exists());
}

#[test]
fn reproduce_paper_ideal() {
    let o = qawg(&["reproduce-paper", "--ideal", "--skip-closed-loop"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = String::from_utf8(o.stdout).unwrap();
    assert!(table.contains("-0.318"), "{table}");
}
