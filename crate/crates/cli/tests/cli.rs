use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn latflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn csv_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn gamma_construction_is_certified() {
    let o = latflow(&["constructions", "--gamma", "2,3"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["certified"], true);
    assert_eq!(v["N"], serde_json::json!([2, 3]));
}

#[test]
fn k1_witness_writes_json_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    let o = latflow(&["constructions", "--k1", "2,3,4", "--m1", "2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("k1-witness.json")).unwrap()).unwrap();
    assert_eq!(v["certified"], true);
}

#[test]
fn lemma_verify_passes() {
    let o = latflow(&["lemma-verify", "--rep", "wedge:3:1", "--config", "2,1", "--trials", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["pass"], true);
    assert_eq!(v["failures"], 0);
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let o = latflow(&["bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn bad_flag_values_are_usage_errors() {
    assert_eq!(latflow(&["equidist", "--grid", "spiral"]).status.code(), Some(2));
    assert_eq!(latflow(&["lemma-verify", "--rep", "wedge:3:7", "--config", "1"]).status.code(), Some(2));
    assert_eq!(latflow(&["constructions"]).status.code(), Some(2));
}

#[test]
fn layered_reports_presentation() {
    let o = latflow(&["layered", "--tau", "2:1,1:1,3", "--imin", "3", "--imax", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["m"], serde_json::json!([2, 1]));
    assert_eq!(v["residual"], serde_json::json!(["0/1", "0/1", "3/1"]));
    assert!(v["max_defect"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn equidist_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = latflow(&["equidist", "--imin", "3", "--imax", "4", "--samples", "200", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let lines = csv_lines(&dir.path().join("equidist.csv"));
    assert_eq!(lines[0], "# latflow-csv v1");
    assert!(lines[1].starts_with("i,"));
    assert_eq!(lines.len(), 4);
    let m = manifest(dir.path());
    assert_eq!(m["subcommand"], "equidist");
    assert_eq!(m["input_hash"].as_str().unwrap().len(), 64);
    assert_eq!(m["outputs"], serde_json::json!(["equidist.csv"]));
}

#[test]
fn runs_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = latflow(&["nondiv", "--imin", "2", "--imax", "3", "--samples", "100", "--eps", "0.1,0.3", "--out", d.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    let x = fs::read_to_string(a.path().join("nondiv.csv")).unwrap();
    assert_eq!(x, fs::read_to_string(b.path().join("nondiv.csv")).unwrap());
    assert_eq!(x.lines().count(), 2 + 4);
}

#[test]
fn twist_at_zero_shift_has_no_defect() {
    let dir = tempfile::tempdir().unwrap();
    let o = latflow(&["twist", "--imin", "3", "--imax", "3", "--samples", "100", "--t", "0,1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("twist.json")).unwrap()).unwrap();
    assert_eq!(v["m_k"], 1);
    let lines = csv_lines(&dir.path().join("twist.csv"));
    assert_eq!(lines[0], "# latflow-csv v1");
    assert!(lines[1].contains("defect"));
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(dir.path().join("twist.csv"))
        .unwrap();
    let head = rdr.headers().unwrap().clone();
    let (ti, di) = (
        head.iter().position(|h| h == "t").unwrap(),
        head.iter().position(|h| h == "defect").unwrap(),
    );
    let zero = rdr.records().map(Result::unwrap).find(|r| r[ti].parse::<f64>().unwrap() == 0.0).unwrap();
    assert_eq!(zero[di].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn improvability_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let o = latflow(&["improvability", "--n", "3", "--imax", "3", "--samples", "16", "--mu", "1/2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(dir.path().join("improvability.csv"))
        .unwrap();
    let fractions: Vec<f64> = rdr
        .records()
        .map(|r| r.unwrap().get(4).unwrap().parse().unwrap())
        .collect();
    assert_eq!(fractions.len(), 4);
    assert!(fractions.windows(2).all(|w| w[1] <= w[0]));
    assert!(dir.path().join("improvability_samples.csv").exists());
}

#[test]
fn params_file_fills_unset_flags() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("params.json");
    let out = dir.path().join("run");
    fs::write(
        &params,
        serde_json::json!({"imin": 2, "imax": 2, "samples": 50, "out": out}).to_string(),
    )
    .unwrap();
    let o = latflow(&["nondiv", "--params", params.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(csv_lines(&out.join("nondiv.csv")).len(), 3);
    assert_eq!(manifest(&out)["config"]["common"]["samples"], 50);
}
