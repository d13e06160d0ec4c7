use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab"))
        .args(args)
        .env_remove("LAB_ATLAS_DIR")
        .output()
        .expect("lab runs")
}

fn lab_with_atlas(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab"))
        .args(args)
        .env("LAB_ATLAS_DIR", dir)
        .output()
        .expect("lab runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn without_runtime(mut v: Value) -> Value {
    v["provenance"]["runtime_ms"] = Value::Null;
    v
}

fn atlas_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/atlas")
}

#[test]
fn invariants_of_a5() {
    let out = lab(&["invariants", "A5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["results"]["l"], 5);
    assert_eq!(v["results"]["delta"], "1/3");
    assert_eq!(v["results"]["alpha"], "3/2");
    assert_eq!(v["results"]["alpha_float"], 1.5);
}

#[test]
fn chebotarev_of_a5() {
    let v = json(&lab(&["cheb", "A5", "--exact"]));
    assert_eq!(v["results"]["exact"], "91/22");
    assert_eq!(v["results"]["descriptors"], 3);

    let v = json(&lab(&["cheb", "A5", "--truncate", "50"]));
    let partial = v["results"]["value"].as_f64().unwrap();
    let bound = v["results"]["truncation_bound"].as_f64().unwrap();
    assert!(91.0 / 22.0 - partial <= bound);

    let out = lab(&["cheb", "A5", "--mc", "2000", "--seed", "3", "--bounds"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["results"]["ci95"].as_f64().unwrap() > 0.0);
    assert_eq!(v["provenance"]["seed"], 3);
}

#[test]
fn exact_mode_over_cap_is_a_computation_error() {
    let out = lab(&["cheb", "A5^4", "--exact"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
    let out = lab(&["cheb", "A5^4", "--truncate", "40"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["results"]["upper_bound"], true);
}

#[test]
fn e1_commands() {
    let v = json(&lab(&["e1", "A6", "--exact"]));
    let e = v["results"]["exact_float"].as_f64().unwrap();
    assert_eq!(format!("{e:.3}"), "2.494");
    let out = lab(&["e1", "A5^2", "--mc", "500", "--bounds"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["checks"].as_array().unwrap().len(), 3);
}

#[test]
fn descriptors_and_csv() {
    let v = json(&lab(&["descriptors", "A5^2"]));
    assert_eq!(v["results"]["product_count"], 6);
    assert_eq!(v["results"]["diagonal_count"], 2);
    assert_eq!(v["results"]["descriptors"][6]["q"], "457/1800");
    assert_eq!(v["results"]["descriptors"][6]["index_n"], "60");

    let out = lab(&["descriptors", "A5xPSL(2,7)", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("kind,coordinates,index_n,q\n"));
    assert!(!text.contains("diagonal"));
}

#[test]
fn series_fixset_lattice() {
    assert_eq!(
        json(&lab(&["series", "--alpha", "3/2", "--k", "2"]))["results"]["exact"],
        "21/5"
    );
    let out = lab(&["fixset", "--r", "4", "--k", "1", "--brute"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["results"]["value"], "5/8");
    let v = json(&lab(&["lattice", "A5"]));
    assert_eq!(v["results"]["subgroups"], 59);
    let csv = String::from_utf8(lab(&["lattice", "A5", "--emit", "csv"]).stdout).unwrap();
    assert_eq!(csv.lines().count(), 1 + 9);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["cheb", "A5"],
        vec!["cheb", "A5", "--exact", "--mc", "5"],
        vec!["series", "--alpha", "oops", "--k", "2"],
        vec!["verify", "--suite", "nope"],
        vec!["frobnicate"],
    ] {
        assert_eq!(lab(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn computation_errors_exit_1() {
    assert_eq!(lab(&["invariants", "M11"]).status.code(), Some(1));
    assert_eq!(lab(&["descriptors", "A5^0"]).status.code(), Some(1));
    assert_eq!(
        lab(&["fixset", "--r", "61", "--k", "2"]).status.code(),
        Some(1)
    );
    assert_eq!(
        lab(&["series", "--alpha", "1", "--k", "2"]).status.code(),
        Some(1)
    );
}

#[test]
fn atlas_commands() {
    let v = json(&lab(&["atlas", "list"]));
    assert_eq!(v["results"]["groups"].as_array().unwrap().len(), 6);
    let out = lab(&["atlas", "validate", "A5", "PSL(2,7)"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["checks"].as_array().unwrap().len(), 2);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = lab(&["cheb", "A5", "--exact", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["results"]["exact"], "91/22");
}

#[test]
fn quick_suite_passes_and_is_deterministic() {
    let a = lab(&["verify", "--suite", "paper", "--quick"]);
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    let b = lab(&["verify", "--suite", "paper", "--quick"]);
    assert_eq!(without_runtime(json(&a)), without_runtime(json(&b)));
    let v = json(&a);
    let criteria: std::collections::BTreeSet<u64> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["criterion"].as_u64().unwrap())
        .collect();
    assert_eq!(criteria, (1..=10).collect());
}

#[test]
fn corrupted_atlas_fails_the_suite() {
    let dir = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(atlas_dir()).unwrap() {
        let path = entry.unwrap().path();
        let mut text = std::fs::read_to_string(&path).unwrap();
        if path.file_name().unwrap() == "a5.json" {
            text = text.replace("\"expected_order\": 60", "\"expected_order\": 61");
            assert!(text.contains("61"));
        }
        std::fs::write(dir.path().join(path.file_name().unwrap()), text).unwrap();
    }
    let out = lab_with_atlas(dir.path(), &["verify", "--suite", "paper", "--quick"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("order mismatch"));
    let out = lab_with_atlas(dir.path(), &["atlas", "validate"]);
    assert_eq!(out.status.code(), Some(1));
}
