//! Runs the binary end to end.

use std::process::Command;

fn gepner(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_gepner")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn table1_has_twelve_rows() {
    let (code, out) = gepner(&["table1"]);
    assert_eq!(code, 0);
    assert!(out.contains("12 rows"));
}

#[test]
fn gepner_check_reports_basis_size() {
    let (code, out) = gepner(&["gepner-check", "--type", "1,1:4"]);
    assert_eq!(code, 0);
    assert!(out.contains("Z∘τ = ζ·Z: OK (6 basis vectors)"));
}

#[test]
fn stability_of_c1m1() {
    let (code, out) = gepner(&["stability", "--type", "1,1:3", "--object", "C1m1", "--primes", "5,7"]);
    assert_eq!(code, 0);
    assert!(out.contains("stable (verified over F_5, F_7)"));
}

#[test]
fn hn_from_file() {
    let dir = std::env::temp_dir().join(format!("gepner-hn-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("rep.json");
    // τΨO_{p1} ⊕ ΨO_{p2}: two HN factors
    std::fs::write(&path, r#"{"type": "1,1:3", "field": "Q", "dims": {"C(0)": 1, "p1": 1, "p2": 1}, "mats": {"pi1": [[1]], "pi2": [[0]]}}"#).unwrap();
    let (code, out) = gepner(&["hn", "--rep", path.to_str().unwrap(), "--primes", "5,7"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(out.matches("  factor [").count(), 4);
    let (code, _) = gepner(&["hn", "--rep", "/nonexistent.json"]);
    assert_eq!(code, 2);
}

#[test]
fn json_flag_emits_json() {
    let (code, out) = gepner(&["classify", "--n", "2", "--dmax", "6", "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["results"].as_array().unwrap().len(), 5);
}
