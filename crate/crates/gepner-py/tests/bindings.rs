//! The binding functions called from Rust, without an interpreter.

use gepner_py::{ext_cc, gepner_check, run_cli, stability, table1, zg};

#[test]
fn table_and_checks() {
    let rows: serde_json::Value = serde_json::from_str(&table1()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 12);
    assert!(gepner_check("3,1,1:6").unwrap());
    assert_eq!(zg("1,1:4", vec![0, 1, 0, 0, 0, 0]).unwrap().0, "1 - z4");
    assert_eq!(ext_cc("1,1:4", 2, 2).unwrap(), 1);
}

#[test]
fn stability_and_cli() {
    assert_eq!(stability("2,1:4", "tauPsiOx", vec![5, 7], 2).unwrap(), "stable (verified over F_5, F_7)");
    let (code, out) = run_cli(vec!["table1".into()]);
    assert_eq!(code, 0);
    assert!(out.contains("12 rows"));
    assert_eq!(run_cli(vec!["bogus".into()]).0, 2);
}
