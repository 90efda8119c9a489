//! End-to-end checks of the binary: pinned outputs, exit codes, and
//! round-tripping of emitted documents.

use std::process::Command;

fn bt(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_bt"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn kraft_gamma_minimal_pinned_output() {
    let (code, stdout, _) = bt(&["kraft", "gamma", "--c", "2", "--d", "3", "--minimal"]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(doc["gamma1"], 6);
    assert_eq!(doc["dim_orbit1"], 19);
}

#[test]
fn kraft_gamma_blocks() {
    let (code, stdout, _) = bt(&["kraft", "gamma", "--blocks", "2/1,1/1"]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(doc["gamma1"], 5);
}

#[test]
fn traverso_pinned_output() {
    let (code, stdout, _) = bt(&["traverso", "--blocks", "2/1,1/1"]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(doc["codim"], 1);
    assert_eq!(doc["s_D"], 5);
    assert_eq!(doc["level"], 2);
}

#[test]
fn orbit_stabilizer_product() {
    let (code, stdout, _) = bt(&[
        "orbit", "--p", "2", "--n", "1", "--m", "1", "--c", "1", "--d", "1", "--base",
        "minimal", "--seed", "identity",
    ]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let orbit = doc["orbit_size"].as_u64().unwrap();
    let stab = doc["stabilizer_count"].as_u64().unwrap();
    assert_eq!(orbit * stab, doc["group_order"].as_u64().unwrap());
    assert_eq!(orbit * stab, 4);
    // the emitted matrices re-parse into the shared schema
    let seed: bt_core::matrix::MatrixW = serde_json::from_value(doc["seed"].clone()).unwrap();
    assert!(seed.is_identity());
    let _canonical: bt_core::matrix::MatrixW =
        serde_json::from_value(doc["canonical"].clone()).unwrap();
}

#[test]
fn truncation_roundtrip_and_polygon() {
    let (code, stdout, _) = bt(&[
        "truncation", "--p", "2", "--n", "1", "--m", "2", "--c", "1", "--d", "1", "--base",
        "supersingular", "--with-np",
    ]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(doc["newton_polygon"]["blocks"], serde_json::json!([[1, 1]]));
    // reload S and g and rebuild: same derived maps
    let s: bt_core::matrix::MatrixW = serde_json::from_value(doc["S"].clone()).unwrap();
    let g: bt_core::matrix::MatrixW = serde_json::from_value(doc["g"].clone()).unwrap();
    let t = bt_core::dieudonne::make_truncation(1, 1, s.ring(), s.clone(), g).unwrap();
    let frob: bt_core::matrix::MatrixW =
        serde_json::from_value(doc["frobenius"].clone()).unwrap();
    assert_eq!(*t.frobenius_matrix(), frob);
}

#[test]
fn aut_counts() {
    let (code, stdout, _) = bt(&[
        "aut", "--p", "2", "--n", "1", "--m", "1", "--c", "1", "--d", "1", "--base",
        "supersingular",
    ]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(doc["aut_count"], 2);
}

#[test]
fn domain_error_exits_one() {
    let (code, _, stderr) = bt(&["kraft", "gamma", "--c", "2", "--d", "4", "--minimal"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("not coprime"));
}

#[test]
fn budget_error_exits_two() {
    let (code, _, stderr) = bt(&[
        "orbit", "--p", "2", "--n", "1", "--m", "2", "--c", "1", "--d", "1", "--base",
        "ordinary", "--budget-orbit", "3",
    ]);
    assert_eq!(code, 2);
    assert!(stderr.contains("budget"));
}

#[test]
fn usage_error_is_distinct() {
    let (code, _, _) = bt(&["kraft", "gamma", "--nonsense"]);
    assert_eq!(code, 64);
}

#[test]
fn csv_format_emits_rows() {
    let (code, stdout, _) = bt(&[
        "traverso", "--blocks", "1/1", "--format", "csv",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("key,value\n"));
    assert!(stdout.contains("s_D,1"));
}

#[test]
fn level_exp_reports_separation() {
    let (code, stdout, _) = bt(&[
        "level-exp", "--p", "2", "--n", "1", "--m", "3", "--c", "1", "--d", "1", "--base",
        "ordinary", "--level", "1",
    ]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(doc["violations"], serde_json::json!([]));
    assert_eq!(doc["minimal_separating_level"], 1);
}
