//! End-to-end tests of the `fncalc` binary: operator evaluation from spec
//! files, exit codes, and report shapes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fncalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fncalc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(path: &Path, content: &str) {
    fs::write(path, content).expect("fixture written");
}

/// `x∂x` on R as a form spec.
const X_DDX: &str = r#"{
  "dim": 1, "degree": 0,
  "terms": [{"covariant": [], "output": 1,
             "coeff": {"terms": [{"exponents": [1], "coefficient": 1.0}]}}]
}"#;

/// `∂x` on R.
const DDX: &str = r#"{
  "dim": 1, "degree": 0,
  "terms": [{"covariant": [], "output": 1,
             "coeff": {"terms": [{"exponents": [0], "coefficient": 1.0}]}}]
}"#;

#[test]
fn bracket_of_vector_fields_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let k = dir.path().join("k.json");
    let l = dir.path().join("l.json");
    write(&k, X_DDX);
    write(&l, DDX);
    let out = fncalc(&[
        "bracket",
        "--left",
        k.to_str().unwrap(),
        "--right",
        l.to_str().unwrap(),
        "--point",
        "2",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_slice(&out.stdout).expect("json result");
    assert_eq!(v["base"][0].as_f64().unwrap(), 2.0);
    assert_eq!(v["direction"][0].as_f64().unwrap(), -1.0);
}

#[test]
fn interior_of_identity_into_a_two_form_doubles_it() {
    let dir = tempfile::tempdir().unwrap();
    let id_form = r#"{
      "dim": 2, "degree": 1,
      "terms": [
        {"covariant": [1], "output": 1, "coeff": {"terms": [{"exponents": [0,0], "coefficient": 1.0}]}},
        {"covariant": [2], "output": 2, "coeff": {"terms": [{"exponents": [0,0], "coefficient": 1.0}]}}
      ]
    }"#;
    let two_form = r#"{
      "dim": 2, "degree": 2,
      "terms": [{"covariant": [1, 2], "output": 1,
                 "coeff": {"terms": [{"exponents": [0,0], "coefficient": 1.0}]}}]
    }"#;
    let k = dir.path().join("id.json");
    let l = dir.path().join("two.json");
    let dirs = dir.path().join("dirs.txt");
    write(&k, id_form);
    write(&l, two_form);
    write(&dirs, "1,0\n0,1\n");
    let out = fncalc(&[
        "interior",
        "--left",
        k.to_str().unwrap(),
        "--right",
        l.to_str().unwrap(),
        "--point",
        "0,0",
        "--dirs",
        dirs.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_slice(&out.stdout).expect("json result");
    // L evaluates to det(I)·e₁ = e₁ on the axis square; i_Id doubles it.
    assert_eq!(v["direction"][0].as_f64().unwrap(), 2.0);
    assert_eq!(v["direction"][1].as_f64().unwrap(), 0.0);
}

#[test]
fn lie_derivation_with_flat_connection() {
    let dir = tempfile::tempdir().unwrap();
    let k = dir.path().join("k.json");
    let l = dir.path().join("l.json");
    let conn = dir.path().join("flat.json");
    write(&k, DDX);
    write(&l, X_DDX);
    write(&conn, r#"{"dim": 1, "symmetric": true, "gamma": []}"#);
    let out = fncalc(&[
        "lie",
        "--left",
        k.to_str().unwrap(),
        "--right",
        l.to_str().unwrap(),
        "--connection",
        conn.to_str().unwrap(),
        "--point",
        "0",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_slice(&out.stdout).expect("json result");
    assert_eq!(v["direction"][0].as_f64().unwrap(), 1.0);
}

#[test]
fn malformed_inputs_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    write(&bad, "{ not json");
    let good = dir.path().join("good.json");
    write(&good, DDX);

    let out = fncalc(&[
        "bracket",
        "--left",
        bad.to_str().unwrap(),
        "--right",
        good.to_str().unwrap(),
        "--point",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // wrong point arity
    let out = fncalc(&[
        "bracket",
        "--left",
        good.to_str().unwrap(),
        "--right",
        good.to_str().unwrap(),
        "--point",
        "0,0",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // decreasing covariant list is rejected by validation
    let invalid = dir.path().join("invalid.json");
    write(
        &invalid,
        r#"{"dim": 2, "degree": 2, "terms": [{"covariant": [2, 1], "output": 1,
            "coeff": {"terms": []}}]}"#,
    );
    let out = fncalc(&[
        "bracket",
        "--left",
        invalid.to_str().unwrap(),
        "--right",
        invalid.to_str().unwrap(),
        "--point",
        "0,0",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    // unknown suite → usage error
    let out = fncalc(&["verify", "no-such-suite"]);
    assert_eq!(out.status.code(), Some(2));

    // a passing suite → 0 with a PASS line
    let out = fncalc(&["verify", "antisymmetry", "--trials", "3", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));

    // its negative control → 1 with a FAIL line
    let out = fncalc(&[
        "verify",
        "antisymmetry",
        "--trials",
        "3",
        "--seed",
        "1",
        "--mutate",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));

    // JSON report carries the schema fields
    let out = fncalc(&["verify", "general-jacobi", "--trials", "5", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).expect("json report");
    for key in [
        "suite",
        "trials",
        "max_residual",
        "tolerance",
        "pass",
        "constants",
    ] {
        assert!(v.get(key).is_some(), "missing report key {key}");
    }
}

#[test]
fn verify_rejects_invalid_config() {
    let out = fncalc(&["verify", "general-jacobi", "--dim", "9"]);
    assert_eq!(out.status.code(), Some(2));
    let out = fncalc(&["verify", "general-jacobi", "--tol", "0"]);
    assert_eq!(out.status.code(), Some(2));
}
