use std::process::Command;

use serde_json::Value;

fn phasepair(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_phasepair"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = phasepair(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn analyze_constant_reports_unit_limit() {
    let v = json(&["analyze", "--eq", "constant", "--param", "c=1"]);
    assert_eq!(v["classification"], "L-finite");
    assert!((v["L"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(v["corollary2"]["status"], "holds");
    assert_eq!(v["span"][1].as_f64(), Some(50.0));
    for key in [
        "equation",
        "params",
        "span",
        "tolerances",
        "wronskian",
        "coefficients",
        "classification",
        "L",
        "K",
        "k1",
        "k2",
        "objective",
        "appell_residual",
        "corollary1",
        "corollary2",
        "remark_finite_q",
        "config",
        "normalization_note",
        "diagnostics",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    for key in ["A", "B", "C"] {
        assert!(v["coefficients"][key].is_number());
    }
}

#[test]
fn analyze_gen_airy_is_l_zero() {
    let v = json(&["analyze", "--eq", "gen-airy", "--param", "nu=0.3333333333333333"]);
    assert_eq!(v["classification"], "L-zero");
    assert_eq!(v["corollary1"]["status"], "holds");
    assert!(v["appell_residual"].as_f64().unwrap() < 1e-5);
}

#[test]
fn analyze_cauchy_euler_slope() {
    let v = json(&["analyze", "--eq", "cauchy-euler", "--param", "gamma=1"]);
    assert_eq!(v["classification"], "L-infinite");
    assert!((v["K"].as_f64().unwrap() - 2.0 / 3f64.sqrt()).abs() < 1e-3);
    assert!(v["normalization_note"].as_str().unwrap().contains("cauchy-euler"));
    assert!(v["L"].is_null());
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = ["analyze", "--eq", "inverse-x", "--seed", "5"];
    let (_, a, _) = phasepair(&args);
    let (_, b, _) = phasepair(&args);
    assert!(!a.is_empty());
    assert_eq!(a, b);
    assert!(a.contains("\"rtol\": 1.0000000000000000e-10"));
}

#[test]
fn expression_equations_and_csv() {
    let (code, out, err) = phasepair(&[
        "analyze", "--eq", "a*x + 1", "--param", "a=0.5", "--x0", "1", "--xmax", "60", "--format", "csv",
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("key,value\n"));
    assert!(out.contains("\nparam.a,0.50000000000000000\n"));
    assert!(out.contains("\nclassification,L-zero\n"));
}

#[test]
fn zeros_constant_gaps_vanish() {
    let (code, out, err) = phasepair(&["zeros", "--eq", "constant", "--param", "c=1"]);
    assert_eq!(code, 0, "{err}");
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("j,x_crit,x_zero,gap,phase_gap"));
    let rows: Vec<Vec<f64>> = lines
        .clone()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert!(rows.len() >= 10);
    assert!(rows.iter().all(|r| r[3] <= 1e-9));
    assert!(out.lines().last().unwrap().starts_with("# summary: d_first="));
}

#[test]
fn zeros_cauchy_euler_offset() {
    let v = json(&[
        "zeros",
        "--eq",
        "cauchy-euler",
        "--param",
        "gamma=1",
        "--format",
        "json",
    ]);
    let delta = v["summary"]["delta_last"].as_f64().unwrap();
    assert!((delta - std::f64::consts::PI / 6.0).abs() < 1e-4, "{delta}");
}

#[test]
fn zeros_writes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gaps.csv");
    let (code, out, _) = phasepair(&[
        "zeros",
        "--eq",
        "gen-airy",
        "--param",
        "nu=0.3333333333333333",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.lines().count() > 30);
}

fn error_of(args: &[&str]) -> (i32, Value) {
    let (code, out, err) = phasepair(args);
    assert!(out.is_empty());
    (code, serde_json::from_str(&err).unwrap())
}

#[test]
fn config_errors_exit_two() {
    let (code, e) = error_of(&["analyze", "--eq", "airy"]);
    assert_eq!(code, 2);
    assert_eq!(e["error"]["kind"], "unknown_equation");
    let (code, e) = error_of(&["analyze", "--eq", "cauchy-euler", "--param", "gamma=0.5"]);
    assert_eq!(code, 2);
    assert_eq!(e["error"]["kind"], "parameter_range");
    let (code, e) = error_of(&["analyze", "--eq", "x *", "--xmax", "10"]);
    assert_eq!(code, 2);
    assert_eq!(e["error"]["kind"], "syntax");
    let (code, e) = error_of(&["analyze", "--eq", "constant", "--rtol", "1e-20"]);
    assert_eq!(code, 2);
    assert_eq!(e["error"]["kind"], "tolerance");
    let (code, e) = error_of(&["analyze", "--eq", "constant", "--param", "c"]);
    assert_eq!(code, 2);
    assert_eq!(e["error"]["kind"], "usage");
}

#[test]
fn numeric_errors_exit_three() {
    // q = -1 does not oscillate
    let (code, e) = error_of(&["analyze", "--eq", "-1", "--xmax", "20"]);
    assert_eq!(code, 3, "{e}");
    assert!(e["error"]["message"].is_string());
}

#[test]
fn verify_fast_passes() {
    let (code, out, _) = phasepair(&["verify", "--suite", "fast"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.lines().last().unwrap().ends_with(" 0 failed"));
    assert!(out.contains("PASS Appell residual: gen-airy"));
}

#[test]
fn verify_coarse_tolerance_fails() {
    let (code, out, _) = phasepair(&["verify", "--rtol", "1e-3", "--format", "json"]);
    assert_eq!(code, 4);
    let v: Value = serde_json::from_str(&out).unwrap();
    let appell: Vec<&Value> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["name"].as_str().unwrap().starts_with("Appell residual"))
        .collect();
    assert!(!appell.is_empty());
    assert!(appell.iter().any(|c| c["pass"] == false));
}
