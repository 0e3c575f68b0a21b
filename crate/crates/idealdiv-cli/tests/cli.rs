//! End-to-end runs of the installed binary: the documented invocations,
//! their exit codes, and the certificate round trip.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn idealdiv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_idealdiv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is text")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

#[test]
fn divide_emits_a_verified_json_certificate() {
    let output = idealdiv(&[
        "divide", "--n", "2", "--gens", "z1^2;z2^2", "--target", "(z1+z2)^4", "--r", "4",
        "--json",
    ]);
    assert_eq!(exit_code(&output), 0);
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&output)).expect("valid JSON");
    assert_eq!(parsed["verified"], serde_json::Value::Bool(true));
    assert_eq!(parsed["nu"], serde_json::json!(1));
    assert_eq!(parsed["r"], serde_json::json!(4));
    assert_eq!(parsed["cofactors"].as_array().map(Vec::len), Some(2));
}

#[test]
fn divide_reports_infeasibility_with_the_witness() {
    let output = idealdiv(&[
        "divide", "--n", "2", "--gens", "z1^2;z2^2", "--target", "(z1+z2)^2", "--r", "8",
    ]);
    assert_eq!(exit_code(&output), 2);
    let text = stdout(&output);
    assert!(text.contains("infeasible"), "got: {text}");
    assert!(text.contains("z1*z2"), "got: {text}");
}

#[test]
fn threshold_prints_the_macaulay_value() {
    let output = idealdiv(&["threshold", "--degrees", "1,1,1", "--n", "2"]);
    assert_eq!(exit_code(&output), 0);
    assert_eq!(stdout(&output).trim(), "minimal r = 1");
}

#[test]
fn threshold_reports_the_unconditional_regime() {
    let output = idealdiv(&["threshold", "--degrees", "2,2", "--n", "2"]);
    assert_eq!(exit_code(&output), 0);
    assert_eq!(stdout(&output).trim(), "auto-satisfied");
}

#[test]
fn certificate_round_trips_through_a_file() {
    let divide = idealdiv(&[
        "divide", "--n", "2", "--gens", "z1^2;z2^2", "--target", "(z1+z2)^4", "--r", "4",
        "--json",
    ]);
    assert_eq!(exit_code(&divide), 0);
    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("certificate.json");
    std::fs::write(&path, divide.stdout.as_slice()).expect("write certificate");
    let verify = idealdiv(&["verify", "--certificate", path.to_str().unwrap()]);
    assert_eq!(exit_code(&verify), 0);
    assert!(stdout(&verify).contains("verifies"));
}

#[test]
fn certificate_round_trips_through_stdin() {
    let divide = idealdiv(&[
        "divide", "--n", "1", "--gens", "z1^2;(1+z1)^2", "--target", "1", "--r", "3", "--json",
    ]);
    assert_eq!(exit_code(&divide), 0);
    let mut child = Command::new(env!("CARGO_BIN_EXE_idealdiv"))
        .args(["verify", "--certificate", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(&divide.stdout).expect("pipe certificate");
    let verify = child.wait_with_output().expect("binary exits");
    assert_eq!(verify.status.code(), Some(0));
}

#[test]
fn tampered_certificates_are_rejected() {
    let divide = idealdiv(&[
        "divide", "--n", "2", "--gens", "z1^2;z2^2", "--target", "(z1+z2)^4", "--r", "4",
        "--json",
    ]);
    let mut parsed: serde_json::Value = serde_json::from_str(&stdout(&divide)).unwrap();
    parsed["cofactors"][0] = serde_json::json!("z1^2");
    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("bad.json");
    std::fs::write(&path, parsed.to_string()).expect("write certificate");
    let verify = idealdiv(&["verify", "--certificate", path.to_str().unwrap()]);
    assert_eq!(exit_code(&verify), 2);
    assert!(stdout(&verify).contains("rejected"));
}

#[test]
fn bezout_accepts_the_automatic_budget() {
    let output = idealdiv(&["bezout", "--n", "2", "--gens", "z1;z2;1-z1-z2", "--r", "auto"]);
    assert_eq!(exit_code(&output), 0);
    let text = stdout(&output);
    assert!(text.contains("auto r = 1"), "got: {text}");
    assert!(text.contains("feasible"), "got: {text}");
}

#[test]
fn power_divide_finds_the_smallest_power() {
    let output = idealdiv(&[
        "power-divide", "--n", "2", "--gens", "z1^2;z2^2", "--target", "z1*z2", "--nu-max",
        "3", "--budget-rule", "linear:4",
    ]);
    assert_eq!(exit_code(&output), 0);
    assert!(stdout(&output).contains("nu = 2"));
}

#[test]
fn residue_test_splits_members_from_nonmembers() {
    let inside = idealdiv(&[
        "residue-annihilates", "--n", "2", "--gens", "z1^2;z2^2", "--target", "z1^2*z2",
    ]);
    assert_eq!(exit_code(&inside), 0);
    assert!(stdout(&inside).contains("annihilates"));
    let outside = idealdiv(&[
        "residue-annihilates", "--n", "2", "--gens", "z1^2;z2^2", "--target", "z1*z2",
    ]);
    assert_eq!(exit_code(&outside), 2);
    assert!(stdout(&outside).contains("does not annihilate"));
}

#[test]
fn projective_residue_accepts_a_hyperplane_power() {
    let output = idealdiv(&[
        "residue-annihilates", "--n", "1", "--gens", "z1^2", "--target", "z0*z1", "--projective",
        "--z0-power", "1",
    ]);
    assert_eq!(exit_code(&output), 2);
}

#[test]
fn hefer_names_both_sets_of_variables() {
    let output = idealdiv(&["hefer", "--gen", "z1*z2", "--n", "2"]);
    assert_eq!(exit_code(&output), 0);
    let text = stdout(&output);
    assert!(text.contains("h1 = zeta2"), "got: {text}");
    assert!(text.contains("h2 = z1"), "got: {text}");
}

#[test]
fn bergman_reproduces_a_linear_target() {
    let output = idealdiv(&[
        "bergman", "--target", "z1", "--r", "1", "--at", "0.5,0", "--resolution", "48",
    ]);
    assert_eq!(exit_code(&output), 0);
    let text = stdout(&output);
    let value: f64 = text
        .trim()
        .strip_prefix("value = ")
        .and_then(|rest| rest.split_whitespace().next())
        .expect("value line")
        .parse()
        .expect("leading real part");
    assert!((value - 0.5).abs() < 1e-8, "got: {text}");
}

#[test]
fn kernel_divide_prints_cofactors_and_diagnostics() {
    let output = idealdiv(&[
        "kernel-divide", "--n", "1", "--gens", "z1;1-z1", "--target", "z1", "--r", "1",
        "--resolution", "20",
    ]);
    assert_eq!(exit_code(&output), 0);
    let text = stdout(&output);
    assert!(text.contains("degree bound = 3"), "got: {text}");
    assert!(text.contains("Q1 = "), "got: {text}");
    assert!(text.contains("fit residual 2"), "got: {text}");
}

#[test]
fn koszul_solves_a_level_zero_tuple() {
    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("components.json");
    std::fs::write(&path, r#"[{"indices": [], "poly": "z1^2 + z1*z2"}]"#).unwrap();
    let output = idealdiv(&[
        "koszul", "--n", "2", "--gens", "z1;z2", "--ell", "0", "--r", "2", "--components",
        path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0);
    let text = stdout(&output);
    assert!(text.contains("level = 1"), "got: {text}");
    assert!(text.contains("R[1] = z1 + z2"), "got: {text}");
}

#[test]
fn usage_problems_exit_with_one() {
    let missing = idealdiv(&["divide", "--n", "2", "--gens", "z1^2"]);
    assert_eq!(exit_code(&missing), 1);
    let unknown = idealdiv(&["frobnicate"]);
    assert_eq!(exit_code(&unknown), 1);
    let bad_poly = idealdiv(&["divide", "--n", "1", "--gens", "z7", "--target", "1", "--r", "1"]);
    assert_eq!(exit_code(&bad_poly), 1);
    let help = idealdiv(&["--help"]);
    assert_eq!(exit_code(&help), 0);
}
