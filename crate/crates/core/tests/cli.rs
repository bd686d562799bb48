//! The `verlinde-lab` binary: outputs, JSON schemas and exit codes.

mod common;

use std::process::{Command, Output};

use num_traits::Zero;
use serde_json::Value;
use verlinde_lab::scalars::{ExactScalar, Ring};
use verlinde_lab::verlinde::FusionTable;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_verlinde-lab")).args(args).env("VERLINDE_LAB_THREADS", "2").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn fusion_sf_text() {
    let o = run(&["fusion", "sf", "--pairs", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("[T] * [T] = 2[1] + 2[Pi1]"), "{s}");
    assert!(s.contains("[Pi1] * [Pi1] = [1]"));
}

#[test]
fn fusion_sf_json_round_trips() {
    let o = run(&["fusion", "sf", "--pairs", "4", "--output", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["table"]["T,T"], serde_json::json!([128, 128, 0, 0]));
    let t: FusionTable = serde_json::from_value(v).unwrap();
    assert_eq!(t, verlinde_lab::verlinde::fusion_sf(4).unwrap());
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["fusion", "sf", "--pairs", "0"][..],
        &["fusion", "sf", "--pairs", "x"],
        &["verify", "--pairs", "2", "--truncation", "10"],
        &["characters", "--tau", "0,0.1"],
        &["characters", "--tau", "1;2"],
        &["centre", "--pairs", "4", "--brute-force"],
        &["frobnicate"],
        &[],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn help_exits_0() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn centre_text_and_json() {
    let o = run(&["centre", "--pairs", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("dimension 5"));

    let v = json(&run(&["centre", "--pairs", "2", "--output", "json"]));
    assert_eq!(v["n"], 2);
    assert_eq!(v["basis"].as_array().unwrap().len(), 11);
    assert_eq!(v["gram"].as_array().unwrap().len(), 11);
    assert_eq!(v["s_matrix"].as_array().unwrap().len(), 11);
    assert!(v["s_matrix"].as_array().unwrap().iter().all(|r| r.as_array().unwrap().len() == 11));
    // exact scalars round-trip through their term-list schema
    let s: Vec<Vec<ExactScalar>> = serde_json::from_value(v["s_matrix"].clone()).unwrap();
    assert_eq!(s, verlinde_lab::smod::s_z_matrix::<ExactScalar>(2).unwrap());
    let gram: Vec<Vec<ExactScalar>> = serde_json::from_value(v["gram"].clone()).unwrap();
    assert!((0..11).all(|i| (0..11).all(|j| gram[i][j] == gram[j][i])));
    // ε(z₂z₂) = 2, ε(z₃z₃) = −2, ε(z₂z₃) = 0
    assert_eq!((gram[9][9].clone(), gram[10][10].clone()), (ExactScalar::from_int(2), ExactScalar::from_int(-2)));
    assert!(gram[9][10].is_zero());
}

#[test]
fn centre_brute_force_agrees() {
    let o = run(&["centre", "--pairs", "3", "--brute-force"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("brute force: dimension 35, same span: true"));
}

#[test]
fn verify_passes() {
    let o = run(&["verify", "--pairs", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
    let v = json(&run(&["verify", "--pairs", "2", "--tol", "1e-6", "--output", "json", "--seed", "7"]));
    assert_eq!(v["passed"], true);
    assert!(v["numeric"]["lines"].as_array().unwrap().len() > 100);
}

#[test]
fn verify_with_impossible_tolerance_fails() {
    // at 1e-300 the floating-point noise of the numeric suites is visible
    let o = run(&["verify", "--pairs", "1", "--tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn characters_with_custom_taus() {
    let o = run(&["characters", "--tau", "0.5,1", "--tau", "-0.4,0.8", "--output", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["values"].as_array().unwrap().len(), 8);
    assert_eq!(v["identities"]["lines"].as_array().unwrap().len(), 8);
}

fn write_smatrix(name: &str, s: &verlinde_lab::verlinde::SMatrixInput) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("verlinde-lab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(s).unwrap()).unwrap();
    path
}

#[test]
fn fusion_semisimple_fibonacci() {
    let path = write_smatrix("fib.json", &common::regenerate_s(&common::fibonacci(), 3));
    let o = run(&["fusion", "semisimple", "--smatrix", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("[tau] * [tau] = [1] + [tau]"), "{}", stdout(&o));
    let v = json(&run(&["fusion", "semisimple", "--smatrix", path.to_str().unwrap(), "--output", "json"]));
    let t: FusionTable = serde_json::from_value(v).unwrap();
    assert_eq!(t, common::fibonacci());
}

#[test]
fn fusion_semisimple_trivial_and_failures() {
    let one =
        verlinde_lab::verlinde::SMatrixInput { labels: vec!["1".into()], unit: 0, re: vec![vec![1.0]], im: vec![] };
    let o = run(&["fusion", "semisimple", "--smatrix", write_smatrix("one.json", &one).to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("[1] * [1] = [1]"));

    let singular = verlinde_lab::verlinde::SMatrixInput {
        labels: vec!["a".into(), "b".into()],
        unit: 0,
        re: vec![vec![1.0, 1.0], vec![1.0, 1.0]],
        im: vec![],
    };
    let o = run(&["fusion", "semisimple", "--smatrix", write_smatrix("sing.json", &singular).to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not invertible"));

    let missing = run(&["fusion", "semisimple", "--smatrix", "/nonexistent/s.json"]);
    assert_eq!(missing.status.code(), Some(2));
    let bad = std::env::temp_dir().join(format!("verlinde-lab-bad-{}.json", std::process::id()));
    std::fs::write(&bad, "{not json").unwrap();
    assert_eq!(run(&["fusion", "semisimple", "--smatrix", bad.to_str().unwrap()]).status.code(), Some(2));
}
