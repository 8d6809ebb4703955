use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use almostdom::SamplingScheme;
use almostdom_cli::report::ReportRecord;
use almostdom_cli::{load_csv, CliError};

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_almostdom"));
    cmd.env("ALMOSTDOM_THREADS", "1");
    cmd
}

const PAIRS: &str = "x1,x2\n1.2,0.8\n2.5,3.1\n0.4,0.9\n3.3,2.2\n1.1,1.9\n5.0,4.1\n0.7,0.3\n2.0,2.6\n";

#[test]
fn loads_matched_pairs_with_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "pairs.csv", PAIRS);
    let data = load_csv(&[path], SamplingScheme::MatchedPairs, true).unwrap();
    assert_eq!(data.sizes(), (8, 8));
    assert_eq!(data.scheme(), SamplingScheme::MatchedPairs);
}

#[test]
fn loads_group_value_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "g.csv", "group,value\n1,0.5\n2,1.5\n1,2.0\n\n2,0.1\n2,3.0\n");
    let data = load_csv(&[path], SamplingScheme::Independent, false).unwrap();
    assert_eq!(data.sizes(), (2, 3));
}

#[test]
fn reports_row_and_column_of_bad_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bad.csv", "1.0,2.0\n3.0,abc\n");
    match load_csv(&[path], SamplingScheme::MatchedPairs, false) {
        Err(CliError::ParseError { row, col, .. }) => assert_eq!((row, col), (2, 2)),
        other => panic!("expected ParseError, got {other:?}"),
    }
}

#[test]
fn rejects_negative_values_when_required() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "neg.csv", "x1,x2\n1.0,2.0\n3.0,4.0\n-1.0,2.0\n");
    match load_csv(std::slice::from_ref(&path), SamplingScheme::MatchedPairs, true) {
        Err(CliError::NegativeValue { row }) => assert_eq!(row, 4),
        other => panic!("expected NegativeValue, got {other:?}"),
    }
    assert!(load_csv(&[path], SamplingScheme::MatchedPairs, false).is_ok());
}

#[test]
fn missing_file_is_reported() {
    let err = load_csv(&[PathBuf::from("/nonexistent/x.csv")], SamplingScheme::MatchedPairs, false)
        .unwrap_err();
    assert!(matches!(err, CliError::FileNotFound(_)));
}

#[test]
fn ci_output_is_reproducible_and_parses_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "pairs.csv", PAIRS);
    let run = || {
        bin()
            .args(["ci", "--scheme", "matched", "--tn", "0.5", "--boot", "200", "--seed", "7", "-i"])
            .arg(&path)
            .output()
            .unwrap()
    };
    let (a, b) = (run(), run());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let rec: ReportRecord = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!((rec.n1, rec.n2, rec.seed, rec.n_boot), (8, 8, 7, 200));
    assert!(rec.ci_lo <= rec.c_hat && rec.c_hat <= rec.ci_hi);
    assert!(rec.runtime_ms.is_none());
}

#[test]
fn degenerate_data_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.csv", "1.0\n2.0\n3.0\n");
    let out = bin().args(["ci", "--tn", "1", "-i"]).arg(&a).arg(&a).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn strict_boundary_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.csv", "1.0\n1.0\n1.0\n1.0\n");
    let b = write(dir.path(), "b.csv", "0.1\n5.0\n0.2\n6.0\n");
    let args = ["ci", "--tn", "1", "--boot", "50", "-i"];
    let out = bin().args(args).arg(&a).arg(&b).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let rec: ReportRecord = serde_json::from_slice(&out.stdout).unwrap();
    assert!(rec.boundary_flag);
    let out = bin().args(args).arg(&a).arg(&b).arg("--strict").output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn simulate_small_run_emits_table_row() {
    let out = bin()
        .args([
            "simulate", "--preset", "sdc-d", "--n1", "50", "--n2", "50", "--reps", "10", "--boot",
            "50", "--tn", "0.001", "--format", "csv",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "preset,scheme,n1,n2,true_c,mean,bias,se,rmse,t_n,cr,reps,boot,seed,runtime_ms"
    );
    assert!(lines.next().unwrap().starts_with("sdc-d,matched,50,50,"));
}

#[test]
fn emits_curves_in_long_format() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "pairs.csv", PAIRS);
    let curves = dir.path().join("curves.csv");
    let out = bin()
        .args(["estimate", "--scheme", "matched", "--grid", "50", "--emit-curves"])
        .arg(&curves)
        .arg("-i")
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = fs::read_to_string(curves).unwrap();
    assert!(text.starts_with("curve,p,value\n"));
    assert_eq!(text.lines().filter(|l| l.starts_with("phi,")).count(), 50);
}
