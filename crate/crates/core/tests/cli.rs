use std::path::Path;
use std::process::{Command, Output};

use level_density::density::{scaled_density, DensityGrid};
use level_density::ensembles::EnsembleSpec;
use level_density::montecarlo::{EigenvalueRow, SampleSummary};
use level_density::opcore::{moment_reports, MomentReport};
use level_density::perturb::{gap_rows, GapRow, PerturbationSpec};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_level-density")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Vec<T> {
    csv::Reader::from_reader(text.as_bytes()).deserialize().map(|r| r.unwrap()).collect()
}

#[test]
fn hermite_moment_row() {
    let rows: Vec<MomentReport> = parse(&stdout(&["moments", "--ensemble", "hermite", "--n", "2", "--k", "4"]));
    assert_eq!(rows.len(), 1);
    assert!((rows[0].m_n_k - 2.25).abs() < 1e-14);
    assert_eq!(rows[0].m_limit, 2.0);
    assert!((rows[0].gap - 0.25).abs() < 1e-14);
    let odd: Vec<MomentReport> = parse(&stdout(&["moments", "--n", "10", "--k", "3"]));
    assert_eq!(odd[0].m_n_k, 0.0);
}

#[test]
fn jacobi_limit_second_moment() {
    let text = stdout(&["limit", "--ensemble", "jacobi", "--k", "2"]);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let rec = rdr.records().next().unwrap().unwrap();
    // Jacobi(0, 0) reports itself as Legendre.
    assert_eq!(&rec[0], "legendre");
    assert_eq!(rec[2].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn moments_csv_round_trip() {
    let args = ["moments", "--ensemble", "laguerre", "--a", "1.5", "--n", "3,40", "--k", "1,2,5"];
    let rows: Vec<MomentReport> = parse(&stdout(&args));
    let spec = EnsembleSpec::Laguerre { a: 1.5 };
    assert_eq!(rows, moment_reports(&spec, &[3, 40], &[1, 2, 5]).unwrap());
}

#[test]
fn perturb_csv_round_trip() {
    let text = stdout(&["perturb", "--ensemble", "legendre", "--perturb", "1,0,1", "--n", "20,40", "--k", "2,4"]);
    assert!(text.starts_with("ensemble,p,n,k,M_n_k,M_hat_n_k,gap\n"));
    let rows: Vec<GapRow> = parse(&text);
    let p = PerturbationSpec::parse("1,0,1").unwrap();
    assert_eq!(rows, gap_rows(&EnsembleSpec::legendre(), &p, &[20, 40], &[2, 4]).unwrap());
}

#[test]
fn density_csv_round_trip_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sigma.csv");
    let o = out.to_str().unwrap();
    stdout(&["density", "--ensemble", "hermite", "--n", "12", "--grid", "-2.5:2.5:101", "--out", o]);
    let grid = DensityGrid::from_csv(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let expected = scaled_density(&EnsembleSpec::Hermite, 12, &level_density::density::linspace(-2.5, 2.5, 101)).unwrap();
    assert_eq!(grid, expected);
}

#[test]
fn recurrence_output_feeds_custom_ensemble() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("laguerre.csv");
    let t = table.to_str().unwrap();
    stdout(&["recurrence", "--ensemble", "laguerre", "--a", "0", "--n", "30", "--out", t]);
    let custom: Vec<MomentReport> = parse(&stdout(&[
        "moments", "--ensemble", "custom", "--custom-csv", t, "--xi", "-1", "--zeta", "2", "--t", "1", "--n", "20", "--k", "2,4",
    ]));
    let preset: Vec<MomentReport> = parse(&stdout(&["moments", "--ensemble", "laguerre", "--n", "20", "--k", "2,4"]));
    for (c, p) in custom.iter().zip(&preset) {
        assert_eq!(c.ensemble, "custom");
        assert_eq!((c.m_n_k, c.m_limit), (p.m_n_k, p.m_limit));
    }
}

#[test]
fn sample_writes_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eig.csv");
    let o = out.to_str().unwrap();
    stdout(&["sample", "--n", "20", "--samples", "30", "--seed", "3", "--out", o]);
    let rows: Vec<EigenvalueRow> = parse(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 600);
    let summary: SampleSummary =
        serde_json::from_str(&std::fs::read_to_string(Path::new(&format!("{o}.summary.json"))).unwrap()).unwrap();
    assert_eq!((summary.n, summary.samples), (20, 30));
    assert!((summary.d_n - 10.0).abs() < 1e-12);
    assert!(summary.ks_distance < 0.1);
    let again = stdout(&["sample", "--n", "20", "--samples", "30", "--seed", "3", "--format", "json"]);
    let repeat: SampleSummary = serde_json::from_str(&again).unwrap();
    assert_eq!(repeat, summary);
}

#[test]
fn json_mirrors_csv() {
    let json: Vec<MomentReport> =
        serde_json::from_str(&stdout(&["moments", "--n", "5", "--k", "2,4", "--format", "json"])).unwrap();
    let csv: Vec<MomentReport> = parse(&stdout(&["moments", "--n", "5", "--k", "2,4"]));
    assert_eq!(json, csv);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    assert_eq!(run(&["moments", "--n", "x"]).status.code(), Some(2));
    assert_eq!(run(&["moments", "--ensemble", "laguerre", "--a", "-2"]).status.code(), Some(2));
    assert_eq!(run(&["perturb"]).status.code(), Some(2));
    assert_eq!(run(&["sample", "--ensemble", "laguerre", "--a", "0.5", "--n", "4"]).status.code(), Some(2));
    assert_eq!(run(&["perturb", "--perturb", "1,0,0,0,0,0,0,0,0,1"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let failed = run(&["density", "--ensemble", "legendre", "--n", "5", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(failed.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&failed.stderr).contains("level-density:"));
}

#[test]
fn report_summarizes_all_criteria() {
    let out = run(&["report"]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let criteria = report["criteria"].as_array().unwrap();
    assert_eq!(criteria.len(), 9);
    let failed = report["failed"].as_u64().unwrap();
    assert_eq!(out.status.code(), Some(if failed == 0 { 0 } else { 1 }));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(stderr.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).count(), 9);
}
