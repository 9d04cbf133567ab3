use std::path::Path;
use std::process::{Command, Output};

use infocap::bounds::overlap_pg;
use infocap::ensembles::{basis_ensemble, equiangular_ensemble};
use infocap::io::ensemble_to_json;
use infocap::randomness::{Branch, SrStrategy, StrategyFile};
use infocap::{Assumption, StateEnsemble};
use serde_json::Value;

fn infocap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_infocap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).unwrap()
}

fn write_ensemble(dir: &Path, name: &str, e: &StateEnsemble) -> String {
    let path = dir.join(name);
    std::fs::write(&path, ensemble_to_json(e)).unwrap();
    path.to_str().unwrap().to_string()
}

fn last_column(csv: &str, col: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == col).unwrap();
    lines
        .map(|l| l.split(',').nth(i).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn vacuum_bound_is_printed_to_nine_digits() {
    let csv = stdout(&infocap(&["bound", "vacuum", "--n", "4", "--omega", "0.1"]));
    assert_eq!(last_column(&csv, "pg_bound"), vec![0.559807621]);
    assert!(csv.lines().nth(1).unwrap().contains("0.559807621,"));
}

#[test]
fn ea_dimension_bound() {
    let v = json(&infocap(&[
        "bound",
        "ea-dimension",
        "--d",
        "3",
        "--n",
        "30",
        "--format",
        "json",
    ]));
    let pg = v[0]["pg_bound"].as_f64().unwrap();
    assert!((pg - 0.3).abs() < 1e-12);
}

#[test]
fn parameter_grid_is_cartesian() {
    let csv = stdout(&infocap(&[
        "bound", "overlap", "--n", "2,3", "--a", "0,0.5,1",
    ]));
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn bad_parameter_exits_with_two() {
    let out = infocap(&["bound", "vacuum", "--n", "4", "--omega", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = infocap(&["bound", "vacuum", "--n", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unreadable_input_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let out = infocap(&["oracle", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{\"n\": 2}").unwrap();
    let out = infocap(&["oracle", garbage.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn oracle_on_basis_and_equiangular_states() {
    let dir = tempfile::tempdir().unwrap();
    let basis = write_ensemble(dir.path(), "basis.json", &basis_ensemble(3, 3).unwrap());
    let v = json(&infocap(&["oracle", &basis]));
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(v["converged"], Value::Bool(true));

    let e = equiangular_ensemble(3, 0.5).unwrap();
    let path = write_ensemble(dir.path(), "equiangular.json", &e);
    let v = json(&infocap(&["oracle", &path]));
    let bound = overlap_pg(3, 0.5);
    assert!((v["value"].as_f64().unwrap() - bound).abs() < 1e-8);
}

#[test]
fn certify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let e = equiangular_ensemble(3, 0.3).unwrap();
    let path = write_ensemble(dir.path(), "e.json", &e);
    let povm = dir.path().join("povm.json");
    let v = json(&infocap(&[
        "oracle",
        &path,
        "--povm-out",
        povm.to_str().unwrap(),
    ]));
    let c = json(&infocap(&["certify", &path, povm.to_str().unwrap()]));
    assert!((c["value"].as_f64().unwrap() - v["value"].as_f64().unwrap()).abs() < 1e-12);
    assert!(c["gap"].as_f64().unwrap() < 1e-8);
    assert_eq!(c["valid"], Value::Bool(true));
}

#[test]
fn sweep_has_requested_rows_and_endpoints() {
    let csv = stdout(&infocap(&[
        "sweep", "overlap", "--axis", "a", "--from", "0", "--to", "1", "--n", "3",
    ]));
    let pg = last_column(&csv, "pg_bound");
    assert_eq!(pg.len(), 50);
    assert!((pg[0] - 1.0).abs() < 1e-9);
    assert!((pg[49] - 1.0 / 3.0).abs() < 1e-9);
}

#[test]
fn coherent_information_grows_with_mean_photons() {
    let csv = stdout(&infocap(&[
        "sweep",
        "coherent",
        "--axis",
        "mean_photons",
        "--from",
        "0.01",
        "--to",
        "2",
        "--n",
        "8",
        "--points",
        "20",
    ]));
    let info = last_column(&csv, "info_bits");
    assert!(info.windows(2).all(|w| w[1] >= w[0] - 1e-12));
}

#[test]
fn sweep_with_oracle_meets_the_vacuum_bound() {
    let csv = stdout(&infocap(&[
        "sweep",
        "vacuum",
        "--axis",
        "omega",
        "--from",
        "0.01",
        "--to",
        "0.7",
        "--n",
        "3",
        "--points",
        "8",
        "--with-oracle",
    ]));
    let bound = last_column(&csv, "pg_bound");
    let oracle = last_column(&csv, "oracle_value");
    for (b, o) in bound.iter().zip(&oracle) {
        assert!((b - o).abs() < 1e-8, "{b} vs {o}");
    }
}

#[test]
fn sweep_rejects_integer_axis() {
    let out = infocap(&[
        "sweep", "vacuum", "--axis", "n", "--from", "2", "--to", "5", "--omega", "0.1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn search_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_infocap"))
            .env("INFOCAP_THREADS", threads)
            .args([
                "search",
                "vacuum",
                "--n",
                "3",
                "--omega",
                "0.2",
                "--restarts",
                "4",
                "--seed",
                "7",
                "-o",
                out.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out).unwrap()
    };
    let a = run("a.json", "1");
    let b = run("b.json", "3");
    assert_eq!(a, b);
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert!(v["gap"].as_f64().unwrap().abs() < 1e-6);
}

#[test]
fn search_rejects_unsupported_kind() {
    let out = infocap(&["search", "dimension", "--n", "3", "--d", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sr_demo_default_exceeds_peak_bound() {
    let v = json(&infocap(&["sr-demo"]));
    assert!((v["peak_bound"].as_f64().unwrap() - 0.3).abs() < 1e-12);
    assert!((v["average_value"].as_f64().unwrap() - 11.0 / 30.0).abs() < 1e-6);
    assert_eq!(v["average_exceeds_bound"], Value::Bool(true));
}

#[test]
fn sr_demo_strategy_file() {
    let dir = tempfile::tempdir().unwrap();
    let s = SrStrategy::new(vec![
        Branch::new(
            0.5,
            equiangular_ensemble(2, 0.2).unwrap(),
            Assumption::UniformOverlap { a: 0.2 },
        ),
        Branch::new(
            0.5,
            equiangular_ensemble(2, 0.6).unwrap(),
            Assumption::UniformOverlap { a: 0.6 },
        ),
    ])
    .unwrap();
    let path = dir.path().join("s.json");
    std::fs::write(
        &path,
        serde_json::to_string(&StrategyFile::from_strategy(&s)).unwrap(),
    )
    .unwrap();
    let v = json(&infocap(&["sr-demo", "--strategy", path.to_str().unwrap()]));
    let mixture = v["mixture_value"].as_f64().unwrap();
    let embedded = v["embedded_value"].as_f64().unwrap();
    assert!((mixture - embedded).abs() < 1e-8);
    let expected = 0.5 * (overlap_pg(2, 0.2) + overlap_pg(2, 0.6));
    assert!((mixture - expected).abs() < 1e-8);
    let average = v["average_parameter"].as_f64().unwrap();
    assert!((average - 0.4).abs() < 1e-12);
    assert!(v["bound_at_average"].as_f64().unwrap() >= mixture - 1e-8);
}
