use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use marginloss::estimator::exp_empirical_risk;
use marginloss::io::{read_dataset, read_model, read_table, Delimiter, ModelFile};
use marginloss::residuals::margin_from_residual;
use marginloss::MarginLoss;
use serde_json::Value;
use tempfile::TempDir;

fn marginloss(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_marginloss")).args(args).current_dir(dir).output().expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = marginloss(args, dir);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// The exit code and the parsed single-line error of a failing run.
fn fails(args: &[&str], dir: &Path) -> (i32, Value) {
    let out = marginloss(args, dir);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
    (out.status.code().unwrap(), serde_json::from_str(stderr.trim()).unwrap())
}

fn simulated(dir: &Path, n: usize) -> PathBuf {
    let config = format!(r#"{{"n": {n}, "beta0": [0.5, -1.0, 0.25], "feature_law": "standard_gaussian", "seed": 7}}"#);
    fs::write(dir.join("gen.json"), config).unwrap();
    ok(&["simulate", "--config", "gen.json", "--out", "data.csv"], dir);
    dir.join("data.csv")
}

#[test]
fn exponential_loss_checks_conformable_and_convex() {
    let dir = TempDir::new().unwrap();
    let line = ok(&["losses", "check", "--loss", "exponential"], dir.path());
    assert_eq!(line.lines().count(), 1);
    let report: Value = serde_json::from_str(&line).unwrap();
    assert_eq!(report["conformable"], true);
    assert_eq!(report["convex"], true);
}

#[test]
fn check_reports_every_named_loss() {
    let dir = TempDir::new().unwrap();
    for (name, conformable, convex) in [
        ("logistic", true, true),
        ("savage", true, false),
        ("gaussian:1", true, false),
        ("laplace:1", true, true),
        ("laplace:5", true, false),
        ("squared", true, true),
        ("exp-unit", false, true),
    ] {
        let report: Value = serde_json::from_str(&ok(&["losses", "check", "--loss", name], dir.path())).unwrap();
        assert_eq!(report["conformable"], conformable, "{name}");
        assert_eq!(report["convex"], convex, "{name}");
    }
    let report: Value = serde_json::from_str(&ok(
        &["losses", "check", "--dist", "gaussian", "--weight", "likelihood"],
        dir.path(),
    ))
    .unwrap();
    assert_eq!(report["conformable"], true);
    assert_eq!(report["loss"]["dist"], "gaussian");
}

#[test]
fn tabulated_values_match_the_library() {
    let dir = TempDir::new().unwrap();
    ok(&["losses", "tabulate", "--loss", "gaussian:4", "--range", "-4:6", "--points", "41", "--out", "t.tsv"], dir.path());
    let text = fs::read_to_string(dir.path().join("t.tsv")).unwrap();
    assert!(text.starts_with("# marginloss "));
    assert!(text.lines().nth(1).unwrap().starts_with("# config {"));
    let table = read_table(text.as_bytes(), Delimiter::Tab).unwrap();
    assert_eq!(table.header, ["v", "phi", "dphi"]);
    assert_eq!(table.rows.len(), 41);
    let loss = "gaussian:4".parse::<marginloss::NamedLoss>().unwrap().build().unwrap();
    for row in &table.rows {
        assert_eq!(row[1].to_bits(), loss.eval(row[0]).unwrap().to_bits());
        assert_eq!(row[2].to_bits(), loss.derivative(row[0]).unwrap().to_bits());
    }
}

#[test]
fn empty_dataset_exits_with_validation_error() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("d.csv"), "x1,x2,y\n").unwrap();
    let (code, err) = fails(&["fit", "--loss", "logistic", "--data", "d.csv"], dir.path());
    assert_eq!(code, 2);
    assert_eq!(err["error"], "empty dataset");
    assert_eq!(err["kind"], "validation");
}

#[test]
fn bad_input_is_rejected() {
    let dir = TempDir::new().unwrap();
    let (code, err) = fails(&["fit", "--loss", "logistic", "--data", "missing.csv"], dir.path());
    assert_eq!((code, err["kind"].as_str()), (3, Some("io")));

    let (code, err) = fails(&["fit", "--loss", "logistic", "--data", "d.csv", "--frobnicate"], dir.path());
    assert_eq!((code, err["kind"].as_str()), (2, Some("validation")));

    let (code, _) = fails(&["losses", "check", "--loss", "cauchy"], dir.path());
    assert_eq!(code, 2);

    let (code, _) = fails(&["losses", "check", "--loss", "logistic", "--dist", "logistic"], dir.path());
    assert_eq!(code, 2);

    fs::write(dir.path().join("bad.csv"), "x1,y\n0.5,3\n").unwrap();
    let (code, _) = fails(&["fit", "--loss", "logistic", "--data", "bad.csv"], dir.path());
    assert_eq!(code, 2);

    fs::write(dir.path().join("gen.json"), r#"{"n": 10, "beta0": [1.0], "feature_law": "standard_gaussian", "extra": 1}"#)
        .unwrap();
    let (code, _) = fails(&["simulate", "--config", "gen.json"], dir.path());
    assert_eq!(code, 2);
}

#[test]
fn help_documents_schemas() {
    let dir = TempDir::new().unwrap();
    let help = ok(&["--help"], dir.path());
    assert!(help.contains("label column is named `y`"));
    assert!(help.contains("MODEL JSON"));
    assert!(help.contains("beta"));
}

#[test]
fn identical_runs_are_byte_identical() {
    let run = |dir: &Path| -> Vec<Vec<u8>> {
        simulated(dir, 1500);
        ok(&["--threads", "2", "fit", "--loss", "savage", "--data", "data.csv", "--intercept", "--seed", "3", "--out", "m.json"], dir);
        ok(&["--threads", "2", "boost", "--data", "data.csv", "--stages", "15", "--out", "b.json", "--diag", "diag.csv"], dir);
        ok(&["diagnose", "residuals", "--model", "m.json", "--data", "data.csv", "--out", "r.csv"], dir);
        ["data.csv", "m.json", "b.json", "diag.csv", "r.csv"].iter().map(|f| fs::read(dir.join(f)).unwrap()).collect()
    };
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    assert!(run(a.path()) == run(b.path()));
}

#[test]
fn residual_table_round_trips() {
    let dir = TempDir::new().unwrap();
    let data_path = simulated(dir.path(), 800);
    ok(&["fit", "--loss", "logistic", "--data", "data.csv", "--intercept", "--out", "m.json"], dir.path());
    ok(&["diagnose", "residuals", "--model", "m.json", "--data", "data.csv", "--out", "r.csv"], dir.path());
    let table = read_table(fs::File::open(dir.path().join("r.csv")).unwrap(), Delimiter::Comma).unwrap();
    assert_eq!(&table.header[..5], ["y_star", "f", "margin", "s", "s_squared"]);
    assert_eq!(table.header.len(), 5 + 4);
    assert_eq!(table.rows.len(), 800);

    let model = read_model(&dir.path().join("m.json")).unwrap();
    let (spec, beta) = model.score_model();
    let data = read_dataset(&data_path).unwrap();
    for (row, (x, y)) in table.rows.iter().zip(data.rows()) {
        let (margin, s) = (row[2], row[3]);
        assert!((margin_from_residual(s).unwrap() - margin).abs() <= 1e-12, "{margin} vs s = {s}");
        assert_eq!(row[0], y.sign());
        assert_eq!(row[1], spec.score(&beta, x).unwrap());
        let ln_sum: f64 = row[5..].iter().sum();
        assert!((ln_sum - row[4].ln()).abs() <= 1e-12 * (1.0 + ln_sum.abs()));
    }
}

#[test]
fn model_json_records_fit_and_r_emp() {
    let dir = TempDir::new().unwrap();
    let data_path = simulated(dir.path(), 1000);
    let line = ok(&["fit", "--loss", "logistic", "--data", "data.csv", "--tol", "1e-8", "--seed", "7", "--out", "m.json"], dir.path());
    let summary: Value = serde_json::from_str(&line).unwrap();
    assert_eq!(summary["status"], "converged");
    let ModelFile::Linear(file) = read_model(&dir.path().join("m.json")).unwrap() else {
        panic!("expected a linear model");
    };
    assert_eq!(file.loss.name, "logistic");
    assert_eq!(file.features, ["x1", "x2", "x3"]);
    assert_eq!(file.config["options"]["seed"], 7);
    assert_eq!(file.config["options"]["tolerance"], 1e-8);
    let data = read_dataset(&data_path).unwrap();
    assert_eq!(file.r_emp, exp_empirical_risk(&file.model, &file.beta, &data).unwrap());
    assert!((file.beta[1] + 1.0).abs() < 0.3);
}

#[test]
fn exp_unit_and_pnorm_fits_agree() {
    let dir = TempDir::new().unwrap();
    simulated(dir.path(), 1000);
    ok(&["fit", "--loss", "exp-unit", "--data", "data.csv", "--out", "e.json"], dir.path());
    ok(&["pnorm-fit", "--p", "2", "--data", "data.csv", "--out", "p.json"], dir.path());
    let beta = |f: &str| read_model(&dir.path().join(f)).unwrap().score_model().1;
    for (a, b) in beta("e.json").iter().zip(beta("p.json")) {
        assert!((a - b).abs() <= 1e-6 * b.abs());
    }
    let ModelFile::Linear(file) = read_model(&dir.path().join("e.json")).unwrap() else { panic!() };
    assert_eq!((file.loss.name.as_str(), file.loss.weight.as_deref()), ("exp-unit", None));
    assert!((file.final_risk - file.r_emp).abs() <= 1e-15 * file.r_emp);
}

#[test]
fn boost_outputs_agree() {
    let dir = TempDir::new().unwrap();
    simulated(dir.path(), 600);
    ok(&["boost", "--data", "data.csv", "--stages", "12", "--r-emp-stop", "0.5", "--out", "b.json", "--diag", "diag.csv"], dir.path());
    let ModelFile::Adaboost(file) = read_model(&dir.path().join("b.json")).unwrap() else { panic!() };
    let diag = read_table(fs::File::open(dir.path().join("diag.csv")).unwrap(), Delimiter::Comma).unwrap();
    assert_eq!(diag.header, ["stage", "train_risk", "r_emp", "misclassification"]);
    assert_eq!(diag.column("r_emp").unwrap(), file.model.staged_r_emp);
    assert_eq!(file.r_emp, *file.model.staged_r_emp.last().unwrap());
    let risk = diag.column("train_risk").unwrap();
    assert!(risk.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn simulate_seed_flag_and_json_format() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("gen.json"), r#"{"n": 50, "beta0": [1.0, 0.0], "feature_law": "uniform_pm1", "seed": 1}"#)
        .unwrap();
    ok(&["simulate", "--config", "gen.json", "--out", "a.csv"], dir.path());
    ok(&["simulate", "--config", "gen.json", "--seed", "1", "--out", "b.csv"], dir.path());
    ok(&["simulate", "--config", "gen.json", "--seed", "2", "--out", "c.csv"], dir.path());
    // the header echoes the output path; compare the data lines
    let read = |f: &str| -> Vec<String> {
        let text = fs::read_to_string(dir.path().join(f)).unwrap();
        text.lines().filter(|l| !l.starts_with('#')).map(String::from).collect()
    };
    assert!(read("a.csv") == read("b.csv"));
    assert!(read("a.csv") != read("c.csv"));

    let doc: Value = serde_json::from_str(&ok(&["--format", "json", "simulate", "--config", "gen.json"], dir.path())).unwrap();
    assert_eq!(doc["columns"], serde_json::json!(["x1", "x2", "y"]));
    assert_eq!(doc["rows"].as_array().unwrap().len(), 50);
    assert_eq!(doc["config"]["generator"]["seed"], 1);
    let first_a = read_dataset(&dir.path().join("a.csv")).unwrap();
    assert_eq!(doc["rows"][0][0].as_f64().unwrap(), first_a.row(0)[0]);
}
