use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const PI: &str = "3.141592653589793";

fn ness() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ness"));
    c.env_remove("NESS_TOL_QUADRATURE");
    c.env_remove("NESS_TOL_FIT_WINDOW");
    c
}

fn run(args: &[&str]) -> Output {
    ness().args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn two_site(g1: &str) -> String {
    format!(
        r#"{{"generators":[{{"span":2,"odd":[{{"nu":1,"g":0}},{{"nu":1,"g":{g1}}}],
        "even":[{{"nu":0,"g":0}},{{"nu":0,"g":0}}]}}],"chain":"infinite"}}"#
    )
}

const GAPPED: &str = r#"{"generators":[{"span":3,
  "odd":[{"nu":1,"g":0},{"nu":0.5,"g":0.7},{"nu":0.3,"g":-1.1}],
  "even":[{"nu":0,"g":0},{"nu":0,"g":0},{"nu":0,"g":0}]}],"chain":"infinite"}"#;

fn stdout_json(o: &Output) -> Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(o.stderr.trim_ascii()).unwrap()
}

fn profile(path: &Path) -> Vec<(i64, f64, f64)> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("d,re,im"));
    lines
        .map(|l| {
            let v: Vec<&str> = l.split(',').collect();
            (v[0].parse().unwrap(), v[1].parse().unwrap(), v[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn predict_reports_two_site_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", &two_site(PI));
    let report = stdout_json(&run(&["critical", "predict", m.to_str().unwrap()]));
    assert_eq!(report["critical"], true);
    assert_eq!(report["predictedLambda"].as_f64(), Some(1.0));
    assert_eq!(report["mergingRootCount"].as_u64(), Some(2));
}

#[test]
fn residue_and_quadrature_csvs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", GAPPED);
    let mut files = Vec::new();
    for method in ["residue", "quadrature"] {
        let out = dir.path().join(format!("{method}.csv"));
        let o = run(&[
            "ness",
            "correlations",
            m.to_str().unwrap(),
            "--method",
            method,
            "--dmax",
            "25",
            "-o",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        files.push(profile(&out));
    }
    assert_eq!(files[0].len(), 26);
    for (a, b) in files[0].iter().zip(&files[1]) {
        assert_eq!(a.0, b.0);
        assert!((a.1 - b.1).abs() < 1e-10 && (a.2 - b.2).abs() < 1e-10, "{a:?} vs {b:?}");
    }
}

#[test]
fn zero_span_generator_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(
        dir.path(),
        "m.json",
        r#"{"generators":[{"span":0,"odd":[],"even":[]}],"chain":"infinite"}"#,
    );
    let o = run(&["model", "validate", m.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr_json(&o);
    assert_eq!(err["error"], "invalid_model");
    assert!(err["message"].as_str().unwrap().contains("span"));
}

#[test]
fn unknown_model_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = two_site("0.5").replace(r#""chain""#, r#""colour":1,"chain""#);
    let m = write(dir.path(), "m.json", &text);
    assert_eq!(run(&["model", "validate", m.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn argument_errors_exit_two() {
    let o = run(&["no-such-command"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "usage");
}

#[test]
fn numerical_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    // odd-only reservoirs leave the even sector undetermined
    let m = write(dir.path(), "m.json", GAPPED);
    let o = run(&["oracle", m.to_str().unwrap(), "--L", "3"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["error"], "degenerate_kernel");
}

#[test]
fn tolerance_override_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", GAPPED);
    let out = dir.path().join("c.csv");
    let args = [
        "ness",
        "correlations",
        m.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
    ];
    let o = ness().args(args).env("NESS_TOL_QUADRATURE", "1e-6").output().unwrap();
    assert!(o.status.success());
    let meta: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("c.csv.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["metadata"]["requestedTolerance"].as_f64(), Some(1e-6));
    assert!(meta["metadata"]["achievedTolerance"].as_f64().unwrap() <= 1e-6);

    let o = ness().args(args).env("NESS_TOL_QUADRATURE", "-1").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn no_meta_suppresses_the_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", GAPPED);
    let out = dir.path().join("gap.json");
    let o = run(&["--no-meta", "gap", m.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(out.exists());
    assert!(!dir.path().join("gap.json.meta.json").exists());
}

fn sweep_spec() -> String {
    format!(
        r#"{{"target":{{"kind":"model","model":{},"generator":0,"coefficient":1,
        "species":"odd","field":"g"}},
        "grid":{{"start":1e-2,"stop":1e-4,"count":12,"kind":"log-toward-critical"}},
        "critical_value":{PI}}}"#,
        two_site(PI)
    )
}

#[test]
fn sweep_output_is_independent_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "spec.json", &sweep_spec());
    let mut outputs = Vec::new();
    for workers in ["1", "4"] {
        let out = dir.path().join(format!("s{workers}.csv"));
        let o = run(&[
            "--workers",
            workers,
            "sweep",
            spec.to_str().unwrap(),
            "-o",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push((
            std::fs::read(&out).unwrap(),
            std::fs::read(dir.path().join(format!("s{workers}.csv.meta.json"))).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert!(outputs[0].0.starts_with(b"g,xi_inv,gap,root_mod\n"));
}

#[test]
fn sweep_then_fit_recovers_exponents() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "spec.json", &sweep_spec());
    let csv = dir.path().join("s.csv");
    assert!(run(&["sweep", spec.to_str().unwrap(), "-o", csv.to_str().unwrap()])
        .status
        .success());
    let stat = stdout_json(&run(&[
        "fit",
        csv.to_str().unwrap(),
        "--kind",
        "static",
        "--pc",
        PI,
    ]));
    assert!((stat["exponent"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    let dynm = stdout_json(&run(&[
        "fit",
        csv.to_str().unwrap(),
        "--kind",
        "dynamical",
        "--pc",
        PI,
        "--lambda",
        "1",
    ]));
    assert!((dynm["z"].as_f64().unwrap() - 2.0).abs() < 1e-3);
}

#[test]
fn repeated_runs_produce_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", GAPPED);
    let read = |name: &str| std::fs::read(dir.path().join(name)).unwrap();
    let mut runs = Vec::new();
    for k in 0..2 {
        let name = format!("c{k}.csv");
        let out = dir.path().join(&name);
        assert!(run(&["ness", "correlations", m.to_str().unwrap(), "-o", out.to_str().unwrap()])
            .status
            .success());
        runs.push((read(&name), read(&format!("{name}.meta.json"))));
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn critical_solve_returns_the_three_site_point() {
    let fam = stdout_json(&run(&["critical", "solve", "--sites", "3", "--order", "2", "--z0", "-1,0"]));
    let p = fam["particular"].as_array().unwrap();
    let re: Vec<f64> = p.iter().map(|c| c[0].as_f64().unwrap()).collect();
    assert!((re[0] - 1.0).abs() < 1e-12 && (re[1] - 2.0).abs() < 1e-12 && (re[2] - 1.0).abs() < 1e-12);
    assert!(fam["directions"].as_array().unwrap().is_empty());
}

#[test]
fn finite_correlations_and_oracle_on_a_small_chain() {
    let dir = tempfile::tempdir().unwrap();
    let qo = r#"{"generators":[
      {"span":2,"odd":[{"nu":0.5,"g":0},{"nu":0.5,"g":0}],"even":[{"nu":0.5,"g":-1.5707963267948966},{"nu":0.5,"g":-1.5707963267948966}]},
      {"span":2,"odd":[{"nu":0.5,"g":0},{"nu":0.5,"g":0}],"even":[{"nu":0.5,"g":1.5707963267948966},{"nu":0.5,"g":1.5707963267948966}]}],
      "chain":{"finite":{"L":3,"periodic":true}}}"#;
    let m = write(dir.path(), "m.json", qo);
    let o = run(&["ness", "correlations", m.to_str().unwrap(), "--method", "finite", "--dmax", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let lines: Vec<String> = String::from_utf8(o.stdout).unwrap().lines().map(String::from).collect();
    assert_eq!(lines.len(), 4);

    let report = stdout_json(&run(&["oracle", m.to_str().unwrap()]));
    assert_eq!(report["sites"].as_u64(), Some(3));
    assert!((report["trace"].as_f64().unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn figure_bundle_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["figure", "--id", "fig2", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["fig2_linear.csv", "fig2_log.csv", "fig2_fits.json", "fig2.gp", "fig2.meta.json"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
}
