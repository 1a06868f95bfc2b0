use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hardyliou::occupation::integrate_ode;
use hardyliou::{Complex64, TaylorPolynomial};
use serde_json::Value;

fn run(command: &str, dir: &Path, config: &str) -> (Output, PathBuf) {
    let cfg = dir.join(format!("{command}.config.json"));
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join(format!("{command}-out"));
    let output = Command::new(env!("CARGO_BIN_EXE_hardyliou"))
        .arg(command)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .env("HARDYLIOU_THREADS", "2")
        .output()
        .unwrap();
    (output, out.join(format!("{command}.json")))
}

fn report(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn spectrum_of_identity_symbol_lists_integers() {
    let dir = tempfile::tempdir().unwrap();
    let (o, path) = run(
        "spectrum",
        dir.path(),
        r#"{"schema": 1, "truncation": 32, "symbol": [0, 1]}"#,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(&path);
    assert_eq!(r["status"], "PASS");
    let eig = r["results"]["eigenvalues"].as_array().unwrap();
    assert_eq!(eig.len(), 33);
    for (n, e) in eig.iter().enumerate() {
        assert_eq!(e["value"][0].as_f64().unwrap(), n as f64);
        assert_eq!(e["value"][1].as_f64().unwrap(), 0.0);
    }
    assert_eq!(r["config"]["symbol"][1], serde_json::json!([1.0, 0.0]));
}

#[test]
fn adjoint_check_passes_for_affine_symbol() {
    let dir = tempfile::tempdir().unwrap();
    let (o, path) = run(
        "adjoint-check",
        dir.path(),
        r#"{"schema": 1, "truncation": 64, "boundary_samples": 512, "symbol": [1, 1]}"#,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(&path);
    assert!(r["results"]["boundary_vs_matrix"].as_f64().unwrap() <= 1e-8);
    for c in r["certificates"].as_array().unwrap() {
        assert_eq!(c["status"], "PASS");
        assert!(!c["formula"].as_str().unwrap().is_empty());
    }
}

#[test]
fn occupation_relation_passes_for_linear_flow() {
    let dir = tempfile::tempdir().unwrap();
    let (o, path) = run(
        "occupation",
        dir.path(),
        r#"{"schema": 1, "truncation": 64, "symbol": [0, 1], "ode": {"z0": 0.2, "T": 1, "dt": 1e-3}}"#,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(&path);
    let residual = r["results"]["trajectories"][0]["relation"]["residual"]
        .as_f64()
        .unwrap();
    assert!(residual <= 1e-6, "{residual}");
    assert!(path.with_file_name("trajectory.csv").is_file());
    assert!(path.with_file_name("occupation_kernel_0.csv").is_file());
}

#[test]
fn failed_certificate_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let (o, path) = run(
        "occupation",
        dir.path(),
        r#"{"schema": 1, "truncation": 64, "symbol": [0, 1], "tolerance": 1e-30,
            "ode": {"z0": 0.2, "T": 1, "dt": 1e-3}}"#,
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("occupation residual"), "{}", stderr(&o));
    assert_eq!(report(&path)["status"], "FAIL");
}

#[test]
fn disk_exit_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let (o, _) = run(
        "occupation",
        dir.path(),
        r#"{"schema": 1, "truncation": 16, "symbol": [1, 0, 1], "ode": {"z0": 0.9, "T": 1, "dt": 1e-3}}"#,
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("left the disk"), "{}", stderr(&o));
}

#[test]
fn invalid_config_exits_two_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (
            r#"{"schema": 1, "truncation": 0, "symbol": [0, 1]}"#,
            "truncation",
        ),
        (
            r#"{"schema": 1, "truncation": 8, "boundary_samples": 10, "symbol": [0, 1]}"#,
            "boundary_samples",
        ),
        (
            r#"{"schema": 3, "truncation": 8, "symbol": [0, 1]}"#,
            "schema",
        ),
        (r#"{"schema": 1, "truncation": 8}"#, "symbol"),
        (
            r#"{"schema": 1, "truncation": 8, "symbol": [0, 1], "trajectories": ["missing.csv"]}"#,
            "missing.csv",
        ),
        (
            r#"{"schema": 1, "truncation": 8, "symbol": [0, 1], "colour": 1}"#,
            "colour",
        ),
        ("not json", "malformed"),
    ];
    for (config, needle) in cases {
        let (o, path) = run("spectrum", dir.path(), config);
        assert_eq!(o.status.code(), Some(2), "{config}");
        assert!(stderr(&o).contains(needle), "{config}: {}", stderr(&o));
        assert!(!path.exists());
    }
}

#[test]
fn ingestion_errors_name_file_and_row() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (
            "outside.csv",
            "t,re,im\n0,0.1,0\n0.5,1.2,0\n1,0.1,0\n",
            "row 2",
        ),
        (
            "backwards.csv",
            "t,re,im\n0,0.1,0\n0.5,0.1,0\n0.4,0.1,0\n",
            "rows 2 and 3",
        ),
    ];
    for (name, body, needle) in cases {
        std::fs::write(dir.path().join(name), body).unwrap();
        let config = format!(
            r#"{{"schema": 1, "truncation": 8, "symbol": [0, 1], "trajectories": ["{name}"]}}"#
        );
        let (o, _) = run("occupation", dir.path(), &config);
        assert_eq!(o.status.code(), Some(2));
        let err = stderr(&o);
        assert!(err.contains(name) && err.contains(needle), "{err}");
    }
}

#[test]
fn csv_trajectories_feed_dmd_with_digests() {
    let dir = tempfile::tempdir().unwrap();
    let f = TaylorPolynomial::from_real(&[0.1, 0.9]).unwrap();
    let mut names = Vec::new();
    for (k, z0) in hardyliou::dmd::ring_starts(20).into_iter().enumerate() {
        let name = format!("traj{k}.csv");
        let t = integrate_ode(&f, z0, 1.0, 1e-3).unwrap();
        t.write_csv(std::fs::File::create(dir.path().join(&name)).unwrap())
            .unwrap();
        names.push(format!("\"{name}\""));
    }
    let config = format!(
        r#"{{"schema": 1, "truncation": 64, "symbol": [0.1, 0.9], "trajectories": [{}],
            "dmd": {{"predict": {{"z0": 0.3, "times": [0, 0.5, 1]}}}}}}"#,
        names.join(",")
    );
    let (o, path) = run("dmd", dir.path(), &config);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(&path);
    let lead: Vec<Complex64> = r["results"]["modes"]
        .as_array()
        .unwrap()
        .iter()
        .take(3)
        .map(|m| {
            Complex64::new(
                m["value"][0].as_f64().unwrap(),
                m["value"][1].as_f64().unwrap(),
            )
        })
        .collect();
    for expected in [0.0, 0.9, 1.8] {
        assert!(
            lead.iter().any(|v| (v - expected).norm() <= 1e-2),
            "{lead:?}"
        );
    }
    let model: Value =
        serde_json::from_slice(&std::fs::read(path.with_file_name("dmd_model.json")).unwrap())
            .unwrap();
    let digests = model["trajectory_digests"].as_array().unwrap();
    assert_eq!(digests.len(), 20);
    assert!(digests.iter().all(|d| d.as_str().unwrap().len() == 64));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let configs = [
        (
            "adjoint-check",
            r#"{"schema": 1, "truncation": 24, "symbol": [[0.3, -0.2], 1, [0, 0.5]], "seed": 7}"#,
        ),
        (
            "weighted",
            r#"{"schema": 1, "truncation": 32, "symbol": [0, 1], "phi": [0, 0, 1], "ode": {"z0": [0.1, 0.2], "T": 0.5, "dt": 1e-2}}"#,
        ),
        (
            "bounds",
            r#"{"schema": 1, "truncation": 16, "symbol": [1], "phi": [0, 0.5], "bounds": {"radii": 8, "angles": 32}}"#,
        ),
        (
            "verify-all",
            r#"{"schema": 1, "truncation": 1, "criteria": [1, 12]}"#,
        ),
    ];
    for (command, config) in configs {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let (oa, pa) = run(command, a.path(), config);
        let (ob, pb) = run(command, b.path(), config);
        assert_eq!(oa.status.code(), Some(0), "{command}: {}", stderr(&oa));
        assert_eq!(ob.status.code(), Some(0));
        assert_eq!(
            std::fs::read(pa).unwrap(),
            std::fs::read(pb).unwrap(),
            "{command}"
        );
    }
}

#[test]
fn boundedness_expectation_is_certified() {
    let dir = tempfile::tempdir().unwrap();
    let (o, path) = run(
        "bounds",
        dir.path(),
        r#"{"schema": 1, "truncation": 16, "symbol": [1], "phi": [0, 1], "bounds": {"expect": "divergent"}}"#,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(report(&path)["results"]["boundedness"]["diverges"], true);
    let (o, _) = run(
        "bounds",
        dir.path(),
        r#"{"schema": 1, "truncation": 16, "symbol": [1], "phi": [0, 1], "bounds": {"expect": "bounded"}}"#,
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn invalid_thread_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"schema": 1, "truncation": 4, "symbol": [0, 1]}"#).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_hardyliou"))
        .args(["spectrum", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .env("HARDYLIOU_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("HARDYLIOU_THREADS"));
}
