use std::path::Path;
use std::process::Command;

use udw_core::kernels::{hadamard_point, FieldState};
use udw_core::spacetime::Event;
use udw_scenarios::{run, ScenarioConfig, ScenarioId};

fn resolved(json: &str, dir: &Path) -> udw_scenarios::Resolved {
    let mut cfg = ScenarioConfig::from_json(json).unwrap();
    cfg.output_dir = Some(dir.to_path_buf());
    cfg.resolve().unwrap()
}

/// Header and data rows of a CSV, split on commas.
fn table(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().map(|l| l.split(',').map(String::from).collect::<Vec<_>>());
    let header = lines.next().unwrap();
    (header, lines.collect())
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn vacuum_curves_approach_pointlike() {
    let dir = tempfile::tempdir().unwrap();
    let report = run(&resolved(r#"{"scenario_id": "vacuum_curves"}"#, dir.path())).unwrap();
    assert_eq!(report.point_errors, 0);
    let (header, rows) = table(&dir.path().join("vacuum_curves.csv"));
    assert_eq!(header, ["s_over_ell", "pointlike", "smeared_closed", "multipole", "errors"]);
    assert_eq!(rows.len(), 80);
    let value = |row: &[String], name: &str| row[col(&header, name)].parse::<f64>().unwrap();
    let find = |s: f64| rows.iter().find(|r| r[0].parse::<f64>().unwrap() == s).unwrap();
    let spatial = find(20.0);
    let dev = (value(spatial, "smeared_closed") / value(spatial, "pointlike") - 1.0).abs();
    assert!(dev < 0.02, "{dev}");
    // The temporal configuration converges three times more slowly.
    let temporal = find(-20.0);
    let dev = (value(temporal, "smeared_closed") / value(temporal, "pointlike") - 1.0).abs() * 400.0;
    assert!((12.0..13.0).contains(&dev), "{dev}");
}

#[test]
fn quadrature_columns_are_optional() {
    let dir = tempfile::tempdir().unwrap();
    let json = r#"{"scenario_id": "coherent_curves", "s_range": {"min": 2, "max": 14, "step": 4},
                   "enable_quadrature_columns": true}"#;
    run(&resolved(json, dir.path())).unwrap();
    let (header, rows) = table(&dir.path().join("coherent_curves.csv"));
    assert_eq!(header.last().unwrap(), "errors");
    let (c, q) = (col(&header, "smeared_closed"), col(&header, "smeared_quadrature"));
    for row in &rows {
        let (c, q) = (row[c].parse::<f64>().unwrap(), row[q].parse::<f64>().unwrap());
        assert!((c - q).abs() < 1e-9 * c.abs(), "{c} vs {q}");
    }
}

#[test]
fn oneparticle_difference_grid() {
    let dir = tempfile::tempdir().unwrap();
    let json = r#"{"scenario_id": "oneparticle_diff_grid",
                   "grid": {"t": {"min": -70, "max": -50, "step": 5}, "x": {"min": -62, "max": -42, "step": 5}}}"#;
    run(&resolved(json, dir.path())).unwrap();
    let (header, rows) = table(&dir.path().join("oneparticle_diff_grid.csv"));
    assert_eq!(header, ["t", "x", "value"]);
    assert_eq!(rows.len(), 25);
    let anchor = Event::new(-60.0, -60.0, 0.0, 0.0);
    let state = FieldState::OneParticle { delta: 10.0 };
    for row in &rows {
        let v: Vec<f64> = row.iter().map(|c| c.parse().unwrap()).collect();
        let e = Event::new(v[0], v[1], 0.0, 0.0);
        if let (Ok(w), Ok(w0)) = (hadamard_point(&state, &anchor, &e), hadamard_point(&FieldState::Vacuum, &anchor, &e))
        {
            assert!((v[2] - (w - w0)).abs() < 1e-12, "{row:?}");
        }
    }
}

#[test]
fn roundtrip_from_ingested_kernels() {
    let first = tempfile::tempdir().unwrap();
    run(&resolved(r#"{"scenario_id": "tomography_roundtrip"}"#, first.path())).unwrap();
    let second = tempfile::tempdir().unwrap();
    let json = format!(
        r#"{{"scenario_id": "tomography_roundtrip", "kernels_dir": "{}"}}"#,
        first.path().join("kernels").display()
    );
    run(&resolved(&json, second.path())).unwrap();
    for f in ["reconstruction.csv", "correlations.csv"] {
        assert_eq!(std::fs::read(first.path().join(f)).unwrap(), std::fs::read(second.path().join(f)).unwrap());
    }
}

#[test]
fn sampled_roundtrip_is_close() {
    let dir = tempfile::tempdir().unwrap();
    let json = r#"{"scenario_id": "tomography_roundtrip", "shots": [1000000], "seed": 3}"#;
    let report = run(&resolved(json, dir.path())).unwrap();
    assert!(report.summary["max_abs_error"] < 0.02, "{:?}", report.summary);
    let (header, rows) = table(&dir.path().join("correlations.csv"));
    assert_eq!(header, ["i", "j", "kind", "exact", "sampled", "shots", "seed"]);
    assert!(rows.iter().all(|r| r[5] == "1000000" && !r[4].is_empty()));
}

#[test]
fn config_errors_name_the_field() {
    let field = |json: &str| ScenarioConfig::from_json(json).and_then(|c| c.resolve()).unwrap_err().field;
    assert_eq!(field(r#"{"scenario_id": "vacuum_curves", "betta": 2}"#), "betta");
    assert_eq!(field(r#"{"scenario_id": "vacuum_curves", "beta": 2}"#), "beta");
    assert_eq!(field(r#"{"scenario_id": "nope"}"#), "scenario_id");
    assert_eq!(field(r#"{}"#), "scenario_id");
    assert_eq!(field(r#"{"scenario_id": "thermal_curves", "beta": -1}"#), "beta");
    assert_eq!(field(r#"{"scenario_id": "vacuum_curves", "s_range": {"min": 1, "max": 0, "step": 1}}"#), "s_range");
    assert_eq!(field(r#"{"scenario_id": "shot_noise_study", "shots": [10, 0, 100]}"#), "shots");
    assert_eq!(field(r#"{"scenario_id": "shot_noise_study", "shots": [10, 100]}"#), "shots");
    assert_eq!(field(r#"{"scenario_id": "convergence_sweep", "ell_grid": [0.05, 0.08, 0.2]}"#), "ell_grid");
    assert_eq!(field(r#"{"scenario_id": "coherent_curves", "temporal_sign": 0}"#), "temporal_sign");
    assert_eq!(
        field(
            r#"{"scenario_id": "tomography_roundtrip", "lattice": {"n_space": 0, "n_time": 1,
        "spacing_space": 1, "spacing_time": 1}}"#
        ),
        "lattice"
    );
}

#[test]
fn every_scenario_has_a_distinct_name() {
    for id in ScenarioId::ALL {
        assert_eq!(id.as_str().parse::<ScenarioId>().unwrap(), id);
        assert!(ScenarioConfig::new(id).resolve().is_ok(), "{id}");
    }
}

fn udw(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_udw")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.display().to_string()
    };
    let good = write("good.json", r#"{"scenario_id": "convergence_sweep"}"#);
    let bad = write("bad.json", r#"{"scenario_id": "convergence_sweep", "delta": 1}"#);
    let dephased = write("dephased.json", r#"{"scenario_id": "tomography_roundtrip", "lambda": 200}"#);

    let (code, listing) = udw(&["list-scenarios"]);
    assert_eq!(code, 0);
    assert_eq!(listing.lines().count(), 9);
    assert_eq!(udw(&["validate", &good]).0, 0);
    assert_eq!(udw(&["validate", &bad]).0, 2);
    assert_eq!(udw(&["validate", "/nonexistent/config.json"]).0, 2);
    let out = dir.path().join("run").display().to_string();
    assert_eq!(udw(&["run", &good, "--out", &out, "--threads", "2"]).0, 0);
    assert!(dir.path().join("run/convergence_sweep.csv").exists());
    assert!(dir.path().join("run/run.json").exists());
    let out = dir.path().join("dephased").display().to_string();
    assert_eq!(udw(&["run", &dephased, "--out", &out]).0, 3);
}
