//! Scenario runner for the smeared detector toolkit.
//!
//! A scenario reads a [`ScenarioConfig`], writes CSV tables into its output
//! directory and finishes with a `run.json` manifest. Runs are deterministic:
//! the same config and seed give byte-identical files at any thread count.

pub mod config;
mod curves;
mod grids;
mod protocol;
mod sweep;
mod table;

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

pub use config::{ConfigError, Resolved, ScenarioConfig, ScenarioId};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("output: {0}")]
    Io(String),
}

impl RunError {
    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io(_) => 2,
            RunError::Numerical(_) => 3,
        }
    }
}

pub(crate) fn numerical(e: impl std::fmt::Display) -> RunError {
    RunError::Numerical(e.to_string())
}

pub(crate) fn io_err(e: impl std::fmt::Display) -> RunError {
    RunError::Io(e.to_string())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario_id: String,
    /// Output files, relative to the output directory.
    pub files: Vec<String>,
    /// Rows whose errors column is non-empty.
    pub point_errors: usize,
    pub summary: BTreeMap<String, f64>,
}

/// Runs a resolved scenario and writes its manifest.
pub fn run(cfg: &Resolved) -> Result<RunReport, RunError> {
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| io_err(format!("cannot create {}: {e}", dir.display())))?;
    let mut report = match cfg.id {
        ScenarioId::VacuumCurves => curves::vacuum(cfg, dir),
        ScenarioId::ThermalCurves => curves::thermal(cfg, dir),
        ScenarioId::CoherentCurves => curves::coherent(cfg, dir),
        ScenarioId::OneparticleCurves => curves::oneparticle(cfg, dir),
        ScenarioId::CoherentFieldGrid => grids::coherent_field(cfg, dir),
        ScenarioId::OneparticleDiffGrid => grids::oneparticle_diff(cfg, dir),
        ScenarioId::TomographyRoundtrip => protocol::roundtrip(cfg, dir),
        ScenarioId::ConvergenceSweep => sweep::convergence(cfg, dir),
        ScenarioId::ShotNoiseStudy => protocol::shot_noise(cfg, dir),
    }?;
    report.scenario_id = cfg.id.to_string();
    report.files.push("run.json".into());
    write_manifest(&dir.join("run.json"), cfg, &report)?;
    Ok(report)
}

/// Parses, resolves and runs a config file.
pub fn run_file(path: &Path) -> Result<RunReport, RunError> {
    let cfg = ScenarioConfig::load(path)?.resolve()?;
    run(&cfg)
}

/// `run.json`: the resolved values of the fields this scenario reads, and
/// the report.
fn write_manifest(path: &Path, cfg: &Resolved, report: &RunReport) -> Result<(), RunError> {
    let mut config = match serde_json::to_value(cfg).map_err(io_err)? {
        serde_json::Value::Object(map) => map,
        _ => unreachable!("Resolved serialises to an object"),
    };
    let used = cfg.id.fields();
    config.retain(|k, _| k == "seed" || used.contains(&k.as_str()));
    let manifest = serde_json::json!({ "scenario_id": cfg.id, "config": config, "report": report });
    let mut text = serde_json::to_string_pretty(&manifest).map_err(io_err)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_err(format!("{}: {e}", path.display())))
}
