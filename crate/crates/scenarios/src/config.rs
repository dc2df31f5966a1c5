//! Scenario configuration: parsing, defaults and validation.
//!
//! Every length is in units of `ell` unless noted. Fields that a scenario
//! does not read are rejected so that a typo never silently changes a run.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use udw_core::spacetime::{Event, LatticeSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("config field `{field}`: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: &str, message: impl Into<String>) -> Self {
        ConfigError { field: field.to_string(), message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioId {
    VacuumCurves,
    ThermalCurves,
    CoherentCurves,
    CoherentFieldGrid,
    OneparticleCurves,
    OneparticleDiffGrid,
    TomographyRoundtrip,
    ConvergenceSweep,
    ShotNoiseStudy,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 9] = [
        ScenarioId::VacuumCurves,
        ScenarioId::ThermalCurves,
        ScenarioId::CoherentCurves,
        ScenarioId::CoherentFieldGrid,
        ScenarioId::OneparticleCurves,
        ScenarioId::OneparticleDiffGrid,
        ScenarioId::TomographyRoundtrip,
        ScenarioId::ConvergenceSweep,
        ScenarioId::ShotNoiseStudy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioId::VacuumCurves => "vacuum_curves",
            ScenarioId::ThermalCurves => "thermal_curves",
            ScenarioId::CoherentCurves => "coherent_curves",
            ScenarioId::CoherentFieldGrid => "coherent_field_grid",
            ScenarioId::OneparticleCurves => "oneparticle_curves",
            ScenarioId::OneparticleDiffGrid => "oneparticle_diff_grid",
            ScenarioId::TomographyRoundtrip => "tomography_roundtrip",
            ScenarioId::ConvergenceSweep => "convergence_sweep",
            ScenarioId::ShotNoiseStudy => "shot_noise_study",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ScenarioId::VacuumCurves => "vacuum pointlike, smeared and multipole kernels against separation",
            ScenarioId::ThermalCurves => "thermal and vacuum kernels against separation",
            ScenarioId::CoherentCurves => "coherent-state kernels along a spatial and a temporal scan",
            ScenarioId::CoherentFieldGrid => "classical profile of the coherent state on a (t, x) grid",
            ScenarioId::OneparticleCurves => "one-particle kernels along a spatial and a temporal scan",
            ScenarioId::OneparticleDiffGrid => "one-particle minus vacuum kernel from a fixed point on a (t, x) grid",
            ScenarioId::TomographyRoundtrip => "kernels, correlators and reconstruction on a detector lattice",
            ScenarioId::ConvergenceSweep => "multipole residual against smearing width with fitted order",
            ScenarioId::ShotNoiseStudy => "reconstruction error against shot count with fitted slope",
        }
    }

    /// Config fields this scenario reads, besides the universal ones.
    pub(crate) fn fields(self) -> &'static [&'static str] {
        const CURVES: &[&str] = &["ell", "s_range", "enable_quadrature_columns", "tol"];
        match self {
            ScenarioId::VacuumCurves => CURVES,
            ScenarioId::ThermalCurves => &["ell", "s_range", "enable_quadrature_columns", "tol", "beta"],
            ScenarioId::CoherentCurves | ScenarioId::OneparticleCurves => {
                &["ell", "s_range", "enable_quadrature_columns", "tol", "delta", "anchor", "temporal_sign"]
            }
            ScenarioId::CoherentFieldGrid => &["ell", "delta", "grid"],
            ScenarioId::OneparticleDiffGrid => &["ell", "delta", "anchor", "grid"],
            ScenarioId::TomographyRoundtrip => &["ell", "beta", "lattice", "lambda", "shots", "tol", "kernels_dir"],
            ScenarioId::ConvergenceSweep => &["beta", "separation", "ell_grid", "tol"],
            ScenarioId::ShotNoiseStudy => &["ell", "beta", "lattice", "lambda", "shots", "repetitions", "tol"],
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioId {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| ConfigError::new("scenario_id", format!("unknown scenario `{s}`")))
    }
}

/// Inclusive range `min, min + step, ..., <= max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        // Index-based so that the grid does not accumulate rounding.
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.min + k as f64 * self.step).collect()
    }

    fn check(&self, field: &str) -> Result<(), ConfigError> {
        if !(self.min.is_finite() && self.max.is_finite() && self.step.is_finite()) {
            return Err(ConfigError::new(field, "bounds and step must be finite"));
        }
        if !(self.step > 0.0) || self.max < self.min {
            return Err(ConfigError::new(field, "need step > 0 and max >= min"));
        }
        if (self.max - self.min) / self.step > 1e6 {
            return Err(ConfigError::new(field, "more than a million points"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Anchor {
    pub t: f64,
    pub x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t: Range,
    pub x: Range,
}

/// Separation of the two regions of a convergence sweep, in absolute units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Separation {
    pub dt: f64,
    pub dr: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario_id: Option<ScenarioId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_range: Option<Range>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anchor: Option<Anchor>,
    /// `+1` scans the second region forward in time from the anchor, `-1`
    /// backward.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temporal_sign: Option<i8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repetitions: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub separation: Option<Separation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub enable_quadrature_columns: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernels_dir: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn new(id: ScenarioId) -> Self {
        ScenarioConfig { scenario_id: Some(id), ..Default::default() }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::new(&json_field(&e.to_string()), e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn present(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let mut mark = |name: &'static str, set: bool| {
            if set {
                out.push(name);
            }
        };
        mark("ell", self.ell.is_some());
        mark("beta", self.beta.is_some());
        mark("delta", self.delta.is_some());
        mark("s_range", self.s_range.is_some());
        mark("anchor", self.anchor.is_some());
        mark("temporal_sign", self.temporal_sign.is_some());
        mark("grid", self.grid.is_some());
        mark("lattice", self.lattice.is_some());
        mark("lambda", self.lambda.is_some());
        mark("shots", self.shots.is_some());
        mark("repetitions", self.repetitions.is_some());
        mark("ell_grid", self.ell_grid.is_some());
        mark("separation", self.separation.is_some());
        mark("enable_quadrature_columns", self.enable_quadrature_columns.is_some());
        mark("tol", self.tol.is_some());
        mark("kernels_dir", self.kernels_dir.is_some());
        out
    }

    /// Checks the config and fills in every default.
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let id = self.scenario_id.ok_or_else(|| ConfigError::new("scenario_id", "missing"))?;
        let allowed = id.fields();
        if let Some(extra) = self.present().into_iter().find(|f| !allowed.contains(f)) {
            return Err(ConfigError::new(extra, format!("not used by scenario `{id}`")));
        }
        let ell = positive("ell", self.ell.unwrap_or(1.0))?;
        let beta = self.beta.map(|b| positive("beta", b)).transpose()?;
        let beta = match (id, beta) {
            (ScenarioId::ThermalCurves, None) => Some(50.0),
            (_, b) => b,
        };
        let delta = positive(
            "delta",
            self.delta.unwrap_or(match id {
                ScenarioId::OneparticleCurves | ScenarioId::OneparticleDiffGrid => 10.0,
                _ => 1.5,
            }),
        )?;
        let s_range = self.s_range.unwrap_or(match id {
            ScenarioId::CoherentCurves => Range { min: 0.25, max: 24.0, step: 0.25 },
            ScenarioId::OneparticleCurves => Range { min: 1.0, max: 200.0, step: 1.0 },
            _ => Range { min: 0.5, max: 20.0, step: 0.5 },
        });
        s_range.check("s_range")?;
        if s_range.min <= 0.0 {
            return Err(ConfigError::new("s_range", "separations must be positive"));
        }
        let (anchor, temporal_sign) = match id {
            ScenarioId::OneparticleCurves | ScenarioId::OneparticleDiffGrid => (Anchor { t: -60.0, x: -60.0 }, 1),
            _ => (Anchor { t: 6.0, x: -6.0 }, -1),
        };
        let anchor = self.anchor.unwrap_or(anchor);
        if !(anchor.t.is_finite() && anchor.x.is_finite()) {
            return Err(ConfigError::new("anchor", "coordinates must be finite"));
        }
        let temporal_sign = self.temporal_sign.unwrap_or(temporal_sign);
        if temporal_sign != 1 && temporal_sign != -1 {
            return Err(ConfigError::new("temporal_sign", "must be 1 or -1"));
        }
        let grid = self.grid.unwrap_or(match id {
            ScenarioId::OneparticleDiffGrid => GridSpec {
                t: Range { min: -150.0, max: 150.0, step: 1.0 },
                x: Range { min: -150.0, max: 150.0, step: 1.0 },
            },
            _ => GridSpec {
                t: Range { min: -15.0, max: 15.0, step: 0.25 },
                x: Range { min: -15.0, max: 15.0, step: 0.25 },
            },
        });
        grid.t.check("grid.t")?;
        grid.x.check("grid.x")?;
        let lattice = self.lattice.unwrap_or(LatticeSpec {
            n_space: 2,
            n_time: 2,
            spacing_space: 10.0,
            spacing_time: 10.0,
            origin: Event::default(),
        });
        lattice.validate().map_err(|e| ConfigError::new("lattice", e.0))?;
        if lattice.len() > udw_core::detector::MAX_QUBITS * 64 {
            return Err(ConfigError::new("lattice", format!("{} regions is too many", lattice.len())));
        }
        let lambda = positive("lambda", self.lambda.unwrap_or(2.0 * std::f64::consts::PI))?;
        let shots = match (id, &self.shots) {
            (ScenarioId::ShotNoiseStudy, None) => vec![1_000, 10_000, 100_000, 1_000_000, 10_000_000],
            (_, None) => Vec::new(),
            (_, Some(s)) => s.clone(),
        };
        if shots.contains(&0) {
            return Err(ConfigError::new("shots", "shot counts must be at least 1"));
        }
        match id {
            ScenarioId::TomographyRoundtrip if shots.len() > 1 => {
                return Err(ConfigError::new("shots", "tomography_roundtrip takes at most one shot count"));
            }
            ScenarioId::ShotNoiseStudy if shots.len() < 3 => {
                return Err(ConfigError::new("shots", "a slope fit needs at least 3 shot counts"));
            }
            _ => {}
        }
        let repetitions = self.repetitions.unwrap_or(20);
        if repetitions == 0 {
            return Err(ConfigError::new("repetitions", "must be at least 1"));
        }
        let ell_grid = self.ell_grid.clone().unwrap_or_else(|| (2..=10).map(|k| k as f64 / 100.0).collect());
        if let Some(bad) = ell_grid.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return Err(ConfigError::new("ell_grid", format!("width {bad} is not positive")));
        }
        if id == ScenarioId::ConvergenceSweep && ell_grid.len() < 3 {
            return Err(ConfigError::new("ell_grid", "a slope fit needs at least 3 widths"));
        }
        let separation = self.separation.unwrap_or(Separation { dt: 0.0, dr: 1.0 });
        if !(separation.dt.is_finite() && separation.dr >= 0.0 && separation.dr.is_finite()) {
            return Err(ConfigError::new("separation", "need finite dt and dr >= 0"));
        }
        if id == ScenarioId::ConvergenceSweep {
            let sigma2 = (separation.dr * separation.dr - separation.dt * separation.dt).abs();
            if let Some(bad) = ell_grid.iter().find(|&&l| l > sigma2.sqrt() / 10.0) {
                return Err(ConfigError::new("ell_grid", format!("width {bad} exceeds a tenth of the separation")));
            }
        }
        let tol = self.tol.unwrap_or(1e-12);
        if !(tol > 0.0 && tol < 1.0) {
            return Err(ConfigError::new("tol", "must lie in (0, 1)"));
        }
        let output_dir = self.output_dir.clone().unwrap_or_else(|| PathBuf::from("out").join(id.as_str()));
        Ok(Resolved {
            id,
            ell,
            beta,
            delta,
            s_range,
            anchor,
            temporal_sign: temporal_sign as f64,
            grid,
            lattice,
            lambda,
            shots,
            repetitions,
            ell_grid,
            separation,
            seed: self.seed.unwrap_or(0),
            output_dir,
            enable_quadrature_columns: self.enable_quadrature_columns.unwrap_or(false),
            tol,
            kernels_dir: self.kernels_dir.clone(),
        })
    }
}

fn positive(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::new(field, format!("must be positive and finite, got {v}")))
    }
}

/// Best-effort field name from a serde_json message.
fn json_field(msg: &str) -> String {
    for marker in ["unknown field `", "missing field `"] {
        if let Some(rest) = msg.split(marker).nth(1) {
            return rest.split('`').next().unwrap_or("config").to_string();
        }
    }
    if msg.contains("variant") {
        return "scenario_id".to_string();
    }
    "config".to_string()
}

/// A fully defaulted configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub id: ScenarioId,
    pub ell: f64,
    pub beta: Option<f64>,
    pub delta: f64,
    pub s_range: Range,
    pub anchor: Anchor,
    pub temporal_sign: f64,
    pub grid: GridSpec,
    pub lattice: LatticeSpec,
    pub lambda: f64,
    pub shots: Vec<u64>,
    pub repetitions: usize,
    pub ell_grid: Vec<f64>,
    pub separation: Separation,
    pub seed: u64,
    #[serde(skip)]
    pub output_dir: PathBuf,
    pub enable_quadrature_columns: bool,
    pub tol: f64,
    #[serde(skip)]
    pub kernels_dir: Option<PathBuf>,
}
