//! Kernel curves against region separation.
//!
//! Each scan holds one region at an anchor and moves the other either in
//! space (`dt = 0`) or in time (`dr = 0`). Rows carry `s_over_ell`, negative
//! for the temporal scan.

use std::path::Path;

use rayon::prelude::*;
use udw_core::kernels::{hadamard_point, wightman_smeared_closed, wightman_smeared_quadrature, FieldState};
use udw_core::multipole::estimate;
use udw_core::smearing::GaussianRegion;
use udw_core::spacetime::Event;

use crate::config::Resolved;
use crate::table::{write_rows, Row};
use crate::{numerical, RunError, RunReport};

/// One scan point: `(s_over_ell, anchored region, moving region)`.
type Point = (f64, GaussianRegion, GaussianRegion);

fn scan(cfg: &Resolved, anchor: Event, temporal_sign: f64) -> Result<Vec<Point>, RunError> {
    let ell = cfg.ell;
    let region = |e: Event| GaussianRegion::new(e, ell).map_err(|e| numerical(e.0));
    let ri = region(anchor)?;
    let s = cfg.s_range.values();
    let mut out = Vec::with_capacity(2 * s.len());
    for &si in s.iter().rev() {
        let e = Event::new(anchor.t + temporal_sign * si * ell, anchor.x, anchor.y, anchor.z);
        out.push((-si, ri, region(e)?));
    }
    for &si in &s {
        out.push((si, ri, region(Event::new(anchor.t, anchor.x + si * ell, anchor.y, anchor.z))?));
    }
    Ok(out)
}

fn closed_re(state: &FieldState, ri: &GaussianRegion, rj: &GaussianRegion) -> Result<f64, String> {
    match wightman_smeared_closed(state, ri, rj) {
        Ok(Some(w)) => Ok(w.re),
        Ok(None) => Err("no closed form at this separation".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn quad_re(state: &FieldState, ri: &GaussianRegion, rj: &GaussianRegion, tol: f64) -> Result<f64, String> {
    wightman_smeared_quadrature(state, ri, rj, tol).map(|w| w.re).map_err(|e| e.to_string())
}

fn multipole_re(state: &FieldState, ri: &GaussianRegion, rj: &GaussianRegion) -> Result<f64, String> {
    estimate(state, ri, rj, None, None).map(|e| e.value).map_err(|e| e.to_string())
}

fn run_scan<F>(dir: &Path, file: &str, header: &[&str], points: &[Point], f: F) -> Result<RunReport, RunError>
where
    F: Fn(&mut Row, &GaussianRegion, &GaussianRegion) + Sync,
{
    let rows: Vec<Row> = points
        .par_iter()
        .map(|(s, ri, rj)| {
            let mut row = Row::new(*s);
            f(&mut row, ri, rj);
            row
        })
        .collect();
    let point_errors = write_rows(&dir.join(file), header, &rows)?;
    Ok(RunReport { files: vec![file.to_string()], point_errors, ..Default::default() })
}

pub(crate) fn vacuum(cfg: &Resolved, dir: &Path) -> Result<RunReport, RunError> {
    let points = scan(cfg, Event::default(), 1.0)?;
    let state = FieldState::Vacuum;
    let mut header = vec!["s_over_ell", "pointlike", "smeared_closed", "multipole"];
    if cfg.enable_quadrature_columns {
        header.push("smeared_quadrature");
    }
    run_scan(dir, "vacuum_curves.csv", &header, &points, |row, ri, rj| {
        row.push("pointlike", hadamard_point(&state, &ri.center, &rj.center));
        row.push("smeared_closed", closed_re(&state, ri, rj));
        row.push("multipole", multipole_re(&state, ri, rj));
        if cfg.enable_quadrature_columns {
            row.push("smeared_quadrature", quad_re(&state, ri, rj, cfg.tol));
        }
    })
}

pub(crate) fn thermal(cfg: &Resolved, dir: &Path) -> Result<RunReport, RunError> {
    let points = scan(cfg, Event::default(), 1.0)?;
    let beta = cfg.beta.expect("thermal_curves resolves a default beta") * cfg.ell;
    let thermal = FieldState::Thermal { beta };
    let vac = FieldState::Vacuum;
    let header = [
        "s_over_ell",
        "thermal_pointlike",
        "thermal_smeared",
        "thermal_multipole",
        "vacuum_pointlike",
        "vacuum_smeared",
        "vacuum_multipole",
    ];
    run_scan(dir, "thermal_curves.csv", &header, &points, |row, ri, rj| {
        row.push("thermal_pointlike", hadamard_point(&thermal, &ri.center, &rj.center));
        row.push("thermal_smeared", quad_re(&thermal, ri, rj, cfg.tol));
        row.push("thermal_multipole", multipole_re(&thermal, ri, rj));
        row.push("vacuum_pointlike", hadamard_point(&vac, &ri.center, &rj.center));
        row.push("vacuum_smeared", closed_re(&vac, ri, rj));
        row.push("vacuum_multipole", multipole_re(&vac, ri, rj));
    })
}

fn state_curves(
    cfg: &Resolved,
    dir: &Path,
    state: FieldState,
    file: &str,
    closed: bool,
) -> Result<RunReport, RunError> {
    let ell = cfg.ell;
    let anchor = Event::new(cfg.anchor.t * ell, cfg.anchor.x * ell, 0.0, 0.0);
    let points = scan(cfg, anchor, cfg.temporal_sign)?;
    let vac = FieldState::Vacuum;
    let mut header = vec!["s_over_ell", "vacuum", "state_kernel", "multipole"];
    if closed {
        header.push("smeared_closed");
    }
    if cfg.enable_quadrature_columns {
        header.push("smeared_quadrature");
    }
    run_scan(dir, file, &header, &points, |row, ri, rj| {
        row.push("vacuum", closed_re(&vac, ri, rj));
        row.push("state_kernel", hadamard_point(&state, &ri.center, &rj.center));
        row.push("multipole", multipole_re(&state, ri, rj));
        if closed {
            row.push("smeared_closed", closed_re(&state, ri, rj));
        }
        if cfg.enable_quadrature_columns {
            row.push("smeared_quadrature", quad_re(&state, ri, rj, cfg.tol));
        }
    })
}

pub(crate) fn coherent(cfg: &Resolved, dir: &Path) -> Result<RunReport, RunError> {
    let state = FieldState::Coherent { delta: cfg.delta * cfg.ell };
    state_curves(cfg, dir, state, "coherent_curves.csv", true)
}

pub(crate) fn oneparticle(cfg: &Resolved, dir: &Path) -> Result<RunReport, RunError> {
    let state = FieldState::OneParticle { delta: cfg.delta * cfg.ell };
    state_curves(cfg, dir, state, "oneparticle_curves.csv", false)
}
