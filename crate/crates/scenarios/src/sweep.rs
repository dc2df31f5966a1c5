//! Multipole residual against smearing width.
//!
//! Separation, widths and `beta` are absolute here: the sweep varies the
//! width itself.

use std::path::Path;

use udw_core::kernels::FieldState;
use udw_core::multipole::{residual_table, ExpansionOrder, ResidualPoint};
use udw_core::numerics::fit_loglog_slope;

use crate::config::Resolved;
use crate::table::write_plain;
use crate::{numerical, RunError, RunReport};

/// Residuals below this are quadrature noise and stay out of the fit.
const FIT_FLOOR: f64 = 1e-13;

fn slope(rows: &[ResidualPoint]) -> Result<f64, RunError> {
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.residual >= FIT_FLOOR).map(|r| (r.ell, r.residual)).collect();
    Ok(fit_loglog_slope(&pts).map_err(numerical)?.slope)
}

pub(crate) fn convergence(cfg: &Resolved, dir: &Path) -> Result<RunReport, RunError> {
    let state = match cfg.beta {
        Some(beta) => FieldState::Thermal { beta },
        None => FieldState::Vacuum,
    };
    let base = (cfg.separation.dt, cfg.separation.dr);
    let quad = residual_table(&state, base, &cfg.ell_grid, cfg.tol, ExpansionOrder::Quadrupole).map_err(numerical)?;
    let point = residual_table(&state, base, &cfg.ell_grid, cfg.tol, ExpansionOrder::Pointlike).map_err(numerical)?;
    let (s_quad, s_point) = (slope(&quad)?, slope(&point)?);
    let rows: Vec<Vec<f64>> = quad
        .iter()
        .zip(&point)
        .map(|(q, p)| vec![q.ell, q.quadrature, q.estimate, q.residual, p.residual, s_quad, s_point])
        .collect();
    let file = "convergence_sweep.csv";
    let header = ["ell", "quadrature", "estimate", "residual", "residual_pointlike", "slope", "slope_pointlike"];
    write_plain(&dir.join(file), &header, &rows)?;
    let mut report = RunReport { files: vec![file.into()], ..Default::default() };
    report.summary.insert("slope".into(), s_quad);
    report.summary.insert("slope_pointlike".into(), s_point);
    Ok(report)
}
