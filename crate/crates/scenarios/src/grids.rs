//! Field profiles on `(t, x)` grids at `y = z = 0`.

use std::path::Path;

use rayon::prelude::*;
use udw_core::kernels::{f_oneparticle, phi0_coherent};
use udw_core::spacetime::Event;

use crate::config::Resolved;
use crate::table::write_plain;
use crate::{RunError, RunReport};

/// Rows `(t, x, f(event))` with `t` outer, both in units of `ell`.
fn sample_grid<F>(cfg: &Resolved, f: F) -> Vec<Vec<f64>>
where
    F: Fn(&Event) -> f64 + Sync,
{
    let ts = cfg.grid.t.values();
    let xs = cfg.grid.x.values();
    let ell = cfg.ell;
    ts.par_iter()
        .flat_map_iter(|&t| xs.iter().map(move |&x| (t, x)))
        .map(|(t, x)| vec![t, x, f(&Event::new(t * ell, x * ell, 0.0, 0.0))])
        .collect()
}

pub(crate) fn coherent_field(cfg: &Resolved, dir: &Path) -> Result<RunReport, RunError> {
    let delta = cfg.delta * cfg.ell;
    let rows = sample_grid(cfg, |e| phi0_coherent(delta, e));
    let file = "coherent_field_grid.csv";
    write_plain(&dir.join(file), &["t", "x", "value"], &rows)?;
    Ok(RunReport { files: vec![file.into()], ..Default::default() })
}

/// `W_phi(x_i, x) - W_0(x_i, x) = 2 Re[F(x_i) F*(x)]`, which stays finite on
/// the light cone of the anchor where either kernel alone diverges.
pub(crate) fn oneparticle_diff(cfg: &Resolved, dir: &Path) -> Result<RunReport, RunError> {
    let delta = cfg.delta * cfg.ell;
    let anchor = Event::new(cfg.anchor.t * cfg.ell, cfg.anchor.x * cfg.ell, 0.0, 0.0);
    let fa = f_oneparticle(delta, &anchor);
    let rows = sample_grid(cfg, |e| 2.0 * (fa * f_oneparticle(delta, e).conj()).re);
    let file = "oneparticle_diff_grid.csv";
    write_plain(&dir.join(file), &["t", "x", "value"], &rows)?;
    Ok(RunReport { files: vec![file.into()], ..Default::default() })
}
