//! Small-width expansion of the smeared Wightman function.
//!
//! To second order in the width `l` of two Gaussian regions,
//!
//! `W(L_i, L_j) ~ W - (l^2/6) W (dR_i + dR_j) + (l^2/2) (tr W_{mu nu} + tr W_{mu' nu'})`
//!
//! where the traces are Euclidean (`delta^{mu nu}`), `dR` is the Euclidean
//! trace of the Ricci tensor at each centre, and the dipole term vanishes
//! because the Gaussians are centred. The residual is `O(l^4)`.

use std::f64::consts::PI;
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::io::{csv_writer, fmt_f64};
use crate::kernels::{hadamard_point, wightman_smeared_quadrature, FieldState, KernelError};
use crate::numerics::{fit_loglog_slope, NumericsError, SlopeFit};
use crate::smearing::{delta_trace, moments, GaussianRegion, Mat4};
use crate::spacetime::{classify, default_lightcone_tol, interval, CausalRelation, Event};

/// Relative disagreement between the `h` and `h/2` stencils above which the
/// two are Richardson-combined.
const RICHARDSON_TRIGGER: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum MultipoleError {
    #[error("finite-difference stencil point {point:?} crosses the lightcone of {other:?}")]
    Stencil { point: [f64; 4], other: [f64; 4] },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("residual table i/o: {0}")]
    Io(String),
}

/// Pointlike value and coordinate derivatives of `Re W(a, b)`. `grad_i`,
/// `hess_ii` differentiate with respect to `a`; `grad_j`, `hess_jj` with
/// respect to `b`. Indices are covariant, ordered `(t, x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeBundle {
    pub w: f64,
    pub grad_i: [f64; 4],
    pub grad_j: [f64; 4],
    pub hess_ii: Mat4,
    pub hess_jj: Mat4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultipoleEstimate {
    pub value: f64,
    pub pointlike_term: f64,
    pub quadrupole_term: f64,
    pub ricci_term: f64,
}

const ETA: [f64; 4] = [-1.0, 1.0, 1.0, 1.0];

fn vacuum_bundle(a: &Event, b: &Event) -> DerivativeBundle {
    let iv = interval(a, b);
    let sigma = iv.sigma;
    let w = 1.0 / (8.0 * PI * PI * sigma);
    let d = a.as_array();
    let e = b.as_array();
    // Covariant separation (x - x')_mu.
    let x: [f64; 4] = std::array::from_fn(|m| ETA[m] * (d[m] - e[m]));
    let grad_i: [f64; 4] = std::array::from_fn(|m| -x[m] / (8.0 * PI * PI * sigma * sigma));
    let grad_j = grad_i.map(|g| -g);
    let hess: Mat4 = std::array::from_fn(|m| {
        std::array::from_fn(|n| {
            let eta = if m == n { ETA[m] } else { 0.0 };
            w / sigma * (2.0 * x[m] * x[n] / sigma - eta)
        })
    });
    DerivativeBundle { w, grad_i, grad_j, hess_ii: hess, hess_jj: hess }
}

struct Stencil<'a> {
    state: &'a FieldState,
    a: [f64; 4],
    b: [f64; 4],
    sign: f64,
}

impl Stencil<'_> {
    /// `Re W` with `a` shifted by `da` and `b` by `db`.
    fn eval(&self, da: [f64; 4], db: [f64; 4]) -> Result<f64, MultipoleError> {
        let pa = Event::from_array(std::array::from_fn(|m| self.a[m] + da[m]));
        let pb = Event::from_array(std::array::from_fn(|m| self.b[m] + db[m]));
        let iv = interval(&pa, &pb);
        if classify(&pa, &pb, default_lightcone_tol(&iv)) == CausalRelation::Lightlike || iv.sigma.signum() != self.sign
        {
            return Err(MultipoleError::Stencil { point: pa.as_array(), other: pb.as_array() });
        }
        Ok(hadamard_point(self.state, &pa, &pb)?)
    }

    fn shifted(&self, on_a: bool, shift: [f64; 4]) -> Result<f64, MultipoleError> {
        if on_a {
            self.eval(shift, [0.0; 4])
        } else {
            self.eval([0.0; 4], shift)
        }
    }
}

fn unit(m: usize, h: f64) -> [f64; 4] {
    std::array::from_fn(|k| if k == m { h } else { 0.0 })
}

fn pair(m: usize, hm: f64, n: usize, hn: f64) -> [f64; 4] {
    std::array::from_fn(|k| {
        if k == m {
            hm
        } else if k == n {
            hn
        } else {
            0.0
        }
    })
}

/// Compares a stencil at `h` and `h/2`; extrapolates when they disagree.
fn refine(order: i32, h: f64, d: impl Fn(f64) -> Result<f64, MultipoleError>) -> Result<f64, MultipoleError> {
    let coarse = d(h)?;
    let fine = d(0.5 * h)?;
    if (coarse - fine).abs() > RICHARDSON_TRIGGER * fine.abs() {
        let k = 2f64.powi(order);
        Ok((k * fine - coarse) / (k - 1.0))
    } else {
        Ok(coarse)
    }
}

#[allow(clippy::needless_range_loop)]
fn fd_bundle(state: &FieldState, a: &Event, b: &Event, h: f64) -> Result<DerivativeBundle, MultipoleError> {
    let iv = interval(a, b);
    let st = Stencil { state, a: a.as_array(), b: b.as_array(), sign: iv.sigma.signum() };
    let w = st.eval([0.0; 4], [0.0; 4])?;
    let mut grads = [[0.0; 4]; 2];
    let mut hessians = [[[0.0; 4]; 4]; 2];
    for (side, on_a) in [true, false].into_iter().enumerate() {
        for m in 0..4 {
            let f = |s: f64| st.shifted(on_a, unit(m, s));
            grads[side][m] =
                refine(4, h, |h| Ok((-f(2.0 * h)? + 8.0 * f(h)? - 8.0 * f(-h)? + f(-2.0 * h)?) / (12.0 * h)))?;
            hessians[side][m][m] = refine(4, h, |h| {
                Ok((-f(2.0 * h)? + 16.0 * f(h)? - 30.0 * w + 16.0 * f(-h)? - f(-2.0 * h)?) / (12.0 * h * h))
            })?;
            for n in 0..m {
                let g = |sm: f64, sn: f64| st.shifted(on_a, pair(m, sm, n, sn));
                let v = refine(2, h, |h| Ok((g(h, h)? - g(h, -h)? - g(-h, h)? + g(-h, -h)?) / (4.0 * h * h)))?;
                hessians[side][m][n] = v;
                hessians[side][n][m] = v;
            }
        }
    }
    Ok(DerivativeBundle { w, grad_i: grads[0], grad_j: grads[1], hess_ii: hessians[0], hess_jj: hessians[1] })
}

/// Derivatives of the pointlike kernel: closed forms for the vacuum, 5-point
/// central differences otherwise. `step = None` selects
/// `h = (|dt| + dr) * 1e-4`.
pub fn derivatives(
    state: &FieldState,
    a: &Event,
    b: &Event,
    step: Option<f64>,
) -> Result<DerivativeBundle, MultipoleError> {
    state.validate()?;
    let iv = interval(a, b);
    if classify(a, b, default_lightcone_tol(&iv)) == CausalRelation::Lightlike {
        return Err(KernelError::Lightcone { dt: iv.dt, dr: iv.dr }.into());
    }
    if *state == FieldState::Vacuum {
        return Ok(vacuum_bundle(a, b));
    }
    let h = match step {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => return Err(MultipoleError::Invalid(format!("step must be positive, got {h}"))),
        None => (iv.dt.abs() + iv.dr) * 1e-4,
    };
    fd_bundle(state, a, b, h)
}

fn check_widths(ri: &GaussianRegion, rj: &GaussianRegion) -> Result<f64, MultipoleError> {
    if ri.ell != rj.ell {
        return Err(KernelError::MismatchedWidths(ri.ell, rj.ell).into());
    }
    Ok(ri.ell)
}

/// Second-order estimate of `Re W(L_i, L_j)`. Absent Ricci matrices mean
/// flat spacetime.
pub fn estimate(
    state: &FieldState,
    ri: &GaussianRegion,
    rj: &GaussianRegion,
    ricci_i: Option<&Mat4>,
    ricci_j: Option<&Mat4>,
) -> Result<MultipoleEstimate, MultipoleError> {
    let ell = check_widths(ri, rj)?;
    let d = derivatives(state, &ri.center, &rj.center, None)?;
    Ok(from_bundle(
        &d,
        ell,
        ricci_i.map(|r| moments(ri, Some(r)).ricci_trace_correction),
        ricci_j.map(|r| moments(rj, Some(r)).ricci_trace_correction),
    ))
}

fn from_bundle(d: &DerivativeBundle, ell: f64, ci: Option<f64>, cj: Option<f64>) -> MultipoleEstimate {
    let pointlike_term = d.w;
    let ricci_term = d.w * (ci.unwrap_or(0.0) + cj.unwrap_or(0.0));
    let quadrupole_term = 0.5 * ell * ell * (delta_trace(&d.hess_ii) + delta_trace(&d.hess_jj));
    MultipoleEstimate {
        value: pointlike_term + ricci_term + quadrupole_term,
        pointlike_term,
        quadrupole_term,
        ricci_term,
    }
}

/// The vacuum estimate in factorised form,
/// `W0 (1 + l^2 (12 dt^2 + 4 dr^2) / (dr^2 - dt^2)^2)`.
pub fn vacuum_factorized(dt: f64, dr: f64, ell: f64) -> f64 {
    let s2 = dr * dr - dt * dt;
    let w0 = 1.0 / (4.0 * PI * PI * s2);
    w0 * (1.0 + ell * ell * (12.0 * dt * dt + 4.0 * dr * dr) / (s2 * s2))
}

/// How much of the expansion enters a residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionOrder {
    Pointlike,
    Quadrupole,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualPoint {
    pub ell: f64,
    pub quadrature: f64,
    pub estimate: f64,
    pub residual: f64,
}

/// `|Re W_quadrature - estimate|` for regions centred at `(dt, dr, 0, 0)`
/// and the origin, one row per width.
pub fn residual_table(
    state: &FieldState,
    base: (f64, f64),
    ell_grid: &[f64],
    tol: f64,
    order: ExpansionOrder,
) -> Result<Vec<ResidualPoint>, MultipoleError> {
    let (dt, dr) = base;
    let a = Event::new(dt, dr, 0.0, 0.0);
    let b = Event::default();
    let separation = (2.0 * interval(&a, &b).sigma).abs().sqrt();
    if let Some(bad) = ell_grid.iter().find(|&&l| !(l > 0.0) || l > separation / 10.0) {
        return Err(MultipoleError::Invalid(format!("width {bad} outside (0, separation/10 = {}]", separation / 10.0)));
    }
    let bundle = derivatives(state, &a, &b, None)?;
    ell_grid
        .par_iter()
        .map(|&ell| {
            let ri = GaussianRegion::new(a, ell).map_err(|e| MultipoleError::Invalid(e.0))?;
            let rj = GaussianRegion::new(b, ell).map_err(|e| MultipoleError::Invalid(e.0))?;
            let quadrature = wightman_smeared_quadrature(state, &ri, &rj, tol)?.re;
            let est = from_bundle(&bundle, ell, None, None);
            let estimate = match order {
                ExpansionOrder::Pointlike => est.pointlike_term,
                ExpansionOrder::Quadrupole => est.value,
            };
            Ok(ResidualPoint { ell, quadrature, estimate, residual: (quadrature - estimate).abs() })
        })
        .collect()
}

/// Log-log slope of the residual against `l`, dropping residuals below
/// `1e-13`.
pub fn convergence_order(
    state: &FieldState,
    base: (f64, f64),
    ell_grid: &[f64],
    tol: f64,
) -> Result<SlopeFit, MultipoleError> {
    convergence_order_at(state, base, ell_grid, tol, ExpansionOrder::Quadrupole)
}

pub fn convergence_order_at(
    state: &FieldState,
    base: (f64, f64),
    ell_grid: &[f64],
    tol: f64,
    order: ExpansionOrder,
) -> Result<SlopeFit, MultipoleError> {
    let rows = residual_table(state, base, ell_grid, tol, order)?;
    let points: Vec<(f64, f64)> = rows.iter().filter(|r| r.residual >= 1e-13).map(|r| (r.ell, r.residual)).collect();
    if points.len() < 3 {
        return Err(MultipoleError::Invalid(format!("only {} residuals above the noise floor", points.len())));
    }
    Ok(fit_loglog_slope(&points)?)
}

pub fn write_residual_csv(path: &Path, rows: &[ResidualPoint]) -> Result<(), MultipoleError> {
    let io = |e: csv::Error| MultipoleError::Io(e.to_string());
    let mut w = csv_writer(path).map_err(io)?;
    w.write_record(["ell", "quadrature", "estimate", "residual"]).map_err(io)?;
    for r in rows {
        w.write_record([fmt_f64(r.ell), fmt_f64(r.quadrature), fmt_f64(r.estimate), fmt_f64(r.residual)])
            .map_err(io)?;
    }
    w.flush().map_err(|e| MultipoleError::Io(e.to_string()))
}

/// Thermal second-order expansion at equal position,
/// `-1/(4 b^2 S^2) - pi^2 l^2 (2 + cosh(2 pi dt/b)) / (b^4 S^4)`, `S = sinh(pi dt/b)`.
pub fn thermal_temporal_expansion(beta: f64, dt: f64, ell: f64) -> f64 {
    let x = PI * dt / beta;
    let s2 = x.sinh().powi(2);
    -1.0 / (4.0 * beta * beta * s2) - PI * PI * ell * ell * (2.0 + (2.0 * x).cosh()) / (beta.powi(4) * s2 * s2)
}

/// Equal-time thermal expansion measured through [`estimate`] and written as
/// `A coth(pi r/b)/(b r) + B l^2 coth(pi r/b)/(b^3 r sinh^2(pi r/b))`, next to
/// the two candidate leading coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalSpatialAudit {
    pub measured_leading: f64,
    /// `A = 1/4`, as the expansion is sometimes printed.
    pub printed_leading: f64,
    /// `A = 1/(4 pi)`, the value consistent with the vacuum limit.
    pub vacuum_consistent_leading: f64,
    pub measured_correction: f64,
    /// `B = pi`.
    pub printed_correction: f64,
}

pub fn thermal_spatial_audit(beta: f64, r: f64, ell: f64) -> Result<ThermalSpatialAudit, MultipoleError> {
    let ri = GaussianRegion::new(Event::new(0.0, r, 0.0, 0.0), ell).map_err(|e| MultipoleError::Invalid(e.0))?;
    let rj = GaussianRegion::new(Event::default(), ell).map_err(|e| MultipoleError::Invalid(e.0))?;
    let est = estimate(&FieldState::Thermal { beta }, &ri, &rj, None, None)?;
    let x = PI * r / beta;
    let coth = 1.0 / x.tanh();
    Ok(ThermalSpatialAudit {
        measured_leading: est.pointlike_term * beta * r / coth,
        printed_leading: 0.25,
        vacuum_consistent_leading: 0.25 / PI,
        measured_correction: est.quadrupole_term * beta.powi(3) * r * x.sinh().powi(2) / (ell * ell * coth),
        printed_correction: PI,
    })
}
