//! Gaussian-smeared kernels: closed forms where they exist and the
//! momentum-space quadrature used as the reference oracle.
//!
//! Smearing a mode of wavenumber `k` (on shell, `omega = k`) over a width-`l`
//! Gaussian multiplies it by `e^{-l^2 k^2}`, so every smeared quantity is a
//! one-dimensional radial integral over `k` with an explicit Gaussian damping.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use super::point::spherical_wave;
use super::{FieldState, KernelError};
use crate::numerics::{dawson_over_x, gaussian_cutoff, integrate, one_minus_2x_dawson, sinc, sinhc, QuadOptions};
use crate::smearing::GaussianRegion;
use crate::spacetime::{interval, Event};

fn common_width(ri: &GaussianRegion, rj: &GaussianRegion) -> Result<f64, KernelError> {
    if ri.ell != rj.ell {
        return Err(KernelError::MismatchedWidths(ri.ell, rj.ell));
    }
    Ok(ri.ell)
}

fn radial_integral(f: impl Fn(f64) -> f64, decay: f64, tol: f64) -> Result<f64, KernelError> {
    let k_max = gaussian_cutoff(decay, 1e-17);
    let opts = QuadOptions { abs_tol: 0.0, rel_tol: tol, max_intervals: 4000 };
    Ok(integrate(f, 0.0, k_max, &opts)?.value)
}

/// Smeared causal propagator `E(L_i, L_j)` between two width-`l` Gaussians:
/// `-[e^{-(dr-dt)^2/8l^2} - e^{-(dr+dt)^2/8l^2}] / (8 sqrt2 pi^{3/2} l dr)`.
pub fn causal_smeared(ri: &GaussianRegion, rj: &GaussianRegion) -> Result<f64, KernelError> {
    let ell = common_width(ri, rj)?;
    let iv = interval(&ri.center, &rj.center);
    Ok(causal_from_interval(iv.dt, iv.dr, 2.0 * ell * ell))
}

/// `E` for combined Gaussian variance parameter `a = l_i^2 + l_j^2`.
fn causal_from_interval(dt: f64, dr: f64, a: f64) -> f64 {
    let x = dr * dt / (2.0 * a);
    let norm = 8.0 * PI.powf(1.5) * a.sqrt();
    if x.abs() < 1.0 {
        -dt / (2.0 * a) * 2.0 * (-(dr * dr + dt * dt) / (4.0 * a)).exp() * sinhc(x) / norm
    } else {
        -((-(dr - dt).powi(2) / (4.0 * a)).exp() - (-(dr + dt).powi(2) / (4.0 * a)).exp()) / (norm * dr)
    }
}

/// Smeared retarded propagator and whether the regions overlap enough that
/// identifying it with `E` is imprecise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetardedValue {
    pub value: f64,
    pub precision_warning: bool,
}

/// `G_R(L_i, L_j)`: equal to `E(L_i, L_j)` when centre `i` is later than
/// centre `j`, zero otherwise.
pub fn retarded_smeared(ri: &GaussianRegion, rj: &GaussianRegion) -> Result<RetardedValue, KernelError> {
    let ell = common_width(ri, rj)?;
    let iv = interval(&ri.center, &rj.center);
    let precision_warning = iv.dt.abs() < 5.0 * ell && (iv.dt - iv.dr).abs() < 5.0 * ell;
    let value = if iv.dt > 0.0 { causal_from_interval(iv.dt, iv.dr, 2.0 * ell * ell) } else { 0.0 };
    Ok(RetardedValue { value, precision_warning })
}

/// Closed form of the smeared coherent-state field.
pub fn phi0_smeared(delta: f64, region: &GaussianRegion) -> f64 {
    let w = (delta * delta + region.ell * region.ell).sqrt();
    delta / w * spherical_wave(w, region.center.t, region.center.radius())
}

/// Smeared coherent field from its momentum representation
/// `-(delta / (sqrt2 pi^{3/2})) int e^{-(delta^2+l^2)k^2} k sinc(kr) sin(kt) dk`.
pub fn phi0_smeared_quadrature(delta: f64, region: &GaussianRegion, tol: f64) -> Result<f64, KernelError> {
    let c = region.center;
    let (t, r) = (c.t, c.radius());
    let decay = delta * delta + region.ell * region.ell;
    let v = radial_integral(|k| (-decay * k * k).exp() * k * sinc(k * r) * (k * t).sin(), decay, tol)?;
    Ok(-delta / (SQRT_2 * PI.powf(1.5)) * v)
}

/// Smeared one-particle profile
/// `(delta^2/(sqrt2 pi)) int k^2 sinc(kr) e^{-(delta^2/2 + l^2)k^2} e^{-ikt} dk`.
pub fn f_oneparticle_smeared_quadrature(
    delta: f64,
    region: &GaussianRegion,
    tol: f64,
) -> Result<Complex64, KernelError> {
    let c = region.center;
    let (t, r) = (c.t, c.radius());
    let decay = 0.5 * delta * delta + region.ell * region.ell;
    let amp = |k: f64| k * k * sinc(k * r) * (-decay * k * k).exp();
    let re = radial_integral(|k| amp(k) * (k * t).cos(), decay, tol)?;
    let im = radial_integral(|k| -amp(k) * (k * t).sin(), decay, tol)?;
    Ok(Complex64::new(re, im) * (delta * delta / (SQRT_2 * PI)))
}

fn vacuum_quadrature(center_i: &Event, center_j: &Event, a: f64, tol: f64) -> Result<Complex64, KernelError> {
    let iv = interval(center_i, center_j);
    let (dt, dr) = (iv.dt, iv.dr);
    let amp = |k: f64| k * sinc(k * dr) * (-a * k * k).exp() / (4.0 * PI * PI);
    let re = radial_integral(|k| amp(k) * (k * dt).cos(), a, tol)?;
    let im = radial_integral(|k| -amp(k) * (k * dt).sin(), a, tol)?;
    Ok(Complex64::new(re, im))
}

/// Smeared Wightman function `W(L_i, L_j)` by radial momentum quadrature.
/// `tol` is the relative tolerance of each real integral.
pub fn wightman_smeared_quadrature(
    state: &FieldState,
    ri: &GaussianRegion,
    rj: &GaussianRegion,
    tol: f64,
) -> Result<Complex64, KernelError> {
    state.validate()?;
    let ell = common_width(ri, rj)?;
    let a = 2.0 * ell * ell;
    let vac = vacuum_quadrature(&ri.center, &rj.center, a, tol)?;
    match *state {
        FieldState::Vacuum => Ok(vac),
        FieldState::Thermal { beta } => {
            let iv = interval(&ri.center, &rj.center);
            // (1 + 2 n_k) = coth(beta k / 2); k coth(beta k/2) -> 2/beta at k = 0.
            let k_coth = |k: f64| {
                let x = 0.5 * beta * k;
                if x < 1e-8 {
                    2.0 / beta
                } else {
                    k / x.tanh()
                }
            };
            let re = radial_integral(
                |k| sinc(k * iv.dr) * k_coth(k) * (-a * k * k).exp() * (k * iv.dt).cos() / (4.0 * PI * PI),
                a,
                tol,
            )?;
            Ok(Complex64::new(re, vac.im))
        }
        FieldState::Coherent { delta } => {
            let pi = phi0_smeared_quadrature(delta, ri, tol)?;
            let pj = phi0_smeared_quadrature(delta, rj, tol)?;
            Ok(vac + pi * pj)
        }
        FieldState::OneParticle { delta } => {
            let fi = f_oneparticle_smeared_quadrature(delta, ri, tol)?;
            let fj = f_oneparticle_smeared_quadrature(delta, rj, tol)?;
            Ok(vac + 2.0 * (fi * fj.conj()).re)
        }
    }
}

/// Closed-form smeared Wightman function, or `None` where no closed form is
/// implemented (thermal, one-particle, and vacuum with both `dt` and `dr`
/// nonzero).
pub fn wightman_smeared_closed(
    state: &FieldState,
    ri: &GaussianRegion,
    rj: &GaussianRegion,
) -> Result<Option<Complex64>, KernelError> {
    state.validate()?;
    let ell = common_width(ri, rj)?;
    let a = 2.0 * ell * ell;
    let iv = interval(&ri.center, &rj.center);
    let vac = if iv.dt == 0.0 {
        // D(u)/(4 pi^2 dr sqrt a), u = dr / (2 sqrt a); finite as dr -> 0.
        let u = iv.dr / (2.0 * a.sqrt());
        Complex64::new(dawson_over_x(u) / (8.0 * PI * PI * a), 0.0)
    } else if iv.dr == 0.0 {
        let u = iv.dt.abs() / (2.0 * a.sqrt());
        let re = one_minus_2x_dawson(u) / (8.0 * PI * PI * a);
        Complex64::new(re, 0.5 * causal_from_interval(iv.dt, 0.0, a))
    } else {
        return Ok(None);
    };
    Ok(match *state {
        FieldState::Vacuum => Some(vac),
        FieldState::Coherent { delta } => Some(vac + phi0_smeared(delta, ri) * phi0_smeared(delta, rj)),
        FieldState::Thermal { .. } | FieldState::OneParticle { .. } => None,
    })
}
