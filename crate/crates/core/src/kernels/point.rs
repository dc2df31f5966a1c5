//! Pointlike kernels and the classical profiles of the coherent and
//! one-particle states.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use super::{FieldState, KernelError};
use crate::numerics::{dawson, sinhc};
use crate::spacetime::{classify, default_lightcone_tol, interval, CausalRelation, Event};

/// Real part of the pointlike Wightman function, `H(a, b) / 2`.
pub fn hadamard_point(state: &FieldState, a: &Event, b: &Event) -> Result<f64, KernelError> {
    state.validate()?;
    let iv = interval(a, b);
    if classify(a, b, default_lightcone_tol(&iv)) == CausalRelation::Lightlike {
        return Err(KernelError::Lightcone { dt: iv.dt, dr: iv.dr });
    }
    let vacuum = 1.0 / (8.0 * PI * PI * iv.sigma);
    Ok(match *state {
        FieldState::Vacuum => vacuum,
        FieldState::Thermal { beta } => thermal_point(beta, iv.dt, iv.dr),
        FieldState::Coherent { delta } => vacuum + phi0_coherent(delta, a) * phi0_coherent(delta, b),
        FieldState::OneParticle { delta } => {
            vacuum + 2.0 * (f_oneparticle(delta, a) * f_oneparticle(delta, b).conj()).re
        }
    })
}

fn ln_abs_sinh(a: f64) -> f64 {
    let a = a.abs();
    a + (-(-2.0 * a).exp_m1()).ln() - std::f64::consts::LN_2
}

/// Thermal real part written as
/// `sinhc(2 pi dr / beta) / (4 beta^2 sinh(pi (dr + dt)/beta) sinh(pi (dr - dt)/beta))`,
/// which equals the coth form and stays finite as `dr -> 0`.
pub fn thermal_point(beta: f64, dt: f64, dr: f64) -> f64 {
    let c = PI / beta;
    let a1 = c * (dr + dt);
    let a2 = c * (dr - dt);
    let y = 2.0 * c * dr;
    if a1.abs().max(a2.abs()).max(y) < 300.0 {
        return sinhc(y) / (4.0 * beta * beta * a1.sinh() * a2.sinh());
    }
    let ln_num = if y < 1e-8 { 0.0 } else { ln_abs_sinh(y) - y.ln() };
    let sign = a1.signum() * a2.signum();
    sign * (ln_num - ln_abs_sinh(a1) - ln_abs_sinh(a2)).exp() / (4.0 * beta * beta)
}

/// `(e^{-(r+t)^2/4w^2} - e^{-(r-t)^2/4w^2}) / (4 sqrt2 pi r)` evaluated
/// without cancellation at small `r t / w^2`.
pub(crate) fn spherical_wave(w: f64, t: f64, r: f64) -> f64 {
    let w2 = w * w;
    let x = r * t / (2.0 * w2);
    let norm = 4.0 * SQRT_2 * PI;
    if x.abs() < 1.0 {
        -(t / w2) * (-(r * r + t * t) / (4.0 * w2)).exp() * sinhc(x) / norm
    } else {
        ((-(r + t).powi(2) / (4.0 * w2)).exp() - (-(r - t).powi(2) / (4.0 * w2)).exp()) / (norm * r)
    }
}

/// Classical field of the coherent state sourced by a Gaussian of width `delta`.
pub fn phi0_coherent(delta: f64, x: &Event) -> f64 {
    spherical_wave(delta, x.t, x.radius())
}

/// Positive-frequency profile `F(x) = int d^3k u_k(x) f(k)` of the
/// one-particle wavepacket.
///
/// With `v± = (r ± t)/(sqrt2 delta)`:
/// `Re F = [v+ e^{-v+^2} + v- e^{-v-^2}] / (2 r sqrt(2 pi))` and
/// `Im F = -[v+ D(v+) - v- D(v-)] / (sqrt2 pi r)`, `D` being Dawson's integral.
pub fn f_oneparticle(delta: f64, x: &Event) -> Complex64 {
    let r = x.radius();
    let s = SQRT_2 * delta;
    let eps = r / s;
    let w = x.t / s;
    if eps < 1e-3 {
        // Central-difference expansion of the odd/even combinations in r.
        let e = (-w * w).exp();
        let w2 = w * w;
        let h1 = (1.0 - 2.0 * w2) * e;
        let h3 = (-6.0 + 24.0 * w2 - 8.0 * w2 * w2) * e;
        let d = dawson(w);
        let q1 = w + d * (1.0 - 2.0 * w2);
        let q3 = -10.0 * w + 4.0 * w * w2 + d * (-6.0 + 24.0 * w2 - 8.0 * w2 * w2);
        let e2 = eps * eps;
        let re = (h1 + e2 * h3 / 6.0) / (2.0 * delta * PI.sqrt());
        let im = -(q1 + e2 * q3 / 6.0) / (PI * delta);
        return Complex64::new(re, im);
    }
    let vp = (r + x.t) / s;
    let vm = (r - x.t) / s;
    let re = (vp * (-vp * vp).exp() + vm * (-vm * vm).exp()) / (2.0 * r * (2.0 * PI).sqrt());
    let im = -(vp * dawson(vp) - vm * dawson(vm)) / (SQRT_2 * PI * r);
    Complex64::new(re, im)
}
