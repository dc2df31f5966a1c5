//! Error function, imaginary error function and Dawson's integral.
//!
//! `erf` defers to `libm`. The Dawson integral is evaluated from the
//! all-positive Maclaurin series of `erfi` for `|x| <= 7` and from its
//! asymptotic expansion beyond, where the omitted remainder is below
//! `e^{-49}`.

use std::f64::consts::FRAC_2_SQRT_PI;

use super::NumericsError;

/// Largest argument for which `erfi` is finite in double precision.
pub const ERFI_MAX_ARG: f64 = 26.0;

const SERIES_LIMIT: f64 = 7.0;

/// Error function.
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// `e^{-x^2}` with the rounding error of `x*x` folded back in.
fn exp_neg_sq(x: f64) -> f64 {
    let x2 = x * x;
    let lo = x.mul_add(x, -x2);
    (-x2).exp() * (1.0 - lo)
}

fn exp_pos_sq(x: f64) -> f64 {
    let x2 = x * x;
    let lo = x.mul_add(x, -x2);
    x2.exp() * (1.0 + lo)
}

/// `sum_n x^{2n} / (n! (2n+1))`, so that `erfi(x) = 2/sqrt(pi) * x * S(x)`.
fn erfi_series_over_x(x: f64) -> f64 {
    let x2 = x * x;
    let mut pow = 1.0; // x^{2n} / n!
    let mut sum = 1.0;
    let mut n = 0u32;
    loop {
        n += 1;
        pow *= x2 / f64::from(n);
        let term = pow / f64::from(2 * n + 1);
        sum += term;
        if term <= sum * 1e-17 && f64::from(n) > x2 {
            break;
        }
    }
    sum
}

/// Asymptotic series `sum_n (2n-1)!! / (2x^2)^n` for `x > 7`.
fn dawson_asymptotic_factor(x: f64) -> f64 {
    let inv = 1.0 / (2.0 * x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 0u32;
    loop {
        n += 1;
        let next = term * f64::from(2 * n - 1) * inv;
        if next >= term || next < sum * 1e-17 {
            break;
        }
        term = next;
        sum += term;
    }
    sum
}

/// Dawson's integral `D(x) = e^{-x^2} int_0^x e^{t^2} dt`.
pub fn dawson(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT {
        exp_neg_sq(ax) * ax * erfi_series_over_x(ax)
    } else {
        dawson_asymptotic_factor(ax) / (2.0 * ax)
    };
    v.copysign(x)
}

/// `D(x)/x`, finite at the origin where it equals 1.
pub fn dawson_over_x(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        exp_neg_sq(ax) * erfi_series_over_x(ax)
    } else {
        dawson_asymptotic_factor(ax) / (2.0 * ax * ax)
    }
}

/// `1 - 2 x D(x)`, the derivative of Dawson's integral, without the
/// cancellation of the direct form at large `x`.
pub fn one_minus_2x_dawson(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        return 1.0 - 2.0 * ax * dawson(ax);
    }
    1.0 - dawson_asymptotic_factor(ax)
}

/// Imaginary error function `erfi(x) = -i erf(ix)`.
pub fn erfi(x: f64) -> Result<f64, NumericsError> {
    let ax = x.abs();
    if !(ax <= ERFI_MAX_ARG) {
        return Err(NumericsError::Overflow { function: "erfi", argument: x });
    }
    let v = if ax <= SERIES_LIMIT {
        FRAC_2_SQRT_PI * ax * erfi_series_over_x(ax)
    } else {
        FRAC_2_SQRT_PI * exp_pos_sq(ax) * dawson(ax)
    };
    Ok(v.copysign(x))
}

/// `e^{-x^2} erfi(x) = 2 D(x) / sqrt(pi)` for `x >= 0`, free of overflow.
pub fn erfi_scaled(x: f64) -> Result<f64, NumericsError> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(NumericsError::InvalidInput(format!("erfi_scaled needs a finite x >= 0, got {x}")));
    }
    Ok(FRAC_2_SQRT_PI * dawson(x))
}

/// `sinh(x)/x`, finite at the origin.
pub fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 + x2 / 6.0 * (1.0 + x2 / 20.0)
    } else {
        x.sinh() / x
    }
}

/// `sin(x)/x`, finite at the origin.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}
