//! Special functions, quadrature and fitting.

mod fit;
mod quadrature;
mod special;

pub use fit::{fit_loglog_slope, SlopeFit};
pub use quadrature::{gaussian_cutoff, integrate, integrate_semi_infinite, QuadOptions, QuadValue, QuadratureResult};
pub use special::{dawson, dawson_over_x, erf, erfi, erfi_scaled, one_minus_2x_dawson, sinc, sinhc, ERFI_MAX_ARG};

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NumericsError {
    #[error("{function}({argument}) overflows double precision")]
    Overflow { function: &'static str, argument: f64 },
    #[error("quadrature did not converge after {evaluations} evaluations (best {best}, error {error_estimate:e})")]
    NoConvergence { best: Complex64, error_estimate: f64, evaluations: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
