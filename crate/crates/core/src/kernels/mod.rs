//! Two-point functions of the massless scalar field.
//!
//! Conventions: `W(x, x') = <phi(x) phi(x')>`, `W = H/2 + i E/2`, with
//! `E = 2 Im W`. For a pair of regions `(i, j)` the separation is
//! `dt = t_i - t_j`. `E(x, x')` is negative when `x` lies in the future of
//! `x'`.
//!
//! Coherent and one-particle profiles are centred on the spacetime origin.

mod matrix;
mod point;
mod smeared;

pub use matrix::{assemble_kernels, KernelMatrix, MatrixEnvelope};
pub use point::{f_oneparticle, hadamard_point, phi0_coherent, thermal_point};
pub use smeared::{
    causal_smeared, f_oneparticle_smeared_quadrature, phi0_smeared, phi0_smeared_quadrature, retarded_smeared,
    wightman_smeared_closed, wightman_smeared_quadrature, RetardedValue,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::NumericsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum FieldState {
    Vacuum,
    Thermal { beta: f64 },
    Coherent { delta: f64 },
    OneParticle { delta: f64 },
}

impl FieldState {
    pub fn validate(&self) -> Result<(), KernelError> {
        let (name, v) = match *self {
            FieldState::Vacuum => return Ok(()),
            FieldState::Thermal { beta } => ("beta", beta),
            FieldState::Coherent { delta } | FieldState::OneParticle { delta } => ("delta", delta),
        };
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(KernelError::InvalidState(format!("{name} must be positive and finite, got {v}")))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FieldState::Vacuum => "vacuum",
            FieldState::Thermal { .. } => "thermal",
            FieldState::Coherent { .. } => "coherent",
            FieldState::OneParticle { .. } => "one_particle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("pointlike kernel is singular on the lightcone (dt={dt}, dr={dr}); use a smeared kernel")]
    Lightcone { dt: f64, dr: f64 },
    #[error("invalid field state: {0}")]
    InvalidState(String),
    #[error("regions must share one width, got {0} and {1}")]
    MismatchedWidths(f64, f64),
    #[error("{0} is not a zero-mean quasifree state; detector kernels need vacuum or thermal")]
    UnsupportedState(&'static str),
    #[error("kernel invariant violated: {0}")]
    Invariant(String),
    #[error("pair ({i}, {j}): {source}")]
    Pair { i: usize, j: usize, source: Box<KernelError> },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("kernel i/o: {0}")]
    Io(String),
}
