//! Gaussian spacetime smearing profiles and their multipole moments.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spacetime::Event;

/// Symmetric 4x4 matrix indexed (t, x, y, z).
pub type Mat4 = [[f64; 4]; 4];

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid smearing region: {0}")]
pub struct RegionError(pub String);

/// Isotropic Gaussian of width `ell` centred on `center`, normalised to one
/// over spacetime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianRegion {
    pub center: Event,
    pub ell: f64,
}

impl GaussianRegion {
    pub fn new(center: Event, ell: f64) -> Result<Self, RegionError> {
        if !(ell > 0.0 && ell.is_finite()) {
            return Err(RegionError(format!("ell must be positive and finite, got {ell}")));
        }
        if !center.is_finite() {
            return Err(RegionError("center must be finite".into()));
        }
        Ok(Self { center, ell })
    }
}

/// Value of the smearing function at `x`.
pub fn evaluate(region: &GaussianRegion, x: &Event) -> f64 {
    let c = region.center;
    let l2 = region.ell * region.ell;
    let d2 = (x.t - c.t).powi(2) + (x.x - c.x).powi(2) + (x.y - c.y).powi(2) + (x.z - c.z).powi(2);
    (-d2 / (2.0 * l2)).exp() / (4.0 * PI * PI * l2 * l2)
}

/// Moments to quadrupole order; higher orders are dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet {
    pub monopole: f64,
    pub dipole: [f64; 4],
    pub quadrupole: Mat4,
    /// `-(ell^2/6) * sum_a R_aa`, already included in `monopole`.
    pub ricci_trace_correction: f64,
}

/// Euclidean trace of a 4x4 matrix.
pub fn delta_trace(m: &Mat4) -> f64 {
    (0..4).map(|a| m[a][a]).sum()
}

pub fn moments(region: &GaussianRegion, ricci: Option<&Mat4>) -> MomentSet {
    let l2 = region.ell * region.ell;
    let correction = ricci.map_or(0.0, |r| -l2 / 6.0 * delta_trace(r));
    let mut quadrupole = [[0.0; 4]; 4];
    for (a, row) in quadrupole.iter_mut().enumerate() {
        row[a] = l2;
    }
    MomentSet { monopole: 1.0 + correction, dipole: [0.0; 4], quadrupole, ricci_trace_correction: correction }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_and_width() {
        let r = GaussianRegion::new(Event::default(), 1.0).unwrap();
        let peak = evaluate(&r, &Event::default());
        assert!((peak - 1.0 / (4.0 * PI * PI)).abs() < 1e-17);
        let off = evaluate(&r, &Event::new(1.0, 0.0, 1.0, 0.0));
        assert!((off / peak - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn moment_examples() {
        let r = GaussianRegion::new(Event::default(), 0.1).unwrap();
        let m0 = moments(&r, None);
        assert_eq!(m0.monopole, 1.0);
        assert_eq!(m0, moments(&r, Some(&[[0.0; 4]; 4])));
        let mut ric = [[0.0; 4]; 4];
        for (a, row) in ric.iter_mut().enumerate() {
            row[a] = 0.3;
        }
        let m = moments(&r, Some(&ric));
        assert!((m.monopole - (1.0 - 0.01 / 6.0 * 4.0 * 0.3)).abs() < 1e-15);
        assert!((m.quadrupole[2][2] - 0.01).abs() < 1e-17 && m.quadrupole[0][1] == 0.0);
    }

    #[test]
    fn rejects_bad_width() {
        assert!(GaussianRegion::new(Event::default(), 0.0).is_err());
        assert!(GaussianRegion::new(Event::default(), f64::NAN).is_err());
    }
}
