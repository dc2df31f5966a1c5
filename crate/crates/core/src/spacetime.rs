//! Minkowski events, intervals and lattices of interaction centers.
//!
//! Signature is (-,+,+,+), so the world function is positive for spacelike
//! separations.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Event {
    pub const fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        Self { t, x, y, z }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.t, self.x, self.y, self.z]
    }

    pub fn from_array(c: [f64; 4]) -> Self {
        Self::new(c[0], c[1], c[2], c[3])
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|c| c.is_finite())
    }

    /// Distance from the spatial origin.
    pub fn radius(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// Separation of `a` from `b`: `dt = a.t - b.t`, `dr = |a.x - b.x|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub dt: f64,
    pub dr: f64,
    pub sigma: f64,
}

pub fn interval(a: &Event, b: &Event) -> Interval {
    let dt = a.t - b.t;
    let (dx, dy, dz) = (a.x - b.x, a.y - b.y, a.z - b.z);
    let dr = (dx * dx + dy * dy + dz * dz).sqrt();
    Interval { dt, dr, sigma: 0.5 * (-dt * dt + dr * dr) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CausalRelation {
    Spacelike,
    TimelikeFuture,
    TimelikePast,
    Lightlike,
}

/// Default lightcone tolerance on `sigma` for a separation.
pub fn default_lightcone_tol(iv: &Interval) -> f64 {
    1e-9 * iv.dt.abs().max(iv.dr).max(1.0)
}

/// Causal relation of `a` relative to `b`.
pub fn classify(a: &Event, b: &Event, lightcone_tol: f64) -> CausalRelation {
    let iv = interval(a, b);
    if iv.sigma.abs() <= lightcone_tol {
        CausalRelation::Lightlike
    } else if iv.sigma > 0.0 {
        CausalRelation::Spacelike
    } else if iv.dt > 0.0 {
        CausalRelation::TimelikeFuture
    } else {
        CausalRelation::TimelikePast
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid lattice: {0}")]
pub struct LatticeError(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub n_space: usize,
    pub n_time: usize,
    pub spacing_space: f64,
    pub spacing_time: f64,
    #[serde(default)]
    pub origin: Event,
}

impl LatticeSpec {
    pub fn validate(&self) -> Result<(), LatticeError> {
        if self.n_space == 0 || self.n_time == 0 {
            return Err(LatticeError("n_space and n_time must be at least 1".into()));
        }
        if !(self.spacing_space > 0.0 && self.spacing_space.is_finite())
            || !(self.spacing_time > 0.0 && self.spacing_time.is_finite())
        {
            return Err(LatticeError("spacings must be positive and finite".into()));
        }
        if !self.origin.is_finite() {
            return Err(LatticeError("origin must be finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n_space.pow(3) * self.n_time
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Lattice events ordered by (time, z, y, x) with x varying fastest, so
/// every event with a larger time index comes later.
pub fn build_lattice(spec: &LatticeSpec) -> Result<Vec<Event>, LatticeError> {
    spec.validate()?;
    let o = spec.origin;
    let mut out = Vec::with_capacity(spec.len());
    for it in 0..spec.n_time {
        for iz in 0..spec.n_space {
            for iy in 0..spec.n_space {
                for ix in 0..spec.n_space {
                    out.push(Event::new(
                        o.t + it as f64 * spec.spacing_time,
                        o.x + ix as f64 * spec.spacing_space,
                        o.y + iy as f64 * spec.spacing_space,
                        o.z + iz as f64 * spec.spacing_space,
                    ));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_examples() {
        let o = Event::default();
        assert_eq!(interval(&o, &o), Interval { dt: 0.0, dr: 0.0, sigma: 0.0 });
        assert_eq!(interval(&Event::new(1.0, 0.0, 0.0, 0.0), &o), Interval { dt: 1.0, dr: 0.0, sigma: -0.5 });
        assert_eq!(interval(&Event::new(0.0, 3.0, 4.0, 0.0), &o), Interval { dt: 0.0, dr: 5.0, sigma: 12.5 });
    }

    #[test]
    fn classify_examples() {
        let o = Event::default();
        assert_eq!(classify(&Event::new(0.0, 1.0, 0.0, 0.0), &o, 1e-12), CausalRelation::Spacelike);
        assert_eq!(classify(&Event::new(2.0, 1.0, 0.0, 0.0), &o, 1e-12), CausalRelation::TimelikeFuture);
        assert_eq!(classify(&Event::new(1.0, 1.0, 0.0, 0.0), &o, 1e-12), CausalRelation::Lightlike);
    }

    #[test]
    fn lattice_examples() {
        let base =
            LatticeSpec { n_space: 1, n_time: 1, spacing_space: 1.0, spacing_time: 1.0, origin: Event::default() };
        assert_eq!(build_lattice(&base).unwrap(), vec![Event::default()]);
        let times: Vec<f64> =
            build_lattice(&LatticeSpec { n_time: 3, spacing_time: 2.0, ..base }).unwrap().iter().map(|e| e.t).collect();
        assert_eq!(times, vec![0.0, 2.0, 4.0]);
        let cube = build_lattice(&LatticeSpec { n_space: 2, ..base }).unwrap();
        assert_eq!(cube.len(), 8);
        assert!(cube.iter().all(|e| [e.x, e.y, e.z].iter().all(|c| *c == 0.0 || *c == 1.0)));
        assert!(build_lattice(&LatticeSpec { spacing_space: 0.0, ..base }).is_err());
    }
}
