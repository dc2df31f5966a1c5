//! Moments of the Gaussian profile checked by tensor-product quadrature over
//! the box `[-10 ell, 10 ell]^4`.

use proptest::prelude::*;
use udw_core::numerics::{integrate, QuadOptions};
use udw_core::smearing::{evaluate, moments, GaussianRegion};
use udw_core::spacetime::Event;

const AXES: [[f64; 4]; 4] = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];

/// `int y^p g(y) dy` along `axis`, where the profile factorises as a product
/// of four identical one-dimensional Gaussians `g`.
fn axis_moment(region: &GaussianRegion, axis: usize, p: i32) -> f64 {
    let c = region.center;
    let peak = evaluate(region, &c);
    let per_axis_peak = peak.powf(0.25);
    let f = |y: f64| {
        let d = AXES[axis];
        let e = Event::new(c.t + y * d[0], c.x + y * d[1], c.y + y * d[2], c.z + y * d[3]);
        y.powi(p) * evaluate(region, &e) / peak * per_axis_peak
    };
    let h = 10.0 * region.ell;
    integrate(f, -h, h, &QuadOptions { abs_tol: 0.0, rel_tol: 1e-15, max_intervals: 4000 }).unwrap().value
}

#[test]
fn profile_integrates_to_one() {
    for ell in [0.3, 1.0, 2.5] {
        let region = GaussianRegion::new(Event::new(0.7, -0.2, 0.4, 1.1), ell).unwrap();
        let mass: f64 = (0..4).map(|a| axis_moment(&region, a, 0)).product();
        assert!((mass - 1.0).abs() < 1e-10, "ell={ell} mass={mass}");
    }
}

#[test]
fn odd_moments_vanish_and_quadrupole_is_ell_squared() {
    for ell in [0.1, 1.0, 3.0] {
        let region = GaussianRegion::new(Event::new(-2.0, 1.0, 0.0, 5.0), ell).unwrap();
        let m = moments(&region, None);
        for a in 0..4 {
            let z_rest: f64 = (0..4).filter(|b| *b != a).map(|b| axis_moment(&region, b, 0)).product();
            let first = axis_moment(&region, a, 1) * z_rest;
            assert!(first.abs() < 1e-12 * ell, "dipole axis {a}");
            let second = axis_moment(&region, a, 2) * z_rest;
            assert!((second - m.quadrupole[a][a]).abs() < 1e-10 * ell * ell, "quadrupole axis {a}");
            assert_eq!(m.dipole[a], 0.0);
        }
    }
}

proptest! {
    #[test]
    fn profile_is_rotation_and_reflection_symmetric(
        dt in -3.0f64..3.0, r in 0.0f64..3.0, th in 0.0f64..3.1, ph in 0.0f64..6.2, ell in 0.2f64..2.0
    ) {
        let c = Event::new(1.0, 2.0, -1.0, 0.5);
        let region = GaussianRegion::new(c, ell).unwrap();
        let a = evaluate(&region, &Event::new(c.t + dt, c.x + r * th.sin() * ph.cos(), c.y + r * th.sin() * ph.sin(), c.z + r * th.cos()));
        let b = evaluate(&region, &Event::new(c.t - dt, c.x, c.y, c.z + r));
        prop_assert!((a - b).abs() <= 1e-12 * a.max(b));
        prop_assert!(a > 0.0);
    }
}
