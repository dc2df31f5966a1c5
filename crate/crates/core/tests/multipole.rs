use std::f64::consts::PI;

use udw_core::kernels::{hadamard_point, FieldState};
use udw_core::multipole::*;
use udw_core::numerics::{integrate, QuadOptions};
use udw_core::smearing::{self, GaussianRegion};
use udw_core::spacetime::Event;

fn region(t: f64, x: f64, ell: f64) -> GaussianRegion {
    GaussianRegion::new(Event::new(t, x, 0.0, 0.0), ell).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

const LS: [f64; 5] = [0.02, 0.04, 0.06, 0.08, 0.1];

#[test]
fn vacuum_correction_factors() {
    let ell = 1.0;
    let spatial = estimate(&FieldState::Vacuum, &region(0.0, 10.0, ell), &region(0.0, 0.0, ell), None, None).unwrap();
    let w0 = 1.0 / (4.0 * PI * PI * 100.0);
    assert!(rel(spatial.value, w0 * 1.04) < 1e-12);
    assert_eq!(spatial.pointlike_term, w0);
    let temporal = estimate(&FieldState::Vacuum, &region(10.0, 0.0, ell), &region(0.0, 0.0, ell), None, None).unwrap();
    assert!(rel(temporal.value, -w0 * 1.12) < 1e-12);
    for (dt, dr, ell) in [(3.0, 5.0, 0.3), (7.0, 2.0, 0.5), (-4.0, 1.0, 0.1)] {
        let e = estimate(&FieldState::Vacuum, &region(dt, dr, ell), &region(0.0, 0.0, ell), None, None).unwrap();
        assert!(rel(e.value, vacuum_factorized(dt, dr, ell)) < 1e-12);
    }
}

#[test]
fn vacuum_gradient_is_spatial_at_equal_time() {
    let d = derivatives(&FieldState::Vacuum, &Event::new(0.0, 2.0, 1.0, 0.0), &Event::default(), None).unwrap();
    assert_eq!(d.grad_i[0], 0.0);
    for m in 0..4 {
        assert_eq!(d.grad_j[m], -d.grad_i[m]);
        for n in 0..4 {
            assert_eq!(d.hess_ii[m][n], d.hess_ii[n][m]);
        }
    }
}

#[test]
fn finite_differences_match_vacuum_closed_forms() {
    // A very cold thermal state differs from the vacuum only at O((s/beta)^2).
    let a = Event::new(1.0, 3.0, -1.0, 0.5);
    let b = Event::new(-0.5, 0.0, 0.5, 1.0);
    let exact = derivatives(&FieldState::Vacuum, &a, &b, None).unwrap();
    let fd = derivatives(&FieldState::Thermal { beta: 1e5 }, &a, &b, None).unwrap();
    let scale = exact.hess_ii.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for m in 0..4 {
        assert!((fd.grad_i[m] - exact.grad_i[m]).abs() < 1e-7 * exact.w.abs());
        for n in 0..4 {
            assert!((fd.hess_ii[m][n] - exact.hess_ii[m][n]).abs() < 1e-6 * scale, "({m},{n})");
            assert!((fd.hess_jj[m][n] - exact.hess_jj[m][n]).abs() < 1e-6 * scale);
        }
    }
}

fn coth2(x: f64) -> f64 {
    // Second derivative of coth.
    2.0 / x.tanh() / x.sinh().powi(2)
}

#[test]
fn thermal_hessian_matches_analytic_slices() {
    let beta = 50.0;
    let c = PI / beta;
    for (t, r) in [(1.0, 4.0), (6.0, 2.0), (0.0, 3.0)] {
        let d =
            derivatives(&FieldState::Thermal { beta }, &Event::new(t, r, 0.0, 0.0), &Event::default(), None).unwrap();
        let want = c * c / (8.0 * PI * beta * r) * (coth2(c * (r + t)) + coth2(c * (r - t)));
        assert!(rel(d.hess_ii[0][0], want) < 1e-6, "t={t} r={r}: {} vs {want}", d.hess_ii[0][0]);
    }
}

#[test]
fn thermal_temporal_expansion_matches() {
    let beta = 50.0;
    for dt in [5.0, 10.0, 20.0] {
        let e =
            estimate(&FieldState::Thermal { beta }, &region(dt, 0.0, 1.0), &region(0.0, 0.0, 1.0), None, None).unwrap();
        let want = thermal_temporal_expansion(beta, dt, 1.0);
        assert!(rel(e.value, want) < 1e-6, "dt={dt}: {} vs {want}", e.value);
    }
}

#[test]
fn thermal_spatial_coefficients() {
    for r in [5.0, 10.0, 20.0] {
        let audit = thermal_spatial_audit(50.0, r, 1.0).unwrap();
        assert!(rel(audit.measured_leading, audit.vacuum_consistent_leading) < 1e-12);
        assert!(rel(audit.measured_leading, audit.printed_leading) > 0.5);
        assert!(rel(audit.measured_correction, audit.printed_correction) < 1e-6);
    }
}

#[test]
fn convergence_orders() {
    let fit = convergence_order(&FieldState::Vacuum, (0.0, 1.0), &LS, 1e-13).unwrap();
    assert!((fit.slope - 4.0).abs() < 0.3, "{}", fit.slope);
    let fit = convergence_order_at(&FieldState::Vacuum, (0.0, 1.0), &LS, 1e-13, ExpansionOrder::Pointlike).unwrap();
    assert!((fit.slope - 2.0).abs() < 0.3, "{}", fit.slope);
    let fit = convergence_order(&FieldState::Thermal { beta: 50.0 }, (0.0, 1.0), &LS, 1e-13).unwrap();
    assert!((fit.slope - 4.0).abs() < 0.5, "{}", fit.slope);
    let fit = convergence_order(&FieldState::Vacuum, (1.0, 0.0), &LS, 1e-13).unwrap();
    assert!((fit.slope - 4.0).abs() < 0.3, "{}", fit.slope);
}

#[test]
fn convergence_input_checks() {
    assert!(convergence_order(&FieldState::Vacuum, (0.0, 1.0), &[0.05, 0.2], 1e-12).is_err());
    assert!(convergence_order(&FieldState::Vacuum, (0.0, 1.0), &[0.05, 0.08], 1e-12).is_err());
    assert!(convergence_order(&FieldState::Vacuum, (0.0, 1.0), &[-0.05, 0.08, 0.1], 1e-12).is_err());
    assert!(derivatives(&FieldState::Vacuum, &Event::new(1.0, 1.0, 0.0, 0.0), &Event::default(), None).is_err());
}

#[test]
fn stencil_refuses_to_cross_the_lightcone() {
    let err = derivatives(
        &FieldState::Thermal { beta: 10.0 },
        &Event::new(1.0, 1.2, 0.0, 0.0),
        &Event::default(),
        Some(0.15),
    );
    assert!(matches!(err, Err(MultipoleError::Stencil { .. })));
    let ok = derivatives(&FieldState::Thermal { beta: 10.0 }, &Event::new(1.0, 1.2, 0.0, 0.0), &Event::default(), None);
    assert!(ok.is_ok());
    assert!(derivatives(
        &FieldState::Thermal { beta: 10.0 },
        &Event::new(1.0, 2.0, 0.0, 0.0),
        &Event::default(),
        Some(-1.0)
    )
    .is_err());
}

#[test]
fn ricci_term_enters_through_the_trace() {
    let ell = 0.2;
    let ri = region(0.0, 3.0, ell);
    let rj = region(0.0, 0.0, ell);
    let mut ric = [[0.0; 4]; 4];
    ric[0][0] = 0.3;
    ric[2][2] = -0.1;
    ric[1][3] = 5.0;
    let flat = estimate(&FieldState::Vacuum, &ri, &rj, None, None).unwrap();
    let curved = estimate(&FieldState::Vacuum, &ri, &rj, Some(&ric), Some(&ric)).unwrap();
    assert_eq!(flat.ricci_term, 0.0);
    let want = -ell * ell / 6.0 * flat.pointlike_term * 0.4;
    assert!(rel(curved.ricci_term, want) < 1e-14);
    assert_eq!(curved.value, curved.pointlike_term + curved.ricci_term + curved.quadrupole_term);
}

#[test]
fn dipole_term_vanishes() {
    let ell = 0.3;
    let r = region(0.0, 2.0, ell);
    let opts = QuadOptions { abs_tol: 1e-16, rel_tol: 1e-13, max_intervals: 200 };
    // First moment along each axis of the normalised Gaussian, by quadrature.
    let g = |u: f64| (-u * u / (2.0 * ell * ell)).exp() / ((2.0 * PI).sqrt() * ell);
    let first = integrate(|u| u * g(u), -12.0 * ell, 12.0 * ell, &opts).unwrap().value;
    let d = derivatives(&FieldState::Vacuum, &r.center, &Event::default(), None).unwrap();
    let dipole_term: f64 = d.grad_i.iter().chain(&d.grad_j).map(|gm| first * gm).sum();
    assert!(dipole_term.abs() < 1e-12 * d.w.abs());
    assert_eq!(smearing::moments(&r, None).dipole, [0.0; 4]);
}

#[test]
fn estimates_are_symmetric() {
    let states = [
        FieldState::Vacuum,
        FieldState::Thermal { beta: 20.0 },
        FieldState::Coherent { delta: 1.5 },
        FieldState::OneParticle { delta: 2.0 },
    ];
    let ri = region(1.0, 4.0, 0.2);
    let rj = GaussianRegion::new(Event::new(-0.5, 0.5, 1.0, 0.0), 0.2).unwrap();
    for s in states {
        let ab = estimate(&s, &ri, &rj, None, None).unwrap();
        let ba = estimate(&s, &rj, &ri, None, None).unwrap();
        assert!((ab.value - ba.value).abs() < 1e-9 * ab.value.abs(), "{s:?}");
        let point = hadamard_point(&s, &ri.center, &rj.center).unwrap();
        assert_eq!(ab.pointlike_term, point);
    }
}

#[test]
fn residual_csv() {
    let rows = residual_table(&FieldState::Vacuum, (0.0, 1.0), &LS, 1e-12, ExpansionOrder::Quadrupole).unwrap();
    assert_eq!(rows.iter().map(|r| r.ell).collect::<Vec<_>>(), LS.to_vec());
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("res.csv");
    write_residual_csv(&p, &rows).unwrap();
    let text = std::fs::read_to_string(p).unwrap();
    assert!(text.starts_with("ell,quadrature,estimate,residual\n"));
    assert_eq!(text.lines().count(), 6);
}
