use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use udw_core::detector::{random_valid_kernels, CorrelationRecord};
use udw_core::kernels::{assemble_kernels, FieldState, KernelMatrix};
use udw_core::smearing::GaussianRegion;
use udw_core::spacetime::Event;
use udw_core::tomography::*;

fn bare(zz: f64, yy: f64) -> CorrelationRecord {
    CorrelationRecord { i: 0, j: 1, zz, yy, zi: 1.0, zj: 1.0, yx_ik: vec![], xy_kj: vec![], shots: None }
}

fn all_records(km: &KernelMatrix) -> Vec<CorrelationRecord> {
    let mut out = Vec::new();
    for i in 0..km.n {
        for j in 0..km.n {
            if i != j {
                out.push(CorrelationRecord::exact(km, i, j).unwrap());
            }
        }
    }
    out
}

#[test]
fn spacelike_examples() {
    assert_eq!(reconstruct_spacelike(&bare(1.0, 0.0)).unwrap(), 0.0);
    let e = (-0.2f64).exp();
    let h = reconstruct_spacelike(&bare(e * 0.1f64.cosh(), e * 0.1f64.sinh())).unwrap();
    assert!((h - 0.05).abs() < 1e-15);
    assert!(matches!(reconstruct_spacelike(&bare(0.5, 0.5)), Err(TomographyError::NoiseDominated { .. })));
    assert!(matches!(reconstruct_spacelike(&bare(0.0, 0.0)), Err(TomographyError::Dephased { .. })));
}

#[test]
fn sampled_spacelike_within_three_sigma() {
    let (hii, h12, shots) = (0.3f64, 0.05f64, 1_000_000u64);
    let zz = (-2.0 * hii).exp() * (2.0 * h12).cosh();
    let yy = (-2.0 * hii).exp() * (2.0 * h12).sinh();
    // Linearised propagation of the binomial errors through artanh(yy/zz)/2.
    let var = |v: f64| (1.0 - v * v) / shots as f64;
    let r = yy / zz;
    let dh = 0.5 / (1.0 - r * r);
    let sigma = dh * (var(yy) / (zz * zz) + var(zz) * yy * yy / zz.powi(4)).sqrt();
    let exact = bare(zz, yy);
    for seed in 0..5 {
        let sampled = exact.sampled(shots, seed).unwrap();
        let h = reconstruct_spacelike(&sampled).unwrap();
        assert!((h - h12).abs() <= 3.0 * sigma, "seed {seed}: {h} vs {h12} ± {sigma}");
    }
}

#[test]
fn correction_examples() {
    assert_eq!(causal_correction(&[]).unwrap(), 0.0);
    let zero = CausalTerm { k: 2, yx_ik: 0.0, zi: 0.7, xy_kj: 0.0, zj: 0.6 };
    assert_eq!(causal_correction(&[zero]).unwrap(), 0.0);
    let t = CausalTerm { k: 2, yx_ik: 0.1 * 0.7, zi: 0.7, xy_kj: 0.2 * 0.6, zj: 0.6 };
    let c = causal_correction(&[t]).unwrap();
    assert!((c - 0.5 * 0.02f64.atanh()).abs() < 1e-16);
    let bad = CausalTerm { k: 3, yx_ik: 0.9, zi: 0.5, xy_kj: 0.8, zj: 0.5 };
    assert!(matches!(causal_correction(&[bad]), Err(TomographyError::NearSingularTangent { k: 3, .. })));
    let gone = CausalTerm { k: 3, yx_ik: 0.1, zi: 0.0, xy_kj: 0.1, zj: 0.5 };
    assert!(matches!(causal_correction(&[gone]), Err(TomographyError::VanishingLocal)));
}

#[test]
fn wightman_assembly() {
    assert_eq!(assemble_wightman(0.0, 0.0).norm(), 0.0);
    assert_eq!(assemble_wightman(0.6, 0.0).re, 0.3);
    for h in [-1.5, 0.0, 0.25, 3.0] {
        assert_eq!(2.0 * assemble_wightman(h, 0.7).re, h);
    }
}

#[test]
fn causal_vacuum_chain_round_trips() {
    let ell = 1.0;
    let regions: Vec<_> = (0..4)
        .map(|k| GaussianRegion::new(Event::new(6.0 * k as f64, 1.5 * k as f64, 0.5 * k as f64, 0.0), ell).unwrap())
        .collect();
    let km = assemble_kernels(&FieldState::Vacuum, &regions, 2.0 * PI, 1e-12).unwrap();
    let results = reconstruct_records(&all_records(&km), &km.e, Some(&km.h)).unwrap();
    let mut saw_causal = false;
    for r in &results {
        assert!((r.h_reconstructed - km.h[(r.i, r.j)]).abs() < 1e-9, "({}, {})", r.i, r.j);
        assert_eq!(r.w.im, 0.5 * km.e[(r.i, r.j)]);
        saw_causal |= r.regime == Regime::Causal && r.c_ij != 0.0;
    }
    assert!(saw_causal);
}

#[test]
fn spacelike_lattice_takes_the_plain_branch() {
    let regions: Vec<_> =
        (0..3).map(|k| GaussianRegion::new(Event::new(0.0, 10.0 * k as f64, 0.0, 0.0), 1.0).unwrap()).collect();
    let km = assemble_kernels(&FieldState::Vacuum, &regions, 2.0 * PI, 1e-12).unwrap();
    for rec in all_records(&km) {
        let r = reconstruct_pair(&rec, km.e[(rec.i, rec.j)], None).unwrap();
        assert_eq!(r.regime, Regime::Spacelike);
        assert_eq!(r.h_reconstructed, reconstruct_spacelike(&rec).unwrap());
        assert!((r.h_reconstructed - km.h[(rec.i, rec.j)]).abs() < 1e-12);
    }
}

#[test]
fn mixed_random_structure_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..10 {
        let km = random_valid_kernels(6, &mut rng);
        for rec in all_records(&km) {
            let r = reconstruct_pair(&rec, km.e[(rec.i, rec.j)], None).unwrap();
            assert!((r.h_reconstructed - km.h[(rec.i, rec.j)]).abs() < 1e-8);
        }
    }
}

#[test]
fn dephasing_is_flagged() {
    let n = 2;
    let h = nalgebra::DMatrix::from_row_slice(n, n, &[8.0, 0.3, 0.3, 8.0]);
    let km = KernelMatrix::from_parts(h, nalgebra::DMatrix::zeros(n, n), 1.0).unwrap();
    let rec = CorrelationRecord::exact(&km, 0, 1).unwrap();
    let r = reconstruct_pair(&rec, 0.0, None).unwrap();
    assert_eq!(r.flags, vec!["dephasing_dominated".to_string()]);
    assert!((r.h_reconstructed - 0.3).abs() < 1e-12);
}

#[test]
fn results_csv_layout() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let km = random_valid_kernels(3, &mut rng);
    let results = reconstruct_records(&all_records(&km), &km.e, Some(&km.h)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("recon.csv");
    write_reconstruction_csv(&path, &results).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "i,j,regime,H_reconstructed,H_true_if_known,C_ij,Re_W,Im_W,flags");
    assert_eq!(lines.count(), 6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn noiseless_round_trip(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let km = random_valid_kernels(n, &mut rng);
        for rec in all_records(&km) {
            // Exact records always stay inside the artanh domain.
            let r = reconstruct_pair(&rec, km.e[(rec.i, rec.j)], None).unwrap();
            prop_assert!((r.h_reconstructed - km.h[(rec.i, rec.j)]).abs() < 1e-9);
        }
    }
}
