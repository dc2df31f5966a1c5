//! Detector-lattice protocol: kernels, correlators, reconstruction, and the
//! shot-noise scaling of the reconstruction error.

use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use udw_core::detector::{correlation_rows, write_correlation_csv, CorrelationRecord, CorrelationRow};
use udw_core::kernels::{assemble_kernels, FieldState, KernelMatrix};
use udw_core::numerics::fit_loglog_slope;
use udw_core::smearing::GaussianRegion;
use udw_core::spacetime::{build_lattice, Event, LatticeSpec};
use udw_core::tomography::{reconstruct_records, write_reconstruction_csv, Regime};

use crate::config::{ConfigError, Resolved};
use crate::table::write_plain;
use crate::{io_err, numerical, RunError, RunReport};

fn lattice_regions(cfg: &Resolved) -> Result<Vec<GaussianRegion>, RunError> {
    let ell = cfg.ell;
    let l = &cfg.lattice;
    let o = l.origin;
    let spec = LatticeSpec {
        spacing_space: l.spacing_space * ell,
        spacing_time: l.spacing_time * ell,
        origin: Event::new(o.t * ell, o.x * ell, o.y * ell, o.z * ell),
        ..*l
    };
    let events = build_lattice(&spec).map_err(|e| ConfigError::new("lattice", e.0))?;
    events.into_iter().map(|e| GaussianRegion::new(e, ell).map_err(|e| numerical(e.0))).collect()
}

/// Kernels from `kernels_dir` when given, otherwise assembled on the lattice.
pub(crate) fn lattice_kernels(cfg: &Resolved) -> Result<KernelMatrix, RunError> {
    if let Some(dir) = &cfg.kernels_dir {
        return KernelMatrix::read_dir(dir).map_err(|e| ConfigError::new("kernels_dir", e.to_string()).into());
    }
    let state = match cfg.beta {
        Some(beta) => FieldState::Thermal { beta: beta * cfg.ell },
        None => FieldState::Vacuum,
    };
    let regions = lattice_regions(cfg)?;
    assemble_kernels(&state, &regions, cfg.lambda * cfg.ell, cfg.tol).map_err(numerical)
}

/// Exact records for every pair `i < j`, in row-major order.
pub(crate) fn exact_records(km: &KernelMatrix) -> Result<Vec<CorrelationRecord>, RunError> {
    let pairs: Vec<(usize, usize)> = (0..km.n).flat_map(|i| (i + 1..km.n).map(move |j| (i, j))).collect();
    pairs.par_iter().map(|&(i, j)| CorrelationRecord::exact(km, i, j).map_err(numerical)).collect()
}

fn sample_all(records: &[CorrelationRecord], shots: u64, seed: u64) -> Result<Vec<CorrelationRecord>, RunError> {
    records.par_iter().map(|r| r.sampled(shots, seed).map_err(numerical)).collect()
}

pub(crate) fn roundtrip(cfg: &Resolved, dir: &Path) -> Result<RunReport, RunError> {
    let km = lattice_kernels(cfg)?;
    km.write_dir(&dir.join("kernels")).map_err(io_err)?;
    let exact = exact_records(&km)?;
    let shots = cfg.shots.first().copied();
    let sampled = shots.map(|n| sample_all(&exact, n, cfg.seed)).transpose()?;
    let rows: Vec<CorrelationRow> = match &sampled {
        Some(s) => exact.iter().zip(s).flat_map(|(e, s)| correlation_rows(e, Some(s), cfg.seed)).collect(),
        None => exact.iter().flat_map(|e| correlation_rows(e, None, cfg.seed)).collect(),
    };
    write_correlation_csv(&dir.join("correlations.csv"), &rows).map_err(io_err)?;
    let input = sampled.as_deref().unwrap_or(&exact);
    let results = reconstruct_records(input, &km.e, Some(&km.h)).map_err(numerical)?;
    write_reconstruction_csv(&dir.join("reconstruction.csv"), &results).map_err(io_err)?;

    let max_err = results.iter().map(|r| (r.h_reconstructed - km.h[(r.i, r.j)]).abs()).fold(0.0, f64::max);
    let causal = results.iter().filter(|r| r.regime == Regime::Causal).count();
    let mut report = RunReport {
        files: ["kernels/", "correlations.csv", "reconstruction.csv"].map(String::from).to_vec(),
        ..Default::default()
    };
    let s = &mut report.summary;
    s.insert("n_regions".into(), km.n as f64);
    s.insert("n_pairs".into(), results.len() as f64);
    s.insert("n_causal".into(), causal as f64);
    s.insert("n_spacelike".into(), (results.len() - causal) as f64);
    s.insert("max_abs_error".into(), max_err);
    s.insert("precision_warnings".into(), km.precision_warnings.len() as f64);
    if let Some(n) = shots {
        s.insert("shots".into(), n as f64);
    }
    Ok(report)
}

/// Seed for repetition `rep` at shot level `level`, on its own ChaCha stream.
pub(crate) fn repetition_seed(base: u64, level: usize, rep: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(((level as u64) << 32) | rep as u64);
    rng.next_u64()
}

/// RMS of `H_reconstructed - H` over all pairs and repetitions.
pub(crate) fn rms_error(
    km: &KernelMatrix,
    exact: &[CorrelationRecord],
    shots: u64,
    level: usize,
    cfg: &Resolved,
) -> Result<f64, RunError> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for rep in 0..cfg.repetitions {
        let sampled = sample_all(exact, shots, repetition_seed(cfg.seed, level, rep))?;
        let results = reconstruct_records(&sampled, &km.e, None).map_err(numerical)?;
        for r in &results {
            sum += (r.h_reconstructed - km.h[(r.i, r.j)]).powi(2);
        }
        count += results.len();
    }
    Ok((sum / count as f64).sqrt())
}

pub(crate) fn shot_noise(cfg: &Resolved, dir: &Path) -> Result<RunReport, RunError> {
    let km = lattice_kernels(cfg)?;
    let exact = exact_records(&km)?;
    let mut rows = Vec::with_capacity(cfg.shots.len());
    for (level, &n) in cfg.shots.iter().enumerate() {
        rows.push(vec![n as f64, rms_error(&km, &exact, n, level, cfg)?]);
    }
    let fit = fit_loglog_slope(&rows.iter().map(|r| (r[0], r[1])).collect::<Vec<_>>()).map_err(numerical)?;
    let file = "shot_noise.csv";
    write_plain(&dir.join(file), &["shots", "rms_error"], &rows)?;
    let mut report = RunReport { files: vec![file.into()], ..Default::default() };
    report.summary.insert("slope".into(), fit.slope);
    report.summary.insert("intercept".into(), fit.intercept);
    report.summary.insert("repetitions".into(), cfg.repetitions as f64);
    report.summary.insert("n_pairs".into(), exact.len() as f64);
    Ok(report)
}
