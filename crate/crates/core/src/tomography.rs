//! Recovering the smeared Hadamard function from detector correlators.
//!
//! For a pair `(i, j)`:
//!
//! `H_ij = (1/2) artanh(<YY>/<ZZ>) - C_ij`, with
//! `C_ij = (1/2) sum_k artanh[(<Y_i X_k>/<Z_i>) (<X_k Y_j>/<Z_j>)]`.
//!
//! Each ratio in `C_ij` equals `-tan(2 G)` for the corresponding link, so the
//! product is `tan(2 G_ik) tan(2 G_jk)` independently of sign conventions.

use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detector::CorrelationRecord;
use crate::io::{csv_writer, fmt_f64};

/// `<ZZ>` below this is reported as `dephasing_dominated`.
pub const DEPHASING_FLAG_THRESHOLD: f64 = 1e-6;
const DEPHASED: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TomographyError {
    #[error("|<YY>/<ZZ>| = {ratio} is not below 1; correlations are noise dominated")]
    NoiseDominated { ratio: f64 },
    #[error("<ZZ> = {zz:e}: evolution is fully dephasing")]
    Dephased { zz: f64 },
    #[error("a local expectation <Z> vanishes")]
    VanishingLocal,
    #[error("causal ratio product {product} via detector {k} is not inside (-1, 1); a tangent is near its pole")]
    NearSingularTangent { k: usize, product: f64 },
    #[error("pair ({i}, {j}): {source}")]
    Pair { i: usize, j: usize, source: Box<TomographyError> },
    #[error("reconstruction i/o: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Spacelike,
    Causal,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Spacelike => "spacelike",
            Regime::Causal => "causal",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub i: usize,
    pub j: usize,
    pub h_reconstructed: f64,
    pub h_true: Option<f64>,
    pub c_ij: f64,
    pub w: Complex64,
    pub regime: Regime,
    pub flags: Vec<String>,
}

/// One third-detector term of the causal correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CausalTerm {
    pub k: usize,
    pub yx_ik: f64,
    pub zi: f64,
    pub xy_kj: f64,
    pub zj: f64,
}

fn check_zz(zz: f64) -> Result<(), TomographyError> {
    if !(zz.abs() >= DEPHASED) {
        return Err(TomographyError::Dephased { zz });
    }
    Ok(())
}

fn ratio_term(rec: &CorrelationRecord) -> Result<f64, TomographyError> {
    check_zz(rec.zz)?;
    let ratio = rec.yy / rec.zz;
    if !(ratio.abs() < 1.0) {
        return Err(TomographyError::NoiseDominated { ratio });
    }
    Ok(0.5 * ratio.atanh())
}

/// `H_ij` assuming no causal contamination.
pub fn reconstruct_spacelike(rec: &CorrelationRecord) -> Result<f64, TomographyError> {
    ratio_term(rec)
}

/// The causal terms of a record, matched by third detector `k`.
pub fn causal_terms(rec: &CorrelationRecord) -> Vec<CausalTerm> {
    rec.yx_ik
        .iter()
        .filter_map(|&(k, yx)| {
            let xy = rec.xy_kj.iter().find(|p| p.0 == k)?.1;
            Some(CausalTerm { k, yx_ik: yx, zi: rec.zi, xy_kj: xy, zj: rec.zj })
        })
        .collect()
}

fn term_product(t: &CausalTerm) -> Result<f64, TomographyError> {
    if t.zi == 0.0 || t.zj == 0.0 {
        return Err(TomographyError::VanishingLocal);
    }
    Ok((t.yx_ik / t.zi) * (t.xy_kj / t.zj))
}

pub fn causal_correction(terms: &[CausalTerm]) -> Result<f64, TomographyError> {
    let mut c = 0.0;
    for t in terms {
        let p = term_product(t)?;
        if !(p.abs() < 1.0) {
            return Err(TomographyError::NearSingularTangent { k: t.k, product: p });
        }
        c += 0.5 * p.atanh();
    }
    Ok(c)
}

/// `H_ij` with a precomputed causal correction.
pub fn reconstruct_general(rec: &CorrelationRecord, correction: f64) -> Result<f64, TomographyError> {
    Ok(ratio_term(rec)? - correction)
}

pub fn assemble_wightman(h_ij: f64, e_ij: f64) -> Complex64 {
    Complex64::new(0.5 * h_ij, 0.5 * e_ij)
}

/// Full reconstruction of one pair. The causal branch is taken unless every
/// causal product is exactly zero.
pub fn reconstruct_pair(
    rec: &CorrelationRecord,
    e_ij: f64,
    h_true: Option<f64>,
) -> Result<ReconstructionResult, TomographyError> {
    let annotate = |e| TomographyError::Pair { i: rec.i, j: rec.j, source: Box::new(e) };
    let terms = causal_terms(rec);
    let mut spacelike = true;
    for t in &terms {
        if term_product(t).map_err(annotate)? != 0.0 {
            spacelike = false;
        }
    }
    let (h, c, regime) = if spacelike {
        (reconstruct_spacelike(rec).map_err(annotate)?, 0.0, Regime::Spacelike)
    } else {
        let c = causal_correction(&terms).map_err(annotate)?;
        (reconstruct_general(rec, c).map_err(annotate)?, c, Regime::Causal)
    };
    let mut flags = Vec::new();
    if rec.zz.abs() < DEPHASING_FLAG_THRESHOLD {
        flags.push("dephasing_dominated".to_string());
    }
    Ok(ReconstructionResult {
        i: rec.i,
        j: rec.j,
        h_reconstructed: h,
        h_true,
        c_ij: c,
        w: assemble_wightman(h, e_ij),
        regime,
        flags,
    })
}

/// Reconstructs every record, in input order. `e` supplies `E_ij`, and
/// `h_true`, when known, is carried into the output for comparison.
pub fn reconstruct_records(
    records: &[CorrelationRecord],
    e: &DMatrix<f64>,
    h_true: Option<&DMatrix<f64>>,
) -> Result<Vec<ReconstructionResult>, TomographyError> {
    records.par_iter().map(|rec| reconstruct_pair(rec, e[(rec.i, rec.j)], h_true.map(|h| h[(rec.i, rec.j)]))).collect()
}

pub fn write_reconstruction_csv(path: &Path, results: &[ReconstructionResult]) -> Result<(), TomographyError> {
    let io = |e: csv::Error| TomographyError::Io(e.to_string());
    let mut w = csv_writer(path).map_err(io)?;
    w.write_record(["i", "j", "regime", "H_reconstructed", "H_true_if_known", "C_ij", "Re_W", "Im_W", "flags"])
        .map_err(io)?;
    for r in results {
        w.write_record([
            r.i.to_string(),
            r.j.to_string(),
            r.regime.to_string(),
            fmt_f64(r.h_reconstructed),
            r.h_true.map(fmt_f64).unwrap_or_default(),
            fmt_f64(r.c_ij),
            fmt_f64(r.w.re),
            fmt_f64(r.w.im),
            r.flags.join(";"),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| TomographyError::Io(e.to_string()))
}
