//! Coupling-scaled kernel matrices and their CSV/JSON representation.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{retarded_smeared, wightman_smeared_quadrature, FieldState, KernelError};
use crate::io::{csv_reader, csv_writer, fmt_f64};
use crate::smearing::GaussianRegion;

/// `H_ij`, `E_ij`, `G_ij` and `Delta_ij`, each already multiplied by
/// `lambda^2`. Indices are zero-based.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub n: usize,
    pub lambda: f64,
    pub h: DMatrix<f64>,
    pub e: DMatrix<f64>,
    pub gr: DMatrix<f64>,
    pub delta: DMatrix<f64>,
    pub wdiag: Vec<f64>,
    pub state: Option<FieldState>,
    /// Pairs `(i, j)` whose Gaussians overlap across the lightcone.
    pub precision_warnings: Vec<(usize, usize)>,
}

const MATRIX_FILES: [&str; 4] = ["H", "E", "GR", "Delta"];

/// JSON envelope written next to the per-matrix CSV files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixEnvelope {
    pub n: usize,
    pub lambda: f64,
    pub state: Option<FieldState>,
    pub files: BTreeMap<String, String>,
    #[serde(default)]
    pub precision_warnings: Vec<(usize, usize)>,
}

impl KernelMatrix {
    /// Builds the matrix set from `H` and `G_R`; `E`, `Delta` and `Wdiag`
    /// follow exactly.
    pub fn from_parts(h: DMatrix<f64>, gr: DMatrix<f64>, lambda: f64) -> Result<Self, KernelError> {
        let n = h.nrows();
        if h.ncols() != n || gr.nrows() != n || gr.ncols() != n {
            return Err(KernelError::Invariant(format!(
                "H is {}x{}, GR is {}x{}",
                h.nrows(),
                h.ncols(),
                gr.nrows(),
                gr.ncols()
            )));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(KernelError::Invariant(format!("lambda must be positive, got {lambda}")));
        }
        if h.iter().chain(gr.iter()).any(|v| !v.is_finite()) {
            return Err(KernelError::Invariant("non-finite kernel entry".into()));
        }
        if h != h.transpose() {
            return Err(KernelError::Invariant("H is not symmetric".into()));
        }
        let e = &gr - gr.transpose();
        let delta = &gr + gr.transpose();
        let wdiag = (0..n).map(|i| 0.5 * h[(i, i)]).collect();
        Ok(Self { n, lambda, h, e, gr, delta, wdiag, state: None, precision_warnings: Vec::new() })
    }

    /// `W_ij = (H_ij + i E_ij) / 2`.
    pub fn w(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(0.5 * self.h[(i, j)], 0.5 * self.e[(i, j)])
    }

    /// Checks the structural identities to absolute tolerance `tol` scaled
    /// by the largest entry.
    pub fn check_invariants(&self, tol: f64) -> Result<(), KernelError> {
        let scale = self.h.iter().chain(self.gr.iter()).fold(1e-300f64, |m, v| m.max(v.abs()));
        let bound = tol * scale;
        let n = self.n;
        let shapes = [&self.h, &self.e, &self.gr, &self.delta];
        if shapes.iter().any(|m| m.nrows() != n || m.ncols() != n) || self.wdiag.len() != n {
            return Err(KernelError::Invariant(format!("matrices are not all {n}x{n}")));
        }
        for i in 0..n {
            if (self.wdiag[i] - 0.5 * self.h[(i, i)]).abs() > bound {
                return Err(KernelError::Invariant(format!("Wdiag[{i}] != H[{i},{i}]/2")));
            }
            if self.wdiag[i] < -bound {
                return Err(KernelError::Invariant(format!("Wdiag[{i}] is negative")));
            }
            for j in 0..n {
                let checks = [
                    ("H symmetric", self.h[(i, j)] - self.h[(j, i)]),
                    ("E antisymmetric", self.e[(i, j)] + self.e[(j, i)]),
                    ("Delta = GR + GR^T", self.delta[(i, j)] - self.gr[(i, j)] - self.gr[(j, i)]),
                    ("E = GR - GR^T", self.e[(i, j)] - self.gr[(i, j)] + self.gr[(j, i)]),
                ];
                for (name, diff) in checks {
                    if !(diff.abs() <= bound) {
                        return Err(KernelError::Invariant(format!("{name} fails at ({i}, {j}) by {diff:e}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Relabels detectors: new index `a` is old index `perm[a]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n;
        let pick = |m: &DMatrix<f64>| DMatrix::from_fn(n, n, |a, b| m[(perm[a], perm[b])]);
        Self {
            n,
            lambda: self.lambda,
            h: pick(&self.h),
            e: pick(&self.e),
            gr: pick(&self.gr),
            delta: pick(&self.delta),
            wdiag: perm.iter().map(|&p| self.wdiag[p]).collect(),
            state: self.state,
            precision_warnings: Vec::new(),
        }
    }

    /// Writes `H.csv`, `E.csv`, `GR.csv`, `Delta.csv`, `Wdiag.csv` and
    /// `kernels.json` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<(), KernelError> {
        let io = |e: &dyn std::fmt::Display| KernelError::Io(e.to_string());
        std::fs::create_dir_all(dir).map_err(|e| io(&e))?;
        let mut files = BTreeMap::new();
        for (name, m) in MATRIX_FILES.iter().zip([&self.h, &self.e, &self.gr, &self.delta]) {
            let file = format!("{name}.csv");
            let mut w = csv_writer(&dir.join(&file)).map_err(|e| io(&e))?;
            for i in 0..self.n {
                let row: Vec<String> = (0..self.n).map(|j| fmt_f64(m[(i, j)])).collect();
                w.write_record(&row).map_err(|e| io(&e))?;
            }
            w.flush().map_err(|e| io(&e))?;
            files.insert(name.to_string(), file);
        }
        let mut w = csv_writer(&dir.join("Wdiag.csv")).map_err(|e| io(&e))?;
        let row: Vec<String> = self.wdiag.iter().map(|v| fmt_f64(*v)).collect();
        w.write_record(&row).map_err(|e| io(&e))?;
        w.flush().map_err(|e| io(&e))?;
        files.insert("Wdiag".into(), "Wdiag.csv".into());
        let env = MatrixEnvelope {
            n: self.n,
            lambda: self.lambda,
            state: self.state,
            files,
            precision_warnings: self.precision_warnings.clone(),
        };
        let json = serde_json::to_string_pretty(&env).map_err(|e| io(&e))? + "\n";
        std::fs::write(dir.join("kernels.json"), json).map_err(|e| io(&e))
    }

    /// Reads a directory written by [`KernelMatrix::write_dir`] (or supplied
    /// by a user) and validates every invariant to 1e-12 relative.
    pub fn read_dir(dir: &Path) -> Result<Self, KernelError> {
        let io = |e: &dyn std::fmt::Display| KernelError::Io(e.to_string());
        let text = std::fs::read_to_string(dir.join("kernels.json")).map_err(|e| io(&e))?;
        let env: MatrixEnvelope = serde_json::from_str(&text).map_err(|e| io(&e))?;
        let n = env.n;
        let read = |key: &str| -> Result<Vec<Vec<f64>>, KernelError> {
            let file = env.files.get(key).cloned().unwrap_or_else(|| format!("{key}.csv"));
            let mut r = csv_reader(&dir.join(&file), false).map_err(|e| io(&e))?;
            let mut rows = Vec::new();
            for rec in r.records() {
                let rec = rec.map_err(|e| io(&e))?;
                let row = rec
                    .iter()
                    .map(|c| c.parse::<f64>().map_err(|e| KernelError::Io(format!("{file}: {e}: {c:?}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                rows.push(row);
            }
            Ok(rows)
        };
        let mut mats = Vec::new();
        for key in MATRIX_FILES {
            let rows = read(key)?;
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(KernelError::Io(format!("{key} is not {n}x{n}")));
            }
            mats.push(DMatrix::from_fn(n, n, |i, j| rows[i][j]));
        }
        let wrows = read("Wdiag")?;
        let wdiag = wrows.into_iter().next().unwrap_or_default();
        let mut it = mats.into_iter();
        let (h, e, gr, delta) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
        let km = Self {
            n,
            lambda: env.lambda,
            h,
            e,
            gr,
            delta,
            wdiag,
            state: env.state,
            precision_warnings: env.precision_warnings,
        };
        km.check_invariants(1e-12)?;
        Ok(km)
    }
}

/// Smeared kernel matrices for a set of equal-width regions.
///
/// `H` comes from the quadrature oracle, `G_R` from the closed-form smeared
/// causal propagator, and `E`, `Delta` from `G_R`. The imaginary part of the
/// quadrature must agree with `E` to 1e-8 of the local-noise scale
/// `lambda^2 / (8 pi^2 l^2)`.
pub fn assemble_kernels(
    state: &FieldState,
    regions: &[GaussianRegion],
    lambda: f64,
    tol: f64,
) -> Result<KernelMatrix, KernelError> {
    state.validate()?;
    match state {
        FieldState::Vacuum | FieldState::Thermal { .. } => {}
        other => return Err(KernelError::UnsupportedState(other.name())),
    }
    let n = regions.len();
    let Some(first) = regions.first() else {
        return KernelMatrix::from_parts(DMatrix::zeros(0, 0), DMatrix::zeros(0, 0), lambda);
    };
    let ell = first.ell;
    if let Some(r) = regions.iter().find(|r| r.ell != ell) {
        return Err(KernelError::MismatchedWidths(ell, r.ell));
    }
    let l2 = lambda * lambda;
    let scale = l2 / (8.0 * PI * PI * ell * ell);
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let computed: Vec<(f64, f64, f64, bool)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let annotate = |e: KernelError| KernelError::Pair { i, j, source: Box::new(e) };
            let w = wightman_smeared_quadrature(state, &regions[i], &regions[j], tol).map_err(annotate)?;
            let gij = retarded_smeared(&regions[i], &regions[j]).map_err(annotate)?;
            let gji = retarded_smeared(&regions[j], &regions[i]).map_err(annotate)?;
            let e_quad = l2 * 2.0 * w.im;
            let e_closed = l2 * (gij.value - gji.value);
            if (e_quad - e_closed).abs() > 1e-8 * scale {
                return Err(annotate(KernelError::Invariant(format!(
                    "2 Im W = {e_quad:e} disagrees with G_ij - G_ji = {e_closed:e}"
                ))));
            }
            Ok((l2 * 2.0 * w.re, l2 * gij.value, l2 * gji.value, gij.precision_warning && i != j))
        })
        .collect::<Result<_, KernelError>>()?;
    let mut h = DMatrix::zeros(n, n);
    let mut gr = DMatrix::zeros(n, n);
    let mut warnings = Vec::new();
    for (&(i, j), &(hv, gij, gji, warn)) in pairs.iter().zip(&computed) {
        h[(i, j)] = hv;
        h[(j, i)] = hv;
        if i != j {
            gr[(i, j)] = gij;
            gr[(j, i)] = gji;
        }
        if warn {
            warnings.push((i, j));
        }
    }
    let mut km = KernelMatrix::from_parts(h, gr, lambda)?;
    km.state = Some(*state);
    km.precision_warnings = warnings;
    Ok(km)
}
