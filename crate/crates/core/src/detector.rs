//! Exact final state of N gapless detectors, Pauli correlators and a
//! shot-noise sampler.
//!
//! Basis: `|+> = (|g> + |e>)/sqrt2`, `|-> = (|g> - |e>)/sqrt2`, with
//! `sigma_z |g> = |g>`. A density-matrix index has qubit 1 in the most
//! significant bit and `+` encoded as 0.
//!
//! Closed forms reproduced by [`pauli_ev_closed`] (all products over
//! `k != i, j`, `G = GR`):
//!
//! - `<Z_i> = e^{-H_ii} prod_{k != i} cos(2 G_ik)`
//! - `<Z_i Z_j>`, `<Y_i Y_j>` = `e^{-H_ii-H_jj}/2 [e^{2H_ij} prod cos(2G_ik - 2G_jk) ± e^{-2H_ij} prod cos(2G_ik + 2G_jk)]`
//! - `<Y_i X_j> = -e^{-H_ii} sin(2 G_ij) prod cos(2 G_ik)`
//! - `<X_i Y_j> = -e^{-H_jj} sin(2 G_ji) prod cos(2 G_jk)`

use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::{csv_reader, csv_writer, fmt_f64};
use crate::kernels::{KernelError, KernelMatrix};

pub const MAX_QUBITS: usize = 12;
/// Largest register for which [`density_matrix`] also diagonalises ρ.
pub const PSD_CHECK_MAX_QUBITS: usize = 8;

#[derive(Debug, Error)]
pub enum DetectorError {
    #[error("{n} detectors exceed the density-matrix capacity of {max}")]
    Capacity { n: usize, max: usize },
    #[error("density matrix inconsistent ({0}); check the kernel input")]
    Inconsistent(String),
    #[error("invalid Pauli label: {0}")]
    Label(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("correlation i/o: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub n_qubits: usize,
    pub entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// Largest `|rho_ab - conj(rho_ba)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for a in 0..d {
            for b in a..d {
                worst = worst.max((self.entries[(a, b)] - self.entries[(b, a)].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `mu` of `qubit` (1-based) in basis index `index`.
    pub fn mu(&self, index: usize, qubit: usize) -> f64 {
        mu_of(index, qubit, self.n_qubits)
    }
}

fn mu_of(index: usize, qubit: usize, n: usize) -> f64 {
    if (index >> (n - qubit)) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Final detector state for detectors starting in `|g>`, built entry by
/// entry from the kernel matrices.
pub fn density_matrix(kernels: &KernelMatrix) -> Result<DensityMatrix, DetectorError> {
    let n = kernels.n;
    if n > MAX_QUBITS {
        return Err(DetectorError::Capacity { n, max: MAX_QUBITS });
    }
    let d = 1usize << n;
    let w = DMatrix::from_fn(n, n, |a, b| kernels.w(a, b));
    let norm = 1.0 / d as f64;
    let mus: Vec<Vec<f64>> = (0..d).map(|idx| (1..=n).map(|q| mu_of(idx, q, n)).collect()).collect();
    let entry = |m: &[f64], mp: &[f64]| -> Complex64 {
        let mut delta_phase = 0.0;
        let mut e_phase = 0.0;
        let mut decay = Complex64::new(0.0, 0.0);
        for a in 0..n {
            for b in 0..n {
                if a < b {
                    delta_phase += (mp[a] * mp[b] - m[a] * m[b]) * kernels.delta[(a, b)];
                }
                e_phase += mp[a] * m[b] * kernels.e[(a, b)];
                decay += w[(a, b)] * ((m[a] - mp[a]) * (m[b] - mp[b]));
            }
        }
        let exponent = Complex64::new(0.0, 0.5 * (delta_phase + e_phase)) - 0.5 * decay;
        exponent.exp() * norm
    };
    let values: Vec<Complex64> = (0..d * d).into_par_iter().map(|k| entry(&mus[k / d], &mus[k % d])).collect();
    let rho = DensityMatrix { n_qubits: n, entries: DMatrix::from_row_slice(d, d, &values) };

    let herm = rho.hermiticity_error();
    if herm > 1e-12 {
        return Err(DetectorError::Inconsistent(format!("Hermiticity error {herm:e}")));
    }
    let tr = rho.trace();
    if (tr - 1.0).norm() > 1e-12 {
        return Err(DetectorError::Inconsistent(format!("trace {tr}")));
    }
    if n <= PSD_CHECK_MAX_QUBITS {
        let min = rho.min_eigenvalue();
        if min < -1e-10 {
            return Err(DetectorError::Inconsistent(format!("minimum eigenvalue {min:e}")));
        }
    }
    Ok(rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    I,
    X,
    Y,
    Z,
}

impl Axis {
    fn matrix_ge(self) -> Matrix2<Complex64> {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Axis::I => Matrix2::new(l, o, o, l),
            Axis::X => Matrix2::new(o, l, l, o),
            Axis::Y => Matrix2::new(o, -i, i, o),
            Axis::Z => Matrix2::new(l, o, o, -l),
        }
    }

    /// The operator in the `{|+>, |->}` basis.
    pub fn matrix_mu(self) -> Matrix2<Complex64> {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let v = Matrix2::new(h, h, h, -h);
        v.adjoint() * self.matrix_ge() * v
    }
}

/// A Pauli factor acting on one detector. `qubit` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliLabel {
    pub axis: Axis,
    pub qubit: usize,
}

impl PauliLabel {
    pub fn new(axis: Axis, qubit: usize) -> Self {
        Self { axis, qubit }
    }
}

/// `Tr(rho * prod ops)` by direct summation over the nonzero operator entries.
pub fn pauli_ev_oracle(rho: &DensityMatrix, ops: &[PauliLabel]) -> Result<f64, DetectorError> {
    let n = rho.n_qubits;
    let mut per_qubit = vec![Axis::I; n];
    for op in ops {
        if op.qubit == 0 || op.qubit > n {
            return Err(DetectorError::Label(format!("qubit {} outside 1..={n}", op.qubit)));
        }
        if per_qubit[op.qubit - 1] != Axis::I || ops.iter().filter(|o| o.qubit == op.qubit).count() > 1 {
            return Err(DetectorError::Label(format!("qubit {} appears twice", op.qubit)));
        }
        per_qubit[op.qubit - 1] = op.axis;
    }
    let mats: Vec<Matrix2<Complex64>> = per_qubit.iter().map(|a| a.matrix_mu()).collect();
    let d = rho.dim();
    let mut total = Complex64::new(0.0, 0.0);
    for col in 0..d {
        // Rows `mu'` with a nonzero `O[mu', mu]`, built qubit by qubit.
        let mut rows = vec![(0usize, Complex64::new(1.0, 0.0))];
        for (q, m) in mats.iter().enumerate() {
            let shift = n - 1 - q;
            let c = (col >> shift) & 1;
            let mut next = Vec::with_capacity(rows.len() * 2);
            for &(r, coef) in &rows {
                for b in 0..2 {
                    let v = m[(b, c)];
                    if v.norm() > 1e-15 {
                        next.push((r | (b << shift), coef * v));
                    }
                }
            }
            rows = next;
        }
        for (r, coef) in rows {
            total += rho.entries[(col, r)] * coef;
        }
    }
    if total.im.abs() > 1e-12 {
        return Err(DetectorError::Inconsistent(format!("expectation value {total} is not real")));
    }
    Ok(total.re)
}

/// Which correlator [`pauli_ev_closed`] evaluates for the pair `(i, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    ZZ,
    YY,
    Zi,
    Zj,
    YiXj,
    XiYj,
}

impl Kind {
    pub const ALL: [Kind; 6] = [Kind::ZZ, Kind::YY, Kind::Zi, Kind::Zj, Kind::YiXj, Kind::XiYj];

    /// The operator string for 0-based detectors `i` and `j`.
    pub fn labels(self, i: usize, j: usize) -> Vec<PauliLabel> {
        let (a, b) = (i + 1, j + 1);
        match self {
            Kind::ZZ => vec![PauliLabel::new(Axis::Z, a), PauliLabel::new(Axis::Z, b)],
            Kind::YY => vec![PauliLabel::new(Axis::Y, a), PauliLabel::new(Axis::Y, b)],
            Kind::Zi => vec![PauliLabel::new(Axis::Z, a)],
            Kind::Zj => vec![PauliLabel::new(Axis::Z, b)],
            Kind::YiXj => vec![PauliLabel::new(Axis::Y, a), PauliLabel::new(Axis::X, b)],
            Kind::XiYj => vec![PauliLabel::new(Axis::X, a), PauliLabel::new(Axis::Y, b)],
        }
    }
}

fn cos_product(n: usize, skip: (usize, usize), f: impl Fn(usize) -> f64) -> f64 {
    (0..n).filter(|&k| k != skip.0 && k != skip.1).map(|k| (2.0 * f(k)).cos()).product()
}

/// Closed-form correlator for 0-based detectors `i != j`.
pub fn pauli_ev_closed(km: &KernelMatrix, i: usize, j: usize, kind: Kind) -> Result<f64, DetectorError> {
    let n = km.n;
    if i >= n || j >= n || i == j {
        return Err(DetectorError::Label(format!("pair ({i}, {j}) invalid for {n} detectors")));
    }
    let g = &km.gr;
    let h = &km.h;
    Ok(match kind {
        Kind::ZZ | Kind::YY => {
            let minus = cos_product(n, (i, j), |k| g[(i, k)] - g[(j, k)]);
            let plus = cos_product(n, (i, j), |k| g[(i, k)] + g[(j, k)]);
            let a = (2.0 * h[(i, j)]).exp() * minus;
            let b = (-2.0 * h[(i, j)]).exp() * plus;
            let sign = if kind == Kind::ZZ { 1.0 } else { -1.0 };
            0.5 * (-h[(i, i)] - h[(j, j)]).exp() * (a + sign * b)
        }
        Kind::Zi => (-h[(i, i)]).exp() * cos_product(n, (i, i), |k| g[(i, k)]),
        Kind::Zj => (-h[(j, j)]).exp() * cos_product(n, (j, j), |k| g[(j, k)]),
        Kind::YiXj => -(-h[(i, i)]).exp() * (2.0 * g[(i, j)]).sin() * cos_product(n, (i, j), |k| g[(i, k)]),
        Kind::XiYj => -(-h[(j, j)]).exp() * (2.0 * g[(j, i)]).sin() * cos_product(n, (i, j), |k| g[(j, k)]),
    })
}

/// Mean of `shots` independent ±1 outcomes with `P(+1) = (1 + exact_ev)/2`.
pub fn sample_correlator(exact_ev: f64, shots: u64, seed: u64) -> Result<f64, DetectorError> {
    if !(exact_ev.abs() <= 1.0) {
        return Err(DetectorError::Domain(format!("|exact_ev| = {} exceeds 1", exact_ev.abs())));
    }
    if shots == 0 {
        return Err(DetectorError::Domain("shots must be at least 1".into()));
    }
    let p = (0.5 * (1.0 + exact_ev)).clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ups = Binomial::new(shots, p).map_err(|e| DetectorError::Domain(e.to_string()))?.sample(&mut rng);
    Ok((2.0 * ups as f64 - shots as f64) / shots as f64)
}

/// Seed for one observable of one pair, derived from a base seed on a
/// dedicated ChaCha stream so different observables never share draws.
pub fn observable_seed(base: u64, i: usize, j: usize, kind: &ObservableKind) -> u64 {
    let (code, k) = match *kind {
        ObservableKind::ZZ => (0u64, 0usize),
        ObservableKind::YY => (1, 0),
        ObservableKind::Zi => (2, 0),
        ObservableKind::Zj => (3, 0),
        ObservableKind::YxIk(k) => (4, k),
        ObservableKind::XyKj(k) => (5, k),
    };
    let stream = ((i as u64) << 44) | ((j as u64) << 24) | (code << 20) | k as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(stream);
    rng.next_u64()
}

/// Column `kind` of the correlation CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObservableKind {
    ZZ,
    YY,
    Zi,
    Zj,
    /// `<Y_i X_k>`
    YxIk(usize),
    /// `<X_k Y_j>`
    XyKj(usize),
}

impl fmt::Display for ObservableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObservableKind::ZZ => write!(f, "zz"),
            ObservableKind::YY => write!(f, "yy"),
            ObservableKind::Zi => write!(f, "zi"),
            ObservableKind::Zj => write!(f, "zj"),
            ObservableKind::YxIk(k) => write!(f, "yx_ik:{k}"),
            ObservableKind::XyKj(k) => write!(f, "xy_kj:{k}"),
        }
    }
}

impl std::str::FromStr for ObservableKind {
    type Err = DetectorError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DetectorError::Io(format!("unknown observable kind {s:?}"));
        Ok(match s {
            "zz" => ObservableKind::ZZ,
            "yy" => ObservableKind::YY,
            "zi" => ObservableKind::Zi,
            "zj" => ObservableKind::Zj,
            _ => {
                let (head, k) = s.split_once(':').ok_or_else(bad)?;
                let k: usize = k.parse().map_err(|_| bad())?;
                match head {
                    "yx_ik" => ObservableKind::YxIk(k),
                    "xy_kj" => ObservableKind::XyKj(k),
                    _ => return Err(bad()),
                }
            }
        })
    }
}

/// Every expectation value the reconstruction of pair `(i, j)` uses.
/// Indices are 0-based; `shots` is `None` for exact values.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRecord {
    pub i: usize,
    pub j: usize,
    pub zz: f64,
    pub yy: f64,
    pub zi: f64,
    pub zj: f64,
    /// `(k, <Y_i X_k>)` for every `k != i, j`, ascending in `k`.
    pub yx_ik: Vec<(usize, f64)>,
    /// `(k, <X_k Y_j>)` for every `k != i, j`, ascending in `k`.
    pub xy_kj: Vec<(usize, f64)>,
    pub shots: Option<u64>,
}

impl CorrelationRecord {
    pub fn exact(km: &KernelMatrix, i: usize, j: usize) -> Result<Self, DetectorError> {
        let others: Vec<usize> = (0..km.n).filter(|&k| k != i && k != j).collect();
        let mut yx_ik = Vec::with_capacity(others.len());
        let mut xy_kj = Vec::with_capacity(others.len());
        for &k in &others {
            yx_ik.push((k, pauli_ev_closed(km, i, k, Kind::YiXj)?));
            xy_kj.push((k, pauli_ev_closed(km, k, j, Kind::XiYj)?));
        }
        Ok(Self {
            i,
            j,
            zz: pauli_ev_closed(km, i, j, Kind::ZZ)?,
            yy: pauli_ev_closed(km, i, j, Kind::YY)?,
            zi: pauli_ev_closed(km, i, j, Kind::Zi)?,
            zj: pauli_ev_closed(km, i, j, Kind::Zj)?,
            yx_ik,
            xy_kj,
            shots: None,
        })
    }

    /// `(kind, value)` in the canonical row order.
    pub fn entries(&self) -> Vec<(ObservableKind, f64)> {
        let mut out = vec![
            (ObservableKind::ZZ, self.zz),
            (ObservableKind::YY, self.yy),
            (ObservableKind::Zi, self.zi),
            (ObservableKind::Zj, self.zj),
        ];
        out.extend(self.yx_ik.iter().map(|&(k, v)| (ObservableKind::YxIk(k), v)));
        out.extend(self.xy_kj.iter().map(|&(k, v)| (ObservableKind::XyKj(k), v)));
        out
    }

    fn map_entries(
        &self,
        mut f: impl FnMut(ObservableKind, f64) -> Result<f64, DetectorError>,
    ) -> Result<Self, DetectorError> {
        let mut out = self.clone();
        out.zz = f(ObservableKind::ZZ, self.zz)?;
        out.yy = f(ObservableKind::YY, self.yy)?;
        out.zi = f(ObservableKind::Zi, self.zi)?;
        out.zj = f(ObservableKind::Zj, self.zj)?;
        for (k, v) in out.yx_ik.iter_mut() {
            *v = f(ObservableKind::YxIk(*k), *v)?;
        }
        for (k, v) in out.xy_kj.iter_mut() {
            *v = f(ObservableKind::XyKj(*k), *v)?;
        }
        Ok(out)
    }

    /// Independently sampled copy of an exact record.
    pub fn sampled(&self, shots: u64, base_seed: u64) -> Result<Self, DetectorError> {
        let mut out =
            self.map_entries(|kind, v| sample_correlator(v, shots, observable_seed(base_seed, self.i, self.j, &kind)))?;
        out.shots = Some(shots);
        Ok(out)
    }
}

/// One line of the correlation CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub i: usize,
    pub j: usize,
    pub kind: String,
    pub exact: f64,
    pub sampled: Option<f64>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
}

/// Rows for an exact record and, optionally, its sampled counterpart.
pub fn correlation_rows(
    exact: &CorrelationRecord,
    sampled: Option<&CorrelationRecord>,
    base_seed: u64,
) -> Vec<CorrelationRow> {
    let sampled_entries = sampled.map(|s| s.entries());
    exact
        .entries()
        .into_iter()
        .enumerate()
        .map(|(idx, (kind, v))| CorrelationRow {
            i: exact.i,
            j: exact.j,
            kind: kind.to_string(),
            exact: v,
            sampled: sampled_entries.as_ref().map(|s| s[idx].1),
            shots: sampled.and_then(|s| s.shots),
            seed: sampled.map(|_| observable_seed(base_seed, exact.i, exact.j, &kind)),
        })
        .collect()
}

pub fn write_correlation_csv(path: &Path, rows: &[CorrelationRow]) -> Result<(), DetectorError> {
    let io = |e: csv::Error| DetectorError::Io(e.to_string());
    let mut w = csv_writer(path).map_err(io)?;
    w.write_record(["i", "j", "kind", "exact", "sampled", "shots", "seed"]).map_err(io)?;
    for r in rows {
        let opt = |v: Option<String>| v.unwrap_or_default();
        w.write_record([
            r.i.to_string(),
            r.j.to_string(),
            r.kind.clone(),
            fmt_f64(r.exact),
            opt(r.sampled.map(fmt_f64)),
            opt(r.shots.map(|s| s.to_string())),
            opt(r.seed.map(|s| s.to_string())),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| DetectorError::Io(e.to_string()))
}

pub fn read_correlation_csv(path: &Path) -> Result<Vec<CorrelationRow>, DetectorError> {
    let mut r = csv_reader(path, true).map_err(|e| DetectorError::Io(e.to_string()))?;
    r.deserialize().collect::<Result<Vec<CorrelationRow>, _>>().map_err(|e| DetectorError::Io(e.to_string()))
}

/// Groups CSV rows back into records. With `use_sampled` the sampled column
/// is used (rows without one are an error).
pub fn records_from_rows(rows: &[CorrelationRow], use_sampled: bool) -> Result<Vec<CorrelationRecord>, DetectorError> {
    let mut out: Vec<CorrelationRecord> = Vec::new();
    for row in rows {
        let value = if use_sampled {
            row.sampled
                .ok_or_else(|| DetectorError::Io(format!("row ({}, {}) {} has no sample", row.i, row.j, row.kind)))?
        } else {
            row.exact
        };
        if out.last().is_none_or(|r| (r.i, r.j) != (row.i, row.j)) {
            out.push(CorrelationRecord {
                i: row.i,
                j: row.j,
                zz: f64::NAN,
                yy: f64::NAN,
                zi: f64::NAN,
                zj: f64::NAN,
                yx_ik: Vec::new(),
                xy_kj: Vec::new(),
                shots: if use_sampled { row.shots } else { None },
            });
        }
        let rec = out.last_mut().expect("pushed above");
        match row.kind.parse::<ObservableKind>()? {
            ObservableKind::ZZ => rec.zz = value,
            ObservableKind::YY => rec.yy = value,
            ObservableKind::Zi => rec.zi = value,
            ObservableKind::Zj => rec.zj = value,
            ObservableKind::YxIk(k) => rec.yx_ik.push((k, value)),
            ObservableKind::XyKj(k) => rec.xy_kj.push((k, value)),
        }
    }
    for rec in &out {
        if [rec.zz, rec.yy, rec.zi, rec.zj].iter().any(|v| v.is_nan()) {
            return Err(DetectorError::Io(format!("pair ({}, {}) is missing a zz/yy/zi/zj row", rec.i, rec.j)));
        }
    }
    Ok(out)
}

/// Random kernels satisfying every structural invariant and yielding a
/// positive semidefinite state: `H ± i E >= 0` is enforced by a diagonal
/// boost of at least the Frobenius norm of `E`.
pub fn random_valid_kernels<R: Rng + ?Sized>(n: usize, rng: &mut R) -> KernelMatrix {
    loop {
        let gr = DMatrix::from_fn(n, n, |a, b| if a > b { rng.random_range(-0.3..=0.3) } else { 0.0 });
        let e = &gr - gr.transpose();
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..=1.0));
        let boost = e.norm() + rng.random_range(0.05..=0.3);
        let mut h = &a * a.transpose() / n as f64;
        for d in 0..n {
            h[(d, d)] += boost;
        }
        let h = (&h + h.transpose()) * 0.5;
        let ok = (0..n).all(|p| (0..n).all(|q| p == q || h[(p, q)].abs() <= h[(p, p)].min(h[(q, q)])));
        if ok {
            return KernelMatrix::from_parts(h, gr, 1.0).expect("finite square inputs");
        }
    }
}
