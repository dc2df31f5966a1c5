//! Adaptive 21-point Gauss–Kronrod quadrature for real and complex integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use super::NumericsError;

// Kronrod nodes and weights as published, beyond f64 precision.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_452_125,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes.
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Values that can be integrated: `f64` and `Complex64`.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
    fn to_complex(self) -> Complex64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn to_complex(self) -> Complex64 {
        self
    }
}

/// Integral estimate with its error bound and the number of integrand calls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult<T = f64> {
    pub value: T,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Stopping rule: converged once `error <= max(abs_tol, rel_tol * |I|)`.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-10, max_intervals: 4000 }
    }
}

impl QuadOptions {
    pub fn relative(rel_tol: f64) -> Self {
        Self { abs_tol: 0.0, rel_tol, ..Self::default() }
    }
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    resabs: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> Panel<T> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = T::zero();
    let mut resabs = WGK[10] * fc.magnitude();
    let mut fv = [(T::zero(), T::zero()); 10];
    for (j, node) in XGK[..10].iter().enumerate() {
        let dx = half * node;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod = kronrod + (f1 + f2) * WGK[j];
        resabs += WGK[j] * (f1.magnitude() + f2.magnitude());
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
        fv[j] = (f1, f2);
    }
    let mean = kronrod * 0.5;
    let mut resasc = WGK[10] * (fc - mean).magnitude();
    for (j, (f1, f2)) in fv.iter().enumerate() {
        resasc += WGK[j] * ((*f1 - mean).magnitude() + (*f2 - mean).magnitude());
    }
    let habs = half.abs();
    let resabs = resabs * habs;
    let resasc = resasc * habs;
    let mut error = ((kronrod - gauss) * half).magnitude();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Panel { a, b, value: kronrod * half, error, resabs }
}

/// Adaptive integration of `f` over `[a, b]`.
pub fn integrate<T: QuadValue, F: Fn(f64) -> T>(
    f: F,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<QuadratureResult<T>, NumericsError> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(NumericsError::InvalidInput("integration bounds must be finite".into()));
    }
    let first = gk21(&f, a, b);
    let mut evaluations = 21;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut total_abs = first.resabs;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    loop {
        // The roundoff floor keeps integrals that cancel to zero from
        // demanding an unreachable relative accuracy.
        let target = opts.abs_tol.max(opts.rel_tol * total.magnitude()).max(100.0 * f64::EPSILON * total_abs);
        if total_err <= target {
            break;
        }
        if heap.len() >= opts.max_intervals {
            return Err(NumericsError::NoConvergence {
                best: total.to_complex(),
                error_estimate: total_err,
                evaluations,
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            return Err(NumericsError::NoConvergence {
                best: total.to_complex(),
                error_estimate: total_err,
                evaluations,
            });
        }
        let left = gk21(&f, worst.a, mid);
        let right = gk21(&f, mid, worst.b);
        evaluations += 42;
        total = total - worst.value + left.value + right.value;
        total_err = total_err - worst.error + left.error + right.error;
        total_abs = total_abs - worst.resabs + left.resabs + right.resabs;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the drift accumulated by the running updates.
    let mut value = T::zero();
    let mut error = 0.0;
    for p in heap.iter() {
        value = value + p.value;
        error += p.error;
    }
    Ok(QuadratureResult { value, error_estimate: error, evaluations })
}

/// Cutoff `K` beyond which `exp(-decay k^2)` times any modest polynomial is
/// negligible against `rel_tol`.
pub fn gaussian_cutoff(decay: f64, rel_tol: f64) -> f64 {
    ((-rel_tol.max(1e-300).ln()) + 12.0).max(1.0).sqrt() / decay.sqrt()
}

/// Integral of `f` over `[0, inf)` for integrands that eventually decay at
/// least exponentially.
///
/// The half line is cut into panels of doubling width. Integration stops
/// once two consecutive panels contribute an absolute mass below `tol / 100`.
pub fn integrate_semi_infinite<T: QuadValue, F: Fn(f64) -> T>(
    f: F,
    tol: f64,
) -> Result<QuadratureResult<T>, NumericsError> {
    if !(tol > 0.0) {
        return Err(NumericsError::InvalidInput("tolerance must be positive".into()));
    }
    let opts = QuadOptions { abs_tol: tol / 8.0, rel_tol: tol, max_intervals: 4000 };
    let mut value = T::zero();
    let mut error = 0.0;
    let mut evaluations = 0;
    let mut lo = 0.0;
    let mut width = 1.0;
    let mut quiet = 0;
    for _ in 0..80 {
        let hi = lo + width;
        let mass = gk21(&|x| f(x).magnitude(), lo, hi).value;
        let panel = integrate(&f, lo, hi, &opts)?;
        value = value + panel.value;
        error += panel.error_estimate;
        evaluations += panel.evaluations + 21;
        quiet = if mass < tol / 100.0 { quiet + 1 } else { 0 };
        if quiet >= 2 {
            return Ok(QuadratureResult { value, error_estimate: error, evaluations });
        }
        lo = hi;
        width *= 2.0;
    }
    Err(NumericsError::NoConvergence { best: value.to_complex(), error_estimate: error, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn kronrod_rule_is_exact_for_degree_31() {
        for d in [0, 7, 20, 31] {
            let r = gk21(&|x: f64| x.powi(d), 0.0, 1.0);
            assert!((r.value - 1.0 / (d as f64 + 1.0)).abs() < 1e-15, "degree {d}");
        }
    }

    #[test]
    fn gaussian_moment() {
        let r = integrate_semi_infinite(|k: f64| k * k * (-k * k).exp(), 1e-12).unwrap();
        assert!((r.value - PI.sqrt() / 4.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_tail() {
        let r = integrate_semi_infinite(|k: f64| (-k).exp(), 1e-12).unwrap();
        assert!((r.value - 1.0).abs() < 1e-11);
    }

    #[test]
    fn complex_oscillatory() {
        // int_0^inf e^{-k^2} e^{-3ik} dk = sqrt(pi)/2 e^{-9/4} - i D(3/2)
        let f = |k: f64| Complex64::new(0.0, -3.0 * k).exp() * (-k * k).exp();
        let r = integrate(f, 0.0, gaussian_cutoff(1.0, 1e-16), &QuadOptions::relative(1e-13)).unwrap();
        let want_re = PI.sqrt() / 2.0 * (-2.25f64).exp();
        let want_im = -crate::numerics::dawson(1.5);
        assert!((r.value.re - want_re).abs() < 1e-14);
        assert!((r.value.im - want_im).abs() < 1e-14);
    }

    #[test]
    fn budget_exhaustion_reports_best_estimate() {
        let opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-15, max_intervals: 3 };
        let err = integrate(|x: f64| (1.0 / x.max(1e-300)).sin(), 1e-6, 1.0, &opts).unwrap_err();
        assert!(matches!(err, NumericsError::NoConvergence { .. }));
    }
}
