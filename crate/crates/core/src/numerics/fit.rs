//! Least-squares slope fits on log-log data.

use super::NumericsError;

/// Straight-line fit of `ln y` against `ln x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
}

/// Fits `ln magnitude = slope * ln scale + intercept` by ordinary least
/// squares over `(scale, magnitude)` points.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<SlopeFit, NumericsError> {
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    if xs.len() < 3 {
        return Err(NumericsError::InvalidInput(format!("slope fit needs at least 3 points, got {}", xs.len())));
    }
    if let Some(bad) = xs.iter().chain(&ys).find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(NumericsError::InvalidInput(format!("log-log fit requires positive finite data, got {bad}")));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(NumericsError::InvalidInput("abscissae are all equal".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    Ok(SlopeFit { slope, intercept, residual: (ss / n).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = [1.0f64, 2.0, 4.0, 8.0].iter().map(|&x| (x, 3.0 * x.powf(-0.5))).collect();
        let fit = fit_loglog_slope(&pts).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-14);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-14);
        assert!(fit.residual < 1e-14);
    }

    #[test]
    fn rejects_short_and_nonpositive_input() {
        assert!(fit_loglog_slope(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
        assert!(fit_loglog_slope(&[(1.0, 1.0), (2.0, 0.0), (3.0, 2.0)]).is_err());
    }
}
