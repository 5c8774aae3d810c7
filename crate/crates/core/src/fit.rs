//! Least-squares fitting helpers: straight lines, log-log power laws, and
//! the x-intercept extrapolation used by the blow-up time estimators.

use std::error::Error;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum FitError {
    TooFewSamples {
        needed: usize,
        got: usize,
    },
    DegenerateAbscissa,
    NonPositiveValue(f64),
    /// Slope has the wrong sign for an x-intercept extrapolation.
    NoRoot {
        slope: f64,
    },
}

impl fmt::Display for FitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitError::TooFewSamples { needed, got } => {
                write!(f, "need at least {needed} samples, got {got}")
            }
            FitError::DegenerateAbscissa => write!(f, "abscissa values are all equal"),
            FitError::NonPositiveValue(v) => {
                write!(f, "log fit requires positive values, got {v}")
            }
            FitError::NoRoot { slope } => {
                write!(f, "fitted slope {slope} admits no forward root")
            }
        }
    }
}

impl Error for FitError {}

/// Ordinary least squares line `y = slope x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub rms_residual: f64,
    /// Mean and spread of the abscissa, kept for interval estimates.
    pub x_mean: f64,
    pub sxx: f64,
    pub n: usize,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<Line, FitError> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return Err(FitError::TooFewSamples { needed: 2, got: n });
    }
    let nf = n as f64;
    let x_mean = xs[..n].iter().sum::<f64>() / nf;
    let y_mean = ys[..n].iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        let dx = xs[i] - x_mean;
        sxx += dx * dx;
        sxy += dx * (ys[i] - y_mean);
    }
    if sxx == 0.0 {
        return Err(FitError::DegenerateAbscissa);
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let mut ss = 0.0;
    for i in 0..n {
        let r = ys[i] - (slope * xs[i] + intercept);
        ss += r * r;
    }
    Ok(Line {
        slope,
        intercept,
        rms_residual: (ss / nf).sqrt(),
        x_mean,
        sxx,
        n,
    })
}

/// Least squares on `(ln x, ln y)`: returns the fitted exponent and
/// prefactor of `y = c x^e`.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64), FitError> {
    let mut lx = Vec::with_capacity(xs.len());
    let mut ly = Vec::with_capacity(ys.len());
    for (&x, &y) in xs.iter().zip(ys) {
        if !(x > 0.0) {
            return Err(FitError::NonPositiveValue(x));
        }
        if !(y > 0.0) {
            return Err(FitError::NonPositiveValue(y));
        }
        lx.push(x.ln());
        ly.push(y.ln());
    }
    let line = linear_fit(&lx, &ly)?;
    Ok((line.slope, line.intercept.exp()))
}

/// Forward x-intercept of a decreasing line through `(xs, ys)`, with a
/// one-sigma half-width propagated from the fit residuals. Used to
/// extrapolate the time at which `F^{-(p-1)/2}` hits zero.
pub fn root_extrapolation(xs: &[f64], ys: &[f64]) -> Result<(f64, f64), FitError> {
    let line = linear_fit(xs, ys)?;
    if !(line.slope < 0.0) {
        return Err(FitError::NoRoot { slope: line.slope });
    }
    let root = -line.intercept / line.slope;
    // Standard error of the predicted abscissa at y = 0.
    let nf = line.n as f64;
    let dx = root - line.x_mean;
    let se = (line.rms_residual / line.slope.abs())
        * (1.0 / nf + dx * dx / line.sxx).sqrt().max(1.0 / nf.sqrt());
    Ok((root, se))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_recovery_is_exact() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.3).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.25).collect();
        let line = linear_fit(&xs, &ys).unwrap();
        assert!((line.slope - 2.5).abs() < 1e-12);
        assert!((line.intercept + 1.25).abs() < 1e-12);
        assert!(line.rms_residual < 1e-12);
    }

    #[test]
    fn power_law_recovery() {
        let xs: Vec<f64> = (1..30).map(|i| 1.0 + i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-1.5)).collect();
        let (e, c) = loglog_fit(&xs, &ys).unwrap();
        assert!((e + 1.5).abs() < 1e-12);
        assert!((c - 3.0).abs() < 1e-10);
    }

    #[test]
    fn root_extrapolation_exact_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 5.0 - x).collect();
        let (root, se) = root_extrapolation(&xs, &ys).unwrap();
        assert!((root - 5.0).abs() < 1e-12);
        assert!(se < 1e-12);
    }

    #[test]
    fn increasing_data_has_no_root() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [0.0, 1.0, 2.0];
        assert!(matches!(
            root_extrapolation(&xs, &ys),
            Err(FitError::NoRoot { .. })
        ));
    }
}
