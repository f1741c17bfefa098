//! Fits of `I(μ)` against the leading term `(2πμ)^κ (L0 + c1 μ)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FitError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("mu values must be positive and distinct")]
    BadGrid,
    #[error("not in the asymptotic regime: max residual {residual:.3e} exceeds {allowed:.3e}")]
    NotAsymptotic { residual: f64, allowed: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitResult {
    pub l0: f64,
    pub c1: f64,
    pub max_residual: f64,
    /// Unconstrained slope of `log|I|` against `log μ`.
    pub exponent: f64,
}

/// Ordinary least squares line `y = a + b x`.
pub fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}

/// Slope of `log|I|` against `log μ`.
pub fn fit_exponent(mu: &[f64], values: &[Complex64]) -> Result<f64, FitError> {
    if mu.len() < 2 || mu.len() != values.len() {
        return Err(FitError::TooFewPoints {
            needed: 2,
            got: mu.len().min(values.len()),
        });
    }
    check_grid(mu)?;
    let lx: Vec<f64> = mu.iter().map(|m| m.ln()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.norm().ln()).collect();
    Ok(line_fit(&lx, &ly).1)
}

fn check_grid(mu: &[f64]) -> Result<(), FitError> {
    if mu.iter().any(|&m| !(m > 0.0)) {
        return Err(FitError::BadGrid);
    }
    let mut s = mu.to_vec();
    s.sort_by(f64::total_cmp);
    if s.windows(2).any(|w| w[0] == w[1]) {
        return Err(FitError::BadGrid);
    }
    Ok(())
}

/// Thresholds for declaring the data pre-asymptotic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeCheck {
    /// Residuals below this multiple of the quadrature error never fail.
    pub error_multiple: f64,
    /// Residuals below this fraction of `|L0|` never fail.
    pub rel_to_l0: f64,
}

impl Default for RegimeCheck {
    fn default() -> Self {
        RegimeCheck {
            error_multiple: 10.0,
            rel_to_l0: 0.05,
        }
    }
}

/// Least squares of `Re I / (2πμ)^κ` against `L0 + c1 μ`, plus the log-log exponent.
///
/// `errors` holds the quadrature error estimate of each value.
pub fn fit_leading_term(mu: &[f64], values: &[Complex64], errors: &[f64], kappa: usize, check: RegimeCheck) -> Result<FitResult, FitError> {
    if mu.len() < 4 || values.len() != mu.len() || errors.len() != mu.len() {
        return Err(FitError::TooFewPoints {
            needed: 4,
            got: mu.len().min(values.len()).min(errors.len()),
        });
    }
    check_grid(mu)?;
    let two_pi = 2.0 * std::f64::consts::PI;
    let norm: Vec<f64> = mu.iter().map(|m| (two_pi * m).powi(kappa as i32)).collect();
    let ys: Vec<f64> = values.iter().zip(&norm).map(|(v, s)| v.re / s).collect();
    let (l0, c1) = line_fit(mu, &ys);
    let max_residual = mu
        .iter()
        .zip(&ys)
        .map(|(m, y)| (y - l0 - c1 * m).abs())
        .fold(0.0, f64::max);
    let scaled_err = errors.iter().zip(&norm).map(|(e, s)| e / s).fold(0.0, f64::max);
    let allowed = (check.error_multiple * scaled_err).max(check.rel_to_l0 * l0.abs());
    if max_residual > allowed {
        return Err(FitError::NotAsymptotic {
            residual: max_residual,
            allowed,
        });
    }
    Ok(FitResult {
        l0,
        c1,
        max_residual,
        exponent: fit_exponent(mu, values)?,
    })
}
