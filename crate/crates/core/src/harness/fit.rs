//! Least-squares fits.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Ordinary least squares y ≈ slope·x + intercept. Returns (slope, intercept, R²).
pub fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let (slope, intercept, r2, _) = ols_full(xs, ys);
    (slope, intercept, r2)
}

/// OLS with the standard error of the slope as a fourth entry.
fn ols_full(xs: &[f64], ys: &[f64]) -> (f64, f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    let sse = (syy - slope * sxy).max(0.0);
    let stderr = if n > 2.0 { (sse / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    (slope, intercept, r2, stderr)
}

/// A power law value ≈ amplitude·t^exponent fitted on log-log axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub amplitude: f64,
    pub r_squared: f64,
    pub stderr: f64,
    /// 95% confidence interval of the exponent (Student t).
    pub ci95: [f64; 2],
    pub points: usize,
    pub window: [f64; 2],
}

/// OLS of log(value) against log(t) over the samples with t in the closed window.
pub fn fit_decay(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let inside: Vec<(f64, f64)> = series.iter().copied().filter(|(t, _)| *t >= window.0 && *t <= window.1).collect();
    if inside.len() < 8 {
        return Err(Error::WindowTooSmall(inside.len()));
    }
    if let Some(&(t, value)) = inside.iter().find(|(t, v)| !(*v > 0.0) || !(*t > 0.0)) {
        return Err(Error::NonPositiveValues { t, value });
    }
    let xs: Vec<f64> = inside.iter().map(|(t, _)| t.ln()).collect();
    let ys: Vec<f64> = inside.iter().map(|(_, v)| v.ln()).collect();
    let (slope, intercept, r2, stderr) = ols_full(&xs, &ys);
    let dof = (inside.len() - 2) as f64;
    let q = StudentsT::new(0.0, 1.0, dof).map(|d| d.inverse_cdf(0.975)).unwrap_or(f64::NAN);
    Ok(DecayFit {
        exponent: slope,
        amplitude: intercept.exp(),
        r_squared: r2,
        stderr,
        ci95: [slope - q * stderr, slope + q * stderr],
        points: inside.len(),
        window: [window.0, window.1],
    })
}
