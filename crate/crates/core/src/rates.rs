//! Rate formulas and empirical rate fits.

use crate::error::{out_of_range, Error, Result};
use crate::fourier::least_squares;

/// Distances must exceed this multiple of their noise floor to enter a fit.
pub const NOISE_FLOOR_FACTOR: f64 = 5.0;

fn require_k(k: u32) -> Result<()> {
    if k < 2 {
        return Err(out_of_range("k", k, "rates need k >= 2"));
    }
    Ok(())
}

/// Exponent `−(k − 1)/(k + 5/2)` of the Wasserstein rate for `C^k` test
/// functions.
pub fn theoretical_exponent(k: u32) -> Result<f64> {
    require_k(k)?;
    Ok(-(k as f64 - 1.0) / (k as f64 + 2.5))
}

/// `n^{−(k−1)/(k+5/2)}`, the rate up to its constant.
pub fn theoretical_rate(k: u32, n: usize) -> Result<f64> {
    let e = theoretical_exponent(k)?;
    if n == 0 {
        return Err(out_of_range("n", 0.0, "must be at least 1"));
    }
    Ok((n as f64).powf(e))
}

/// `max{r^{7/2}/(d−r+1)^{3/2}, (d−r)^{3/2} √r} / n`, the rate for the vector
/// of traces of powers `d−r+1, ..., d`.
pub fn trofpow_rate(d: usize, r: usize, n: usize) -> Result<f64> {
    if r == 0 || r > d {
        return Err(out_of_range("r", r as f64, "must satisfy 1 <= r <= d"));
    }
    if n < 2 * d {
        return Err(out_of_range("n", n as f64, "the trace CLT needs n >= 2d"));
    }
    let (d, r) = (d as f64, r as f64);
    let first = r.powf(3.5) / (d - r + 1.0).powf(1.5);
    let second = (d - r).powf(1.5) * r.sqrt();
    Ok(first.max(second) / n as f64)
}

/// `1/d^{k−1} + d^{7/2}/n`, balancing expansion tail against the trace CLT rate.
pub fn truncation_objective(k: u32, n: usize, d: usize) -> f64 {
    let d = d as f64;
    d.powi(1 - k as i32) + d.powf(3.5) / n as f64
}

/// Real minimizer `(2(k−1)/7)^{2/(5+2k)} n^{2/(5+2k)}` of the objective.
pub fn truncation_x0(k: u32, n: usize) -> Result<f64> {
    require_k(k)?;
    let p = 2.0 / (5.0 + 2.0 * k as f64);
    Ok((2.0 * (k as f64 - 1.0) / 7.0).powf(p) * (n as f64).powf(p))
}

/// Integer minimizer of [`truncation_objective`]: the better of `⌊x0⌋` and
/// `⌊x0⌋ + 1` (smaller on ties), clamped to `⌊n/2⌋`. Returns 1 when `n < 2`.
pub fn optimal_truncation(k: u32, n: usize) -> Result<usize> {
    let x0 = truncation_x0(k, n)?;
    if n == 0 {
        return Err(out_of_range("n", 0.0, "must be at least 1"));
    }
    let d1 = (x0.floor() as usize).max(1);
    let d2 = d1 + 1;
    let best = if truncation_objective(k, n, d2) < truncation_objective(k, n, d1) {
        d2
    } else {
        d1
    };
    Ok(best.min(n / 2).max(1))
}

/// Least-squares fit of `log distance` on `log n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub points: Vec<(usize, f64)>,
    pub slope: f64,
    pub intercept: f64,
    /// Residual standard error, `sqrt(SSR / (m − 2))`.
    pub stderr: f64,
}

pub fn rate_regression(points: &[(usize, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "rate fits need at least 3 points, got {}",
            points.len()
        )));
    }
    for &(n, dist) in points {
        if n == 0 {
            return Err(out_of_range("n", 0.0, "must be at least 1"));
        }
        if !(dist > 0.0) || !dist.is_finite() {
            return Err(out_of_range(
                "distance",
                dist,
                "must be positive and finite",
            ));
        }
    }
    if points.iter().all(|p| p.0 == points[0].0) {
        return Err(Error::InsufficientData(
            "rate fits need at least two distinct sizes".into(),
        ));
    }
    let logs: Vec<(f64, f64)> = points
        .iter()
        .map(|&(n, d)| ((n as f64).ln(), d.ln()))
        .collect();
    let (slope, intercept, rms) = least_squares(&logs);
    let m = logs.len() as f64;
    Ok(RateFit {
        points: points.to_vec(),
        slope,
        intercept,
        stderr: rms * (m / (m - 2.0)).sqrt(),
    })
}
