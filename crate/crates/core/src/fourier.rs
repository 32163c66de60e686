//! Fourier coefficients of real functions on the circle and the closed-form
//! quantities built from them.
//!
//! Coefficients follow `f̂_j = (1/2π) ∫ f(x) e^{-ijx} dx`. For real `f`,
//! `f̂_{-j} = conj(f̂_j)`, so a [`FourierSeries`] stores only `j >= 0` and a
//! real constant term.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{out_of_range, Error, Result};
use crate::functions::TestFunction;

/// Coefficients `f̂_0, ..., f̂_J` of a real function.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    constant: f64,
    /// `positive[j - 1] = f̂_j`.
    positive: Vec<Complex64>,
}

impl FourierSeries {
    pub fn new(constant: f64, positive: Vec<Complex64>) -> Result<Self> {
        if !constant.is_finite()
            || positive
                .iter()
                .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        Ok(Self { constant, positive })
    }

    /// Builds a series from sparse `(index, coefficient)` pairs with `index >= 1`.
    pub fn from_sparse(constant: f64, terms: &[(usize, Complex64)]) -> Result<Self> {
        let max_index = terms.iter().map(|&(j, _)| j).max().unwrap_or(0);
        let mut positive = vec![Complex64::new(0.0, 0.0); max_index];
        for &(j, c) in terms {
            if j == 0 {
                return Err(out_of_range(
                    "index",
                    0.0,
                    "sparse terms must have index >= 1",
                ));
            }
            positive[j - 1] += c;
        }
        Self::new(constant, positive)
    }

    pub fn zero(max_index: usize) -> Self {
        Self {
            constant: 0.0,
            positive: vec![Complex64::new(0.0, 0.0); max_index],
        }
    }

    pub fn max_index(&self) -> usize {
        self.positive.len()
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// `f̂_j` for any integer `j`; zero beyond the stored range.
    pub fn coefficient(&self, j: i64) -> Complex64 {
        match j {
            0 => Complex64::new(self.constant, 0.0),
            j if j > 0 => self
                .positive
                .get(j as usize - 1)
                .copied()
                .unwrap_or_default(),
            j => self.coefficient(-j).conj(),
        }
    }

    /// `(f̂_1, ..., f̂_J)`.
    pub fn positive(&self) -> &[Complex64] {
        &self.positive
    }

    /// The same function with coefficients past `max_index` dropped, or
    /// zero-padded up to it.
    pub fn with_max_index(&self, max_index: usize) -> Self {
        let mut positive = self.positive.clone();
        positive.resize(max_index, Complex64::new(0.0, 0.0));
        Self {
            constant: self.constant,
            positive,
        }
    }

    /// Partial sum `f̂_0 + 2 Σ_{j=1}^J Re(f̂_j e^{ijx})`, by Horner's rule.
    pub fn evaluate(&self, x: f64) -> f64 {
        let z = Complex64::from_polar(1.0, x);
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.positive.iter().rev() {
            acc = (acc + c) * z;
        }
        self.constant + 2.0 * acc.re
    }
}

fn require_range(d: usize, series: &FourierSeries) -> Result<()> {
    if d == 0 {
        return Err(out_of_range("d", 0.0, "must be at least 1"));
    }
    if d > series.max_index() {
        return Err(out_of_range(
            "d",
            d as f64,
            "must not exceed the series' max index",
        ));
    }
    Ok(())
}

/// Discrete-transform approximation of `f̂_0..f̂_J` from `grid_size` equally
/// spaced samples.
///
/// Exact for trigonometric polynomials of degree below `grid_size - J`.
pub fn coefficients_by_quadrature(
    f: &TestFunction,
    max_index: usize,
    grid_size: usize,
) -> Result<FourierSeries> {
    if max_index == 0 {
        return Err(out_of_range("J", 0.0, "must be at least 1"));
    }
    if !grid_size.is_power_of_two() {
        return Err(out_of_range(
            "grid_size",
            grid_size as f64,
            "must be a power of two",
        ));
    }
    if grid_size < 2 * max_index + 1 {
        return Err(out_of_range(
            "grid_size",
            grid_size as f64,
            "must be at least 2J+1",
        ));
    }
    let spectrum = grid_spectrum(|x| f.eval(x), grid_size);
    let scale = 1.0 / grid_size as f64;
    FourierSeries::new(
        spectrum[0].re * scale,
        spectrum[1..=max_index].iter().map(|c| c * scale).collect(),
    )
}

/// Unnormalized forward DFT of `f` sampled at `2πm/grid`.
pub(crate) fn grid_spectrum(f: impl Fn(f64) -> f64, grid: usize) -> Vec<Complex64> {
    let step = std::f64::consts::TAU / grid as f64;
    let mut buf: Vec<Complex64> = (0..grid)
        .map(|m| Complex64::new(f(m as f64 * step), 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(grid).process(&mut buf);
    buf
}

/// Normalized `L¹` norm `(1/2π) ∫ |f^{(k)}|` by spectral differentiation on
/// `grid` points.
pub(crate) fn derivative_l1_norm(f: impl Fn(f64) -> f64, k: u32, grid: usize) -> f64 {
    let mut spec = grid_spectrum(f, grid);
    let half = grid / 2;
    for (m, c) in spec.iter_mut().enumerate() {
        let freq = if m < half {
            m as f64
        } else if m == half {
            0.0 // Nyquist bin carries no derivative information
        } else {
            m as f64 - grid as f64
        };
        *c *= Complex64::new(0.0, freq).powu(k);
    }
    FftPlanner::new().plan_fft_inverse(grid).process(&mut spec);
    spec.iter().map(|c| c.re.abs()).sum::<f64>() / (grid as f64 * grid as f64)
}

/// `‖f^{(k)}‖₁ / j^k`, the decay bound for coefficients of a `C^k` function.
pub fn coefficient_decay_bound(k: u32, derivative_norm: f64, j: usize) -> Result<f64> {
    if j == 0 {
        return Err(out_of_range("j", 0.0, "the decay bound holds for j != 0"));
    }
    if !(derivative_norm >= 0.0) {
        return Err(out_of_range(
            "derivative_norm",
            derivative_norm,
            "must be nonnegative",
        ));
    }
    Ok(derivative_norm / (j as f64).powi(k as i32))
}

/// Limiting variance `σ² = 2 Σ_{j>=1} j |f̂_j|²` over the stored range.
pub fn sigma_squared(series: &FourierSeries) -> f64 {
    weighted_energy(series.positive())
}

fn weighted_energy(coeffs: &[Complex64]) -> f64 {
    2.0 * coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| (i + 1) as f64 * c.norm_sqr())
        .sum::<f64>()
}

/// `σ_d² = 2 Σ_{j=1}^d j |f̂_j|²`.
pub fn sigma_truncated(series: &FourierSeries, d: usize) -> Result<f64> {
    require_range(d, series)?;
    Ok(weighted_energy(&series.positive()[..d]))
}

/// Upper bound `2 ‖f^{(k)}‖₁² / ((2k − 2) d^{2k−2})` on the mean square of
/// the expansion tail beyond index `d`.
pub fn truncation_tail_bound(k: u32, derivative_norm: f64, d: usize) -> Result<f64> {
    if k < 2 {
        return Err(out_of_range("k", k, "the tail bound needs k >= 2"));
    }
    if d == 0 {
        return Err(out_of_range("d", 0.0, "must be at least 1"));
    }
    if !(derivative_norm >= 0.0) {
        return Err(out_of_range(
            "derivative_norm",
            derivative_norm,
            "must be nonnegative",
        ));
    }
    let m = 2 * k as i32 - 2;
    Ok(2.0 * derivative_norm * derivative_norm / (m as f64 * (d as f64).powi(m)))
}

/// Lipschitz bound `2 ‖(f̂_1, ..., f̂_d)‖₂` of the map from a trace vector to
/// the truncated statistic.
pub fn phi_lipschitz_bound(series: &FourierSeries, d: usize) -> Result<f64> {
    require_range(d, series)?;
    Ok(2.0
        * series.positive()[..d]
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt())
}

/// Fitted power-law envelope `|f̂_j| <= c_kappa_hat / j^kappa_hat`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayEstimate {
    pub kappa_hat: f64,
    pub c_kappa_hat: f64,
    /// Root-mean-square residual of the log-log fit.
    pub fit_residual: f64,
    pub points: usize,
}

/// Coefficients below this fraction of the largest one are treated as zero.
pub const DECAY_ZERO_FLOOR: f64 = 1e-13;
const MIN_DECAY_POINTS: usize = 5;

/// Least-squares fit of `log|f̂_j| ≈ log C − κ log j` over nonzero
/// coefficients with `j >= j_min`, then `C` raised just enough that the
/// envelope covers every fitted coefficient.
pub fn estimate_decay(series: &FourierSeries, j_min: usize) -> Result<DecayEstimate> {
    if j_min == 0 {
        return Err(out_of_range("j_min", 0.0, "must be at least 1"));
    }
    let largest = series
        .positive()
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    let floor = largest * DECAY_ZERO_FLOOR;
    let pts: Vec<(f64, f64)> = series
        .positive()
        .iter()
        .enumerate()
        .map(|(i, c)| (i + 1, c.norm()))
        .filter(|&(j, m)| j >= j_min && m > floor && m > 0.0)
        .map(|(j, m)| ((j as f64).ln(), m.ln()))
        .collect();
    if pts.len() < MIN_DECAY_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} usable coefficients at index >= {j_min}, need {MIN_DECAY_POINTS}",
            pts.len()
        )));
    }
    let (slope, intercept, rms) = least_squares(&pts);
    let kappa = -slope;
    if !(kappa > 0.0) {
        return Err(out_of_range("kappa_hat", kappa, "coefficients must decay"));
    }
    let needed = pts
        .iter()
        .map(|&(lj, lm)| (lm + kappa * lj).exp())
        .fold(0.0, f64::max);
    let c = intercept.exp().max(needed * (1.0 + 1e-12));
    Ok(DecayEstimate {
        kappa_hat: kappa,
        c_kappa_hat: c,
        fit_residual: rms,
        points: pts.len(),
    })
}

/// Ordinary least squares; returns slope, intercept and RMS residual.
pub(crate) fn least_squares(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    (slope, intercept, (ssr / m).sqrt())
}
