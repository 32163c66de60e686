//! Real test functions on the circle and the built-in families.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{out_of_range, Error, Result};
use crate::fourier::{self, coefficients_by_quadrature, FourierSeries};

/// Default series length for functions whose expansion does not terminate.
pub const DEFAULT_SERIES_LENGTH: usize = 4096;
/// Default number of terms of the power-decay family.
pub const DEFAULT_POWER_TERMS: usize = 256;
/// Grid used to check the evaluator against its exact series.
pub const CONSISTENCY_GRID: usize = 4096;
pub const CONSISTENCY_TOLERANCE: f64 = 1e-8;
pub const PERIODICITY_TOLERANCE: f64 = 1e-12;
/// Oversampling factor of the coefficient grid relative to the series length.
pub const OVERSAMPLING: usize = 8;
/// Safety factor applied to numerically computed derivative norms.
pub const DERIVATIVE_NORM_MARGIN: f64 = 1.1;

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Smoothness class `C^k` together with `‖f^{(k)}‖₁` (normalized measure).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Smoothness {
    pub k: u32,
    pub derivative_norm: f64,
}

/// Coefficient decay `|f̂_j| <= c_kappa / |j|^kappa`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decay {
    pub kappa: f64,
    pub c_kappa: f64,
}

#[derive(Clone)]
pub struct TestFunction {
    name: String,
    evaluator: Evaluator,
    exact_series: Option<FourierSeries>,
    smoothness: Option<Smoothness>,
    decay: Option<Decay>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field(
                "exact_series",
                &self.exact_series.as_ref().map(|s| s.max_index()),
            )
            .field("smoothness", &self.smoothness)
            .field("decay", &self.decay)
            .finish()
    }
}

impl TestFunction {
    /// Wraps an evaluator, checking it is `2π`-periodic.
    pub fn new(
        name: impl Into<String>,
        evaluator: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let evaluator: Evaluator = Arc::new(evaluator);
        let gap = (evaluator(0.0) - evaluator(TAU)).abs();
        if !(gap <= PERIODICITY_TOLERANCE) {
            return Err(out_of_range(
                "f(0) - f(2π)",
                gap,
                "evaluator must be 2π-periodic",
            ));
        }
        Ok(Self {
            name: name.into(),
            evaluator,
            exact_series: None,
            smoothness: None,
            decay: None,
        })
    }

    /// Attaches the exact Fourier series, verified against the evaluator on
    /// a 4096-point grid.
    pub fn with_series(mut self, series: FourierSeries) -> Result<Self> {
        let worst = (0..CONSISTENCY_GRID)
            .map(|m| {
                let x = TAU * m as f64 / CONSISTENCY_GRID as f64;
                (self.eval(x) - series.evaluate(x)).abs()
            })
            .fold(0.0, f64::max);
        if !(worst <= CONSISTENCY_TOLERANCE) {
            return Err(out_of_range(
                "series deviation",
                worst,
                "exact series must match the evaluator within 1e-8",
            ));
        }
        self.exact_series = Some(series);
        self.check_decay()?;
        Ok(self)
    }

    pub fn with_smoothness(mut self, smoothness: Smoothness) -> Result<Self> {
        if smoothness.k == 0 || !(smoothness.derivative_norm >= 0.0) {
            return Err(out_of_range(
                "k",
                smoothness.k,
                "k >= 1 with a nonnegative derivative norm",
            ));
        }
        self.smoothness = Some(smoothness);
        Ok(self)
    }

    pub fn with_decay(mut self, decay: Decay) -> Result<Self> {
        if !(decay.kappa > 1.0) {
            return Err(out_of_range("kappa", decay.kappa, "must exceed 1"));
        }
        if !(decay.c_kappa > 0.0) {
            return Err(out_of_range("c_kappa", decay.c_kappa, "must be positive"));
        }
        self.decay = Some(decay);
        self.check_decay()?;
        Ok(self)
    }

    fn check_decay(&self) -> Result<()> {
        if let (Some(d), Some(s)) = (self.decay, &self.exact_series) {
            for (i, c) in s.positive().iter().enumerate() {
                let bound = d.c_kappa / ((i + 1) as f64).powf(d.kappa);
                if c.norm() > bound * (1.0 + 1e-12) {
                    return Err(out_of_range(
                        "|f̂_j|",
                        c.norm(),
                        "violates the declared decay bound",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.evaluator)(x)
    }

    pub fn exact_series(&self) -> Option<&FourierSeries> {
        self.exact_series.as_ref()
    }

    pub fn smoothness(&self) -> Option<Smoothness> {
        self.smoothness
    }

    pub fn decay(&self) -> Option<Decay> {
        self.decay
    }

    /// Smoothness index used for rate predictions: the declared `k`, else
    /// `⌊κ⌋` from the decay metadata.
    pub fn rate_exponent_k(&self) -> Option<u32> {
        self.smoothness
            .map(|s| s.k)
            .or_else(|| self.decay.map(|d| d.kappa.floor() as u32))
    }

    /// The exact series if known, else a quadrature series of the default
    /// length.
    pub fn series(&self) -> Result<FourierSeries> {
        match &self.exact_series {
            Some(s) => Ok(s.clone()),
            None => coefficients_by_quadrature(
                self,
                DEFAULT_SERIES_LENGTH,
                DEFAULT_SERIES_LENGTH * OVERSAMPLING,
            ),
        }
    }

    /// `f̂_0`.
    pub fn mean(&self) -> Result<f64> {
        Ok(match &self.exact_series {
            Some(s) => s.constant(),
            None => coefficients_by_quadrature(self, 1, DEFAULT_SERIES_LENGTH)?.constant(),
        })
    }

    /// `‖f^{(k)}‖₁`: from metadata when it declares this `k`, otherwise by
    /// spectral differentiation on a grid of at least 4096 points, inflated
    /// by 10%.
    pub fn derivative_norm(&self, k: u32) -> f64 {
        if let Some(s) = self.smoothness.filter(|s| s.k == k) {
            return s.derivative_norm;
        }
        let degree = self.exact_series.as_ref().map_or(0, |s| s.max_index());
        let grid = (OVERSAMPLING * degree)
            .next_power_of_two()
            .max(CONSISTENCY_GRID);
        DERIVATIVE_NORM_MARGIN * fourier::derivative_l1_norm(|x| self.eval(x), k, grid)
    }

    /// Largest `|f|` on a 4096-point grid.
    pub fn grid_sup(&self) -> f64 {
        (0..CONSISTENCY_GRID)
            .map(|m| self.eval(TAU * m as f64 / CONSISTENCY_GRID as f64).abs())
            .fold(0.0, f64::max)
    }

    /// Trigonometric polynomial `f̂_0 + 2 Σ Re(f̂_j e^{ijx})` from sparse
    /// `(j, f̂_j)` terms with `j >= 1`.
    pub fn trigonometric(
        name: impl Into<String>,
        constant: f64,
        terms: &[(usize, Complex64)],
    ) -> Result<Self> {
        let series = FourierSeries::from_sparse(constant, terms)?;
        Self::from_series(name, series)
    }

    /// A function defined by a finite series, evaluated by its partial sum.
    pub fn from_series(name: impl Into<String>, series: FourierSeries) -> Result<Self> {
        let eval_series = series.clone();
        Self::new(name, move |x| eval_series.evaluate(x))?.with_series(series)
    }

    /// `Σ_{j=1}^{terms} j^{-κ} cos(jx + φ_j)`: coefficients `j^{-κ} e^{iφ_j} / 2`.
    ///
    /// Carries decay metadata `(κ, 1/2)` and smoothness `k = ⌊κ⌋` with a
    /// numerically computed derivative norm.
    pub fn power_decay(kappa: f64, terms: usize, phases: Option<&[f64]>) -> Result<Self> {
        if !(kappa > 1.0) {
            return Err(out_of_range("kappa", kappa, "must exceed 1"));
        }
        if terms == 0 {
            return Err(out_of_range("terms", 0.0, "must be at least 1"));
        }
        if let Some(p) = phases {
            if p.len() != terms {
                return Err(Error::SizeMismatch {
                    left: p.len(),
                    right: terms,
                });
            }
        }
        let positive = (1..=terms)
            .map(|j| {
                let phase = phases.map_or(0.0, |p| p[j - 1]);
                Complex64::from_polar(0.5 * (j as f64).powf(-kappa), phase)
            })
            .collect();
        let series = FourierSeries::new(0.0, positive)?;
        let f = Self::from_series(format!("power(kappa={kappa},terms={terms})"), series)?
            .with_decay(Decay {
                kappa,
                c_kappa: 0.5,
            })?;
        let k = kappa.floor() as u32;
        let derivative_norm = f.derivative_norm(k);
        f.with_smoothness(Smoothness { k, derivative_norm })
    }

    /// `Re(1 / (1 − ρ e^{ix})) = (1 − ρ cos x) / (1 − 2ρ cos x + ρ²)`, with
    /// `f̂_0 = 1` and `f̂_j = ρ^j / 2`.
    pub fn analytic(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(out_of_range("rho", rho, "must lie in (0, 1)"));
        }
        // Keep the truncation error ρ^{J+1}/(1−ρ) far below the consistency check.
        let needed = ((1e-13 * (1.0 - rho)).ln() / rho.ln()).ceil() as usize;
        let len = DEFAULT_SERIES_LENGTH.max(needed);
        let mut positive = Vec::with_capacity(len);
        let mut p = 1.0;
        for _ in 0..len {
            p *= rho;
            positive.push(Complex64::new(0.5 * p, 0.0));
        }
        let series = FourierSeries::new(1.0, positive)?;
        // Half-angle form avoids cancellation near x = 0 as ρ → 1.
        Self::new(format!("analytic(rho={rho})"), move |x| {
            let s2 = (0.5 * x).sin().powi(2);
            let gap = 1.0 - rho;
            (gap + 2.0 * rho * s2) / (gap * gap + 4.0 * rho * s2)
        })?
        .with_series(series)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_periodic() {
        assert!(TestFunction::new("x", |x| x).is_err());
    }

    #[test]
    fn rejects_inconsistent_series() {
        let f = TestFunction::new("cos", f64::cos).unwrap();
        let wrong = FourierSeries::new(0.0, vec![Complex64::new(0.4, 0.0)]).unwrap();
        assert!(f.clone().with_series(wrong).is_err());
        let right = FourierSeries::new(0.0, vec![Complex64::new(0.5, 0.0)]).unwrap();
        assert!(f.with_series(right).is_ok());
    }

    #[test]
    fn rejects_violated_decay() {
        let f = TestFunction::trigonometric("t", 0.0, &[(3, Complex64::new(1.0, 0.0))]).unwrap();
        assert!(f
            .clone()
            .with_decay(Decay {
                kappa: 2.0,
                c_kappa: 1.0
            })
            .is_err());
        assert!(f
            .with_decay(Decay {
                kappa: 2.0,
                c_kappa: 9.0
            })
            .is_ok());
    }

    #[test]
    fn power_family_metadata() {
        let f = TestFunction::power_decay(4.0, 64, None).unwrap();
        let s = f.exact_series().unwrap();
        assert!((s.positive()[1].re - 0.5 / 16.0).abs() < 1e-16);
        assert_eq!(f.rate_exponent_k(), Some(4));
        let norm = f.smoothness().unwrap().derivative_norm;
        // f'''' = Σ cos(jx): its L¹ norm must dominate every |j^4 f̂_j| = 1/2.
        assert!(norm >= 0.5, "{norm}");
    }

    #[test]
    fn power_family_with_phases() {
        let phases: Vec<f64> = (0..8).map(|j| 0.3 * j as f64).collect();
        let f = TestFunction::power_decay(3.0, 8, Some(&phases)).unwrap();
        let x = 1.1f64;
        let want: f64 = (1..=8)
            .map(|j| (j as f64).powi(-3) * (j as f64 * x + phases[j - 1]).cos())
            .sum();
        assert!((f.eval(x) - want).abs() < 1e-14);
        assert!(TestFunction::power_decay(3.0, 8, Some(&phases[..3])).is_err());
        assert!(TestFunction::power_decay(1.0, 8, None).is_err());
    }

    #[test]
    fn analytic_family() {
        let f = TestFunction::analytic(0.5).unwrap();
        assert_eq!(f.mean().unwrap(), 1.0);
        assert!((f.eval(0.0) - 2.0).abs() < 1e-15);
        assert!(TestFunction::analytic(1.0).is_err());
        assert!(
            TestFunction::analytic(0.999)
                .unwrap()
                .exact_series()
                .unwrap()
                .max_index()
                > 4096
        );
    }

    #[test]
    fn rate_k_falls_back_to_decay() {
        let f = TestFunction::trigonometric("t", 0.0, &[(1, Complex64::new(0.1, 0.0))])
            .unwrap()
            .with_decay(Decay {
                kappa: 3.7,
                c_kappa: 1.0,
            })
            .unwrap();
        assert_eq!(f.rate_exponent_k(), Some(3));
    }
}
