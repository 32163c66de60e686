//! Empirical distributions, Gaussian references and one-dimensional
//! Wasserstein distances.

use std::f64::consts::FRAC_PI_2;

use crate::error::{out_of_range, Error, Result};
use crate::quantile::normal_quantile;

/// Sorted sample values.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    sorted: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { sorted: values })
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn count(&self) -> usize {
        self.sorted.len()
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self {
            sorted: self.sorted.iter().map(|v| v + c).collect(),
        }
    }

    pub fn summary(&self) -> Result<Summary> {
        Summary::of(&self.sorted)
    }
}

/// `N(mean, variance)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSpec {
    mean: f64,
    variance: f64,
}

impl GaussianSpec {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !(variance >= 0.0) || !variance.is_finite() {
            return Err(out_of_range(
                "variance",
                variance,
                "must be finite and nonnegative",
            ));
        }
        if !mean.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self { mean, variance })
    }

    pub fn centered(variance: f64) -> Result<Self> {
        Self::new(0.0, variance)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Midpoint quantiles `mean + σ Φ^{-1}((i − 1/2)/count)`, `i = 1..=count`.
    pub fn midpoint_quantiles(&self, count: usize) -> Vec<f64> {
        let sd = self.sd();
        (1..=count)
            .map(|i| self.mean + sd * normal_quantile((i as f64 - 0.5) / count as f64))
            .collect()
    }
}

fn require_nondegenerate(count: usize) -> Result<()> {
    if count < 2 {
        return Err(Error::InsufficientData(format!(
            "distance estimates need at least 2 values, got {count}"
        )));
    }
    Ok(())
}

/// `W1` between the empirical measure and `g`, through the quantile coupling
/// `(1/N) Σ |x_(i) − Q_g((i − 1/2)/N)|`.
pub fn wasserstein1_to_gaussian(emp: &EmpiricalDistribution, g: &GaussianSpec) -> Result<f64> {
    require_nondegenerate(emp.count())?;
    let q = g.midpoint_quantiles(emp.count());
    Ok(l1_mean(emp.sorted_values(), &q))
}

/// `W1` between two equal-size empirical measures.
pub fn wasserstein1_empirical(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> Result<f64> {
    if a.count() != b.count() {
        return Err(Error::SizeMismatch {
            left: a.count(),
            right: b.count(),
        });
    }
    require_nondegenerate(a.count())?;
    Ok(l1_mean(a.sorted_values(), b.sorted_values()))
}

fn l1_mean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

/// Scale of the Monte Carlo bias of an `N`-sample `W1` estimate against a
/// Gaussian of standard deviation `sd`: `sd √(π/2) / √N`.
pub fn noise_floor(sd: f64, count: usize) -> f64 {
    sd * FRAC_PI_2.sqrt() / (count as f64).sqrt()
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|`.
pub fn ks_two_sample(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> Result<f64> {
    require_nondegenerate(a.count())?;
    require_nondegenerate(b.count())?;
    let (xa, xb) = (a.sorted_values(), b.sorted_values());
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j, mut worst) = (0usize, 0usize, 0.0f64);
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        worst = worst.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(worst)
}

/// Sample mean and variance with their standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub mean_se: f64,
    /// `sqrt((m4 − s⁴) / N)` from the sample fourth central moment.
    pub variance_se: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Result<Self> {
        require_nondegenerate(values.len())?;
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
        let variance = m2 * n / (n - 1.0);
        Ok(Self {
            count: values.len(),
            mean,
            variance,
            mean_se: (variance / n).sqrt(),
            variance_se: ((m4 - m2 * m2).max(0.0) / n).sqrt(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn emp(v: &[f64]) -> EmpiricalDistribution {
        EmpiricalDistribution::from_values(v.to_vec()).unwrap()
    }

    #[test]
    fn sorts_and_rejects_nan() {
        assert_eq!(emp(&[3.0, -1.0, 2.0]).sorted_values(), &[-1.0, 2.0, 3.0]);
        assert!(EmpiricalDistribution::from_values(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn gaussian_spec_validation() {
        assert!(GaussianSpec::centered(-1e-3).is_err());
        assert!(GaussianSpec::centered(f64::NAN).is_err());
        assert!(GaussianSpec::centered(0.0).is_ok());
    }

    #[test]
    fn two_sample_hand_cases() {
        assert_eq!(
            wasserstein1_empirical(&emp(&[0.0, 0.0]), &emp(&[1.0, 1.0])).unwrap(),
            1.0
        );
        assert_eq!(
            wasserstein1_empirical(&emp(&[0.0, 2.0]), &emp(&[1.0, 1.0])).unwrap(),
            1.0
        );
        let a = emp(&[0.3, -2.0, 5.0]);
        assert_eq!(wasserstein1_empirical(&a, &a).unwrap(), 0.0);
        assert!(matches!(
            wasserstein1_empirical(&a, &emp(&[1.0, 2.0])),
            Err(Error::SizeMismatch { .. })
        ));
        assert!(wasserstein1_empirical(&emp(&[1.0]), &emp(&[1.0])).is_err());
    }

    #[test]
    fn exact_quantiles_are_at_distance_zero_and_shift() {
        let g = GaussianSpec::centered(2.5).unwrap();
        let q = emp(&g.midpoint_quantiles(1000));
        assert!(wasserstein1_to_gaussian(&q, &g).unwrap() < 1e-15);
        let shifted = q.shifted(0.37);
        assert!((wasserstein1_to_gaussian(&shifted, &g).unwrap() - 0.37).abs() < 1e-12);
    }

    #[test]
    fn point_mass_against_gaussian() {
        // Distance of δ_0 from N(0, s²) is E|N(0, s²)| = s √(2/π).
        let s = 1.7;
        let g = GaussianSpec::centered(s * s).unwrap();
        let d = wasserstein1_to_gaussian(&emp(&vec![0.0; 100_000]), &g).unwrap();
        assert!(
            (d - s * (2.0 / std::f64::consts::PI).sqrt()).abs() < 2e-3,
            "{d}"
        );
    }

    #[test]
    fn ks_statistic() {
        assert_eq!(
            ks_two_sample(&emp(&[1.0, 2.0]), &emp(&[1.0, 2.0])).unwrap(),
            0.0
        );
        assert_eq!(
            ks_two_sample(&emp(&[1.0, 2.0]), &emp(&[3.0, 4.0])).unwrap(),
            1.0
        );
        assert_eq!(
            ks_two_sample(&emp(&[1.0, 3.0]), &emp(&[2.0, 4.0])).unwrap(),
            0.5
        );
    }

    #[test]
    fn summary_moments() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.mean, 2.5);
        assert!((s.variance - 5.0 / 3.0).abs() < 1e-15);
        assert!(Summary::of(&[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn w1_is_a_metric(
            (a, b, c) in (2usize..40).prop_flat_map(|n| (
                prop::collection::vec(-10.0f64..10.0, n),
                prop::collection::vec(-10.0f64..10.0, n),
                prop::collection::vec(-10.0f64..10.0, n),
            ))
        ) {
            let (a, b, c) = (emp(&a), emp(&b), emp(&c));
            let ab = wasserstein1_empirical(&a, &b).unwrap();
            let ba = wasserstein1_empirical(&b, &a).unwrap();
            let bc = wasserstein1_empirical(&b, &c).unwrap();
            let ac = wasserstein1_empirical(&a, &c).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab, ba);
            prop_assert!(ac <= ab + bc + 1e-12);
            prop_assert_eq!(wasserstein1_empirical(&a, &a).unwrap(), 0.0);
            if a != b {
                prop_assert!(ab > 0.0);
            }
        }

        #[test]
        fn shift_moves_gaussian_distance_by_at_most_shift(
            v in prop::collection::vec(-5.0f64..5.0, 2..60),
            c in -3.0f64..3.0,
        ) {
            let g = GaussianSpec::centered(1.3).unwrap();
            let e = emp(&v);
            let d0 = wasserstein1_to_gaussian(&e, &g).unwrap();
            let d1 = wasserstein1_to_gaussian(&e.shifted(c), &g).unwrap();
            prop_assert!((d1 - d0).abs() <= c.abs() + 1e-12);
        }
    }
}
