//! Fluctuations of linear eigenvalue statistics and the Monte Carlo
//! ensembles built on them.
//!
//! The fluctuation `Σ_l f(θ_l) − n f̂_0` is computed either from eigenphases
//! (exact for the given matrix) or from traces of powers through the
//! truncated expansion `2 Σ_{j<=d} Re(f̂_j Tr(M^j))`. The two paths share no
//! code past the sampler, so each serves as an oracle for the other.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::distribution::{EmpiricalDistribution, Summary};
use crate::error::{out_of_range, Error, Result};
use crate::fourier::FourierSeries;
use crate::functions::TestFunction;
use crate::haar::{haar_unitary, UnitaryMatrix};
use crate::rng::RngStream;
use crate::spectrum::eigenphases;
use crate::traces::{traces_of_powers, TraceVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Eigen,
    Trace,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Eigen => "eigen",
            Method::Trace => "trace",
        })
    }
}

/// `N` realizations of `n (L_n(f) − E L_n(f))`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluctuationSample {
    pub n: usize,
    pub function_id: String,
    pub method: Method,
    /// Expansion length, trace method only.
    pub truncation_d: Option<usize>,
    pub seed: u64,
    pub values: Vec<f64>,
}

impl FluctuationSample {
    pub fn replicas(&self) -> usize {
        self.values.len()
    }

    pub fn empirical(&self) -> Result<EmpiricalDistribution> {
        EmpiricalDistribution::from_values(self.values.clone())
    }

    pub fn summary(&self) -> Result<Summary> {
        Summary::of(&self.values)
    }
}

/// `Σ_l f(θ_l) − n f̂_0` over precomputed eigenphases.
pub fn fluctuation_from_phases(phases: &[f64], f: &TestFunction, fhat0: f64) -> f64 {
    phases.iter().map(|&t| f.eval(t)).sum::<f64>() - phases.len() as f64 * fhat0
}

/// `Σ_l f(θ_l) − n f̂_0` over the eigenphases of `m`.
pub fn fluctuation_eigen(m: &UnitaryMatrix, f: &TestFunction, fhat0: f64) -> Result<f64> {
    Ok(fluctuation_from_phases(&eigenphases(m)?, f, fhat0))
}

/// Truncated expansion `2 Σ_{j=1}^d Re(f̂_j Tr(M^j))`.
pub fn fluctuation_trace(traces: &TraceVector, series: &FourierSeries, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(out_of_range("d", 0.0, "must be at least 1"));
    }
    if d > traces.max_power() {
        return Err(out_of_range(
            "d",
            d as f64,
            "exceeds the number of available traces",
        ));
    }
    if d > series.max_index() {
        return Err(out_of_range("d", d as f64, "exceeds the series' max index"));
    }
    Ok(2.0
        * series.positive()[..d]
            .iter()
            .zip(traces.values())
            .map(|(c, t)| (c * t).re)
            .sum::<f64>())
}

/// Runs `replicas` independent draws; replica `i` uses stream `(seed, i)`.
///
/// Values come back in replica order whatever the worker count.
pub fn run_monte_carlo(
    n: usize,
    replicas: usize,
    f: &TestFunction,
    method: Method,
    d: Option<usize>,
    seed: u64,
) -> Result<FluctuationSample> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let values = match method {
        Method::Eigen => {
            let fhat0 = f.mean()?;
            par_replicas(replicas, |i| {
                let m = haar_unitary(n, RngStream::new(seed, i as u64))?;
                fluctuation_eigen(&m, f, fhat0)
            })?
        }
        Method::Trace => {
            let d =
                d.ok_or_else(|| out_of_range("d", 0.0, "trace method needs a truncation index"))?;
            if d == 0 || 2 * d > n {
                return Err(out_of_range(
                    "d",
                    d as f64,
                    "trace method needs 1 <= d <= n/2",
                ));
            }
            let series = f.series()?.with_max_index(d);
            par_replicas(replicas, |i| {
                let m = haar_unitary(n, RngStream::new(seed, i as u64))?;
                fluctuation_trace(&traces_of_powers(&m, d)?, &series, d)
            })?
        }
    };
    Ok(FluctuationSample {
        n,
        function_id: f.name().to_owned(),
        method,
        truncation_d: if method == Method::Trace { d } else { None },
        seed,
        values,
    })
}

fn par_replicas<T: Send>(
    replicas: usize,
    draw: impl Fn(usize) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let results: Vec<Result<T>> = (0..replicas).into_par_iter().map(&draw).collect();
    results
        .into_iter()
        .enumerate()
        .map(|(index, r)| {
            r.map_err(|e| Error::Replica {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Draws of `φ(Z_Σ) = 2 Σ_{j<=d} √j (Re f̂_j X_j − Im f̂_j Y_j)` with
/// `X_j, Y_j` i.i.d. `N(0, 1/2)`; a centered Gaussian of variance `σ_d²`.
pub fn sample_phi_gaussian(
    series: &FourierSeries,
    d: usize,
    replicas: usize,
    seed: u64,
) -> Result<EmpiricalDistribution> {
    if d == 0 || d > series.max_index() {
        return Err(out_of_range(
            "d",
            d as f64,
            "must satisfy 1 <= d <= max index",
        ));
    }
    let weights: Vec<(f64, f64)> = series.positive()[..d]
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let s = 2.0 * ((i + 1) as f64).sqrt() * FRAC_1_SQRT_2;
            (s * c.re, s * c.im)
        })
        .collect();
    let values = par_replicas(replicas, |i| {
        let mut rng = RngStream::new(seed, i as u64).rng();
        Ok(weights
            .iter()
            .map(|&(wr, wi)| {
                let x: f64 = rng.sample(StandardNormal);
                let y: f64 = rng.sample(StandardNormal);
                wr * x - wi * y
            })
            .sum::<f64>())
    })?;
    EmpiricalDistribution::from_values(values)
}

/// Monte Carlo mean of a complex quantity with per-component standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEstimate {
    pub mean: Complex64,
    pub se_re: f64,
    pub se_im: f64,
}

impl ComplexEstimate {
    fn from_values(values: impl Iterator<Item = Complex64>) -> Self {
        // Welford, in replica order.
        let (mut count, mut mean, mut m2_re, mut m2_im) =
            (0.0f64, Complex64::new(0.0, 0.0), 0.0, 0.0);
        for z in values {
            count += 1.0;
            let delta = z - mean;
            mean += delta / count;
            let delta2 = z - mean;
            m2_re += delta.re * delta2.re;
            m2_im += delta.im * delta2.im;
        }
        let se = |m2: f64| (m2 / (count - 1.0) / count).sqrt();
        Self {
            mean,
            se_re: se(m2_re),
            se_im: se(m2_im),
        }
    }

    /// Both components within `z` standard errors of `target`.
    pub fn within(&self, target: Complex64, z: f64) -> bool {
        (self.mean.re - target.re).abs() <= z * self.se_re
            && (self.mean.im - target.im).abs() <= z * self.se_im
    }
}

/// Estimates of `E[Tr(M^i) Tr(M^j)]` and `E[Tr(M^i) conj(Tr(M^j))]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthogonalityEstimate {
    pub i: usize,
    pub j: usize,
    pub plain: ComplexEstimate,
    pub conjugated: ComplexEstimate,
}

/// Exact value `δ_ij min(j, n)` of the conjugated moment.
pub fn orthogonality_target(n: usize, i: usize, j: usize) -> usize {
    if i == j {
        j.min(n)
    } else {
        0
    }
}

fn trace_ensemble(
    n: usize,
    max_power: usize,
    replicas: usize,
    seed: u64,
) -> Result<Vec<TraceVector>> {
    if replicas < 2 {
        return Err(Error::InsufficientData(format!(
            "standard errors need at least 2 replicas, got {replicas}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    par_replicas(replicas, |r| {
        traces_of_powers(&haar_unitary(n, RngStream::new(seed, r as u64))?, max_power)
    })
}

fn pair_estimate(ensemble: &[TraceVector], i: usize, j: usize) -> OrthogonalityEstimate {
    let pairs = || {
        ensemble
            .iter()
            .map(|t| (t.values()[i - 1], t.values()[j - 1]))
    };
    OrthogonalityEstimate {
        i,
        j,
        plain: ComplexEstimate::from_values(pairs().map(|(a, b)| a * b)),
        conjugated: ComplexEstimate::from_values(pairs().map(|(a, b)| a * b.conj())),
    }
}

pub fn orthogonality_estimate(
    n: usize,
    i: usize,
    j: usize,
    replicas: usize,
    seed: u64,
) -> Result<OrthogonalityEstimate> {
    if i == 0 || j == 0 {
        return Err(out_of_range("power", 0.0, "powers must be at least 1"));
    }
    let ensemble = trace_ensemble(n, i.max(j), replicas, seed)?;
    Ok(pair_estimate(&ensemble, i, j))
}

/// All pairs `1 <= i, j <= max_power` from one shared ensemble, row-major in
/// `(i, j)`. Entries coincide with [`orthogonality_estimate`] for the same seed.
pub fn orthogonality_table(
    n: usize,
    max_power: usize,
    replicas: usize,
    seed: u64,
) -> Result<Vec<OrthogonalityEstimate>> {
    if max_power == 0 {
        return Err(out_of_range("max_power", 0.0, "must be at least 1"));
    }
    let ensemble = trace_ensemble(n, max_power, replicas, seed)?;
    Ok((1..=max_power)
        .flat_map(|i| (1..=max_power).map(move |j| (i, j)))
        .map(|(i, j)| pair_estimate(&ensemble, i, j))
        .collect())
}
