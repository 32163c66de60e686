//! Monte Carlo laboratory for linear eigenvalue statistics of Haar unitary
//! matrices.
//!
//! * [`haar`], [`spectrum`], [`traces`]: sampling `U(n)`, eigenphases, and
//!   traces of powers.
//! * [`fourier`], [`functions`]: test functions on the circle, their
//!   coefficients, and the variance / tail / Lipschitz quantities built from
//!   them.
//! * [`lab`], [`distribution`], [`rates`]: fluctuation ensembles, distances
//!   to the Gaussian limit, rate formulas and rate fits.

// `!(x > bound)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distribution;
pub mod error;
pub mod fourier;
pub mod functions;
pub mod haar;
pub mod lab;
pub mod matrix;
pub mod quantile;
pub mod rates;
pub mod rng;
pub mod spectrum;
pub mod traces;

pub use num_complex::Complex64;

pub use distribution::{
    ks_two_sample, noise_floor, wasserstein1_empirical, wasserstein1_to_gaussian,
    EmpiricalDistribution, GaussianSpec, Summary,
};
pub use error::{Error, Result};
pub use fourier::{
    coefficient_decay_bound, coefficients_by_quadrature, estimate_decay, phi_lipschitz_bound,
    sigma_squared, sigma_truncated, truncation_tail_bound, DecayEstimate, FourierSeries,
};
pub use functions::{Decay, Smoothness, TestFunction};
pub use haar::{haar_unitary, sample_ginibre, UnitaryMatrix};
pub use lab::{
    fluctuation_eigen, fluctuation_trace, orthogonality_estimate, orthogonality_table,
    orthogonality_target, run_monte_carlo, sample_phi_gaussian, ComplexEstimate, FluctuationSample,
    Method, OrthogonalityEstimate,
};
pub use matrix::ComplexMatrix;
pub use quantile::normal_quantile;
pub use rates::{
    optimal_truncation, rate_regression, theoretical_exponent, theoretical_rate, trofpow_rate,
    truncation_objective, truncation_x0, RateFit,
};
pub use rng::RngStream;
pub use spectrum::{eigenphases, eigenvalues};
pub use traces::{traces_of_powers, TraceVector};
