//! Runs a validated config and produces result records.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;

use haarclt::fourier::{
    coefficient_decay_bound, coefficients_by_quadrature, estimate_decay, sigma_squared,
    sigma_truncated, truncation_tail_bound,
};
use haarclt::rates::NOISE_FLOOR_FACTOR;
use haarclt::{
    eigenvalues, haar_unitary, noise_floor, optimal_truncation, orthogonality_table,
    orthogonality_target, rate_regression, run_monte_carlo, theoretical_exponent, theoretical_rate,
    traces_of_powers, trofpow_rate, truncation_objective, truncation_x0, wasserstein1_to_gaussian,
    Complex64, GaussianSpec, Method, RngStream, Summary, TestFunction,
};

use crate::config::{ConfigErrors, Experiment, ExperimentConfig, Truncation};

/// Largest power compared between the trace and eigenvalue paths in
/// `sampler-check`.
pub const SAMPLER_CHECK_POWERS: usize = 16;

/// One measured or derived quantity.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub parameters: BTreeMap<String, String>,
    pub metric: String,
    pub value: f64,
    /// Standard error, or the noise floor for distance metrics.
    pub uncertainty: Option<f64>,
    pub wall_time_s: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigErrors),
    #[error("computation failed: {0}")]
    Core(#[from] haarclt::Error),
    #[error("metric {metric} is not finite ({value})")]
    NonFinite { metric: String, value: f64 },
}

/// Collects records that share a parameter set and a timer.
struct Block<'a> {
    experiment: Experiment,
    params: BTreeMap<String, String>,
    started: Instant,
    out: &'a mut Vec<ResultRecord>,
}

impl<'a> Block<'a> {
    fn new(experiment: Experiment, out: &'a mut Vec<ResultRecord>) -> Self {
        Self {
            experiment,
            params: BTreeMap::new(),
            started: Instant::now(),
            out,
        }
    }

    fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_owned(), value.to_string());
        self
    }

    fn emit(&mut self, metric: &str, value: f64, uncertainty: Option<f64>) -> Result<(), RunError> {
        for v in std::iter::once(value).chain(uncertainty) {
            if !v.is_finite() {
                return Err(RunError::NonFinite {
                    metric: metric.to_owned(),
                    value: v,
                });
            }
        }
        self.out.push(ResultRecord {
            experiment: self.experiment.tag().to_owned(),
            parameters: self.params.clone(),
            metric: metric.to_owned(),
            value,
            uncertainty,
            wall_time_s: self.started.elapsed().as_secs_f64(),
        });
        Ok(())
    }
}

/// Runs the experiment described by `config`.
pub fn run(config: &ExperimentConfig) -> Result<Vec<ResultRecord>, RunError> {
    config.validate()?;
    let mut out = Vec::new();
    match config.experiment {
        Experiment::Clt => run_clt(config, &mut out)?,
        Experiment::Rate => run_rate(config, &mut out)?,
        Experiment::Ortho => run_ortho(config, &mut out)?,
        Experiment::Coeffs => run_coeffs(config, &mut out)?,
        Experiment::Truncation => run_truncation(config, &mut out)?,
        Experiment::SamplerCheck => run_sampler_check(config, &mut out)?,
    }
    Ok(out)
}

fn build_function(config: &ExperimentConfig) -> Result<TestFunction, RunError> {
    let spec = config
        .function
        .as_ref()
        .expect("validated: function present");
    Ok(spec.build()?)
}

fn truncation_for(config: &ExperimentConfig, n: usize) -> Result<Option<usize>, RunError> {
    Ok(match (config.method, config.truncation) {
        (Method::Eigen, _) => None,
        (Method::Trace, Truncation::Explicit(d)) => Some(d),
        (Method::Trace, Truncation::Auto) => {
            let k = config.resolved_k().expect("validated: k present");
            Some(optimal_truncation(k, n)?)
        }
    })
}

/// Fluctuation statistics at one matrix size.
struct CltPoint {
    n: usize,
    d: Option<usize>,
    w1: f64,
    floor: f64,
    summary: Summary,
}

fn clt_point(
    config: &ExperimentConfig,
    f: &TestFunction,
    sigma2: f64,
    n: usize,
) -> Result<CltPoint, RunError> {
    let d = truncation_for(config, n)?;
    let sample = run_monte_carlo(n, config.replicas, f, config.method, d, config.seed)?;
    let w1 = wasserstein1_to_gaussian(&sample.empirical()?, &GaussianSpec::centered(sigma2)?)?;
    Ok(CltPoint {
        n,
        d,
        w1,
        floor: noise_floor(sigma2.sqrt(), config.replicas),
        summary: sample.summary()?,
    })
}

fn sample_block<'a>(
    config: &ExperimentConfig,
    f: &TestFunction,
    n: usize,
    out: &'a mut Vec<ResultRecord>,
) -> Block<'a> {
    Block::new(config.experiment, out)
        .param("function", f.name())
        .param("n", n)
        .param("replicas", config.replicas)
        .param("seed", config.seed)
        .param("method", config.method)
}

fn run_clt(config: &ExperimentConfig, out: &mut Vec<ResultRecord>) -> Result<(), RunError> {
    let f = build_function(config)?;
    let series = f.series()?;
    let sigma2 = sigma_squared(&series);
    for &n in &config.sizes {
        let mut block = sample_block(config, &f, n, out);
        let p = clt_point(config, &f, sigma2, n)?;
        if let Some(d) = p.d {
            block = block.param("d", d);
        }
        block.emit("sigma2_target", sigma2, None)?;
        if let Some(d) = p.d {
            block.emit("sigma2_truncated", sigma_truncated(&series, d)?, None)?;
        }
        block.emit("w1_distance", p.w1, Some(p.floor))?;
        block.emit("sample_mean", p.summary.mean, Some(p.summary.mean_se))?;
        block.emit(
            "sample_variance",
            p.summary.variance,
            Some(p.summary.variance_se),
        )?;
    }
    Ok(())
}

fn run_rate(config: &ExperimentConfig, out: &mut Vec<ResultRecord>) -> Result<(), RunError> {
    let f = build_function(config)?;
    let k = config.resolved_k().expect("validated: k present");
    let sigma2 = sigma_squared(&f.series()?);
    let mut qualifying = Vec::new();
    for &n in &config.sizes {
        let mut block = sample_block(config, &f, n, out).param("k", k);
        let p = clt_point(config, &f, sigma2, n)?;
        if let Some(d) = p.d {
            block = block.param("d", d);
        }
        let qualifies = p.w1 > NOISE_FLOOR_FACTOR * p.floor;
        block.emit("w1_distance", p.w1, Some(p.floor))?;
        block.emit("theoretical_rate", theoretical_rate(k, p.n)?, None)?;
        block.emit("above_noise_floor", f64::from(u8::from(qualifies)), None)?;
        if qualifies {
            qualifying.push((p.n, p.w1));
        }
    }
    let mut block = Block::new(Experiment::Rate, out)
        .param("function", f.name())
        .param("k", k)
        .param("replicas", config.replicas)
        .param("seed", config.seed)
        .param("method", config.method);
    block.emit("theoretical_exponent", theoretical_exponent(k)?, None)?;
    block.emit("qualifying_points", qualifying.len() as f64, None)?;
    if qualifying.len() >= 3 {
        let fit = rate_regression(&qualifying)?;
        block.emit("fitted_slope", fit.slope, Some(fit.stderr))?;
        block.emit("fitted_intercept", fit.intercept, None)?;
    } else {
        eprintln!(
            "warning: only {} size(s) have a distance above {NOISE_FLOOR_FACTOR} x the noise floor; \
             no slope fitted (increase replicas or use smaller sizes)",
            qualifying.len()
        );
    }
    Ok(())
}

fn run_ortho(config: &ExperimentConfig, out: &mut Vec<ResultRecord>) -> Result<(), RunError> {
    for &n in &config.sizes {
        let started = Instant::now();
        let table = orthogonality_table(n, config.max_power, config.replicas, config.seed)?;
        for est in table {
            let mut block = Block::new(Experiment::Ortho, out)
                .param("n", n)
                .param("i", est.i)
                .param("j", est.j)
                .param("replicas", config.replicas)
                .param("seed", config.seed);
            block.started = started;
            block.emit("target", orthogonality_target(n, est.i, est.j) as f64, None)?;
            let c = est.conjugated;
            block.emit("conjugated_re", c.mean.re, Some(c.se_re))?;
            block.emit("conjugated_im", c.mean.im, Some(c.se_im))?;
            let p = est.plain;
            block.emit("plain_re", p.mean.re, Some(p.se_re))?;
            block.emit("plain_im", p.mean.im, Some(p.se_im))?;
        }
    }
    Ok(())
}

fn run_coeffs(config: &ExperimentConfig, out: &mut Vec<ResultRecord>) -> Result<(), RunError> {
    let f = build_function(config)?;
    let grid = config.coeff_grid();
    let series = coefficients_by_quadrature(&f, config.coeff_count, grid)?;
    let smoothness = f.smoothness();
    let started = Instant::now();
    for j in 0..=config.coeff_count {
        let mut block = Block::new(Experiment::Coeffs, out)
            .param("function", f.name())
            .param("grid", grid)
            .param("j", j);
        block.started = started;
        let c = series.coefficient(j as i64);
        block.emit("coeff_re", c.re, None)?;
        block.emit("coeff_im", c.im, None)?;
        block.emit("coeff_abs", c.norm(), None)?;
        if let (Some(s), true) = (smoothness, j > 0) {
            block.emit(
                "decay_bound",
                coefficient_decay_bound(s.k, s.derivative_norm, j)?,
                None,
            )?;
        }
    }
    let mut block = Block::new(Experiment::Coeffs, out)
        .param("function", f.name())
        .param("grid", grid)
        .param("count", config.coeff_count)
        .param("j_min", config.j_min);
    block.emit("sigma2", sigma_squared(&series), None)?;
    match estimate_decay(&series, config.j_min) {
        Ok(fit) => {
            block.emit("kappa_hat", fit.kappa_hat, None)?;
            block.emit("c_kappa_hat", fit.c_kappa_hat, None)?;
            block.emit("fit_residual", fit.fit_residual, None)?;
            block.emit("fit_points", fit.points as f64, None)?;
        }
        Err(haarclt::Error::InsufficientData(why)) => eprintln!("warning: no decay fit: {why}"),
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

fn run_truncation(config: &ExperimentConfig, out: &mut Vec<ResultRecord>) -> Result<(), RunError> {
    let k = config.resolved_k().expect("validated: k present");
    let function = config
        .function
        .as_ref()
        .map(|spec| spec.build())
        .transpose()?;
    let tail_norm = function
        .as_ref()
        .and_then(TestFunction::smoothness)
        .filter(|s| s.k >= 2)
        .map(|s| (s.k, s.derivative_norm));
    for &n in &config.sizes {
        let d = optimal_truncation(k, n)?;
        let mut block = Block::new(Experiment::Truncation, out)
            .param("k", k)
            .param("n", n);
        if let Some(f) = &function {
            block = block.param("function", f.name());
        }
        if n >= 2 {
            block.emit("x0", truncation_x0(k, n)?, None)?;
        }
        block.emit("d_opt", d as f64, None)?;
        block.emit("objective", truncation_objective(k, n, d), None)?;
        block.emit("theoretical_rate", theoretical_rate(k, n)?, None)?;
        if n >= 2 * d {
            block.emit("trofpow_rate", trofpow_rate(d, d, n)?, None)?;
        }
        if let Some((sk, norm)) = tail_norm {
            block.emit("tail_bound", truncation_tail_bound(sk, norm, d)?, None)?;
        }
    }
    Ok(())
}

/// Per-replica diagnostics for `sampler-check`.
struct Diagnostics {
    unitarity_defect: f64,
    modulus_defect: f64,
    trace_gap: f64,
    trace: Complex64,
}

fn diagnose(n: usize, stream: RngStream) -> haarclt::Result<Diagnostics> {
    let m = haar_unitary(n, stream)?;
    let lambdas = eigenvalues(&m)?;
    let powers = SAMPLER_CHECK_POWERS.min(2 * n);
    let traces = traces_of_powers(&m, powers)?;
    let mut trace_gap = 0.0f64;
    for (j, t) in traces.values().iter().enumerate() {
        let via_eigen: Complex64 = lambdas.iter().map(|l| l.powu(j as u32 + 1)).sum();
        trace_gap = trace_gap.max((via_eigen - t).norm() / n as f64);
    }
    Ok(Diagnostics {
        unitarity_defect: m.unitarity_defect() / n as f64,
        modulus_defect: lambdas
            .iter()
            .map(|l| (l.norm() - 1.0).abs())
            .fold(0.0, f64::max),
        trace_gap,
        trace: traces.values()[0],
    })
}

fn run_sampler_check(
    config: &ExperimentConfig,
    out: &mut Vec<ResultRecord>,
) -> Result<(), RunError> {
    for &n in &config.sizes {
        let mut block = Block::new(Experiment::SamplerCheck, out)
            .param("n", n)
            .param("replicas", config.replicas)
            .param("seed", config.seed);
        let diags = (0..config.replicas as u64)
            .into_par_iter()
            .map(|i| diagnose(n, RngStream::new(config.seed, i)))
            .collect::<haarclt::Result<Vec<_>>>()?;
        let max = |g: fn(&Diagnostics) -> f64| diags.iter().map(g).fold(0.0, f64::max);
        block.emit(
            "max_unitarity_defect_per_n",
            max(|d| d.unitarity_defect),
            None,
        )?;
        block.emit("max_eigen_modulus_defect", max(|d| d.modulus_defect), None)?;
        block.emit("max_trace_path_gap_per_n", max(|d| d.trace_gap), None)?;
        let re = Summary::of(&diags.iter().map(|d| d.trace.re).collect::<Vec<_>>())?;
        let im = Summary::of(&diags.iter().map(|d| d.trace.im).collect::<Vec<_>>())?;
        let abs2 = Summary::of(&diags.iter().map(|d| d.trace.norm_sqr()).collect::<Vec<_>>())?;
        block.emit("trace_mean_re", re.mean, Some(re.mean_se))?;
        block.emit("trace_mean_im", im.mean, Some(im.mean_se))?;
        block.emit("trace_abs2_mean", abs2.mean, Some(abs2.mean_se))?;
    }
    Ok(())
}
