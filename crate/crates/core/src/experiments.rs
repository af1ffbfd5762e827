//! Experiment drivers: convergence of kernel quadrature, comparison with
//! classical rules, optimized-density curves, ridge-fit tail probabilities
//! and spectral tables.
//!
//! Replicates run in parallel. Replicate `i` is seeded with
//! `splitmix64(seed ^ i)`, and results are merged in replicate order, so the
//! output does not depend on the thread count.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::baselines::{gauss_legendre, monte_carlo, simpson, sobol_1d};
use crate::config::{ExperimentConfig, Sampling};
use crate::error::{Error, Result};
use crate::features::FourierPeriodicFeature;
use crate::kernels::{MeanEmbedding, MercerBasis, SobolevKernel, TestWeight};
use crate::leverage::{gram_feature_estimate, gram_quadrature, LeverageProfile};
use crate::measures::{Discretization, Measure};
use crate::quadrature::{
    sample_test_function, solve_weights, worst_case_error_sq, QuadratureRule, SpanSystem,
    TestFunction,
};
use crate::randfeat::fit_with;
use crate::spectrum::{SpectrumSpec, DEFAULT_DOF_BUDGET};

/// Finalizer of the splitmix64 generator.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn replicate_seed(seed: u64, replicate: usize) -> u64 {
    splitmix64(seed ^ replicate as u64)
}

/// Independent sub-stream of a replicate seed.
fn stream(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag))
}

const TEST_FUNCTION_STREAM: u64 = 1 << 40;
const MONTE_CARLO_STREAM: u64 = 2 << 40;

/// Least-squares fit of `log e = log c − u log n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    pub u: f64,
    pub c: f64,
    /// Root-mean-square residual in natural-log units.
    pub residual: f64,
}

impl LogLogFit {
    pub fn log_c(&self) -> f64 {
        self.c.ln()
    }
}

pub fn fit_loglog(ns: &[f64], errors: &[f64]) -> Result<LogLogFit> {
    if ns.len() != errors.len() {
        return Err(Error::DimensionMismatch {
            expected: ns.len(),
            found: errors.len(),
        });
    }
    if let Some((i, &e)) = errors.iter().enumerate().find(|(_, e)| !(**e > 0.0)) {
        return Err(Error::NonPositiveError { index: i, value: e });
    }
    if let Some(&n) = ns.iter().find(|n| !(**n > 0.0)) {
        return Err(Error::OutOfDomain {
            name: "n",
            value: n,
            domain: "(0, inf)",
        });
    }
    let mut distinct = ns.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "a log-log fit needs at least 3 distinct n, got {}",
            distinct.len()
        )));
    }
    let xs: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(LogLogFit {
        u: -slope,
        c: intercept.exp(),
        residual: (rss / k).sqrt(),
    })
}

/// Fits only the points with `n ≥ n_min`.
pub fn fit_tail(ns: &[usize], errors: &[f64], n_min: usize) -> Result<LogLogFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = ns
        .iter()
        .zip(errors)
        .filter(|(n, _)| **n >= n_min)
        .map(|(n, e)| (*n as f64, *e))
        .unzip();
    fit_loglog(&x, &y)
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, var.sqrt())
}

/// Draws quadrature points and their densities relative to the input measure.
pub enum PointSampler {
    Iid(Measure),
    Leverage(LeverageProfile<f64>),
}

impl PointSampler {
    /// Leverage sampling discretizes `measure` on `grid_points` quantiles.
    pub fn new(
        sampling: Sampling,
        measure: Measure,
        kernel: &SobolevKernel,
        lambda: f64,
        grid_points: usize,
    ) -> Result<Self> {
        match sampling {
            Sampling::Iid => Ok(Self::Iid(measure)),
            Sampling::Leverage => {
                let ws = measure.discretize(grid_points, Discretization::QuantileGrid)?;
                let gram = gram_quadrature(&ws, kernel);
                Ok(Self::Leverage(LeverageProfile::new(ws, &gram, lambda)?))
            }
        }
    }

    pub fn draw(&self, n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        match self {
            Self::Iid(m) => (m.sample(n, seed), vec![1.0; n]),
            Self::Leverage(p) => p.resample(n, seed),
        }
    }
}

/// `∫ e_j dρ` for the first `terms` eigenfunctions.
fn basis_means(kernel: &SobolevKernel, measure: &Measure, terms: usize, grid: usize) -> Result<Vec<f64>> {
    if *measure == kernel.measure() {
        let mut m = vec![0.0; terms];
        m[0] = 1.0;
        return Ok(m);
    }
    let ws = measure.discretize(grid, Discretization::QuantileGrid)?;
    let mut acc = vec![0.0; terms];
    let mut e = vec![0.0; terms];
    for (x, w) in ws.points().iter().zip(ws.weights()) {
        kernel.eval_into(*x, &mut e);
        for (a, v) in acc.iter_mut().zip(&e) {
            *a += w * v;
        }
    }
    Ok(acc)
}

fn exact_integral(h: &TestFunction, means: &[f64]) -> f64 {
    h.coefficients.iter().zip(means).map(|(c, m)| c * m).sum()
}

fn test_functions(
    kernel: &SobolevKernel,
    config: &ExperimentConfig,
    replicate_seed: u64,
) -> Result<Vec<TestFunction>> {
    (0..config.test_functions)
        .map(|f| {
            let seed = stream(replicate_seed, TEST_FUNCTION_STREAM + f as u64);
            let mut h = sample_test_function(kernel, config.terms, seed)?;
            h.smoothness = Some(kernel.order());
            Ok(h)
        })
        .collect()
}

fn mean_test_error_sq<P>(
    rule: &QuadratureRule<P>,
    points: &[f64],
    kernel: &SobolevKernel,
    hs: &[TestFunction],
    means: &[f64],
) -> Result<f64> {
    let mut total = 0.0;
    for h in hs {
        let est = rule.integrate(&h.eval_many(kernel, points))?;
        total += (est - exact_integral(h, means)).powi(2);
    }
    Ok(total / hs.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub s: u32,
    pub t: u32,
    pub ns: Vec<usize>,
    pub lambdas: Vec<f64>,
    /// Squared worst-case errors, indexed `[n][replicate]`.
    pub per_replicate: Vec<Vec<f64>>,
    pub mean_sq_error: Vec<f64>,
    pub std_sq_error: Vec<f64>,
    /// Mean of the unsquared worst-case error.
    pub mean_error: Vec<f64>,
    /// Mean squared integration error on sampled test functions.
    pub mean_sq_test_error: Vec<f64>,
    /// Fit of `mean_sq_error` over `n ≥ fit_min_n`.
    pub fit: LogLogFit,
    pub fit_min_n: usize,
}

/// Squared worst-case error in the order-`s` space of rules whose weights
/// are learned with the order-`t` kernel.
pub fn run_convergence(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let kernel_t = SobolevKernel::new(config.t)?;
    let kernel_s = SobolevKernel::new(config.s)?;
    let grid = Some(config.mc_points);
    let emb_t = MeanEmbedding::new(kernel_t, TestWeight::One, &config.measure, grid)?;
    let emb_s = MeanEmbedding::new(kernel_s, TestWeight::One, &config.measure, grid)?;
    let c_s = emb_s.norm_sq();
    let sampler = PointSampler::new(
        config.sampling,
        config.measure.clone(),
        &kernel_t,
        config.lambda,
        config.grid_points,
    )?;
    let means = basis_means(&kernel_s, &config.measure, config.terms, config.mc_points)?;

    let rows: Vec<Vec<(f64, f64)>> = (0..config.replicates)
        .into_par_iter()
        .map(|r| {
            let seed = replicate_seed(config.seed, r);
            let hs = test_functions(&kernel_s, config, seed)?;
            config
                .n_grid
                .iter()
                .map(|&n| {
                    let (points, q) = sampler.draw(n, stream(seed, n as u64));
                    let z_t = emb_t.eval_many(&points);
                    let z_s = emb_s.eval_many(&points);
                    let rule = solve_weights(&kernel_t, points.clone(), q, config.lambda_at(n), &z_t)?;
                    let wce = worst_case_error_sq(&rule, &kernel_s, &z_s, c_s)?;
                    let test = mean_test_error_sq(&rule, &points, &kernel_s, &hs, &means)?;
                    Ok((wce, test))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let k = config.n_grid.len();
    let per_replicate: Vec<Vec<f64>> = (0..k).map(|i| rows.iter().map(|r| r[i].0).collect()).collect();
    let mut mean_sq_error = Vec::with_capacity(k);
    let mut std_sq_error = Vec::with_capacity(k);
    let mut mean_error = Vec::with_capacity(k);
    let mut mean_sq_test_error = Vec::with_capacity(k);
    for (i, errs) in per_replicate.iter().enumerate() {
        if let Some((index, &value)) = errs.iter().enumerate().find(|(_, e)| !(**e >= 0.0)) {
            return Err(Error::NonPositiveError { index, value });
        }
        let (m, s) = mean_std(errs);
        mean_sq_error.push(m);
        std_sq_error.push(s);
        mean_error.push(errs.iter().map(|e| e.sqrt()).sum::<f64>() / errs.len() as f64);
        mean_sq_test_error.push(rows.iter().map(|r| r[i].1).sum::<f64>() / rows.len() as f64);
    }
    let fit = fit_tail(&config.n_grid, &mean_sq_error, config.fit_min_n)?;
    Ok(ConvergenceReport {
        s: config.s,
        t: config.t,
        ns: config.n_grid.clone(),
        lambdas: config.n_grid.iter().map(|&n| config.lambda_at(n)).collect(),
        per_replicate,
        mean_sq_error,
        std_sq_error,
        mean_error,
        mean_sq_test_error,
        fit,
        fit_min_n: config.fit_min_n,
    })
}

/// Errors of one quadrature method across the n-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSeries {
    pub method: String,
    /// Node counts actually used at each grid entry.
    pub nodes: Vec<usize>,
    pub mean_sq_error: Vec<f64>,
    pub std_sq_error: Vec<f64>,
    pub mean_sq_test_error: Vec<f64>,
    pub fit: LogLogFit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub s: u32,
    pub ns: Vec<usize>,
    pub series: Vec<MethodSeries>,
    pub fit_min_n: usize,
}

impl ComparisonReport {
    pub fn series(&self, method: &str) -> Option<&MethodSeries> {
        self.series.iter().find(|m| m.method == method)
    }
}

pub const COMPARISON_METHODS: [&str; 5] = ["kernel", "simpson", "gauss_legendre", "sobol", "monte_carlo"];

/// Simpson's rule needs an odd node count; even `n` are rounded up.
pub fn simpson_nodes(n: usize) -> usize {
    if n < 3 {
        3
    } else if n.is_multiple_of(2) {
        n + 1
    } else {
        n
    }
}

/// Squared worst-case error in the order-`s` space under the uniform
/// distribution for the kernel rule (iid points, weights from the same
/// kernel), Simpson, Gauss-Legendre, van der Corput and Monte Carlo.
pub fn run_baseline_comparison(config: &ExperimentConfig) -> Result<ComparisonReport> {
    config.validate()?;
    if config.measure != Measure::Uniform {
        return Err(Error::Config("the baseline comparison is defined for the uniform measure".into()));
    }
    let kernel = SobolevKernel::new(config.s)?;
    let emb = MeanEmbedding::new(kernel, TestWeight::One, &Measure::Uniform, None)?;
    let c = emb.norm_sq();
    let means = basis_means(&kernel, &Measure::Uniform, config.terms, config.mc_points)?;

    // deterministic rules: (nodes, rule, squared worst-case error)
    type Fixed = Vec<(usize, QuadratureRule<f64>, f64)>;
    let fixed = |make: &dyn Fn(usize) -> Result<crate::baselines::SimpleRule>| -> Result<Fixed> {
        config
            .n_grid
            .iter()
            .map(|&n| {
                let simple = make(n)?;
                let rule = QuadratureRule::from(&simple);
                let wce = worst_case_error_sq(&rule, &kernel, &emb.eval_many(&simple.points), c)?;
                Ok((simple.len(), rule, wce))
            })
            .collect()
    };
    let deterministic: Vec<(&str, Fixed)> = vec![
        ("simpson", fixed(&|n| simpson(simpson_nodes(n)))?),
        ("gauss_legendre", fixed(&|n| gauss_legendre(n))?),
        ("sobol", fixed(&|n| sobol_1d(n))?),
    ];

    // [replicate][method][n] -> (wce², test error²)
    let rows: Vec<Vec<Vec<(f64, f64)>>> = (0..config.replicates)
        .into_par_iter()
        .map(|r| {
            let seed = replicate_seed(config.seed, r);
            let hs = test_functions(&kernel, config, seed)?;
            let mut by_method = Vec::with_capacity(COMPARISON_METHODS.len());
            let mut kernel_row = Vec::new();
            let mut mc_row = Vec::new();
            for &n in &config.n_grid {
                let points = Measure::Uniform.sample(n, stream(seed, n as u64));
                let z = emb.eval_many(&points);
                let rule = solve_weights(&kernel, points.clone(), vec![1.0; n], config.lambda_at(n), &z)?;
                kernel_row.push((
                    worst_case_error_sq(&rule, &kernel, &z, c)?,
                    mean_test_error_sq(&rule, &points, &kernel, &hs, &means)?,
                ));
                let mc = monte_carlo(n, stream(seed, MONTE_CARLO_STREAM + n as u64))?;
                let rule = QuadratureRule::from(&mc);
                mc_row.push((
                    worst_case_error_sq(&rule, &kernel, &emb.eval_many(&mc.points), c)?,
                    mean_test_error_sq(&rule, &mc.points, &kernel, &hs, &means)?,
                ));
            }
            by_method.push(kernel_row);
            for (_, rules) in &deterministic {
                by_method.push(
                    rules
                        .iter()
                        .map(|(_, rule, wce)| {
                            Ok((*wce, mean_test_error_sq(rule, rule.points(), &kernel, &hs, &means)?))
                        })
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            by_method.push(mc_row);
            Ok(by_method)
        })
        .collect::<Result<_>>()?;

    let mut series = Vec::with_capacity(COMPARISON_METHODS.len());
    for (m, &method) in COMPARISON_METHODS.iter().enumerate() {
        let nodes: Vec<usize> = match deterministic.iter().find(|(name, _)| *name == method) {
            Some((_, rules)) => rules.iter().map(|(k, _, _)| *k).collect(),
            None => config.n_grid.clone(),
        };
        let mut mean_sq_error = Vec::new();
        let mut std_sq_error = Vec::new();
        let mut mean_sq_test_error = Vec::new();
        for i in 0..config.n_grid.len() {
            let errs: Vec<f64> = rows.iter().map(|r| r[m][i].0).collect();
            let (mean, std) = mean_std(&errs);
            mean_sq_error.push(mean);
            std_sq_error.push(std);
            mean_sq_test_error.push(rows.iter().map(|r| r[m][i].1).sum::<f64>() / rows.len() as f64);
        }
        let fit = fit_tail(&nodes, &mean_sq_error, config.fit_min_n)?;
        series.push(MethodSeries {
            method: method.to_string(),
            nodes,
            mean_sq_error,
            std_sq_error,
            mean_sq_test_error,
            fit,
        });
    }
    Ok(ComparisonReport {
        s: config.s,
        ns: config.n_grid.clone(),
        series,
        fit_min_n: config.fit_min_n,
    })
}

/// Optimized densities on a quantile grid of the input distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialCurves {
    pub lambdas: Vec<f64>,
    pub x: Vec<f64>,
    /// Density with respect to the input distribution, indexed `[λ][x]`.
    pub wrt_input: Vec<Vec<f64>>,
    /// Discretized degrees of freedom per λ.
    pub dof: Vec<f64>,
}

/// Optimized densities over Fourier frequencies `|k| ≤ K`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCurves {
    pub lambdas: Vec<f64>,
    pub k: Vec<i64>,
    /// Density with respect to the base weights `∝ μ_k`, indexed `[λ][k]`.
    pub wrt_input: Vec<Vec<f64>>,
    /// Density with respect to the counting measure, indexed `[λ][k]`.
    pub wrt_counting: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityReport {
    pub spatial: SpatialCurves,
    pub fourier: FourierCurves,
}

/// Leverage-score densities for the order-`s` Sobolev kernel under the
/// configured input distribution: the quadrature map on `grid_points`
/// quantiles, and the Fourier map on `|k| ≤ k_max` with Gram entries
/// integrated on `mc_points` quantiles.
pub fn run_density_curves(config: &ExperimentConfig) -> Result<DensityReport> {
    config.validate()?;
    let kernel = SobolevKernel::new(config.s)?;
    let ws = config.measure.discretize(config.grid_points, Discretization::QuantileGrid)?;
    let gram = gram_quadrature(&ws, &kernel);
    let mut spatial = SpatialCurves {
        lambdas: config.lambdas.clone(),
        x: ws.points().to_vec(),
        wrt_input: Vec::new(),
        dof: Vec::new(),
    };
    for &lambda in &config.lambdas {
        let p = LeverageProfile::new(ws.clone(), &gram, lambda)?;
        spatial.wrt_input.push(p.density_wrt_base());
        spatial.dof.push(p.normalization());
    }

    let map = FourierPeriodicFeature::new(config.s, config.k_max)?;
    let base = map.base_measure().clone();
    let gram = gram_feature_estimate(
        &base,
        &map,
        &config.measure,
        config.mc_points,
        Discretization::QuantileGrid,
    )?;
    let mut fourier = FourierCurves {
        lambdas: config.lambdas.clone(),
        k: base.points().to_vec(),
        wrt_input: Vec::new(),
        wrt_counting: Vec::new(),
    };
    for &lambda in &config.lambdas {
        let p = LeverageProfile::new(base.clone(), &gram, lambda)?;
        fourier.wrt_input.push(p.density_wrt_base());
        fourier.wrt_counting.push(p.density_wrt_counting());
    }
    Ok(DensityReport { spatial, fourier })
}

/// Degrees of freedom of the order-`s` Sobolev kernel,
/// `1/(1+λ) + 2 Σ_{m≥1} m^{-2s}/(m^{-2s}+λ)`.
pub fn sobolev_dof(s: u32, lambda: f64) -> Result<f64> {
    let pairs = SpectrumSpec::polynomial(2.0 * s as f64)?.degrees_of_freedom(lambda, DEFAULT_DOF_BUDGET)?;
    Ok(1.0 / (1.0 + lambda) + 2.0 * pairs)
}

/// `ceil(5 d log(16 d / δ))`.
pub fn sample_size_bound(dof: f64, delta: f64) -> usize {
    (5.0 * dof * (16.0 * dof / delta).ln()).ceil() as usize
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgeReplicate {
    /// Largest `‖h − Φβ‖²` over the unit-norm test functions.
    pub worst_l2_error_sq: f64,
    /// Largest `‖β‖²` over the test functions and the constant target.
    pub worst_beta_norm_sq: f64,
    /// `‖β‖²` of the quadrature rule for `g = 1`.
    pub rule_beta_norm_sq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeReport {
    pub lambda: f64,
    pub dof: f64,
    pub n: usize,
    pub terms: usize,
    pub replicates: Vec<RidgeReplicate>,
    /// Fraction of replicates with `worst_l2_error_sq > 4λ`.
    pub fraction_error_exceeds: f64,
    /// Fraction of replicates with `worst_beta_norm_sq > 4/n`.
    pub fraction_beta_exceeds: f64,
}

/// Quadrature-feature ridge fits on `n = ceil(5 d log(16 d/δ))` points drawn
/// from the optimized density, with unit-norm order-`s` targets truncated to
/// `terms` basis functions.
pub fn run_ridge_bounds(config: &ExperimentConfig) -> Result<RidgeReport> {
    config.validate()?;
    let lambda = config.lambda;
    if !(lambda > 0.0) {
        return Err(Error::Config("ridge bounds need lambda > 0".into()));
    }
    let kernel = SobolevKernel::new(config.s)?;
    let dof = sobolev_dof(config.s, lambda)?;
    let n = sample_size_bound(dof, config.delta);
    // q*_λ is uniform for Sobolev kernels under the uniform distribution
    let sampling = if config.measure == Measure::Uniform {
        Sampling::Iid
    } else {
        Sampling::Leverage
    };
    let sampler = PointSampler::new(sampling, config.measure.clone(), &kernel, lambda, config.grid_points)?;
    let mut constant = vec![0.0; config.terms];
    constant[0] = 1.0;

    let replicates: Vec<RidgeReplicate> = (0..config.replicates)
        .into_par_iter()
        .map(|r| {
            let seed = replicate_seed(config.seed, r);
            let (points, q) = sampler.draw(n, stream(seed, n as u64));
            let phi = SpanSystem::quadrature_features(&kernel, config.terms, &points, &q);
            let system = SpanSystem::new(phi, lambda)?;
            let rule = fit_with(&system, &constant);
            let mut worst = RidgeReplicate {
                worst_l2_error_sq: 0.0,
                worst_beta_norm_sq: rule.beta_norm_sq,
                rule_beta_norm_sq: rule.beta_norm_sq,
            };
            for h in test_functions(&kernel, config, seed)? {
                let fit = fit_with(&system, &h.coefficients);
                worst.worst_l2_error_sq = worst.worst_l2_error_sq.max(fit.l2_error_sq);
                worst.worst_beta_norm_sq = worst.worst_beta_norm_sq.max(fit.beta_norm_sq);
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    let total = replicates.len() as f64;
    let fraction_error_exceeds =
        replicates.iter().filter(|r| r.worst_l2_error_sq > 4.0 * lambda).count() as f64 / total;
    let fraction_beta_exceeds =
        replicates.iter().filter(|r| r.worst_beta_norm_sq > 4.0 / n as f64).count() as f64 / total;
    Ok(RidgeReport {
        lambda,
        dof,
        n,
        terms: config.terms,
        replicates,
        fraction_error_exceeds,
        fraction_beta_exceeds,
    })
}

/// Measured inflation of the squared integration error when noise of
/// variance `τ² q(x_i)` is added to each function value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseInflation {
    pub measured: f64,
    /// Standard error of `measured`.
    pub std_error: f64,
    /// `τ² ‖β‖²`.
    pub predicted: f64,
}

pub fn measure_noise_inflation<P>(
    rule: &QuadratureRule<P>,
    h_values: &[f64],
    exact: f64,
    tau: f64,
    draws: usize,
    seed: u64,
) -> Result<NoiseInflation> {
    if draws < 2 {
        return Err(Error::InvalidArgument("noise inflation needs at least 2 draws".into()));
    }
    let base = rule.integrate(h_values)? - exact;
    let alpha = rule.weights();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let samples: Vec<f64> = (0..draws)
        .map(|_| {
            let noise: f64 = alpha
                .iter()
                .zip(rule.q_values())
                .map(|(a, q)| a * tau * q.sqrt() * normal.sample(&mut rng))
                .sum();
            (base + noise).powi(2) - base * base
        })
        .collect();
    let (mean, std) = mean_std(&samples);
    Ok(NoiseInflation {
        measured: mean,
        std_error: std / (draws as f64).sqrt(),
        predicted: tau * tau * rule.beta_norm_sq(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub family: String,
    pub lambda: f64,
    pub m_star: usize,
    pub dof: f64,
    pub gamma: f64,
    pub certified_gamma: f64,
}

/// `m*(λ)`, `d(λ)` and both γ constants for polynomial spectra with
/// exponents `2s`, `s = 1, 2`, and geometric spectra with ratios 1/2, 9/10.
pub fn spectrum_table(lambdas: &[f64]) -> Result<Vec<SpectrumRow>> {
    let families = [
        ("polynomial:2", SpectrumSpec::polynomial(2.0)?),
        ("polynomial:4", SpectrumSpec::polynomial(4.0)?),
        ("geometric:0.5", SpectrumSpec::geometric(0.5)?),
        ("geometric:0.9", SpectrumSpec::geometric(0.9)?),
    ];
    let mut rows = Vec::new();
    for (name, spec) in &families {
        let gamma = spec.gamma_constant()?;
        let certified_gamma = spec.certified_gamma()?;
        for &lambda in lambdas {
            rows.push(SpectrumRow {
                family: name.to_string(),
                lambda,
                m_star: spec.m_star(lambda),
                dof: spec.degrees_of_freedom(lambda, DEFAULT_DOF_BUDGET)?,
                gamma,
                certified_gamma,
            });
        }
    }
    Ok(rows)
}

fn e(x: f64) -> String {
    format!("{x:.16e}")
}

fn lambda_label(lambda: f64) -> String {
    format!("lambda_{lambda:e}")
}

impl ConvergenceReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n,mean_sq_error,std_sq_error,mean_error,mean_sq_test_error,lambda")?;
        for i in 0..self.ns.len() {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                self.ns[i],
                e(self.mean_sq_error[i]),
                e(self.std_sq_error[i]),
                e(self.mean_error[i]),
                e(self.mean_sq_test_error[i]),
                e(self.lambdas[i])
            )?;
        }
        Ok(())
    }

    pub fn write_fit_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write_fit_header(&mut out)?;
        write_fit_row(&mut out, &format!("s{}_t{}", self.s, self.t), &self.fit, self.fit_min_n)
    }
}

fn write_fit_header<W: Write>(out: &mut W) -> std::io::Result<()> {
    writeln!(out, "series,u,log_c,residual,fit_min_n")
}

fn write_fit_row<W: Write>(out: &mut W, name: &str, fit: &LogLogFit, n_min: usize) -> std::io::Result<()> {
    writeln!(out, "{name},{},{},{},{n_min}", e(fit.u), e(fit.log_c()), e(fit.residual))
}

impl ComparisonReport {
    /// `mean_sq_error` and `std_sq_error` refer to the kernel rule; each
    /// method then has squared worst-case and test-function columns.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut header = vec!["n".to_string(), "mean_sq_error".into(), "std_sq_error".into()];
        for m in &self.series {
            header.push(format!("{}_sq_error", m.method));
            header.push(format!("{}_test_sq_error", m.method));
        }
        header.push("simpson_nodes".into());
        writeln!(out, "{}", header.join(","))?;
        let kernel = self.series("kernel").expect("kernel series");
        let simpson = self.series("simpson").expect("simpson series");
        for i in 0..self.ns.len() {
            let mut row = vec![
                self.ns[i].to_string(),
                e(kernel.mean_sq_error[i]),
                e(kernel.std_sq_error[i]),
            ];
            for m in &self.series {
                row.push(e(m.mean_sq_error[i]));
                row.push(e(m.mean_sq_test_error[i]));
            }
            row.push(simpson.nodes[i].to_string());
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn write_fit_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write_fit_header(&mut out)?;
        for m in &self.series {
            write_fit_row(&mut out, &m.method, &m.fit, self.fit_min_n)?;
        }
        Ok(())
    }
}

impl SpatialCurves {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut header = vec!["x".to_string()];
        header.extend(self.lambdas.iter().map(|l| lambda_label(*l)));
        writeln!(out, "{}", header.join(","))?;
        for (i, x) in self.x.iter().enumerate() {
            let mut row = vec![e(*x)];
            row.extend(self.wrt_input.iter().map(|c| e(c[i])));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

impl FourierCurves {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut header = vec!["k".to_string()];
        header.extend(self.lambdas.iter().map(|l| format!("input_{}", lambda_label(*l))));
        header.extend(self.lambdas.iter().map(|l| format!("counting_{}", lambda_label(*l))));
        writeln!(out, "{}", header.join(","))?;
        for (i, k) in self.k.iter().enumerate() {
            let mut row = vec![k.to_string()];
            row.extend(self.wrt_input.iter().map(|c| e(c[i])));
            row.extend(self.wrt_counting.iter().map(|c| e(c[i])));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

impl RidgeReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "replicate,worst_l2_error_sq,worst_beta_norm_sq,rule_beta_norm_sq")?;
        for (i, r) in self.replicates.iter().enumerate() {
            writeln!(
                out,
                "{i},{},{},{}",
                e(r.worst_l2_error_sq),
                e(r.worst_beta_norm_sq),
                e(r.rule_beta_norm_sq)
            )?;
        }
        Ok(())
    }
}

pub fn write_spectrum_csv<W: Write>(rows: &[SpectrumRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "family,lambda,m_star,dof,gamma,certified_gamma")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.family,
            e(r.lambda),
            r.m_star,
            e(r.dof),
            e(r.gamma),
            e(r.certified_gamma)
        )?;
    }
    Ok(())
}
