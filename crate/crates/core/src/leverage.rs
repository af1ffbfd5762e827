//! Optimized sampling densities from ridge leverage scores.

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::FeatureMap;
use crate::kernels::{Kernel, MercerBasis};
use crate::linalg::{add_diagonal, JitteredCholesky};
use crate::measures::{Discretization, Measure, WeightedPointSet};

/// `q*_λ(x) = Σ_{j<M} w_j e_j(x)² / Σ_{j<M} w_j` with `w_j = μ_j/(μ_j+λ)`,
/// a density with respect to the basis measure.
pub fn optimized_density_spectral<B: MercerBasis + ?Sized>(
    basis: &B,
    terms: usize,
    lambda: f64,
    x: f64,
) -> Result<f64> {
    Ok(OptimizedDensity::new(basis, terms, lambda)?.eval(x))
}

/// Precomputed ratios `μ_j/(μ_j+λ)` for repeated evaluation of `q*_λ`.
pub struct OptimizedDensity<'a, B: ?Sized> {
    basis: &'a B,
    ratios: Vec<f64>,
    normalizer: f64,
}

impl<'a, B: MercerBasis + ?Sized> OptimizedDensity<'a, B> {
    pub fn new(basis: &'a B, terms: usize, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::OutOfDomain {
                name: "lambda",
                value: lambda,
                domain: "(0, inf)",
            });
        }
        if terms == 0 {
            return Err(Error::InvalidArgument("truncation must be at least 1".into()));
        }
        let ratios: Vec<f64> = (0..terms)
            .map(|j| {
                let mu = basis.eigenvalue(j);
                mu / (mu + lambda)
            })
            .collect();
        let normalizer = ratios.iter().rev().sum();
        Ok(Self {
            basis,
            ratios,
            normalizer,
        })
    }

    /// Truncated degrees of freedom `Σ_{j<M} μ_j/(μ_j+λ)`.
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut e = vec![0.0; self.ratios.len()];
        self.basis.eval_into(x, &mut e);
        let total: f64 = self
            .ratios
            .iter()
            .zip(&e)
            .rev()
            .map(|(r, v)| r * v * v)
            .sum();
        total / self.normalizer
    }
}

/// `(T*T)_{ij} = η_i^{1/2} η_j^{1/2} k(v_i, v_j)` for the quadrature feature map.
pub fn gram_quadrature<K: Kernel<f64>>(ws: &WeightedPointSet<f64>, kernel: &K) -> DMatrix<f64> {
    let mut g = kernel.gram(ws.points());
    scale_by_weights(&mut g, ws.weights());
    g
}

/// Estimate of `(T*T)_{ij} = η_i^{1/2} η_j^{1/2} ∫ φ(v_i,x) φ(v_j,x) dρ(x)`
/// from `mc_points` equal-weight points of `ρ`.
pub fn gram_feature_estimate<F: FeatureMap<f64>>(
    ws: &WeightedPointSet<F::Index>,
    map: &F,
    rho: &Measure,
    mc_points: usize,
    scheme: Discretization,
) -> Result<DMatrix<f64>> {
    let xs = rho.discretize(mc_points, scheme)?;
    let n = ws.len();
    let m = xs.len();
    let phi = DMatrix::from_fn(n, m, |i, k| map.eval(&ws.points()[i], &xs.points()[k]));
    let mut g = &phi * phi.transpose() / m as f64;
    scale_by_weights(&mut g, ws.weights());
    Ok(g)
}

fn scale_by_weights(g: &mut DMatrix<f64>, weights: &[f64]) {
    let roots: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let n = roots.len();
    for j in 0..n {
        for i in 0..n {
            g[(i, j)] *= roots[i] * roots[j];
        }
    }
}

/// `diag(A (A + λI)^{-1})` via a Cholesky solve of `(A + λI) X = A`.
pub fn leverage_scores(a: &DMatrix<f64>, lambda: f64) -> Result<DVector<f64>> {
    if !(lambda > 0.0) {
        return Err(Error::OutOfDomain {
            name: "lambda",
            value: lambda,
            domain: "(0, inf)",
        });
    }
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    let chol = JitteredCholesky::new(add_diagonal(a.clone(), lambda))?;
    let x = chol.solve_matrix(a);
    Ok(x.diagonal())
}

/// Leverage scores over a discretized base measure and the sampling
/// distribution they induce.
#[derive(Debug, Clone)]
pub struct LeverageProfile<P> {
    base: WeightedPointSet<P>,
    scores: Vec<f64>,
    lambda: f64,
    normalization: f64,
}

impl<P: Clone> LeverageProfile<P> {
    /// `gram` is `T*T` on `base`, e.g. from [`gram_quadrature`].
    pub fn new(base: WeightedPointSet<P>, gram: &DMatrix<f64>, lambda: f64) -> Result<Self> {
        if gram.nrows() != base.len() {
            return Err(Error::DimensionMismatch {
                expected: base.len(),
                found: gram.nrows(),
            });
        }
        let scores: Vec<f64> = leverage_scores(gram, lambda)?.iter().copied().collect();
        let normalization: f64 = scores.iter().sum();
        if !(normalization > 0.0) {
            return Err(Error::NotPositiveDefinite {
                jitter: 0.0,
                trace: gram.trace(),
            });
        }
        Ok(Self {
            base,
            scores,
            lambda,
            normalization,
        })
    }

    pub fn base(&self) -> &WeightedPointSet<P> {
        &self.base
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `Σ_i score_i`, the discretized degrees of freedom.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Sampling probabilities `P_i = score_i / Σ score`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.scores.iter().map(|s| s / self.normalization).collect()
    }

    /// Density with respect to the counting measure on the atoms, `P_i`.
    pub fn density_wrt_counting(&self) -> Vec<f64> {
        self.probabilities()
    }

    /// Density with respect to the discretized base measure, `P_i / η_i`.
    pub fn density_wrt_base(&self) -> Vec<f64> {
        self.probabilities()
            .iter()
            .zip(self.base.weights())
            .map(|(p, w)| p / w)
            .collect()
    }

    /// `n` iid draws with probabilities `P_i`, returned with `q = P_i / η_i`.
    pub fn resample(&self, n: usize, seed: u64) -> (Vec<P>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = WeightedIndex::new(&self.scores).expect("scores are positive");
        let q = self.density_wrt_base();
        (0..n)
            .map(|_| {
                let i = dist.sample(&mut rng);
                (self.base.points()[i].clone(), q[i])
            })
            .unzip()
    }
}

/// Ratio of the largest to the smallest entry.
pub fn max_min_ratio(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}
