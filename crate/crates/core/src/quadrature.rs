//! Regularized quadrature weights, worst-case and per-function errors, and
//! the function approximation `ĥ` induced by a rule.
//!
//! A rule samples points `x_i` with density `q` relative to `ρ` and stores
//! importance-scaled weights `β_i`; the weight applied to `h(x_i)` is
//! `α_i = β_i / q(x_i)^{1/2}`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::baselines::SimpleRule;
use crate::error::{Error, Result};
use crate::kernels::{Kernel, MercerBasis};
use crate::linalg::{add_diagonal, JitteredCholesky};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<P> {
    points: Vec<P>,
    q_values: Vec<f64>,
    beta: Vec<f64>,
    lambda: f64,
    jitter: f64,
}

impl<P> QuadratureRule<P> {
    pub fn new(points: Vec<P>, q_values: Vec<f64>, beta: Vec<f64>, lambda: f64) -> Result<Self> {
        check_lengths(points.len(), &q_values)?;
        check_lengths(points.len(), &beta)?;
        if !(lambda >= 0.0) {
            return Err(Error::OutOfDomain {
                name: "lambda",
                value: lambda,
                domain: "[0, inf)",
            });
        }
        Ok(Self {
            points,
            q_values,
            beta,
            lambda,
            jitter: 0.0,
        })
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn q_values(&self) -> &[f64] {
        &self.q_values
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Relative diagonal jitter the solver needed (0 when none).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `α_i = β_i / q_i^{1/2}`.
    pub fn weights(&self) -> Vec<f64> {
        self.beta
            .iter()
            .zip(&self.q_values)
            .map(|(b, q)| b / q.sqrt())
            .collect()
    }

    pub fn beta_norm_sq(&self) -> f64 {
        self.beta.iter().map(|b| b * b).sum()
    }

    /// `Σ_i β_i h(x_i) / q_i^{1/2}`.
    pub fn integrate(&self, h_values: &[f64]) -> Result<f64> {
        check_lengths(self.len(), h_values)?;
        Ok(self
            .weights()
            .iter()
            .zip(h_values)
            .map(|(a, h)| a * h)
            .sum())
    }
}

impl QuadratureRule<f64> {
    /// Writes `x,q,beta` rows.
    pub fn to_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,q,beta")?;
        for ((x, q), b) in self.points.iter().zip(&self.q_values).zip(&self.beta) {
            writeln!(out, "{x:.16e},{q:.16e},{b:.16e}")?;
        }
        Ok(())
    }
}

impl From<&SimpleRule> for QuadratureRule<f64> {
    /// Plain weights become `β` with `q ≡ 1`.
    fn from(rule: &SimpleRule) -> Self {
        Self {
            points: rule.points.clone(),
            q_values: vec![1.0; rule.points.len()],
            beta: rule.weights.clone(),
            lambda: 0.0,
            jitter: 0.0,
        }
    }
}

fn check_lengths(expected: usize, values: &[f64]) -> Result<()> {
    if values.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: values.len(),
        });
    }
    Ok(())
}

/// `K̃_ij = k(x_i, x_j) / (q_i q_j)^{1/2}`.
pub fn scaled_gram<P, K: Kernel<P>>(kernel: &K, points: &[P], q_values: &[f64]) -> DMatrix<f64> {
    let mut g = kernel.gram(points);
    let roots: Vec<f64> = q_values.iter().map(|q| q.sqrt()).collect();
    let n = points.len();
    for j in 0..n {
        for i in 0..n {
            g[(i, j)] /= roots[i] * roots[j];
        }
    }
    g
}

fn scaled_embedding(z: &[f64], q_values: &[f64]) -> DVector<f64> {
    DVector::from_iterator(z.len(), z.iter().zip(q_values).map(|(z, q)| z / q.sqrt()))
}

/// `β = (K̃ + nλI)^{-1} z̃` with `z̃_i = z(x_i)/q_i^{1/2}`.
///
/// `λ = 0` is solved with diagonal jitter and fails with
/// [`Error::SingularSystem`] past the jitter budget.
pub fn solve_weights<P, K: Kernel<P>>(
    kernel: &K,
    points: Vec<P>,
    q_values: Vec<f64>,
    lambda: f64,
    z: &[f64],
) -> Result<QuadratureRule<P>> {
    let n = points.len();
    if n == 0 {
        return Err(Error::InvalidArgument("a rule needs at least one point".into()));
    }
    check_lengths(n, &q_values)?;
    check_lengths(n, z)?;
    if let Some(&q) = q_values.iter().find(|q| !(**q > 0.0)) {
        return Err(Error::OutOfDomain {
            name: "q",
            value: q,
            domain: "(0, inf)",
        });
    }
    if !(lambda >= 0.0) {
        return Err(Error::OutOfDomain {
            name: "lambda",
            value: lambda,
            domain: "[0, inf)",
        });
    }
    let k = scaled_gram(kernel, &points, &q_values);
    let system = add_diagonal(k, n as f64 * lambda);
    let chol = JitteredCholesky::new(system).map_err(|e| match (e, lambda == 0.0) {
        (Error::NotPositiveDefinite { jitter, .. }, true) => Error::SingularSystem { jitter },
        (e, _) => e,
    })?;
    let beta = chol.solve(&scaled_embedding(z, &q_values));
    Ok(QuadratureRule {
        points,
        q_values,
        beta: beta.iter().copied().collect(),
        lambda,
        jitter: chol.jitter(),
    })
}

/// `‖Σ α_i k(·,x_i) − z‖²_F = C − 2 β·z̃ + βᵀ K̃ β`, with round-off negatives clipped.
pub fn worst_case_error_sq<P, K: Kernel<P>>(
    rule: &QuadratureRule<P>,
    kernel: &K,
    z: &[f64],
    c: f64,
) -> Result<f64> {
    check_lengths(rule.len(), z)?;
    let k = scaled_gram(kernel, &rule.points, &rule.q_values);
    let beta = DVector::from_column_slice(&rule.beta);
    let zt = scaled_embedding(z, &rule.q_values);
    let cross = beta.dot(&zt);
    let quad = beta.dot(&(&k * &beta));
    let value = c - 2.0 * cross + quad;
    let scale = c.abs() + 2.0 * cross.abs() + quad.abs();
    Ok(if value < 0.0 && value > -1e-12 * scale.max(1.0) {
        0.0
    } else {
        value
    })
}

/// Worst expected squared error under noise of variance `τ² q(x_i)`:
/// `wce² + τ² ‖β‖²`.
pub fn noisy_error_expectation<P>(
    rule: &QuadratureRule<P>,
    worst_case_sq: f64,
    tau: f64,
) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::OutOfDomain {
            name: "tau",
            value: tau,
            domain: "[0, inf)",
        });
    }
    Ok(worst_case_sq + tau * tau * rule.beta_norm_sq())
}

/// A function `Σ_j c_j e_j` on a truncated Mercer basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub coefficients: Vec<f64>,
    /// Order of the Sobolev norm the function was normalized in, if any.
    pub smoothness: Option<u32>,
}

impl TestFunction {
    pub fn new(coefficients: Vec<f64>, smoothness: Option<u32>) -> Self {
        Self {
            coefficients,
            smoothness,
        }
    }

    pub fn eval<B: MercerBasis + ?Sized>(&self, basis: &B, x: f64) -> f64 {
        let mut e = vec![0.0; self.coefficients.len()];
        basis.eval_into(x, &mut e);
        self.coefficients.iter().zip(&e).map(|(c, v)| c * v).sum()
    }

    pub fn eval_many<B: MercerBasis + ?Sized>(&self, basis: &B, xs: &[f64]) -> Vec<f64> {
        let mut e = vec![0.0; self.coefficients.len()];
        xs.iter()
            .map(|&x| {
                basis.eval_into(x, &mut e);
                self.coefficients.iter().zip(&e).map(|(c, v)| c * v).sum()
            })
            .collect()
    }

    /// `∫ h dρ` for a basis whose first eigenfunction is the constant 1.
    pub fn integral(&self) -> f64 {
        self.coefficients.first().copied().unwrap_or(0.0)
    }

    /// `Σ_j c_j² / μ_j`.
    pub fn rkhs_norm_sq<B: MercerBasis + ?Sized>(&self, basis: &B) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(j, c)| c * c / basis.eigenvalue(j))
            .sum()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum()
    }

    /// `‖self − other‖²_{L²(ρ)}`, padding the shorter expansion with zeros.
    pub fn l2_distance_sq(&self, other: &TestFunction) -> f64 {
        let n = self.coefficients.len().max(other.coefficients.len());
        (0..n)
            .map(|j| {
                let a = self.coefficients.get(j).copied().unwrap_or(0.0);
                let b = other.coefficients.get(j).copied().unwrap_or(0.0);
                (a - b) * (a - b)
            })
            .sum()
    }
}

/// Coefficients `μ_j^{1/2} g_j` with iid standard normal `g_j`, rescaled to
/// unit RKHS norm for `basis`.
pub fn sample_test_function<B: MercerBasis + ?Sized>(
    basis: &B,
    terms: usize,
    seed: u64,
) -> Result<TestFunction> {
    if terms == 0 {
        return Err(Error::InvalidArgument("test functions need at least one term".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: Vec<f64> = (0..terms).map(|_| StandardNormal.sample(&mut rng)).collect();
    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    let coefficients = g
        .iter()
        .enumerate()
        .map(|(j, x)| basis.eigenvalue(j).sqrt() * x / norm)
        .collect();
    Ok(TestFunction::new(coefficients, None))
}

/// Ridge system `min_β ‖t − Φβ‖² + nλ‖β‖²` for an `M × n` feature matrix,
/// factored on whichever side is smaller.
#[derive(Debug, Clone)]
pub struct SpanSystem {
    phi: DMatrix<f64>,
    chol: JitteredCholesky,
    basis_side: bool,
}

impl SpanSystem {
    pub fn new(phi: DMatrix<f64>, lambda: f64) -> Result<Self> {
        let (m, n) = phi.shape();
        if n == 0 || m == 0 {
            return Err(Error::InvalidArgument("empty feature matrix".into()));
        }
        let shift = n as f64 * lambda;
        let basis_side = m < n;
        let system = if basis_side {
            &phi * phi.transpose()
        } else {
            phi.transpose() * &phi
        };
        let chol = JitteredCholesky::new(add_diagonal(system, shift)).map_err(|e| match e {
            Error::NotPositiveDefinite { jitter, .. } if lambda == 0.0 => {
                Error::SingularSystem { jitter }
            }
            e => e,
        })?;
        Ok(Self {
            phi,
            chol,
            basis_side,
        })
    }

    /// Feature matrix with columns `q_i^{-1/2} μ_j^{1/2} e_j(x_i)`, `j < terms`.
    pub fn quadrature_features<B: MercerBasis + ?Sized>(
        basis: &B,
        terms: usize,
        points: &[f64],
        q_values: &[f64],
    ) -> DMatrix<f64> {
        let roots: Vec<f64> = (0..terms).map(|j| basis.eigenvalue(j).sqrt()).collect();
        let mut phi = DMatrix::zeros(terms, points.len());
        let mut e = vec![0.0; terms];
        for (i, (&x, &q)) in points.iter().zip(q_values).enumerate() {
            basis.eval_into(x, &mut e);
            let w = 1.0 / q.sqrt();
            for j in 0..terms {
                phi[(j, i)] = w * roots[j] * e[j];
            }
        }
        phi
    }

    pub fn phi(&self) -> &DMatrix<f64> {
        &self.phi
    }

    pub fn jitter(&self) -> f64 {
        self.chol.jitter()
    }

    /// Returns `(β, Φβ)`.
    pub fn solve(&self, target: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let beta = if self.basis_side {
            self.phi.transpose() * self.chol.solve(target)
        } else {
            self.chol.solve(&(self.phi.transpose() * target))
        };
        let fitted = &self.phi * &beta;
        (beta, fitted)
    }
}

/// `ĥ = Σ^{1/2} Σ̂ (Σ̂ + λ)^{-1} Σ^{-1/2} h` on the first `terms` basis
/// functions, with `Σ̂` assembled from the rule's points and densities.
pub fn approximate_function<B: MercerBasis + ?Sized>(
    rule: &QuadratureRule<f64>,
    h: &TestFunction,
    basis: &B,
    terms: usize,
) -> Result<TestFunction> {
    let phi = SpanSystem::quadrature_features(basis, terms, &rule.points, &rule.q_values);
    let system = SpanSystem::new(phi, rule.lambda)?;
    Ok(approximate_with(&system, h, basis))
}

/// [`approximate_function`] against a prepared quadrature-feature system.
pub fn approximate_with<B: MercerBasis + ?Sized>(
    system: &SpanSystem,
    h: &TestFunction,
    basis: &B,
) -> TestFunction {
    let terms = system.phi().nrows();
    let roots: Vec<f64> = (0..terms).map(|j| basis.eigenvalue(j).sqrt()).collect();
    let g = DVector::from_fn(terms, |j, _| {
        h.coefficients.get(j).copied().unwrap_or(0.0) / roots[j]
    });
    let (_, fitted) = system.solve(&g);
    let coefficients = fitted.iter().zip(&roots).map(|(f, r)| f * r).collect();
    TestFunction::new(coefficients, h.smoothness)
}

/// `‖Σ^{-r}(ĥ − h)‖_{L²} = (Σ_j μ_j^{-2r} (ĥ_j − h_j)²)^{1/2}` for `r ∈ [0, 1/2]`.
pub fn stronger_norm_error<B: MercerBasis + ?Sized>(
    h: &TestFunction,
    h_hat: &TestFunction,
    r: f64,
    basis: &B,
) -> Result<f64> {
    if !(0.0..=0.5).contains(&r) {
        return Err(Error::OutOfDomain {
            name: "r",
            value: r,
            domain: "[0, 1/2]",
        });
    }
    let n = h.coefficients.len().max(h_hat.coefficients.len());
    let total: f64 = (0..n)
        .map(|j| {
            let a = h.coefficients.get(j).copied().unwrap_or(0.0);
            let b = h_hat.coefficients.get(j).copied().unwrap_or(0.0);
            basis.eigenvalue(j).powf(-2.0 * r) * (a - b) * (a - b)
        })
        .sum();
    Ok(total.sqrt())
}
