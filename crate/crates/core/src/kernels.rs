//! Kernels, Mercer eigenbases and mean embeddings.
//!
//! The periodic Sobolev kernel of order `s` on `[0,1]` is
//! `k(x,y) = 1 + 2 Σ_{m≥1} m^(-2s) cos 2πm(x−y)`, evaluated in closed form
//! through the Bernoulli polynomial `B_{2s}`. Its eigenbasis with respect to
//! the uniform measure is indexed from 0:
//!
//! | index      | eigenfunction       | eigenvalue  |
//! |------------|---------------------|-------------|
//! | `0`        | `1`                 | `1`         |
//! | `2m − 1`   | `√2 cos(2πmx)`      | `m^(-2s)`   |
//! | `2m`       | `√2 sin(2πmx)`      | `m^(-2s)`   |

use std::borrow::Borrow;
use std::f64::consts::{PI, SQRT_2};
use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::measures::{Discretization, Measure, WeightedPointSet};
use crate::spectrum::{hurwitz_zeta, SpectrumSpec};

/// Default size of the quantile grid behind numeric mean embeddings.
pub const DEFAULT_EMBEDDING_GRID: usize = 10_000;

/// A symmetric positive-definite kernel on points of type `P`.
pub trait Kernel<P: ?Sized>: Send + Sync {
    fn eval(&self, x: &P, y: &P) -> f64;

    fn gram<T: Borrow<P>>(&self, points: &[T]) -> DMatrix<f64>
    where
        Self: Sized,
    {
        let n = points.len();
        let mut g = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = self.eval(points[i].borrow(), points[j].borrow());
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }
}

/// Orthonormal eigenfunctions `e_j` of the integral operator together with
/// their eigenvalues `μ_j`, indexed from 0 in non-increasing eigenvalue order.
pub trait MercerBasis: Send + Sync {
    fn eigenvalue(&self, j: usize) -> f64;

    fn eigenfunction(&self, j: usize, x: f64) -> f64;

    /// Fills `out[j] = e_j(x)` for `j < out.len()`.
    fn eval_into(&self, x: f64, out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.eigenfunction(j, x);
        }
    }

    /// The measure the basis is orthonormal under.
    fn measure(&self) -> Measure;

    /// `Σ_{j ≥ count} μ_j`.
    fn eigen_tail(&self, count: usize) -> f64;

    /// Index of an eigenfunction identically equal to 1, if there is one.
    fn constant_index(&self) -> Option<usize> {
        None
    }

    /// `∫ k(x,x) dρ = Σ_j μ_j`.
    fn trace(&self) -> f64 {
        self.eigen_tail(0)
    }

    /// The first `count` eigenvalues as an explicit spectrum.
    fn spectrum(&self, count: usize) -> Result<SpectrumSpec> {
        SpectrumSpec::explicit((0..count).map(|j| self.eigenvalue(j)).collect())
    }
}

/// `B_order(t)` for `order ∈ {2, 4, 6, 8}`.
pub fn bernoulli_polynomial(order: u32, t: f64) -> Result<f64> {
    let coeffs: &[f64] = match order {
        2 => &[1.0 / 6.0, -1.0, 1.0],
        4 => &[-1.0 / 30.0, 0.0, 1.0, -2.0, 1.0],
        6 => &[1.0 / 42.0, 0.0, -0.5, 0.0, 2.5, -3.0, 1.0],
        8 => &[-1.0 / 30.0, 0.0, 2.0 / 3.0, 0.0, -7.0 / 3.0, 0.0, 14.0 / 3.0, -4.0, 1.0],
        _ => return Err(Error::UnsupportedOrder { order }),
    };
    Ok(horner(coeffs, t))
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

/// `t − ⌊t⌋`, in `[0, 1)` for negative arguments too.
pub fn fractional_part(t: f64) -> f64 {
    let f = t - t.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Periodic Sobolev kernel of order `s ∈ {1,2,3,4}`, with its Fourier eigenbasis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevKernel {
    s: u32,
    scale: f64,
}

impl SobolevKernel {
    pub fn new(s: u32) -> Result<Self> {
        if !(1..=4).contains(&s) {
            return Err(Error::UnsupportedOrder { order: 2 * s });
        }
        let sign = if s % 2 == 1 { 1.0 } else { -1.0 };
        let factorial: f64 = (1..=2 * s).map(f64::from).product();
        Ok(Self {
            s,
            scale: sign * (2.0 * PI).powi(2 * s as i32) / factorial,
        })
    }

    pub fn order(&self) -> u32 {
        self.s
    }

    pub fn eval_pair(&self, x: f64, y: f64) -> f64 {
        let t = fractional_part(x - y);
        let b = bernoulli_polynomial(2 * self.s, t).expect("order validated in new");
        1.0 + self.scale * b
    }

    /// `k(x,x) = 1 + 2ζ(2s)`.
    pub fn diagonal(&self) -> f64 {
        self.eval_pair(0.0, 0.0)
    }

    /// Frequency `m` of basis index `j` (0 for the constant).
    pub fn frequency(j: usize) -> usize {
        j.div_ceil(2)
    }
}

/// Closed-form periodic Sobolev kernel value.
pub fn sobolev_periodic_eval(s: u32, x: f64, y: f64) -> Result<f64> {
    Ok(SobolevKernel::new(s)?.eval_pair(x, y))
}

impl Kernel<f64> for SobolevKernel {
    fn eval(&self, x: &f64, y: &f64) -> f64 {
        self.eval_pair(*x, *y)
    }
}

impl MercerBasis for SobolevKernel {
    fn eigenvalue(&self, j: usize) -> f64 {
        if j == 0 {
            1.0
        } else {
            (Self::frequency(j) as f64).powi(-2 * self.s as i32)
        }
    }

    fn eigenfunction(&self, j: usize, x: f64) -> f64 {
        if j == 0 {
            return 1.0;
        }
        let arg = 2.0 * PI * Self::frequency(j) as f64 * x;
        if j % 2 == 1 {
            SQRT_2 * arg.cos()
        } else {
            SQRT_2 * arg.sin()
        }
    }

    fn eval_into(&self, x: f64, out: &mut [f64]) {
        if out.is_empty() {
            return;
        }
        out[0] = 1.0;
        let (s1, c1) = (2.0 * PI * x).sin_cos();
        let (mut c, mut s) = (1.0, 0.0);
        let mut m = 0usize;
        let mut j = 1;
        while j < out.len() {
            m += 1;
            // re-anchor the rotation periodically to bound drift
            if m.is_multiple_of(64) {
                (s, c) = (2.0 * PI * m as f64 * x).sin_cos();
            } else {
                (c, s) = (c * c1 - s * s1, s * c1 + c * s1);
            }
            out[j] = SQRT_2 * c;
            if j + 1 < out.len() {
                out[j + 1] = SQRT_2 * s;
            }
            j += 2;
        }
    }

    fn measure(&self) -> Measure {
        Measure::Uniform
    }

    fn eigen_tail(&self, count: usize) -> f64 {
        let e = 2.0 * self.s as f64;
        if count == 0 {
            return 1.0 + 2.0 * hurwitz_zeta(e, 1);
        }
        let last = count - 1;
        let m = Self::frequency(last);
        let rest = 2.0 * hurwitz_zeta(e, m + 1);
        if last % 2 == 1 {
            // cosine of pair m included, sine not
            rest + (m as f64).powf(-e)
        } else {
            rest
        }
    }

    fn constant_index(&self) -> Option<usize> {
        Some(0)
    }
}

/// Cosine basis `1, √2 cos(πjx)` on `[0,1]` with eigenvalues drawn from a
/// spectrum (`μ_j` is the spectrum's `(j+1)`-th value).
#[derive(Debug, Clone, PartialEq)]
pub struct CosineBasis {
    spectrum: SpectrumSpec,
}

impl CosineBasis {
    pub fn new(spectrum: SpectrumSpec) -> Self {
        Self { spectrum }
    }
}

impl MercerBasis for CosineBasis {
    fn eigenvalue(&self, j: usize) -> f64 {
        self.spectrum.value(j + 1).unwrap_or(0.0)
    }

    fn eigenfunction(&self, j: usize, x: f64) -> f64 {
        if j == 0 {
            1.0
        } else {
            SQRT_2 * (PI * j as f64 * x).cos()
        }
    }

    fn measure(&self) -> Measure {
        Measure::Uniform
    }

    fn eigen_tail(&self, count: usize) -> f64 {
        self.spectrum.tail_sum(count)
    }

    fn constant_index(&self) -> Option<usize> {
        Some(0)
    }
}

/// `Σ_{j<M} μ_j e_j(x) e_j(y)`.
pub fn mercer_truncated_eval<B: MercerBasis + ?Sized>(
    basis: &B,
    terms: usize,
    x: f64,
    y: f64,
) -> Result<f64> {
    if terms == 0 {
        return Err(Error::InvalidArgument("truncation must be at least 1".into()));
    }
    let mut ex = vec![0.0; terms];
    let mut ey = vec![0.0; terms];
    basis.eval_into(x, &mut ex);
    basis.eval_into(y, &mut ey);
    Ok((0..terms)
        .rev()
        .map(|j| basis.eigenvalue(j) * ex[j] * ey[j])
        .sum())
}

/// `exp(−α‖x−y‖²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianKernel {
    pub alpha: f64,
}

impl GaussianKernel {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::OutOfDomain {
                name: "alpha",
                value: alpha,
                domain: "(0, inf)",
            });
        }
        Ok(Self { alpha })
    }
}

impl Kernel<[f64]> for GaussianKernel {
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        assert_eq!(x.len(), y.len(), "gaussian kernel arguments differ in dimension");
        let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        (-self.alpha * d2).exp()
    }
}

pub fn gaussian_eval(alpha: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(GaussianKernel::new(alpha)?.eval(x, y))
}

/// Tensor-product kernel `∏_j k_j(x_j, y_j)` on `[0,1]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductKernel<K> {
    factors: Vec<K>,
}

impl<K: Kernel<f64>> ProductKernel<K> {
    pub fn new(factors: Vec<K>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument("product kernel needs a factor".into()));
        }
        Ok(Self { factors })
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[K] {
        &self.factors
    }
}

impl<K: Kernel<f64>> Kernel<[f64]> for ProductKernel<K> {
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        product_kernel_eval(&self.factors, x, y).expect("point dimension matches factor count")
    }
}

pub fn product_kernel_eval<K: Kernel<f64>>(factors: &[K], x: &[f64], y: &[f64]) -> Result<f64> {
    for len in [x.len(), y.len()] {
        if len != factors.len() {
            return Err(Error::DimensionMismatch {
                expected: factors.len(),
                found: len,
            });
        }
    }
    Ok(factors
        .iter()
        .zip(x.iter().zip(y))
        .map(|(k, (a, b))| k.eval(a, b))
        .product())
}

/// Weight function `g` in the integral `∫ h g dρ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestWeight {
    One,
    Eigenfunction(usize),
}

/// `z(x) = ∫ k(x,y) g(y) dρ(y)` and `C = ∬ k g g dρ dρ`.
///
/// Closed forms are used when `ρ` is the measure of the kernel's eigenbasis;
/// otherwise the integrals are taken on an equal-weight quantile grid of `ρ`.
#[derive(Debug, Clone)]
pub struct MeanEmbedding<K> {
    kernel: K,
    weight: TestWeight,
    mode: EmbeddingMode,
}

#[derive(Debug, Clone)]
enum EmbeddingMode {
    Closed { index: usize },
    Grid {
        grid: WeightedPointSet<f64>,
        g_values: Vec<f64>,
        norm_sq: OnceLock<f64>,
    },
}

impl<K: Kernel<f64> + MercerBasis> MeanEmbedding<K> {
    /// `fallback_grid` is the grid size used when no closed form applies.
    pub fn new(
        kernel: K,
        weight: TestWeight,
        measure: &Measure,
        fallback_grid: Option<usize>,
    ) -> Result<Self> {
        let closed_index = match weight {
            TestWeight::One => kernel.constant_index(),
            TestWeight::Eigenfunction(j) => Some(j),
        };
        if *measure == kernel.measure() {
            if let Some(index) = closed_index {
                return Ok(Self {
                    kernel,
                    weight,
                    mode: EmbeddingMode::Closed { index },
                });
            }
        }
        let Some(n) = fallback_grid else {
            return Err(Error::UnsupportedEmbedding(format!(
                "{weight:?} against {measure:?}"
            )));
        };
        let grid = measure.discretize(n, Discretization::QuantileGrid)?;
        let g_values = grid
            .points()
            .iter()
            .map(|&y| match weight {
                TestWeight::One => 1.0,
                TestWeight::Eigenfunction(j) => kernel.eigenfunction(j, y),
            })
            .collect();
        Ok(Self {
            kernel,
            weight,
            mode: EmbeddingMode::Grid {
                grid,
                g_values,
                norm_sq: OnceLock::new(),
            },
        })
    }

    pub fn weight(&self) -> TestWeight {
        self.weight
    }

    /// True when values come from the quantile-grid fallback.
    pub fn is_numeric(&self) -> bool {
        matches!(self.mode, EmbeddingMode::Grid { .. })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.mode {
            EmbeddingMode::Closed { index } => {
                self.kernel.eigenvalue(*index) * self.kernel.eigenfunction(*index, x)
            }
            EmbeddingMode::Grid { grid, g_values, .. } => grid
                .points()
                .iter()
                .zip(grid.weights())
                .zip(g_values)
                .map(|((y, w), g)| w * g * self.kernel.eval(&x, y))
                .sum(),
        }
    }

    pub fn eval_many(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }

    /// `C = ∬ k(x,y) g(x) g(y) dρ(x) dρ(y)`.
    pub fn norm_sq(&self) -> f64 {
        match &self.mode {
            EmbeddingMode::Closed { index } => self.kernel.eigenvalue(*index),
            EmbeddingMode::Grid {
                grid,
                g_values,
                norm_sq,
            } => *norm_sq.get_or_init(|| {
                grid.points()
                    .iter()
                    .zip(grid.weights())
                    .zip(g_values)
                    .map(|((x, w), g)| w * g * self.eval(*x))
                    .sum::<f64>()
                    .max(0.0)
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::is_psd;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Exact rational Bernoulli numbers `B_n(0)` from the Akiyama–Tanigawa algorithm.
    fn bernoulli_number(n: usize) -> f64 {
        let mut a: Vec<(i128, i128)> = Vec::new();
        let mut result = (0i128, 1i128);
        for m in 0..=n {
            a.push((1, m as i128 + 1));
            for j in (1..=m).rev() {
                let (p1, q1) = a[j - 1];
                let (p2, q2) = a[j];
                let (num, den) = ((p1 * q2 - p2 * q1) * j as i128, q1 * q2);
                let g = gcd(num.abs(), den);
                a[j - 1] = (num / g, den / g);
            }
            result = a[0];
        }
        result.0 as f64 / result.1 as f64
    }

    fn gcd(a: i128, b: i128) -> i128 {
        if b == 0 {
            a.max(1)
        } else {
            gcd(b, a % b)
        }
    }

    #[test]
    fn bernoulli_values() {
        assert_relative_eq!(bernoulli_polynomial(2, 0.0).unwrap(), 1.0 / 6.0);
        assert_relative_eq!(bernoulli_polynomial(2, 0.5).unwrap(), -1.0 / 12.0, epsilon = 1e-15);
        assert_relative_eq!(bernoulli_polynomial(4, 0.0).unwrap(), -1.0 / 30.0);
        for order in [2u32, 4, 6, 8] {
            let b0 = bernoulli_polynomial(order, 0.0).unwrap();
            assert_relative_eq!(b0, bernoulli_number(order as usize), max_relative = 1e-14);
            // B_n(1) = B_n(0) for n ≥ 2
            assert_relative_eq!(
                bernoulli_polynomial(order, 1.0).unwrap(),
                b0,
                epsilon = 1e-13
            );
        }
        assert!(matches!(
            bernoulli_polynomial(3, 0.1),
            Err(Error::UnsupportedOrder { order: 3 })
        ));
    }

    #[test]
    fn bernoulli_polynomials_integrate_to_zero() {
        let n = 20_000;
        for order in [2u32, 4, 6, 8] {
            let integral: f64 = (0..n)
                .map(|i| bernoulli_polynomial(order, (i as f64 + 0.5) / n as f64).unwrap())
                .sum::<f64>()
                / n as f64;
            assert!(integral.abs() < 1e-8, "order {order}: {integral}");
        }
    }

    fn sobolev_series(s: u32, t: f64, terms: usize) -> f64 {
        1.0 + 2.0
            * (1..=terms)
                .rev()
                .map(|m| (m as f64).powi(-2 * s as i32) * (2.0 * PI * m as f64 * t).cos())
                .sum::<f64>()
    }

    #[test]
    fn sobolev_diagonal_and_antipode() {
        let kxx = sobolev_periodic_eval(1, 0.3, 0.3).unwrap();
        assert_relative_eq!(kxx, 1.0 + PI * PI / 3.0, max_relative = 1e-14);
        assert_relative_eq!(kxx, 4.28987, epsilon = 1e-5);
        assert_relative_eq!(kxx, sobolev_series(1, 0.0, 1_000_000), epsilon = 3e-6);

        let anti = sobolev_periodic_eval(1, 0.0, 0.5).unwrap();
        assert_relative_eq!(anti, 1.0 - PI * PI / 6.0, max_relative = 1e-14);
        assert_relative_eq!(anti, -0.64493, epsilon = 1e-5);
        assert_relative_eq!(anti, sobolev_series(1, 0.5, 1_000_000), epsilon = 1e-6);
    }

    #[test]
    fn sobolev_order_bounds() {
        assert!(SobolevKernel::new(0).is_err());
        assert!(SobolevKernel::new(5).is_err());
        for s in 1..=4 {
            let k = SobolevKernel::new(s).unwrap();
            let zeta = hurwitz_zeta(2.0 * s as f64, 1);
            assert_relative_eq!(k.diagonal(), 1.0 + 2.0 * zeta, max_relative = 1e-13);
            assert_relative_eq!(k.trace(), k.diagonal(), max_relative = 1e-12);
        }
    }

    #[test]
    fn sobolev_matches_mercer_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for s in [1u32, 2] {
            let k = SobolevKernel::new(s).unwrap();
            for _ in 0..100 {
                let (x, y): (f64, f64) = (rng.random(), rng.random());
                let series = mercer_truncated_eval(&k, 100_000, x, y).unwrap();
                assert!((series - k.eval_pair(x, y)).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn mercer_truncation_examples() {
        let k = SobolevKernel::new(1).unwrap();
        assert_eq!(mercer_truncated_eval(&k, 1, 0.2, 0.7).unwrap(), 1.0);
        assert!(mercer_truncated_eval(&k, 0, 0.2, 0.7).is_err());
        let (x, y) = (0.13, 0.61);
        let exact = k.eval_pair(x, y);
        for m in [11usize, 101, 1001] {
            let approx = mercer_truncated_eval(&k, m, x, y).unwrap();
            assert!((approx - exact).abs() <= k.eigen_tail(m) * 2.0);
        }
        let mut prev = f64::INFINITY;
        for m in [1usize, 3, 9, 27, 81] {
            let err = k.diagonal() - mercer_truncated_eval(&k, m, x, x).unwrap();
            assert!(err < prev && err > 0.0);
            assert_relative_eq!(err, k.eigen_tail(m), max_relative = 1e-9);
            prev = err;
        }
    }

    #[test]
    fn fast_basis_evaluation_matches_direct() {
        let k = SobolevKernel::new(2).unwrap();
        let mut out = vec![0.0; 4001];
        for x in [0.0, 0.123, 0.5, 0.987654] {
            k.eval_into(x, &mut out);
            for (j, v) in out.iter().enumerate() {
                assert!((v - k.eigenfunction(j, x)).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn basis_is_orthonormal_on_grid() {
        let k = SobolevKernel::new(1).unwrap();
        let c = CosineBasis::new(SpectrumSpec::polynomial(2.0).unwrap());
        let n = 512;
        let m = 15;
        for basis in [&k as &dyn MercerBasis, &c] {
            let mut gram = DMatrix::<f64>::zeros(m, m);
            let mut row = vec![0.0; m];
            for i in 0..n {
                basis.eval_into((i as f64 + 0.5) / n as f64, &mut row);
                for a in 0..m {
                    for b in 0..m {
                        gram[(a, b)] += row[a] * row[b] / n as f64;
                    }
                }
            }
            assert!((gram - DMatrix::identity(m, m)).amax() < 1e-10);
        }
    }

    #[test]
    fn eigen_tail_matches_direct_sum() {
        let k = SobolevKernel::new(1).unwrap();
        let direct = |count: usize| -> f64 {
            (count..4_000_000).rev().map(|j| k.eigenvalue(j)).sum::<f64>() + 2.0 / 2_000_000.0
        };
        for count in [1usize, 2, 3, 10, 101] {
            assert_relative_eq!(k.eigen_tail(count), direct(count), max_relative = 1e-6);
        }
    }

    #[test]
    fn kernel_symmetry_and_periodicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for s in 1..=4 {
            let k = SobolevKernel::new(s).unwrap();
            for _ in 0..50 {
                let (x, y): (f64, f64) = (rng.random(), rng.random());
                assert_relative_eq!(k.eval_pair(x, y), k.eval_pair(y, x), epsilon = 1e-12);
                assert_relative_eq!(k.eval_pair(x + 1.0, y), k.eval_pair(x, y), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn fractional_part_handles_negatives() {
        assert_relative_eq!(fractional_part(-0.25), 0.75);
        assert_eq!(fractional_part(2.0), 0.0);
        assert_eq!(fractional_part(-1e-18), 0.0);
    }

    #[test]
    fn gaussian_examples() {
        assert_eq!(gaussian_eval(2.0, &[0.3, 0.1], &[0.3, 0.1]).unwrap(), 1.0);
        assert_relative_eq!(
            gaussian_eval(1.0, &[0.0, 0.0], &[1.0, 0.0]).unwrap(),
            (-1.0f64).exp()
        );
        let vals: Vec<f64> = (0..10)
            .map(|i| gaussian_eval(0.7, &[0.0], &[i as f64 * 0.3]).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[0] > w[1]));
        assert!(gaussian_eval(1.0, &[0.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn product_kernel_examples() {
        let k1 = SobolevKernel::new(1).unwrap();
        let diag = product_kernel_eval(&[k1, k1], &[0.2, 0.9], &[0.2, 0.9]).unwrap();
        assert_relative_eq!(diag, (1.0 + PI * PI / 3.0).powi(2), max_relative = 1e-13);
        assert_eq!(
            product_kernel_eval(&[k1], &[0.3], &[0.8]).unwrap(),
            k1.eval_pair(0.3, 0.8)
        );
        assert!(matches!(
            product_kernel_eval(&[k1, k1], &[0.2], &[0.2]),
            Err(Error::DimensionMismatch { .. })
        ));
        // k(x, x + t0) vanishes where 1 + 2π²(t0² − t0 + 1/6) = 0
        let t0 = 0.5 - (0.25 - 1.0 / 6.0 - 0.5 / (PI * PI)).sqrt();
        assert!(k1.eval_pair(0.0, -t0).abs() < 1e-12);
        let p = product_kernel_eval(&[k1, k1], &[0.0, 0.4], &[-t0, 0.7]).unwrap();
        assert!(p.abs() < 1e-11);
    }

    #[test]
    fn grams_are_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let xs: Vec<f64> = (0..50).map(|_| rng.random()).collect();
        for s in 1..=4 {
            let k = SobolevKernel::new(s).unwrap();
            assert!(is_psd(&k.gram(&xs), 1e-10));
        }
        let pts: Vec<Vec<f64>> = (0..50).map(|_| vec![rng.random(), rng.random()]).collect();
        let g = GaussianKernel::new(3.0).unwrap();
        assert!(is_psd(&Kernel::<[f64]>::gram(&g, &pts), 1e-10));
        let k = SobolevKernel::new(1).unwrap();
        let prod = ProductKernel::new(vec![k, k]).unwrap();
        let pg = Kernel::<[f64]>::gram(&prod, &pts);
        assert!(is_psd(&pg, 1e-10));

        // Schur product of the coordinate Grams
        let xs0: Vec<f64> = pts.iter().map(|p| p[0]).collect();
        let xs1: Vec<f64> = pts.iter().map(|p| p[1]).collect();
        let schur = k.gram(&xs0).component_mul(&k.gram(&xs1));
        assert!((pg - schur).amax() < 1e-12);
    }

    #[test]
    fn mean_embedding_uniform_is_one() {
        let k = SobolevKernel::new(2).unwrap();
        let z = MeanEmbedding::new(k, TestWeight::One, &Measure::Uniform, None).unwrap();
        assert!(!z.is_numeric());
        for i in 0..=100 {
            assert!((z.eval(i as f64 / 100.0) - 1.0).abs() < 1e-12);
        }
        assert_eq!(z.norm_sq(), 1.0);

        // independent check: grid integral of the closed-form kernel
        let n = 997;
        let grid: f64 = (0..n)
            .map(|i| k.eval_pair(0.37, (i as f64 + 0.5) / n as f64))
            .sum::<f64>()
            / n as f64;
        // aliasing of frequencies that are multiples of n: 2 Σ_k (kn)^-4
        assert!((grid - 1.0).abs() < 1e-11);
    }

    #[test]
    fn mean_embedding_of_eigenfunction() {
        let k = SobolevKernel::new(1).unwrap();
        let z = MeanEmbedding::new(k, TestWeight::Eigenfunction(3), &Measure::Uniform, None)
            .unwrap();
        for x in [0.1, 0.45, 0.8] {
            assert_relative_eq!(z.eval(x), 0.25 * k.eigenfunction(3, x));
        }
        assert_eq!(z.norm_sq(), 0.25);
    }

    #[test]
    fn mean_embedding_beta_needs_fallback() {
        let k = SobolevKernel::new(1).unwrap();
        let beta = Measure::beta(0.5).unwrap();
        assert!(matches!(
            MeanEmbedding::new(k, TestWeight::One, &beta, None),
            Err(Error::UnsupportedEmbedding(_))
        ));
        let z = MeanEmbedding::new(k, TestWeight::One, &beta, Some(DEFAULT_EMBEDDING_GRID))
            .unwrap();
        assert!(z.is_numeric());
        // oracle: midpoint rule in u with y = (1 − cos πu)/2
        let x = 0.5;
        let n = 200_000;
        let oracle: f64 = (0..n)
            .map(|i| {
                let u = (i as f64 + 0.5) / n as f64;
                k.eval_pair(x, 0.5 * (1.0 - (PI * u).cos()))
            })
            .sum::<f64>()
            / n as f64;
        assert!((z.eval(x) - oracle).abs() < 1e-3, "{} vs {oracle}", z.eval(x));
        let c = z.norm_sq();
        assert!(c > 0.0);
    }

    proptest! {
        #[test]
        fn sobolev_symmetric(s in 1u32..5, x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let k = SobolevKernel::new(s).unwrap();
            prop_assert!((k.eval_pair(x, y) - k.eval_pair(y, x)).abs() < 1e-12);
            prop_assert!(k.eval_pair(x, y) <= k.diagonal() + 1e-12);
        }
    }
}
