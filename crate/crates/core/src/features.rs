//! Feature maps `φ(v, x)` with `k(x,y) = ∫ φ(v,x) φ(v,y) dτ(v)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::error::{Error, Result};
use crate::kernels::{MercerBasis, SobolevKernel};
use crate::measures::{fourier_base_measure, fourier_normalizer, WeightedPointSet};

pub trait FeatureMap<P: ?Sized>: Send + Sync {
    type Index: Clone + Send + Sync;

    fn eval(&self, v: &Self::Index, x: &P) -> f64;

    /// Coefficients of `φ(v, ·)` on the first `terms` eigenfunctions of the
    /// map's Mercer basis, when the map has one.
    fn basis_coefficients(&self, _v: &Self::Index, _terms: usize) -> Option<Vec<f64>> {
        None
    }
}

/// `ψ(v, x) = Σ_{j<M} μ_j^{1/2} e_j(x) e_j(v)`, with base measure `ρ`.
#[derive(Debug, Clone)]
pub struct QuadratureFeature<B> {
    basis: B,
    terms: usize,
}

impl<B: MercerBasis> QuadratureFeature<B> {
    pub fn new(basis: B, terms: usize) -> Result<Self> {
        if terms == 0 {
            return Err(Error::InvalidArgument("truncation must be at least 1".into()));
        }
        Ok(Self { basis, terms })
    }

    /// Smallest truncation whose diagonal tail `Σ_{j≥M} μ_j` is below `tol`.
    pub fn for_tail(basis: B, tol: f64, max_terms: usize) -> Result<Self> {
        if basis.eigen_tail(max_terms) >= tol {
            return Err(Error::TailUncontrolled {
                lambda: tol,
                terms: max_terms,
                gap: basis.eigen_tail(max_terms),
            });
        }
        let (mut lo, mut hi) = (0usize, max_terms);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if basis.eigen_tail(mid) < tol {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Self::new(basis, hi.max(1))
    }

    pub fn basis(&self) -> &B {
        &self.basis
    }

    pub fn terms(&self) -> usize {
        self.terms
    }

    /// Diagonal truncation tail `Σ_{j≥M} μ_j`.
    pub fn tail(&self) -> f64 {
        self.basis.eigen_tail(self.terms)
    }
}

impl<B: MercerBasis> FeatureMap<f64> for QuadratureFeature<B> {
    type Index = f64;

    fn eval(&self, v: &f64, x: &f64) -> f64 {
        let mut ev = vec![0.0; self.terms];
        let mut ex = vec![0.0; self.terms];
        self.basis.eval_into(*v, &mut ev);
        self.basis.eval_into(*x, &mut ex);
        (0..self.terms)
            .rev()
            .map(|j| self.basis.eigenvalue(j).sqrt() * ev[j] * ex[j])
            .sum()
    }

    fn basis_coefficients(&self, v: &f64, terms: usize) -> Option<Vec<f64>> {
        let mut out = vec![0.0; terms];
        let keep = terms.min(self.terms);
        self.basis.eval_into(*v, &mut out[..keep]);
        for (j, c) in out[..keep].iter_mut().enumerate() {
            *c *= self.basis.eigenvalue(j).sqrt();
        }
        Some(out)
    }
}

/// Periodic Fourier features for the order-`s` Sobolev kernel against the
/// truncated frequency measure of [`fourier_base_measure`].
///
/// Index `0` is the constant, `+m` the cosine and `−m` the sine at frequency `m`.
#[derive(Debug, Clone)]
pub struct FourierPeriodicFeature {
    kernel: SobolevKernel,
    k_max: i64,
    base: WeightedPointSet<i64>,
    amplitude: f64,
}

impl FourierPeriodicFeature {
    pub fn new(s: u32, k_max: i64) -> Result<Self> {
        let kernel = SobolevKernel::new(s)?;
        let base = fourier_base_measure(s, k_max)?;
        // every frequency has ν_m / mass(±m) = Z
        let amplitude = fourier_normalizer(s, k_max).sqrt();
        Ok(Self {
            kernel,
            k_max,
            base,
            amplitude,
        })
    }

    pub fn kernel(&self) -> &SobolevKernel {
        &self.kernel
    }

    pub fn k_max(&self) -> i64 {
        self.k_max
    }

    pub fn base_measure(&self) -> &WeightedPointSet<i64> {
        &self.base
    }

    /// Position of the eigenfunction carried by frequency index `v`.
    pub fn basis_index(v: i64) -> usize {
        let m = v.unsigned_abs() as usize;
        match v.signum() {
            0 => 0,
            1 => 2 * m - 1,
            _ => 2 * m,
        }
    }

    pub fn eval_checked(&self, v: i64, x: f64) -> Result<f64> {
        if v.abs() > self.k_max {
            return Err(Error::OutOfDomain {
                name: "frequency index",
                value: v as f64,
                domain: "[-K, K]",
            });
        }
        Ok(self.amplitude * self.kernel.eigenfunction(Self::basis_index(v), x))
    }
}

impl FeatureMap<f64> for FourierPeriodicFeature {
    type Index = i64;

    fn eval(&self, v: &i64, x: &f64) -> f64 {
        self.eval_checked(*v, *x).expect("frequency index within truncation")
    }

    fn basis_coefficients(&self, v: &i64, terms: usize) -> Option<Vec<f64>> {
        let mut out = vec![0.0; terms];
        let j = Self::basis_index(*v);
        if j < terms {
            out[j] = self.amplitude;
        }
        Some(out)
    }
}

/// `√2 cos(ω·x + 2πb)`.
pub fn rff_rd_eval(omega: &[f64], b: f64, x: &[f64]) -> Result<f64> {
    if omega.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: omega.len(),
            found: x.len(),
        });
    }
    let phase: f64 = omega.iter().zip(x).map(|(w, xi)| w * xi).sum();
    Ok(std::f64::consts::SQRT_2 * (phase + 2.0 * std::f64::consts::PI * b).cos())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RffIndex {
    pub omega: Vec<f64>,
    pub b: f64,
}

/// Random Fourier features for `exp(−α‖x−y‖²)` on `R^dim`: `ω ~ N(0, 2α I)`,
/// `b ~ U[0,1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianRff {
    alpha: f64,
    dim: usize,
}

impl GaussianRff {
    pub fn new(alpha: f64, dim: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::OutOfDomain {
                name: "alpha",
                value: alpha,
                domain: "(0, inf)",
            });
        }
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        Ok(Self { alpha, dim })
    }

    pub fn sample(&self, n: usize, seed: u64) -> Vec<RffIndex> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, (2.0 * self.alpha).sqrt()).expect("positive std");
        let unit = Uniform::new(0.0, 1.0).expect("valid range");
        (0..n)
            .map(|_| RffIndex {
                omega: (0..self.dim).map(|_| normal.sample(&mut rng)).collect(),
                b: unit.sample(&mut rng),
            })
            .collect()
    }
}

impl FeatureMap<[f64]> for GaussianRff {
    type Index = RffIndex;

    fn eval(&self, v: &RffIndex, x: &[f64]) -> f64 {
        rff_rd_eval(&v.omega, v.b, x).expect("feature dimension matches point")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{gaussian_eval, mercer_truncated_eval, Kernel};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn quadrature_feature_symmetric() {
        let psi = QuadratureFeature::new(SobolevKernel::new(1).unwrap(), 201).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let (v, x): (f64, f64) = (rng.random(), rng.random());
            assert_relative_eq!(psi.eval(&v, &x), psi.eval(&x, &v), epsilon = 1e-12);
        }
    }

    #[test]
    fn quadrature_feature_reproduces_kernel_on_grid() {
        // ∫ ψ(v,x) ψ(v,y) dv over a uniform grid finer than the truncation is
        // exactly the truncated Mercer sum; compare with the closed form.
        let k = SobolevKernel::new(1).unwrap();
        let m = 401;
        let psi = QuadratureFeature::new(k, m).unwrap();
        let n = 1000;
        for (x, y) in [(0.1, 0.7), (0.33, 0.34), (0.9, 0.05)] {
            let integral: f64 = (0..n)
                .map(|i| {
                    let v = (i as f64 + 0.5) / n as f64;
                    psi.eval(&v, &x) * psi.eval(&v, &y)
                })
                .sum::<f64>()
                / n as f64;
            let truncated = mercer_truncated_eval(&k, m, x, y).unwrap();
            assert!((integral - truncated).abs() < 1e-10);
            assert!((integral - k.eval(&x, &y)).abs() <= 2.0 * psi.tail());
        }
    }

    #[test]
    fn psi_of_order_two_is_order_one_kernel() {
        let k2 = SobolevKernel::new(2).unwrap();
        let k1 = SobolevKernel::new(1).unwrap();
        let mut prev = 0.0;
        for m in [11usize, 101, 1001, 10001] {
            let psi = QuadratureFeature::new(k2, m).unwrap();
            let val = psi.eval(&0.0, &0.0);
            assert!(val > prev);
            prev = val;
        }
        assert_relative_eq!(prev, k1.diagonal(), epsilon = 1e-3);
        // tail oracle: 2 Σ_{m>5000} m^-2 ≈ 2/5000
        assert!((k1.diagonal() - prev - 2.0 / 5000.0).abs() < 1e-6);
    }

    #[test]
    fn psi_mercer_consistency() {
        let k = SobolevKernel::new(2).unwrap();
        let m = 61;
        let psi = QuadratureFeature::new(k, m).unwrap();
        for (x, y) in [(0.2, 0.8), (0.5, 0.5), (0.01, 0.99)] {
            let cx = psi.basis_coefficients(&x, m).unwrap();
            let cy = psi.basis_coefficients(&y, m).unwrap();
            let dot: f64 = cx.iter().zip(&cy).map(|(a, b)| a * b).sum();
            assert_relative_eq!(dot, mercer_truncated_eval(&k, m, x, y).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn truncation_for_tail() {
        let k = SobolevKernel::new(2).unwrap();
        let psi = QuadratureFeature::for_tail(k, 1e-8, 1 << 20).unwrap();
        assert!(psi.tail() < 1e-8);
        assert!(k.eigen_tail(psi.terms() - 1) >= 1e-8);
        // order one needs ~2·10^8 terms for the same tail
        assert!(matches!(
            QuadratureFeature::for_tail(SobolevKernel::new(1).unwrap(), 1e-8, 1 << 20),
            Err(Error::TailUncontrolled { .. })
        ));
    }

    #[test]
    fn fourier_feature_identity() {
        for s in [1u32, 2] {
            let k_max = 50;
            let map = FourierPeriodicFeature::new(s, k_max).unwrap();
            let base = map.base_measure();
            let k = SobolevKernel::new(s).unwrap();
            let tail = 2.0 * crate::spectrum::hurwitz_zeta(2.0 * s as f64, k_max as usize + 1);
            for i in 0..20 {
                for j in 0..20 {
                    let (x, y) = (i as f64 / 20.0, j as f64 / 19.0);
                    let approx: f64 = base
                        .points()
                        .iter()
                        .zip(base.weights())
                        .map(|(v, w)| w * map.eval(v, &x) * map.eval(v, &y))
                        .sum();
                    assert!((approx - k.eval(&x, &y)).abs() <= tail + 1e-12);
                }
            }
        }
    }

    #[test]
    fn fourier_feature_shape() {
        let map = FourierPeriodicFeature::new(1, 5).unwrap();
        let c = map.eval(&0, &0.0);
        for x in [0.1, 0.5, 0.77] {
            assert_eq!(map.eval(&0, &x), c);
        }
        let n = 64;
        for v in [-5i64, -1, 1, 3] {
            let mean: f64 = (0..n).map(|i| map.eval(&v, &(i as f64 / n as f64))).sum::<f64>() / n as f64;
            assert!(mean.abs() < 1e-12);
        }
        assert!(map.eval_checked(6, 0.1).is_err());
    }

    #[test]
    fn fourier_feature_singular_functions() {
        // ⟨φ(·,x), f_j⟩_τ recovers μ_j^{1/2} e_j(x), with f_j(v) obtained by
        // projecting φ(v,·) onto e_j on a uniform grid.
        let s = 1;
        let map = FourierPeriodicFeature::new(s, 20).unwrap();
        let k = map.kernel();
        let base = map.base_measure();
        let n = 256;
        for j in [0usize, 1, 2, 7, 40] {
            let mu = k.eigenvalue(j);
            let f_j: Vec<f64> = base
                .points()
                .iter()
                .map(|v| {
                    (0..n)
                        .map(|i| {
                            let y = (i as f64 + 0.5) / n as f64;
                            map.eval(v, &y) * k.eigenfunction(j, y)
                        })
                        .sum::<f64>()
                        / n as f64
                        / mu.sqrt()
                })
                .collect();
            for x in [0.15, 0.6] {
                let proj: f64 = base
                    .points()
                    .iter()
                    .zip(base.weights())
                    .zip(&f_j)
                    .map(|((v, w), f)| w * map.eval(v, &x) * f)
                    .sum();
                assert!((proj - mu.sqrt() * k.eigenfunction(j, x)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rff_bounded_and_dimension_checked() {
        assert!(rff_rd_eval(&[1.0, 2.0], 0.3, &[0.1]).is_err());
        let map = GaussianRff::new(1.5, 3).unwrap();
        for v in map.sample(200, 4) {
            let val = map.eval(&v, &[0.3, -0.2, 1.1]);
            assert!(val.abs() <= std::f64::consts::SQRT_2);
        }
    }

    #[test]
    fn rff_monte_carlo_reproduces_gaussian() {
        let alpha = 0.8;
        let map = GaussianRff::new(alpha, 2).unwrap();
        let draws = map.sample(100_000, 17);
        let pairs = [
            ([0.0, 0.0], [0.0, 0.0]),
            ([0.1, 0.4], [0.9, -0.3]),
            ([1.0, 1.0], [0.2, 0.5]),
        ];
        for (x, y) in pairs {
            let est: f64 = draws
                .iter()
                .map(|v| map.eval(v, &x) * map.eval(v, &y))
                .sum::<f64>()
                / draws.len() as f64;
            // each product is bounded by 2, so 3σ ≤ 3·2/√n ≈ 0.019
            assert!((est - gaussian_eval(alpha, &x, &y).unwrap()).abs() < 0.02);
        }
    }
}
