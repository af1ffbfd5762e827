//! Importance-weighted random-feature approximations and feature counts.

use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::features::FeatureMap;
use crate::quadrature::SpanSystem;

/// Sampled feature indices `v_i` with their densities `q(v_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSample<I> {
    points: Vec<I>,
    q_values: Vec<f64>,
}

impl<I> FeatureSample<I> {
    pub fn new(points: Vec<I>, q_values: Vec<f64>) -> Result<Self> {
        if points.len() != q_values.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: q_values.len(),
            });
        }
        if points.is_empty() {
            return Err(Error::InvalidArgument("feature sample is empty".into()));
        }
        if let Some(&q) = q_values.iter().find(|q| !(**q > 0.0)) {
            return Err(Error::OutOfDomain {
                name: "q",
                value: q,
                domain: "(0, inf)",
            });
        }
        Ok(Self { points, q_values })
    }

    /// Unit densities, i.e. draws from the base measure itself.
    pub fn unweighted(points: Vec<I>) -> Result<Self> {
        let q = vec![1.0; points.len()];
        Self::new(points, q)
    }

    pub fn points(&self) -> &[I] {
        &self.points
    }

    pub fn q_values(&self) -> &[f64] {
        &self.q_values
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `k̂(x,y) = (1/n) Σ_i φ(v_i,x) φ(v_i,y) / q(v_i)`.
pub fn approx_kernel_eval<P: ?Sized, F: FeatureMap<P>>(
    map: &F,
    sample: &FeatureSample<F::Index>,
    x: &P,
    y: &P,
) -> f64 {
    let total: f64 = sample
        .points
        .iter()
        .zip(&sample.q_values)
        .map(|(v, q)| map.eval(v, x) * map.eval(v, y) / q)
        .sum();
    total / sample.len() as f64
}

/// Result of a regularized fit in the span of sampled features.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanFit {
    pub beta: DVector<f64>,
    /// `‖f − Φβ‖²_{L²(ρ)}` on the truncated basis.
    pub l2_error_sq: f64,
    pub beta_norm_sq: f64,
}

/// Feature matrix with columns `q_i^{-1/2}` times the basis coefficients of
/// `φ(v_i, ·)` on the first `terms` eigenfunctions.
pub fn feature_matrix<P: ?Sized, F: FeatureMap<P>>(
    map: &F,
    sample: &FeatureSample<F::Index>,
    terms: usize,
) -> Result<DMatrix<f64>> {
    let mut phi = DMatrix::zeros(terms, sample.len());
    for (i, (v, q)) in sample.points.iter().zip(&sample.q_values).enumerate() {
        let coeffs = map.basis_coefficients(v, terms).ok_or_else(|| {
            Error::InvalidArgument("feature map has no basis expansion".into())
        })?;
        let w = 1.0 / q.sqrt();
        for (j, c) in coeffs.iter().enumerate() {
            phi[(j, i)] = w * c;
        }
    }
    Ok(phi)
}

/// Minimizes `‖f − Φβ‖²_{L²(ρ)} + nλ‖β‖²` for a target given by its
/// coefficients on the map's Mercer basis.
pub fn fit_in_span<P: ?Sized, F: FeatureMap<P>>(
    map: &F,
    sample: &FeatureSample<F::Index>,
    target: &[f64],
    lambda: f64,
) -> Result<SpanFit> {
    if !(lambda >= 0.0) {
        return Err(Error::OutOfDomain {
            name: "lambda",
            value: lambda,
            domain: "[0, inf)",
        });
    }
    let phi = feature_matrix(map, sample, target.len())?;
    let system = SpanSystem::new(phi, lambda)?;
    Ok(fit_with(&system, target))
}

/// [`fit_in_span`] against a prepared system.
pub fn fit_with(system: &SpanSystem, target: &[f64]) -> SpanFit {
    let t = DVector::from_column_slice(target);
    let (beta, fitted) = system.solve(&t);
    SpanFit {
        l2_error_sq: (t - fitted).norm_squared(),
        beta_norm_sq: beta.norm_squared(),
        beta,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    /// `n ≥ 10 m log 2m`.
    WorstCase,
    /// `n ≥ m^{1/(2s)} log m`.
    Polynomial { s: f64 },
    /// `n ≥ (log m)²`.
    Geometric,
}

impl FromStr for Regime {
    type Err = Error;

    /// Accepts `worst_case`, `geometric` and `polynomial:<s>`.
    fn from_str(text: &str) -> Result<Self> {
        let unknown = || Error::Unknown {
            kind: "regime",
            name: text.to_string(),
        };
        match text.split_once(':') {
            None if text == "worst_case" => Ok(Regime::WorstCase),
            None if text == "geometric" => Ok(Regime::Geometric),
            Some(("polynomial", s)) => {
                let s: f64 = s.trim().parse().map_err(|_| unknown())?;
                if !(s > 0.0) {
                    return Err(unknown());
                }
                Ok(Regime::Polynomial { s })
            }
            _ => Err(unknown()),
        }
    }
}

/// Number of features suggested for a learning regime, with natural logs
/// and no constants beyond those displayed in each variant.
pub fn feature_count(regime: Regime, m: u64) -> Result<u64> {
    if m < 2 {
        return Err(Error::InvalidArgument("feature_count needs m >= 2".into()));
    }
    let mf = m as f64;
    let value = match regime {
        Regime::WorstCase => 10.0 * mf * (2.0 * mf).ln(),
        Regime::Polynomial { s } => mf.powf(1.0 / (2.0 * s)) * mf.ln(),
        Regime::Geometric => mf.ln().powi(2),
    };
    Ok(value.ceil() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{FourierPeriodicFeature, QuadratureFeature};
    use crate::kernels::{Kernel, MercerBasis, SobolevKernel};
    use crate::measures::Measure;
    use crate::quadrature::sample_test_function;
    use proptest::prelude::*;
    use rand::distr::weighted::WeightedIndex;
    use rand::distr::Distribution;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fourier_draws(map: &FourierPeriodicFeature, n: usize, seed: u64) -> Vec<i64> {
        let base = map.base_measure();
        let dist = WeightedIndex::new(base.weights()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| base.points()[dist.sample(&mut rng)]).collect()
    }

    #[test]
    fn single_feature_estimate() {
        let map = FourierPeriodicFeature::new(1, 10).unwrap();
        let sample = FeatureSample::new(vec![3i64], vec![0.5]).unwrap();
        let (x, y) = (0.2, 0.7);
        assert_eq!(
            approx_kernel_eval(&map, &sample, &x, &y),
            map.eval(&3, &x) * map.eval(&3, &y) / 0.5
        );
        let plain = FeatureSample::unweighted(vec![1i64, -2, 0]).unwrap();
        let avg = [1i64, -2, 0]
            .iter()
            .map(|v| map.eval(v, &x) * map.eval(v, &y))
            .sum::<f64>()
            / 3.0;
        assert!((approx_kernel_eval(&map, &plain, &x, &y) - avg).abs() < 1e-15);
    }

    #[test]
    fn fourier_estimate_uniform_over_grid() {
        let map = FourierPeriodicFeature::new(1, 50).unwrap();
        let k = SobolevKernel::new(1).unwrap();
        let sample = FeatureSample::unweighted(fourier_draws(&map, 10_000, 1)).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..10 {
            for j in 0..10 {
                let (x, y) = (i as f64 / 10.0, j as f64 / 10.0);
                let err = approx_kernel_eval(&map, &sample, &x, &y) - k.eval(&x, &y);
                worst = worst.max(err.abs());
            }
        }
        assert!(worst < 0.1, "{worst}");
    }

    #[test]
    fn estimator_is_unbiased() {
        // 200 independent single-feature estimates, averaged, within 3σ
        let map = FourierPeriodicFeature::new(1, 50).unwrap();
        let draws = fourier_draws(&map, 200, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let (x, y): (f64, f64) = (rand::Rng::random(&mut rng), rand::Rng::random(&mut rng));
            let values: Vec<f64> = draws.iter().map(|v| map.eval(v, &x) * map.eval(v, &y)).collect();
            let mean = values.iter().sum::<f64>() / 200.0;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 199.0;
            let truth: f64 = map
                .base_measure()
                .points()
                .iter()
                .zip(map.base_measure().weights())
                .map(|(v, w)| w * map.eval(v, &x) * map.eval(v, &y))
                .sum();
            assert!((mean - truth).abs() <= 3.0 * (var / 200.0).sqrt());
        }
    }

    #[test]
    fn span_member_fits_exactly() {
        let k = SobolevKernel::new(1).unwrap();
        let psi = QuadratureFeature::new(k, 101).unwrap();
        let sample = FeatureSample::unweighted(vec![0.1, 0.35, 0.6, 0.85]).unwrap();
        let phi = feature_matrix(&psi, &sample, 101).unwrap();
        let target: Vec<f64> = (&phi * DVector::from_vec(vec![0.4, -0.1, 0.2, 0.3]))
            .iter()
            .copied()
            .collect();
        let fit = fit_in_span(&psi, &sample, &target, 1e-14).unwrap();
        assert!(fit.l2_error_sq < 1e-16);
    }

    #[test]
    fn beta_norm_bound_and_nesting() {
        let k = SobolevKernel::new(1).unwrap();
        let terms = 121;
        let psi = QuadratureFeature::new(k, terms).unwrap();
        let lambda = 1e-2;
        let xs = Measure::Uniform.sample(60, 9);
        let f = sample_test_function(&k, terms, 3).unwrap().coefficients;
        let mut prev = f64::INFINITY;
        for n in [10usize, 20, 40, 60] {
            let sample = FeatureSample::unweighted(xs[..n].to_vec()).unwrap();
            let fit = fit_in_span(&psi, &sample, &f, lambda).unwrap();
            // Woodbury oracle: n‖β‖² ≤ ⟨f, (Σ̂ + λ)^{-1} f⟩ with Σ̂ = ΦΦᵀ/n
            let phi = feature_matrix(&psi, &sample, terms).unwrap();
            let sigma_hat = &phi * phi.transpose() / n as f64;
            let resolvent = (sigma_hat + DMatrix::identity(terms, terms) * lambda)
                .cholesky()
                .unwrap();
            let fv = DVector::from_vec(f.clone());
            let bound = fv.dot(&resolvent.solve(&fv)) / n as f64;
            assert!(fit.beta_norm_sq <= bound * (1.0 + 1e-9));
            // with the penalty weight nλ held fixed, a larger span never
            // increases the minimized objective
            let penalty = 0.1;
            let fixed = fit_in_span(&psi, &sample, &f, penalty / n as f64).unwrap();
            let objective = fixed.l2_error_sq + penalty * fixed.beta_norm_sq;
            assert!(objective <= prev * (1.0 + 1e-9));
            prev = objective;
        }
    }

    #[test]
    fn fit_through_fourier_features() {
        let map = FourierPeriodicFeature::new(1, 20).unwrap();
        let sample = FeatureSample::unweighted(vec![0i64, 1, -1, 2]).unwrap();
        let k = map.kernel();
        let terms = 41;
        let mut f = vec![0.0; terms];
        f[0] = 0.5;
        f[1] = -0.25 * k.eigenvalue(1).sqrt();
        let fit = fit_in_span(&map, &sample, &f, 0.0).unwrap();
        assert!(fit.l2_error_sq < 1e-20);
    }

    #[test]
    fn feature_count_examples() {
        assert_eq!(feature_count(Regime::WorstCase, 1000).unwrap(), 76010);
        assert_eq!(feature_count(Regime::Polynomial { s: 1.0 }, 1_000_000).unwrap(), 13816);
        assert_eq!(feature_count(Regime::Geometric, 1_000_000).unwrap(), 191);
        assert!(feature_count(Regime::Geometric, 1).is_err());
    }

    #[test]
    fn regime_parsing() {
        assert_eq!("worst_case".parse::<Regime>().unwrap(), Regime::WorstCase);
        assert_eq!("geometric".parse::<Regime>().unwrap(), Regime::Geometric);
        assert_eq!(
            "polynomial:2".parse::<Regime>().unwrap(),
            Regime::Polynomial { s: 2.0 }
        );
        assert!(matches!("linear".parse::<Regime>(), Err(Error::Unknown { .. })));
        assert!("polynomial:x".parse::<Regime>().is_err());
    }

    proptest! {
        #[test]
        fn polynomial_count_never_exceeds_worst_case(m in 2u64..10_000_000, s in 1.0f64..5.0) {
            let p = feature_count(Regime::Polynomial { s }, m).unwrap();
            let w = feature_count(Regime::WorstCase, m).unwrap();
            prop_assert!(p <= w);
        }
    }
}
