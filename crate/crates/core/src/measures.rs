//! Probability measures on `[0,1]` and `[0,1]^d`, inverse-CDF sampling and
//! weighted discretizations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::beta::{beta_reg, ln_beta};

use crate::error::{Error, Result};

/// Value reported for densities at points where they diverge.
pub const DENSITY_CAP: f64 = 1e12;
const BISECTION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Uniform,
    /// `Beta(a, a)` on `[0,1]`.
    BetaSymmetric { a: f64 },
    /// Lebesgue measure on `[0,1]^dim`.
    UniformCube { dim: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Discretization {
    /// Points `F^{-1}(k/N)` for `k = 1..N`.
    QuantileGrid,
    Iid { seed: u64 },
}

impl Measure {
    pub fn beta(a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::OutOfDomain {
                name: "beta_a",
                value: a,
                domain: "(0, inf)",
            });
        }
        Ok(Measure::BetaSymmetric { a })
    }

    /// Parses the `measure` config key.
    pub fn from_name(name: &str, beta_a: Option<f64>) -> Result<Self> {
        match name {
            "uniform" => Ok(Measure::Uniform),
            "beta" => Measure::beta(beta_a.unwrap_or(0.5)),
            other => Err(Error::Unknown {
                kind: "measure",
                name: other.to_string(),
            }),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Measure::UniformCube { dim } => *dim,
            _ => 1,
        }
    }

    /// Lebesgue density on `[0,1]`, with `DENSITY_CAP` where it diverges.
    pub fn density(&self, x: f64) -> f64 {
        self.density_flagged(x).0
    }

    /// Density plus a flag set when the value was capped.
    pub fn density_flagged(&self, x: f64) -> (f64, bool) {
        if !(0.0..=1.0).contains(&x) {
            return (0.0, false);
        }
        match *self {
            Measure::Uniform | Measure::UniformCube { .. } => (1.0, false),
            Measure::BetaSymmetric { a } => {
                if a == 1.0 {
                    return (1.0, false);
                }
                if x == 0.0 || x == 1.0 {
                    return if a < 1.0 {
                        (DENSITY_CAP, true)
                    } else {
                        (0.0, false)
                    };
                }
                let log_d = (a - 1.0) * (x.ln() + (1.0 - x).ln()) - ln_beta(a, a);
                let d = log_d.exp();
                if d > DENSITY_CAP {
                    (DENSITY_CAP, true)
                } else {
                    (d, false)
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match *self {
            Measure::Uniform | Measure::UniformCube { .. } => x,
            Measure::BetaSymmetric { a } => {
                if a == 0.5 {
                    (1.0 - 2.0 * x).clamp(-1.0, 1.0).acos() / std::f64::consts::PI
                } else if a == 1.0 {
                    x
                } else {
                    beta_reg(a, a, x)
                }
            }
        }
    }

    /// Inverse CDF on `[0,1]`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::OutOfDomain {
                name: "u",
                value: u,
                domain: "[0, 1]",
            });
        }
        Ok(match *self {
            Measure::Uniform | Measure::UniformCube { .. } => u,
            Measure::BetaSymmetric { a } if a == 0.5 => quantile_beta_half(u)?,
            Measure::BetaSymmetric { a } if a == 1.0 => u,
            Measure::BetaSymmetric { .. } => self.bisect_quantile(u),
        })
    }

    fn bisect_quantile(&self, u: f64) -> f64 {
        if u == 0.0 || u == 1.0 {
            return u;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        while hi - lo > BISECTION_TOL {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// `n` reproducible draws of a one-dimensional measure.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(n, &mut rng)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                self.quantile(u).expect("u drawn from [0,1)")
            })
            .collect()
    }

    /// `n` reproducible draws as coordinate vectors (length `dim`).
    pub fn sample_points(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = self.dim();
        (0..n)
            .map(|_| {
                (0..dim)
                    .map(|_| {
                        let u: f64 = rng.random();
                        self.quantile(u).expect("u drawn from [0,1)")
                    })
                    .collect()
            })
            .collect()
    }

    /// Equal-weight discretization with `n` atoms.
    pub fn discretize(&self, n: usize, scheme: Discretization) -> Result<WeightedPointSet<f64>> {
        if n == 0 {
            return Err(Error::InvalidArgument("discretization size must be positive".into()));
        }
        if self.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: self.dim(),
            });
        }
        let points = match scheme {
            Discretization::QuantileGrid => (1..=n)
                .map(|k| self.quantile(k as f64 / n as f64))
                .collect::<Result<Vec<_>>>()?,
            Discretization::Iid { seed } => self.sample(n, seed),
        };
        Ok(WeightedPointSet::uniform(points))
    }
}

/// Quantile of `Beta(1/2, 1/2)`: `(1 − cos πu)/2`.
pub fn quantile_beta_half(u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::OutOfDomain {
            name: "u",
            value: u,
            domain: "[0, 1]",
        });
    }
    Ok(0.5 * (1.0 - (std::f64::consts::PI * u).cos()))
}

/// Atoms `v_i` with positive weights `η_i` summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPointSet<P> {
    points: Vec<P>,
    weights: Vec<f64>,
}

impl<P> WeightedPointSet<P> {
    pub fn new(points: Vec<P>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: weights.len(),
            });
        }
        if points.is_empty() {
            return Err(Error::InvalidArgument("weighted point set is empty".into()));
        }
        if let Some(&w) = weights.iter().find(|w| !(**w > 0.0)) {
            return Err(Error::OutOfDomain {
                name: "weight",
                value: w,
                domain: "(0, inf)",
            });
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { points, weights })
    }

    pub fn uniform(points: Vec<P>) -> Self {
        let w = 1.0 / points.len() as f64;
        let weights = vec![w; points.len()];
        Self { points, weights }
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Discretized frequency measure for the order-`s` periodic Sobolev kernel:
/// atoms `-K..=K` with mass `∝ 1` at zero and `∝ |k|^(-2s)` elsewhere.
pub fn fourier_base_measure(s: u32, k_max: i64) -> Result<WeightedPointSet<i64>> {
    if k_max < 1 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    if s == 0 {
        return Err(Error::InvalidArgument("s must be at least 1".into()));
    }
    let raw = |k: i64| -> f64 {
        if k == 0 {
            1.0
        } else {
            (k.unsigned_abs() as f64).powi(-2 * s as i32)
        }
    };
    let points: Vec<i64> = (-k_max..=k_max).collect();
    let masses: Vec<f64> = points.iter().map(|&k| raw(k)).collect();
    let total: f64 = masses.iter().sum();
    let weights = masses.iter().map(|m| m / total).collect();
    WeightedPointSet::new(points, weights)
}

/// Normalizer `Z = 1 + 2 Σ_{k≤K} k^(-2s)` of [`fourier_base_measure`].
pub fn fourier_normalizer(s: u32, k_max: i64) -> f64 {
    1.0 + 2.0
        * (1..=k_max)
            .rev()
            .map(|k| (k as f64).powi(-2 * s as i32))
            .sum::<f64>()
}
