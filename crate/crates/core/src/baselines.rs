//! Classical quadrature rules on `[0,1]` with plain weights.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::measures::Measure;

const NEWTON_MAX_ITERS: usize = 100;

/// Nodes with weights applied directly to `h(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub label: String,
}

impl SimpleRule {
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(*x))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Composite Simpson rule on `n` equispaced nodes including both endpoints.
pub fn simpson(n: usize) -> Result<SimpleRule> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "Simpson's rule needs an odd node count of at least 3, got {n}"
        )));
    }
    let h = 1.0 / (n - 1) as f64;
    let points = (0..n).map(|i| i as f64 * h).collect();
    let weights = (0..n)
        .map(|i| {
            let c = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect();
    Ok(SimpleRule {
        points,
        weights,
        label: "simpson".into(),
    })
}

/// Gauss–Legendre rule mapped to `[0,1]`, nodes by Newton's method on `P_n`.
pub fn gauss_legendre(n: usize) -> Result<SimpleRule> {
    if n == 0 {
        return Err(Error::InvalidArgument("Gauss-Legendre needs n >= 1".into()));
    }
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th largest root
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut converged = false;
        let mut dp = 0.0;
        for _ in 0..NEWTON_MAX_ITERS {
            let (p, d) = legendre_with_derivative(n, t);
            dp = d;
            let step = p / d;
            t -= step;
            if step.abs() <= 1e-15 * t.abs().max(1.0) {
                converged = true;
                dp = legendre_with_derivative(n, t).1;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence {
                what: "Gauss-Legendre Newton iteration",
                iterations: NEWTON_MAX_ITERS,
            });
        }
        let w = 2.0 / ((1.0 - t * t) * dp * dp);
        // map [-1,1] to [0,1]
        points[i] = 0.5 * (1.0 - t);
        points[n - 1 - i] = 0.5 * (1.0 + t);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    Ok(SimpleRule {
        points,
        weights,
        label: "gauss_legendre".into(),
    })
}

fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (t * p - p0) / (t * t - 1.0);
    (p, d)
}

/// Base-2 radical inverse of `i`.
pub fn radical_inverse(mut i: u64) -> f64 {
    let mut inv = 0.0;
    let mut f = 0.5;
    while i > 0 {
        if i & 1 == 1 {
            inv += f;
        }
        i >>= 1;
        f *= 0.5;
    }
    inv
}

/// First `n` van der Corput points starting at index 1 (`1/2, 1/4, 3/4, …`).
pub fn sobol_1d(n: usize) -> Result<SimpleRule> {
    if n == 0 {
        return Err(Error::InvalidArgument("Sobol rule needs n >= 1".into()));
    }
    Ok(SimpleRule {
        points: (1..=n as u64).map(radical_inverse).collect(),
        weights: vec![1.0 / n as f64; n],
        label: "sobol".into(),
    })
}

/// `n` iid uniform points with weights `1/n`.
pub fn monte_carlo(n: usize, seed: u64) -> Result<SimpleRule> {
    if n == 0 {
        return Err(Error::InvalidArgument("Monte Carlo rule needs n >= 1".into()));
    }
    Ok(SimpleRule {
        points: Measure::Uniform.sample(n, seed),
        weights: vec![1.0 / n as f64; n],
        label: "monte_carlo".into(),
    })
}

/// Star discrepancy of a point set in `[0,1]`.
pub fn star_discrepancy(points: &[f64]) -> f64 {
    let mut xs = points.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, x)| (x - (2 * i + 1) as f64 / (2.0 * n)).abs())
        .fold(0.0, f64::max)
        + 1.0 / (2.0 * n)
}
