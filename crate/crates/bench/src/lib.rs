//! Fixtures shared by the criterion benches.

use kquad::leverage::gram_quadrature;
use kquad::measures::{Discretization, Measure, WeightedPointSet};
use kquad::nalgebra::DMatrix;
use kquad::SobolevKernel;

pub fn uniform_points(n: usize, seed: u64) -> Vec<f64> {
    Measure::Uniform.sample(n, seed)
}

/// Quantile grid of the arcsine distribution with its quadrature-feature Gram.
pub fn beta_grid(n: usize, s: u32) -> (WeightedPointSet<f64>, DMatrix<f64>) {
    let ws = Measure::BetaSymmetric { a: 0.5 }
        .discretize(n, Discretization::QuantileGrid)
        .expect("valid grid");
    let kernel = SobolevKernel::new(s).expect("supported order");
    let gram = gram_quadrature(&ws, &kernel);
    (ws, gram)
}
