//! Kernel quadrature and random-feature expansions.
//!
//! Quadrature rules are built from sampled points and regularized weights;
//! the sampling density can be the leverage-score density of the kernel's
//! integral operator, which the [`leverage`] module computes for discretized
//! input distributions and Fourier expansions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod config;
pub mod error;
pub mod experiments;
pub mod features;
pub mod kernels;
pub mod leverage;
pub mod linalg;
pub mod measures;
pub mod quadrature;
pub mod randfeat;
pub mod spectrum;

pub use nalgebra;

pub use baselines::SimpleRule;
pub use config::{Experiment, ExperimentConfig, Sampling};
pub use error::{Error, Result};
pub use experiments::{
    ComparisonReport, ConvergenceReport, DensityReport, LogLogFit, RidgeReport,
};
pub use features::{FeatureMap, FourierPeriodicFeature, GaussianRff, QuadratureFeature};
pub use kernels::{Kernel, MeanEmbedding, MercerBasis, SobolevKernel, TestWeight};
pub use leverage::LeverageProfile;
pub use measures::{Discretization, Measure, WeightedPointSet};
pub use quadrature::{QuadratureRule, TestFunction};
pub use randfeat::{FeatureSample, Regime, SpanFit};
pub use spectrum::SpectrumSpec;
