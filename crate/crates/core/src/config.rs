//! Experiment configuration read from `key = value` text.
//!
//! The text is parsed as TOML, so strings are quoted and lists use brackets:
//!
//! ```text
//! experiment = "convergence"
//! s = 2
//! t = 1
//! n_grid = [8, 16, 32, 64, 128]
//! replicates = 100
//! ```
//!
//! Keys left out take per-experiment defaults from [`ExperimentConfig::defaults`].

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::measures::Measure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Spectrum,
    Convergence,
    Compare,
    Density,
    Randfeat,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::Spectrum => "spectrum",
            Self::Convergence => "convergence",
            Self::Compare => "compare",
            Self::Density => "density",
            Self::Randfeat => "randfeat",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectrum" => Ok(Self::Spectrum),
            "convergence" => Ok(Self::Convergence),
            "compare" => Ok(Self::Compare),
            "density" => Ok(Self::Density),
            "randfeat" => Ok(Self::Randfeat),
            other => Err(Error::Unknown {
                kind: "experiment",
                name: other.to_string(),
            }),
        }
    }
}

/// How quadrature points are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// iid from the input distribution, `q ≡ 1`.
    Iid,
    /// iid from the leverage-score density on a quantile grid of the input
    /// distribution.
    Leverage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Order of the Sobolev space the test functions and errors live in.
    pub s: u32,
    /// Order of the Sobolev kernel used to learn the weights.
    pub t: u32,
    pub measure: Measure,
    pub sampling: Sampling,
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    /// `λ_n = lambda · n^{-lambda_decay}`.
    pub lambda: f64,
    pub lambda_decay: f64,
    /// λ values for density curves and spectrum tables.
    pub lambdas: Vec<f64>,
    pub seed: u64,
    pub out: PathBuf,
    /// Truncation of test functions and span fits.
    pub terms: usize,
    /// Test functions drawn per replicate.
    pub test_functions: usize,
    /// Atoms in the quantile grid of a discretized input distribution.
    pub grid_points: usize,
    /// Fourier frequencies `|k| ≤ k_max`.
    pub k_max: i64,
    /// Quantile-grid size for Monte Carlo Gram estimates and embeddings.
    pub mc_points: usize,
    /// Smallest `n` entering exponent fits.
    pub fit_min_n: usize,
    /// Failure probability in the feature-count formula.
    pub delta: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Option<Experiment>,
    s: Option<u32>,
    t: Option<u32>,
    measure: Option<String>,
    beta_a: Option<f64>,
    sampling: Option<Sampling>,
    n_grid: Option<Vec<usize>>,
    replicates: Option<usize>,
    lambda: Option<f64>,
    lambda_decay: Option<f64>,
    lambdas: Option<Vec<f64>>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    terms: Option<usize>,
    test_functions: Option<usize>,
    grid_points: Option<usize>,
    k_max: Option<i64>,
    mc_points: Option<usize>,
    fit_min_n: Option<usize>,
    delta: Option<f64>,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let mut c = Self {
            experiment,
            s: 1,
            t: 1,
            measure: Measure::Uniform,
            sampling: Sampling::Iid,
            n_grid: vec![4, 8, 16, 32, 64, 128],
            replicates: 100,
            lambda: 0.0,
            lambda_decay: 0.0,
            lambdas: vec![1e2, 1.0, 1e-2, 1e-4, 1e-6],
            seed: 0,
            out: PathBuf::from("out"),
            terms: 256,
            test_functions: 1,
            grid_points: 500,
            k_max: 50,
            mc_points: 10_000,
            fit_min_n: 8,
            delta: 0.1,
        };
        match experiment {
            Experiment::Spectrum => {
                c.lambdas = vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
            }
            Experiment::Convergence => {}
            Experiment::Compare => {
                // van der Corput prefixes of length 2^k are equispaced grids
                c.n_grid = vec![9, 17, 33, 65, 129];
            }
            Experiment::Density => {
                c.measure = Measure::BetaSymmetric { a: 0.5 };
            }
            Experiment::Randfeat => {
                c.lambda = 1e-2;
                c.replicates = 200;
                c.test_functions = 20;
                c.terms = 401;
            }
        }
        c
    }

    /// Parses configuration text. Unknown keys and invalid values are
    /// reported as [`Error::Config`].
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let experiment = raw.experiment.ok_or_else(|| {
            Error::Config("missing key `experiment`".into())
        })?;
        Self::overlay(Self::defaults(experiment), raw)
    }

    /// Like [`ExperimentConfig::parse`], but `experiment` may be omitted.
    pub fn parse_for(experiment: Experiment, text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(found) = raw.experiment {
            if found != experiment {
                return Err(Error::Config(format!(
                    "config is for `{found}`, not `{experiment}`"
                )));
            }
        }
        Self::overlay(Self::defaults(experiment), raw)
    }

    pub fn from_path(experiment: Experiment, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse_for(experiment, &text)
    }

    fn overlay(mut c: Self, raw: RawConfig) -> Result<Self> {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = raw.$field { c.$field = v; })*
            };
        }
        take!(
            s, t, sampling, n_grid, replicates, lambda, lambda_decay, lambdas, seed, out, terms,
            test_functions, grid_points, k_max, mc_points, fit_min_n, delta
        );
        match (raw.measure.as_deref(), raw.beta_a) {
            (Some(name), a) => {
                c.measure = Measure::from_name(name, a).map_err(|e| Error::Config(e.to_string()))?;
            }
            (None, Some(a)) => {
                c.measure = Measure::beta(a).map_err(|e| Error::Config(e.to_string()))?;
            }
            (None, None) => {}
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n_grid.is_empty() {
            return fail("n_grid is empty".into());
        }
        if self.n_grid[0] == 0 {
            return fail("n_grid entries must be positive".into());
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return fail(format!("n_grid must be strictly increasing, got {:?}", self.n_grid));
        }
        if self.replicates == 0 {
            return fail("replicates must be at least 1".into());
        }
        for (name, order) in [("s", self.s), ("t", self.t)] {
            if !(1..=4).contains(&order) {
                return fail(format!("{name} must be in 1..=4, got {order}"));
            }
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return fail(format!("lambda must be finite and non-negative, got {}", self.lambda));
        }
        if !self.lambda_decay.is_finite() {
            return fail("lambda_decay must be finite".into());
        }
        if self.lambdas.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return fail(format!("lambdas must be positive, got {:?}", self.lambdas));
        }
        if self.terms == 0 || self.test_functions == 0 || self.grid_points == 0 || self.mc_points == 0 {
            return fail("terms, test_functions, grid_points and mc_points must be positive".into());
        }
        if self.k_max < 1 {
            return fail(format!("k_max must be at least 1, got {}", self.k_max));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return fail(format!("delta must be in (0, 1), got {}", self.delta));
        }
        if self.sampling == Sampling::Leverage && !(self.lambda > 0.0) {
            return fail("leverage sampling needs lambda > 0".into());
        }
        Ok(())
    }

    /// Regularization used at sample size `n`.
    pub fn lambda_at(&self, n: usize) -> f64 {
        self.lambda * (n as f64).powf(-self.lambda_decay)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        for e in [
            Experiment::Spectrum,
            Experiment::Convergence,
            Experiment::Compare,
            Experiment::Density,
            Experiment::Randfeat,
        ] {
            ExperimentConfig::defaults(e).validate().unwrap();
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
    }

    #[test]
    fn parse_overlays_defaults() {
        let c = ExperimentConfig::parse(
            "experiment = \"convergence\"\ns = 2\nt = 1\nn_grid = [8, 16]\nseed = 7\n",
        )
        .unwrap();
        assert_eq!((c.s, c.t, c.seed), (2, 1, 7));
        assert_eq!(c.n_grid, vec![8, 16]);
        assert_eq!(c.replicates, 100);
        assert_eq!(c.measure, Measure::Uniform);
    }

    #[test]
    fn measure_keys() {
        let c = ExperimentConfig::parse_for(Experiment::Convergence, "measure = \"beta\"\nbeta_a = 0.5")
            .unwrap();
        assert_eq!(c.measure, Measure::BetaSymmetric { a: 0.5 });
        let c = ExperimentConfig::parse_for(Experiment::Density, "").unwrap();
        assert_eq!(c.measure, Measure::BetaSymmetric { a: 0.5 });
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "experiment = \"convergence\"\nn_grid = [8, 8]",
            "experiment = \"convergence\"\nreplicates = 0",
            "experiment = \"convergence\"\nbogus = 1",
            "experiment = \"convergence\"\ns = 9",
            "experiment = \"nope\"",
            "s = 1",
            "experiment = \"convergence\"\nlambda = -1.0",
            "experiment = \"convergence\"\nsampling = \"leverage\"",
            "experiment = \"density\"\nlambdas = [0.0]",
            "not toml at all",
        ] {
            let err = ExperimentConfig::parse(text).unwrap_err();
            assert!(err.is_config_error(), "{text}: {err}");
        }
        let err = ExperimentConfig::parse_for(Experiment::Compare, "experiment = \"density\"").unwrap_err();
        assert!(err.is_config_error());
    }

    #[test]
    fn lambda_schedule() {
        let mut c = ExperimentConfig::defaults(Experiment::Convergence);
        c.lambda = 1.0;
        c.lambda_decay = 2.0;
        assert_eq!(c.lambda_at(10), 0.01);
    }
}
