//! Eigenvalue sequences of integral operators and the spectral quantities
//! derived from them: `m*(λ)`, degrees of freedom, the homogeneity constant
//! `γ`, and the spectra of sum and product kernels.
//!
//! Eigenvalues are indexed from 1, largest first.

use crate::error::{Error, Result};

/// Default cap on the number of terms summed by [`SpectrumSpec::degrees_of_freedom`].
pub const DEFAULT_DOF_BUDGET: usize = 1 << 27;
/// Cap on the number of pairwise products enumerated by [`product_spectrum`].
pub const PRODUCT_BUDGET: usize = 10_000_000;
/// Relative accuracy targeted for the degrees of freedom of closed-form families.
pub const DOF_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumFamily {
    /// `μ_m = scale · m^(-exponent)`; the exponent is `2s` for order-`s` Sobolev decay.
    Polynomial { exponent: f64 },
    /// `μ_m = scale · ratio^m`.
    Geometric { ratio: f64 },
    /// An explicit non-increasing list (multiplied by `scale`).
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSpec {
    family: SpectrumFamily,
    scale: f64,
}

impl SpectrumSpec {
    pub fn polynomial(exponent: f64) -> Result<Self> {
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(Error::OutOfDomain {
                name: "exponent",
                value: exponent,
                domain: "(0, inf)",
            });
        }
        Ok(Self {
            family: SpectrumFamily::Polynomial { exponent },
            scale: 1.0,
        })
    }

    pub fn geometric(ratio: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::OutOfDomain {
                name: "ratio",
                value: ratio,
                domain: "(0, 1)",
            });
        }
        Ok(Self {
            family: SpectrumFamily::Geometric { ratio },
            scale: 1.0,
        })
    }

    /// Builds an explicit spectrum; values are sorted into non-increasing order.
    pub fn explicit(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("explicit spectrum is empty".into()));
        }
        if let Some(&bad) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::OutOfDomain {
                name: "eigenvalue",
                value: bad,
                domain: "(0, inf)",
            });
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self {
            family: SpectrumFamily::Explicit(values),
            scale: 1.0,
        })
    }

    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::OutOfDomain {
                name: "scale",
                value: scale,
                domain: "(0, inf)",
            });
        }
        self.scale = scale;
        Ok(self)
    }

    pub fn family(&self) -> &SpectrumFamily {
        &self.family
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Number of eigenvalues, `None` for the infinite closed-form families.
    pub fn len(&self) -> Option<usize> {
        match &self.family {
            SpectrumFamily::Explicit(v) => Some(v.len()),
            _ => None,
        }
    }

    /// The `m`-th eigenvalue (1-based), `None` past the end of an explicit list.
    pub fn value(&self, m: usize) -> Option<f64> {
        if m == 0 {
            return None;
        }
        match &self.family {
            SpectrumFamily::Polynomial { exponent } => {
                Some(self.scale * (m as f64).powf(-exponent))
            }
            SpectrumFamily::Geometric { ratio } => Some(self.scale * ratio.powi(m as i32)),
            SpectrumFamily::Explicit(v) => v.get(m - 1).map(|x| self.scale * x),
        }
    }

    pub fn largest(&self) -> f64 {
        self.value(1).expect("spectra are non-empty")
    }

    /// The first `count` eigenvalues.
    pub fn eigenvalues(&self, count: usize) -> Result<Vec<f64>> {
        if count == 0 {
            return Err(Error::InvalidArgument("count must be at least 1".into()));
        }
        if let Some(len) = self.len() {
            if count > len {
                return Err(Error::SpectrumExhausted {
                    requested: count,
                    available: len,
                });
            }
        }
        Ok((1..=count).map(|m| self.value(m).unwrap()).collect())
    }

    /// `Σ_{m > after} μ_m`; explicit lists count only their stored entries.
    pub fn tail_sum(&self, after: usize) -> f64 {
        match &self.family {
            SpectrumFamily::Polynomial { exponent } => {
                if *exponent <= 1.0 {
                    f64::INFINITY
                } else {
                    self.scale * hurwitz_zeta(*exponent, after + 1)
                }
            }
            SpectrumFamily::Geometric { ratio } => {
                self.scale * ratio.powi(after as i32 + 1) / (1.0 - ratio)
            }
            SpectrumFamily::Explicit(v) => {
                v.iter().skip(after).rev().map(|x| self.scale * x).sum()
            }
        }
    }

    /// `m*(λ) = max { m ≥ 1 : μ_m ≥ λ }`, or 0 when `λ > μ_1`.
    pub fn m_star(&self, lambda: f64) -> usize {
        assert!(lambda > 0.0, "lambda must be positive");
        let guess = match &self.family {
            SpectrumFamily::Polynomial { exponent } => {
                (self.scale / lambda).powf(1.0 / exponent).floor()
            }
            SpectrumFamily::Geometric { ratio } => ((lambda / self.scale).ln() / ratio.ln()).floor(),
            SpectrumFamily::Explicit(v) => {
                return v.partition_point(|&x| self.scale * x >= lambda);
            }
        };
        // The closed forms can be off by one in floating point; settle the
        // boundary with the same comparison `value` uses.
        let mut m = if guess.is_finite() && guess > 0.0 {
            guess.min(usize::MAX as f64 / 2.0) as usize
        } else {
            0
        };
        while m > 0 && self.value(m).unwrap() < lambda {
            m -= 1;
        }
        while self.value(m + 1).unwrap() >= lambda {
            m += 1;
        }
        m
    }

    /// `d(λ) = Σ_m μ_m / (μ_m + λ)`.
    ///
    /// Explicit lists are summed exactly. For the closed-form families the
    /// head is summed term by term and the remainder is bracketed between an
    /// integral upper bound and a matching lower bound; the head grows until
    /// the bracket is narrower than `DOF_REL_TOL` relative to the result, and
    /// the midpoint of the bracket is used as the tail.
    pub fn degrees_of_freedom(&self, lambda: f64, max_terms: usize) -> Result<f64> {
        if !(lambda > 0.0) {
            return Err(Error::OutOfDomain {
                name: "lambda",
                value: lambda,
                domain: "(0, inf)",
            });
        }
        if let SpectrumFamily::Explicit(v) = &self.family {
            return Ok(v
                .iter()
                .map(|x| {
                    let mu = self.scale * x;
                    mu / (mu + lambda)
                })
                .sum());
        }
        if let SpectrumFamily::Polynomial { exponent } = self.family {
            if exponent <= 1.0 {
                return Err(Error::NotSummable { exponent });
            }
        }

        let mut head = 0.0;
        let mut summed = 0usize;
        let mut target = (2 * self.m_star(lambda)).max(64);
        loop {
            let target_clamped = target.min(max_terms);
            // Sum the new block smallest-first for accuracy.
            let block: f64 = (summed + 1..=target_clamped)
                .rev()
                .map(|m| {
                    let mu = self.value(m).unwrap();
                    mu / (mu + lambda)
                })
                .sum();
            head += block;
            summed = target_clamped;
            let (lo, hi) = self.tail_bracket(summed, lambda);
            let estimate = head + 0.5 * (lo + hi);
            let gap = hi - lo;
            if gap <= DOF_REL_TOL * estimate {
                return Ok(estimate);
            }
            if summed >= max_terms {
                return Err(Error::TailUncontrolled {
                    lambda,
                    terms: summed,
                    gap,
                });
            }
            target = summed.saturating_mul(2);
        }
    }

    /// Lower and upper bounds on `Σ_{m > terms} μ_m / (μ_m + λ)`.
    fn tail_bracket(&self, terms: usize, lambda: f64) -> (f64, f64) {
        let next = self.value(terms + 1).unwrap();
        let mass_upper;
        let mass_lower;
        match self.family {
            SpectrumFamily::Polynomial { exponent } => {
                let m = terms as f64;
                // ∫_M^∞ and ∫_{M+1}^∞ of scale · t^(-exponent)
                mass_upper = self.scale * m.powf(1.0 - exponent) / (exponent - 1.0);
                mass_lower = self.scale * (m + 1.0).powf(1.0 - exponent) / (exponent - 1.0);
            }
            SpectrumFamily::Geometric { ratio } => {
                let exact = next / (1.0 - ratio);
                mass_upper = exact;
                mass_lower = exact;
            }
            SpectrumFamily::Explicit(_) => unreachable!("explicit spectra are summed exactly"),
        }
        (mass_lower / (lambda + next), mass_upper / lambda)
    }

    /// The homogeneity constant `γ` with `Σ_{m≥j} μ_m ≤ γ j μ_j`, using the
    /// closed forms `1/(2s−1)` for polynomial decay and `1/(1−r)` for
    /// geometric decay.
    ///
    /// For polynomial decay the closed form is the `j → ∞` limit of the ratio
    /// and is exceeded at small `j`; [`SpectrumSpec::certified_gamma`] returns
    /// the supremum over all `j`. Explicit lists are maximized over their own
    /// prefix with an empty tail, which only gives a lower estimate.
    pub fn gamma_constant(&self) -> Result<f64> {
        match &self.family {
            SpectrumFamily::Polynomial { exponent } => {
                if *exponent <= 1.0 {
                    Err(Error::NotSummable {
                        exponent: *exponent,
                    })
                } else {
                    Ok(1.0 / (exponent - 1.0))
                }
            }
            SpectrumFamily::Geometric { ratio } => Ok(1.0 / (1.0 - ratio)),
            SpectrumFamily::Explicit(v) => Ok(explicit_gamma(v)),
        }
    }

    /// `sup_j Σ_{m≥j} μ_m / (j μ_j)`, the smallest `γ` valid for every `j`.
    pub fn certified_gamma(&self) -> Result<f64> {
        match &self.family {
            SpectrumFamily::Polynomial { exponent } => {
                let e = *exponent;
                if e <= 1.0 {
                    return Err(Error::NotSummable { exponent: e });
                }
                // j^(e-1) Σ_{m≥j} m^(-e) decreases towards 1/(e-1); scan the
                // first few j and keep the limit as a floor.
                let mut best = 1.0 / (e - 1.0);
                for j in 1..=64usize {
                    let ratio = (j as f64).powf(e - 1.0) * hurwitz_zeta(e, j);
                    best = best.max(ratio);
                }
                Ok(best)
            }
            SpectrumFamily::Geometric { ratio } => Ok(1.0 / (1.0 - ratio)),
            SpectrumFamily::Explicit(v) => Ok(explicit_gamma(v)),
        }
    }
}

fn explicit_gamma(v: &[f64]) -> f64 {
    let mut suffix = 0.0;
    let mut best: f64 = 0.0;
    for (idx, &mu) in v.iter().enumerate().rev() {
        suffix += mu;
        let j = (idx + 1) as f64;
        best = best.max(suffix / (j * mu));
    }
    best
}

/// `Σ_{m ≥ j} m^(-e)` for `e > 1`, by direct summation plus Euler–Maclaurin.
pub(crate) fn hurwitz_zeta(e: f64, j: usize) -> f64 {
    let cut = j + 2000;
    let head: f64 = (j..cut).rev().map(|m| (m as f64).powf(-e)).sum();
    let n = cut as f64;
    head + n.powf(1.0 - e) / (e - 1.0) + 0.5 * n.powf(-e) + e * n.powf(-e - 1.0) / 12.0
}

/// Spectrum of a sum kernel: the merged first `count` eigenvalues of each part.
pub fn sum_spectrum(a: &SpectrumSpec, b: &SpectrumSpec, count: usize) -> Result<SpectrumSpec> {
    let take = |s: &SpectrumSpec| -> Vec<f64> {
        let n = s.len().map_or(count, |len| len.min(count));
        (1..=n).map(|m| s.value(m).unwrap()).collect()
    };
    let mut merged = take(a);
    merged.extend(take(b));
    merged.sort_by(|x, y| y.total_cmp(x));
    merged.truncate(count);
    SpectrumSpec::explicit(merged)
}

/// Spectrum of a product kernel: every product `μ_{a,i} μ_{b,j} ≥ floor`.
pub fn product_spectrum(a: &SpectrumSpec, b: &SpectrumSpec, floor: f64) -> Result<SpectrumSpec> {
    if !(floor > 0.0) {
        return Err(Error::OutOfDomain {
            name: "lambda_floor",
            value: floor,
            domain: "(0, inf)",
        });
    }
    let mut out = Vec::new();
    let b1 = b.largest();
    let mut i = 1;
    while let Some(ai) = a.value(i) {
        if ai * b1 < floor {
            break;
        }
        let mut j = 1;
        while let Some(bj) = b.value(j) {
            let p = ai * bj;
            if p < floor {
                break;
            }
            out.push(p);
            if out.len() > PRODUCT_BUDGET {
                return Err(Error::EnumerationBudget {
                    reached: out.len(),
                    budget: PRODUCT_BUDGET,
                });
            }
            j += 1;
        }
        i += 1;
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no eigenvalue products reach the floor {floor}"
        )));
    }
    SpectrumSpec::explicit(out)
}
