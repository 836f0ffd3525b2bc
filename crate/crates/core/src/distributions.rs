//! I.i.d. cost distributions supported on `[t_min, ∞)`.
//!
//! Two CDF conventions are available. `PaperLiteral` evaluates the textbook
//! formulas as written, without conditioning on the truncation at `t_min`
//! (so the exponential and log-logistic CDFs jump at `t_min`, and the
//! log-logistic one is not truncated at all). `Renormalized` conditions on
//! `T >= t_min`, giving `F(t_min) = 0`. Sampling always draws from the
//! renormalized law; the convention only affects [`DistributionSpec::cdf`]
//! and the threshold solve.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::error::{Error, Result};

/// Quantile the threshold `h` must reach: `F(h · t_min) >= 11/12`.
pub const THRESHOLD_QUANTILE: f64 = 11.0 / 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `F(t) = 1 - (t_min / t)^α`, shape `α`.
    Pareto,
    /// `F(t) = 1 - e^{-λ t}`, shape `λ`.
    Exponential,
    /// `F(t) = t^β / (1 + t^β)` with unit scale, shape `β`.
    LogLogistic,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Pareto => "pareto",
            Family::Exponential => "exponential",
            Family::LogLogistic => "loglogistic",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pareto" => Ok(Family::Pareto),
            "exponential" => Ok(Family::Exponential),
            "loglogistic" | "log-logistic" => Ok(Family::LogLogistic),
            other => Err(Error::InvalidParameter(format!("unknown distribution family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Convention {
    #[default]
    #[serde(rename = "paper")]
    PaperLiteral,
    #[serde(rename = "renormalized")]
    Renormalized,
}

impl Convention {
    pub fn as_str(self) -> &'static str {
        match self {
            Convention::PaperLiteral => "paper",
            Convention::Renormalized => "renormalized",
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "paper" | "paper_literal" => Ok(Convention::PaperLiteral),
            "renormalized" => Ok(Convention::Renormalized),
            other => Err(Error::InvalidParameter(format!("unknown convention `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    family: Family,
    t_min: f64,
    shape: f64,
    convention: Convention,
}

impl DistributionSpec {
    pub fn new(family: Family, shape: f64, t_min: f64, convention: Convention) -> Result<Self> {
        if !(t_min > 0.0 && t_min.is_finite()) {
            return Err(Error::InvalidParameter(format!("t_min must be positive, got {t_min}")));
        }
        if !(shape > 0.0 && shape.is_finite()) {
            return Err(Error::InvalidParameter(format!("shape must be positive, got {shape}")));
        }
        Ok(Self {
            family,
            t_min,
            shape,
            convention,
        })
    }

    pub fn pareto(alpha: f64, t_min: f64) -> Result<Self> {
        Self::new(Family::Pareto, alpha, t_min, Convention::PaperLiteral)
    }

    pub fn exponential(lambda: f64, t_min: f64) -> Result<Self> {
        Self::new(Family::Exponential, lambda, t_min, Convention::PaperLiteral)
    }

    pub fn log_logistic(beta: f64, t_min: f64) -> Result<Self> {
        Self::new(Family::LogLogistic, beta, t_min, Convention::PaperLiteral)
    }

    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.convention = convention;
        self
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// CDF under the distribution's own convention.
    pub fn cdf(&self, t: f64) -> f64 {
        self.cdf_with(self.convention, t)
    }

    pub fn cdf_with(&self, convention: Convention, t: f64) -> f64 {
        match convention {
            Convention::PaperLiteral => self.literal_cdf(t),
            Convention::Renormalized => self.conditional_cdf(t),
        }
    }

    fn literal_cdf(&self, t: f64) -> f64 {
        let (a, m) = (self.shape, self.t_min);
        match self.family {
            Family::Pareto if t >= m => 1.0 - (m / t).powf(a),
            Family::Exponential if t >= m => -(-a * t).exp_m1(),
            Family::LogLogistic if t > 0.0 => 1.0 / (1.0 + t.powf(-a)),
            _ => 0.0,
        }
    }

    fn conditional_cdf(&self, t: f64) -> f64 {
        let (a, m) = (self.shape, self.t_min);
        if t < m {
            return 0.0;
        }
        if t == f64::INFINITY {
            return 1.0;
        }
        match self.family {
            Family::Pareto => 1.0 - (m / t).powf(a),
            Family::Exponential => -(-a * (t - m)).exp_m1(),
            Family::LogLogistic => {
                // (F(t) - F(m)) / (1 - F(m)) simplifies to (t^β - m^β) / (1 + t^β).
                let tb = t.powf(a);
                if tb.is_infinite() {
                    return 1.0;
                }
                ((tb - m.powf(a)) / (1.0 + tb)).clamp(0.0, 1.0)
            }
        }
    }

    /// Inverse of the renormalized CDF; `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let (a, m) = (self.shape, self.t_min);
        match self.family {
            Family::Pareto => m * (-(-u).ln_1p() / a).exp(),
            Family::Exponential => m - (-u).ln_1p() / a,
            Family::LogLogistic => ((m.powf(a) + u) / (1.0 - u)).powf(a.recip()),
        }
    }

    /// One draw from the renormalized law by inversion of a uniform in `[0, 1)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.gen::<f64>())
    }
}

/// Threshold constant `h` with its CDF value and the resulting average-ratio bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdChoice {
    pub h: f64,
    pub cdf_at_threshold: f64,
    pub theorem1_bound: f64,
}

/// `h` for [`THRESHOLD_QUANTILE`] under the distribution's convention.
pub fn solve_threshold(spec: &DistributionSpec) -> Result<ThresholdChoice> {
    solve_threshold_at(spec, THRESHOLD_QUANTILE)
}

/// `h` with `F(h · t_min) >= quantile`.
///
/// Literal thresholds use the closed forms `(1/(1-q))^{1/α}`,
/// `-ln(1-q) / (λ t_min)` and `(q/(1-q))^{1/β} / t_min`, floored at 1 since no
/// cost lies below `t_min`. Renormalized thresholds are found by bisection.
pub fn solve_threshold_at(spec: &DistributionSpec, quantile: f64) -> Result<ThresholdChoice> {
    if !(quantile > 0.0 && quantile < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold quantile must lie in (0, 1), got {quantile}"
        )));
    }
    let h = match spec.convention {
        Convention::PaperLiteral => {
            let (a, m) = (spec.shape, spec.t_min);
            // 1/(1-q) and q/(1-q); exact integers at the default quantile.
            let (inv_tail, odds) = if quantile == THRESHOLD_QUANTILE {
                (12.0, 11.0)
            } else {
                ((1.0 - quantile).recip(), quantile / (1.0 - quantile))
            };
            let closed = match spec.family {
                Family::Pareto => inv_tail.powf(a.recip()),
                Family::Exponential => inv_tail.ln() / (a * m),
                Family::LogLogistic => odds.powf(a.recip()) / m,
            };
            closed.max(1.0)
        }
        Convention::Renormalized => bisect_threshold(spec, quantile)?,
    };
    Ok(ThresholdChoice {
        h,
        cdf_at_threshold: spec.cdf(h * spec.t_min),
        theorem1_bound: bounds::theorem1_bound(h),
    })
}

fn bisect_threshold(spec: &DistributionSpec, quantile: f64) -> Result<f64> {
    let reaches = |h: f64| spec.conditional_cdf(h * spec.t_min) >= quantile;
    let mut lo = 1.0;
    let mut hi = 2.0;
    while !reaches(hi) {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Numeric(format!(
                "could not bracket the {quantile} quantile of {spec:?}"
            )));
        }
    }
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if reaches(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
