//! Risk scoring and the adaptive authentication decision.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::privacy::Bounds;

pub const DEFAULT_LOW_THRESHOLD: f64 = 0.33;
pub const DEFAULT_HIGH_THRESHOLD: f64 = 0.66;

/// How much authentication effort a login attempt must pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AuthRequirement {
    Standard,
    StepUp,
    Advanced,
}

impl AuthRequirement {
    /// 32-bit wire code.
    pub fn code(self) -> u32 {
        match self {
            AuthRequirement::Standard => 0,
            AuthRequirement::StepUp => 1,
            AuthRequirement::Advanced => 2,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(AuthRequirement::Standard),
            1 => Some(AuthRequirement::StepUp),
            2 => Some(AuthRequirement::Advanced),
            _ => None,
        }
    }
}

impl fmt::Display for AuthRequirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AuthRequirement::Standard => "Standard",
            AuthRequirement::StepUp => "StepUp",
            AuthRequirement::Advanced => "Advanced",
        })
    }
}

/// A score in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct RiskScore(f64);

impl RiskScore {
    /// Clamps into `[0, 1]`; NaN maps to 1.
    pub fn new(value: f64) -> Self {
        if value.is_nan() {
            return RiskScore(1.0);
        }
        RiskScore(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Pluggable scoring function. Only [`RiskPolicy`]'s weighted deviation ships.
pub trait RiskModel: Send + Sync {
    fn n_features(&self) -> usize;
    fn score(&self, profile: &[f64], live: &[f64]) -> Result<RiskScore>;
}

/// Normalized weighted-L1 scoring with two decision thresholds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskPolicy {
    weights: Vec<f64>,
    bounds: Vec<Bounds>,
    low_threshold: f64,
    high_threshold: f64,
}

impl RiskPolicy {
    pub fn new(weights: Vec<f64>, bounds: Vec<Bounds>, low: f64, high: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter(
                "policy needs at least one feature".into(),
            ));
        }
        if weights.len() != bounds.len() {
            return Err(Error::LengthMismatch {
                expected: weights.len(),
                actual: bounds.len(),
            });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidParameter("weights must be positive".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "weights sum to {sum}, not 1"
            )));
        }
        for b in &bounds {
            Bounds::new(b.lo, b.hi)?;
        }
        if !(0.0 < low && low < high && high < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "thresholds must satisfy 0 < low < high < 1, got ({low}, {high})"
            )));
        }
        Ok(Self {
            weights,
            bounds,
            low_threshold: low,
            high_threshold: high,
        })
    }

    /// Equal weights over the given features.
    pub fn uniform(bounds: Vec<Bounds>, low: f64, high: f64) -> Result<Self> {
        let n = bounds.len().max(1);
        Self::new(vec![1.0 / n as f64; bounds.len()], bounds, low, high)
    }

    /// Equal weights and the default thresholds.
    pub fn with_defaults(bounds: Vec<Bounds>) -> Result<Self> {
        Self::uniform(bounds, DEFAULT_LOW_THRESHOLD, DEFAULT_HIGH_THRESHOLD)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bounds(&self) -> &[Bounds] {
        &self.bounds
    }

    pub fn thresholds(&self) -> (f64, f64) {
        (self.low_threshold, self.high_threshold)
    }

    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    /// `Δf = max_i w_i · (hi_i − lo_i)`.
    pub fn sensitivity(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.bounds)
            .map(|(w, b)| w * b.range())
            .fold(0.0, f64::max)
    }
}

impl RiskModel for RiskPolicy {
    fn n_features(&self) -> usize {
        self.weights.len()
    }

    fn score(&self, profile: &[f64], live: &[f64]) -> Result<RiskScore> {
        score(profile, live, self)
    }
}

/// `R = Σ w_i · min(1, |live_i − profile_i| / range_i)`, clamped to `[0, 1]`.
pub fn score(profile: &[f64], live: &[f64], policy: &RiskPolicy) -> Result<RiskScore> {
    let n = policy.n_features();
    for len in [profile.len(), live.len()] {
        if len != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: len,
            });
        }
    }
    let r = profile
        .iter()
        .zip(live)
        .zip(policy.weights.iter().zip(&policy.bounds))
        .map(|((p, l), (w, b))| {
            let dev = (l - p).abs() / b.range();
            // NaN deviations saturate.
            w * if dev.is_nan() { 1.0 } else { dev.min(1.0) }
        })
        .sum::<f64>();
    Ok(RiskScore::new(r))
}

/// Half-open bands: `[0, low)` Standard, `[low, high)` StepUp, `[high, 1]` Advanced.
pub fn decide(r: RiskScore, policy: &RiskPolicy) -> AuthRequirement {
    if r.value() < policy.low_threshold {
        AuthRequirement::Standard
    } else if r.value() < policy.high_threshold {
        AuthRequirement::StepUp
    } else {
        AuthRequirement::Advanced
    }
}
