//! Laplace-mechanism local differential privacy for feature vectors.
//!
//! Each coordinate is clamped into its declared interval and then receives
//! independent `Lap(Δf/ε)` noise. Noised values are released as-is; they are
//! not clamped a second time.
//!
//! Sampling uses 64-bit floats. The known floating-point attacks on naive
//! Laplace samplers are not mitigated here.

use rand::Rng;

use crate::error::{Error, Result};

/// Default privacy budget when a deployment does not choose one.
pub const DEFAULT_EPSILON: f64 = 1.0;

/// Closed interval `[lo, hi]` a feature is clamped into.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
}

impl Bounds {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidParameter(format!(
                "bounds [{lo}, {hi}] are not a finite nonempty interval"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn range(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lo, self.hi)
    }
}

/// Ordered real-valued features with their clamp intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
    bounds: Vec<Bounds>,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>, bounds: Vec<Bounds>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter(
                "feature vector must not be empty".into(),
            ));
        }
        if values.len() != bounds.len() {
            return Err(Error::LengthMismatch {
                expected: values.len(),
                actual: bounds.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "feature value {v} is not finite"
            )));
        }
        for b in &bounds {
            Bounds::new(b.lo, b.hi)?;
        }
        Ok(Self { values, bounds })
    }

    /// Every feature shares the same interval.
    pub fn with_uniform_bounds(values: Vec<f64>, bounds: Bounds) -> Result<Self> {
        let n = values.len();
        Self::new(values, vec![bounds; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bounds(&self) -> &[Bounds] {
        &self.bounds
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Copy with every value pulled into its interval.
    pub fn clamped(&self) -> FeatureVector {
        let values = self
            .values
            .iter()
            .zip(&self.bounds)
            .map(|(v, b)| b.clamp(*v))
            .collect();
        FeatureVector {
            values,
            bounds: self.bounds.clone(),
        }
    }

    /// Same bounds, new values. Values must be finite.
    pub fn with_values(&self, values: Vec<f64>) -> Result<FeatureVector> {
        Self::new(values, self.bounds.clone())
    }
}

/// `ε` and `Δf`; the noise scale is `Δf / ε`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrivacyBudget {
    epsilon: f64,
    sensitivity: f64,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, sensitivity: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        if !(sensitivity.is_finite() && sensitivity > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sensitivity must be positive, got {sensitivity}"
            )));
        }
        Ok(Self {
            epsilon,
            sensitivity,
        })
    }

    /// Budget whose sensitivity is derived from the risk policy.
    pub fn for_policy(epsilon: f64, policy: &crate::risk::RiskPolicy) -> Result<Self> {
        Self::new(epsilon, policy.sensitivity())
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn sensitivity(&self) -> f64 {
        self.sensitivity
    }

    pub fn scale(&self) -> f64 {
        self.sensitivity / self.epsilon
    }
}

/// One draw from `Laplace(0, scale)` by inverting the CDF.
pub fn laplace_sample<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> Result<f64> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Laplace scale must be positive, got {scale}"
        )));
    }
    Ok(sample_unchecked(scale, rng))
}

fn sample_unchecked<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.gen::<f64>() - 0.5;
        let tail = 1.0 - 2.0 * u.abs();
        // u = -0.5 would give ln(0).
        if tail > 0.0 {
            return -scale * u.signum() * tail.ln();
        }
    }
}

/// Clamps, then adds independent `Lap(Δf/ε)` noise to every coordinate.
pub fn privatize<R: Rng + ?Sized>(
    v: &FeatureVector,
    budget: &PrivacyBudget,
    rng: &mut R,
) -> FeatureVector {
    let scale = budget.scale();
    let values = v
        .values
        .iter()
        .zip(&v.bounds)
        .map(|(x, b)| b.clamp(*x) + sample_unchecked(scale, rng))
        .collect();
    FeatureVector {
        values,
        bounds: v.bounds.clone(),
    }
}
