//! Inference for the marginal (randomized trial) case.
//!
//! With `n₀` control and `n₁` treated units, the plug-in bounds deviate from
//! the population bounds, simultaneously over all thresholds, by at most
//!
//! ```text
//! ε(n₀, n₁, α) = sqrt(log(4/α)/2) · (n₀^{-1/2} + n₁^{-1/2})
//! ```
//!
//! with probability at least `1 − α`. Every quantity in this module is a
//! rearrangement of that one identity.

use crate::ecdf::EmpiricalCdf;
use crate::error::{check_probability_open, PibtError, Result};
use crate::makarov::{check_ascending_grid, pibt_bounds_curve, PibtBoundPair};

/// Observed outcomes split by arm. Both arms are nonempty and finite.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoArmSample {
    treated: Vec<f64>,
    control: Vec<f64>,
}

impl TwoArmSample {
    pub fn new(treated: Vec<f64>, control: Vec<f64>) -> Result<Self> {
        if treated.is_empty() || control.is_empty() {
            return Err(PibtError::DegenerateData(format!(
                "both arms need at least one unit (treated: {}, control: {})",
                treated.len(),
                control.len()
            )));
        }
        if let Some(v) = treated.iter().chain(&control).find(|v| !v.is_finite()) {
            return Err(PibtError::invalid(format!("outcomes must be finite, got {v}")));
        }
        Ok(Self { treated, control })
    }

    /// Splits `(outcome, treated?)` observations by arm.
    pub fn from_observations(outcomes: &[f64], treated: &[bool]) -> Result<Self> {
        if outcomes.len() != treated.len() {
            return Err(PibtError::invalid("outcomes and treatment indicators differ in length"));
        }
        let (mut t, mut c) = (Vec::new(), Vec::new());
        for (&y, &w) in outcomes.iter().zip(treated) {
            if w { t.push(y) } else { c.push(y) }
        }
        Self::new(t, c)
    }

    pub fn treated(&self) -> &[f64] {
        &self.treated
    }

    pub fn control(&self) -> &[f64] {
        &self.control
    }

    pub fn n1(&self) -> usize {
        self.treated.len()
    }

    pub fn n0(&self) -> usize {
        self.control.len()
    }

    pub fn ecdfs(&self) -> Result<(EmpiricalCdf, EmpiricalCdf)> {
        Ok((EmpiricalCdf::new(&self.treated)?, EmpiricalCdf::new(&self.control)?))
    }

    /// `(min, max)` over both arms.
    pub fn pooled_range(&self) -> (f64, f64) {
        self.treated
            .iter()
            .chain(&self.control)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

fn arm_size_term(n0: usize, n1: usize) -> Result<f64> {
    if n0 == 0 || n1 == 0 {
        return Err(PibtError::invalid("arm sizes must be ≥ 1"));
    }
    Ok(1.0 / (n0 as f64).sqrt() + 1.0 / (n1 as f64).sqrt())
}

/// The two-sample margin of error `sqrt(log(4/α)/2)·(n₀^{-1/2} + n₁^{-1/2})`.
pub fn rct_margin(n0: usize, n1: usize, alpha: f64) -> Result<f64> {
    check_probability_open("alpha", alpha)?;
    Ok(((4.0 / alpha).ln() / 2.0).sqrt() * arm_size_term(n0, n1)?)
}

/// `α_ε = 4·exp(−2ε² / (n₀^{-1/2} + n₁^{-1/2})²)`, the significance at which the
/// margin equals `ε`. Can exceed 1.
pub fn alpha_for_margin(n0: usize, n1: usize, epsilon: f64) -> Result<f64> {
    check_probability_open("epsilon", epsilon)?;
    let s = arm_size_term(n0, n1)?;
    Ok(4.0 * (-2.0 * epsilon * epsilon / (s * s)).exp())
}

/// Confidence `1 − α_ε` attached to margin `ε`, or 0 when `α_ε > 1`.
pub fn confidence_for_margin(n0: usize, n1: usize, epsilon: f64) -> Result<f64> {
    let a = alpha_for_margin(n0, n1, epsilon)?;
    Ok(if a <= 1.0 { 1.0 - a } else { 0.0 })
}

/// A consistent `(ε, α, n₀, n₁)` design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerAnalysis {
    pub epsilon: f64,
    pub alpha: f64,
    pub n0: usize,
    pub n1: usize,
}

impl PowerAnalysis {
    pub fn total(&self) -> usize {
        self.n0 + self.n1
    }

    pub fn confidence(&self) -> f64 {
        1.0 - self.alpha
    }

    /// The margin actually achieved at `(n₀, n₁, α)`; never above `epsilon`.
    pub fn achieved_margin(&self) -> f64 {
        rct_margin(self.n0, self.n1, self.alpha).expect("validated on construction")
    }

    pub fn achieved_confidence(&self) -> f64 {
        confidence_for_margin(self.n0, self.n1, self.epsilon).expect("validated on construction")
    }
}

fn arm_sizes(n0: usize, arm_ratio: f64) -> (usize, usize) {
    (n0, ((arm_ratio * n0 as f64).ceil() as usize).max(1))
}

/// Smallest `n₀` (with `n₁ = ⌈r·n₀⌉`) whose margin at confidence `c` is at most `ε`.
///
/// Starts from the real-valued solution `n₀ = (1 + r^{-1/2})²·log(4/α)/(2ε²)`,
/// rounds up, then steps to the exact integer boundary.
pub fn required_sample_size(epsilon: f64, confidence: f64, arm_ratio: f64) -> Result<PowerAnalysis> {
    check_probability_open("epsilon", epsilon)?;
    check_probability_open("confidence", confidence)?;
    if !(arm_ratio.is_finite() && arm_ratio > 0.0) {
        return Err(PibtError::invalid(format!("arm ratio must be positive, got {arm_ratio}")));
    }
    let alpha = 1.0 - confidence;
    let meets = |n0: usize| {
        let (a, b) = arm_sizes(n0, arm_ratio);
        rct_margin(a, b, alpha).map(|m| m <= epsilon)
    };
    let continuous = continuous_control_size(epsilon, confidence, arm_ratio);
    let mut n0 = (continuous.ceil() as usize).max(1);
    while !meets(n0)? {
        n0 += 1;
    }
    while n0 > 1 && meets(n0 - 1)? {
        n0 -= 1;
    }
    let (n0, n1) = arm_sizes(n0, arm_ratio);
    Ok(PowerAnalysis { epsilon, alpha, n0, n1 })
}

/// Real-valued control-arm size at which the margin equals `ε` exactly.
pub fn continuous_control_size(epsilon: f64, confidence: f64, arm_ratio: f64) -> f64 {
    let alpha = 1.0 - confidence;
    let k = 1.0 + 1.0 / arm_ratio.sqrt();
    k * k * (4.0 / alpha).ln() / (2.0 * epsilon * epsilon)
}

/// Plug-in bound curves with a margin valid simultaneously over every threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceBand {
    pub delta_grid: Vec<f64>,
    /// Raw `θ̂^L` per threshold (unclipped estimates).
    pub lower_curve: Vec<f64>,
    /// Raw `θ̂^U` per threshold.
    pub upper_curve: Vec<f64>,
    pub margin: f64,
    pub confidence_level: f64,
}

impl ConfidenceBand {
    pub fn len(&self) -> usize {
        self.delta_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta_grid.is_empty()
    }

    /// `max(θ̂^L − ε, 0)` at grid index `i`.
    pub fn lower_clipped(&self, i: usize) -> f64 {
        (self.lower_curve[i] - self.margin).max(0.0)
    }

    /// `min(θ̂^U + ε, 1)` at grid index `i`.
    pub fn upper_clipped(&self, i: usize) -> f64 {
        (self.upper_curve[i] + self.margin).min(1.0)
    }

    pub fn contains(&self, i: usize, value: f64) -> bool {
        self.lower_clipped(i) <= value && value <= self.upper_clipped(i)
    }
}

/// Remark-style band: per-arm eCDFs, bound curve, and the two-sample margin at `α`.
pub fn confidence_band(sample: &TwoArmSample, delta_grid: &[f64], alpha: f64) -> Result<ConfidenceBand> {
    check_ascending_grid(delta_grid)?;
    let margin = rct_margin(sample.n0(), sample.n1(), alpha)?;
    let (f1, f0) = sample.ecdfs()?;
    let curve = pibt_bounds_curve(&f1, &f0, delta_grid)?;
    Ok(band_from_curve(&curve, margin, 1.0 - alpha))
}

pub(crate) fn band_from_curve(curve: &[PibtBoundPair], margin: f64, confidence: f64) -> ConfidenceBand {
    ConfidenceBand {
        delta_grid: curve.iter().map(|p| p.delta).collect(),
        lower_curve: curve.iter().map(|p| p.lower).collect(),
        upper_curve: curve.iter().map(|p| p.upper).collect(),
        margin,
        confidence_level: confidence,
    }
}

pub const DEFAULT_GRID_POINTS: usize = 41;

/// `count` equispaced points from `min` to `max` inclusive.
pub fn linspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![min],
        _ => {
            let step = (max - min) / (count - 1) as f64;
            (0..count)
                .map(|k| if k + 1 == count { max } else { min + k as f64 * step })
                .collect()
        }
    }
}

/// 41 equispaced thresholds over `[−R, R]`, where `R` is the pooled-sample
/// range: every attainable difference of two observed outcomes lies inside.
pub fn default_delta_grid(sample: &TwoArmSample) -> Vec<f64> {
    let (lo, hi) = sample.pooled_range();
    let r = hi - lo;
    if r == 0.0 {
        return vec![0.0];
    }
    linspace(-r, r, DEFAULT_GRID_POINTS)
}
