use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::conditional::ObservationalSample;
use crate::error::{Arm, PibtError, Result};
use crate::makarov::{population_bounds_normal, Extrema, PibtBoundPair, Provenance, StepSegment};
use crate::numerics::normal_cdf;
use crate::regression::FeatureMap;

use super::rng::{stream, Purpose};

/// Linear-Gaussian observational world.
///
/// `X ~ Uniform(0,1)^p`, `W ~ Bernoulli(((x₁ + x₂ + 0.5)/3)^m)`,
/// `Y(w) = β_wᵀΨ(X) + R(w)` with `R(w) ~ N(0, σ_w²)` coupled by a Gaussian
/// copula with correlation `rho`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationalScenario {
    pub p: usize,
    pub q: u32,
    /// Control coefficients; length `d`. Defaults to all ones.
    #[serde(default)]
    pub beta0: Vec<f64>,
    #[serde(default)]
    pub beta1: Vec<f64>,
    pub sigma0: f64,
    pub sigma1: f64,
    #[serde(default)]
    pub rho: f64,
    /// Propensity exponent.
    pub m: u32,
    #[serde(default)]
    pub seed: u64,
}

impl ObservationalScenario {
    /// Scenario with all-ones coefficients.
    pub fn with_unit_coefficients(p: usize, q: u32, sigma0: f64, sigma1: f64, rho: f64, m: u32, seed: u64) -> Result<Self> {
        let mut s = Self {
            p,
            q,
            beta0: Vec::new(),
            beta1: Vec::new(),
            sigma0,
            sigma1,
            rho,
            m,
            seed,
        };
        s.fill_defaults()?;
        Ok(s)
    }

    /// Replaces empty coefficient vectors by all ones and validates.
    pub fn fill_defaults(&mut self) -> Result<()> {
        let d = self.feature_map()?.output_dim();
        for beta in [&mut self.beta0, &mut self.beta1] {
            if beta.is_empty() {
                *beta = vec![1.0; d];
            }
        }
        self.validate()
    }

    pub fn feature_map(&self) -> Result<FeatureMap> {
        FeatureMap::new(self.p, self.q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(PibtError::invalid(format!(
                "the propensity uses x₁ and x₂, so p must be ≥ 2, got {}",
                self.p
            )));
        }
        let d = self.feature_map()?.output_dim();
        for (name, beta) in [("beta0", &self.beta0), ("beta1", &self.beta1)] {
            if beta.len() != d || beta.iter().any(|b| !b.is_finite()) {
                return Err(PibtError::invalid(format!(
                    "{name} must hold {d} finite coefficients, got {}",
                    beta.len()
                )));
            }
        }
        for (name, s) in [("sigma0", self.sigma0), ("sigma1", self.sigma1)] {
            if !(s.is_finite() && s >= 0.0) {
                return Err(PibtError::invalid(format!("{name} must be finite and ≥ 0, got {s}")));
            }
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(PibtError::invalid(format!("copula correlation must lie in [-1, 1], got {}", self.rho)));
        }
        if self.m == 0 {
            return Err(PibtError::invalid("propensity exponent m must be ≥ 1"));
        }
        Ok(())
    }

    pub fn propensity(&self, x: &[f64]) -> f64 {
        ((x[0] + x[1] + 0.5) / 3.0).powi(self.m as i32)
    }

    /// True regression `μ_w(x) = β_wᵀΨ(x)`.
    pub fn mean(&self, arm: Arm, x: &[f64]) -> Result<f64> {
        let beta = match arm {
            Arm::Control => &self.beta0,
            Arm::Treated => &self.beta1,
        };
        let psi = self.feature_map()?.features(x)?;
        Ok(psi.iter().zip(beta).map(|(a, b)| a * b).sum())
    }

    pub fn sigma(&self, arm: Arm) -> f64 {
        match arm {
            Arm::Control => self.sigma0,
            Arm::Treated => self.sigma1,
        }
    }

    /// `θ(δ, x) = P(Y(1) − Y(0) > δ | X = x)` in closed form.
    pub fn true_conditional_pibt(&self, delta: f64, x: &[f64]) -> Result<f64> {
        let shift = self.mean(Arm::Treated, x)? - self.mean(Arm::Control, x)? - delta;
        let (s0, s1) = (self.sigma0, self.sigma1);
        let var = s0 * s0 + s1 * s1 - 2.0 * self.rho * s0 * s1;
        Ok(if var <= 1e-24 * (s0 * s0 + s1 * s1).max(f64::MIN_POSITIVE) {
            if shift > 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            normal_cdf(shift / var.sqrt())
        })
    }

    /// Conditional population bounds `θ^L(δ, x)`, `θ^U(δ, x)`, exact for every `σ_w ≥ 0`.
    pub fn conditional_population_bounds(&self, delta: f64, x: &[f64]) -> Result<PibtBoundPair> {
        let m1 = self.mean(Arm::Treated, x)?;
        let m0 = self.mean(Arm::Control, x)?;
        let (s1, s0) = (self.sigma1, self.sigma0);
        if s1 > 0.0 && s0 > 0.0 {
            return population_bounds_normal(m1, s1, m0, s0, delta);
        }
        let (c1, c0) = (m1 - delta / 2.0, m0 + delta / 2.0);
        // G(y) = F₁(y − c₁) − F₀(y − c₀) with at least one point mass
        let e = match (s1 > 0.0, s0 > 0.0) {
            (false, false) => {
                let v: f64 = if c1 < c0 { 1.0 } else if c1 > c0 { -1.0 } else { 0.0 };
                Extrema {
                    sup: v.max(0.0),
                    inf: v.min(0.0),
                }
            }
            (true, false) => {
                let at = normal_cdf((c0 - c1) / s1);
                Extrema { sup: at, inf: at - 1.0 }
            }
            (false, true) => {
                let at = normal_cdf((c1 - c0) / s0);
                Extrema { sup: 1.0 - at, inf: -at }
            }
            (true, true) => unreachable!(),
        };
        Ok(PibtBoundPair {
            delta,
            lower: (-e.inf).max(0.0),
            upper: 1.0 - e.sup.max(0.0),
            provenance: Provenance::Population,
        })
    }
}

/// Hidden per-unit truth behind an observational sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationalUnit {
    pub y0: f64,
    pub y1: f64,
    pub propensity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservationalDraw {
    pub sample: ObservationalSample,
    pub ledger: Vec<ObservationalUnit>,
}

/// Covariates and assignment uniforms depend only on `(seed, replicate, p)`,
/// so scenarios that differ in `q`, `m`, `β` or `σ` share them.
pub fn generate_observational(scenario: &ObservationalScenario, n: usize, replicate: u64) -> Result<ObservationalDraw> {
    scenario.validate()?;
    let map = scenario.feature_map()?;
    let mut x_rng = stream(scenario.seed, replicate, Purpose::Covariates);
    let covariates: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..scenario.p).map(|_| x_rng.random::<f64>()).collect())
        .collect();
    let mut w_rng = stream(scenario.seed, replicate, Purpose::Assignment);
    let mut r_rng = stream(scenario.seed, replicate, Purpose::Outcomes);
    let coupling = (1.0 - scenario.rho * scenario.rho).sqrt();
    let mut treatments = Vec::with_capacity(n);
    let mut outcomes = Vec::with_capacity(n);
    let mut ledger = Vec::with_capacity(n);
    for x in &covariates {
        let e = scenario.propensity(x);
        let u: f64 = w_rng.random();
        let arm = if u < e { Arm::Treated } else { Arm::Control };
        let e1: f64 = r_rng.sample(StandardNormal);
        let e2: f64 = r_rng.sample(StandardNormal);
        let psi = map.features(x)?;
        let dot = |beta: &[f64]| psi.iter().zip(beta).map(|(a, b)| a * b).sum::<f64>();
        let y0 = dot(&scenario.beta0) + scenario.sigma0 * e1;
        let y1 = dot(&scenario.beta1) + scenario.sigma1 * (scenario.rho * e1 + coupling * e2);
        treatments.push(arm);
        outcomes.push(if arm == Arm::Treated { y1 } else { y0 });
        ledger.push(ObservationalUnit { y0, y1, propensity: e });
    }
    let sample = ObservationalSample::new(covariates, treatments, outcomes)?;
    Ok(ObservationalDraw { sample, ledger })
}

/// `sup_y |Ĝ(y) − G(y)|` where `Ĝ` is a step function given by its segments
/// and `G(y) = Φ((y − c₁)/s₁) − Φ((y − c₀)/s₀)` with `s₀, s₁ > 0`.
///
/// On each constant piece the deviation is maximized at an endpoint (as a
/// one-sided limit) or at a stationary point of `G`, so the supremum is exact.
pub fn sup_g_deviation(segments: &[StepSegment], c1: f64, s1: f64, c0: f64, s0: f64) -> f64 {
    let g = |y: f64| normal_cdf((y - c1) / s1) - normal_cdf((y - c0) / s0);
    let stationary = crate::makarov::normal_difference_stationary_points(c1, s1, c0, s0);
    let mut pieces: Vec<(f64, f64, f64)> = Vec::with_capacity(segments.len() + 1);
    let mut start = f64::NEG_INFINITY;
    let mut value = 0.0;
    for seg in segments {
        pieces.push((start, seg.start, value));
        start = seg.start;
        value = seg.value;
    }
    pieces.push((start, f64::INFINITY, value));
    let mut worst: f64 = 0.0;
    for (a, b, v) in pieces {
        for y in [a, b] {
            let gy = if y.is_finite() { g(y) } else { 0.0 };
            worst = worst.max((v - gy).abs());
        }
        for &y in &stationary {
            if a < y && y < b {
                worst = worst.max((v - g(y)).abs());
            }
        }
    }
    worst
}
