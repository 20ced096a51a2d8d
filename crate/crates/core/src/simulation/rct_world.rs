use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability_open, PibtError, Result};
use crate::makarov::{population_bounds, population_bounds_normal, OptimizerGrid, PibtBoundPair};
use crate::numerics::normal_cdf;
use crate::rct::TwoArmSample;

use super::marginal::Marginal;
use super::rng::{stream, Purpose};

/// Randomized trial with known potential-outcome marginals coupled by a
/// Gaussian copula with correlation `rho`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RctScenario {
    pub y0: Marginal,
    pub y1: Marginal,
    #[serde(default)]
    pub rho: f64,
    #[serde(default = "half")]
    pub treat_prob: f64,
    #[serde(default)]
    pub seed: u64,
}

fn half() -> f64 {
    0.5
}

impl RctScenario {
    pub fn new(y0: Marginal, y1: Marginal, rho: f64, treat_prob: f64, seed: u64) -> Result<Self> {
        let s = Self {
            y0,
            y1,
            rho,
            treat_prob,
            seed,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.y0.validated()?;
        self.y1.validated()?;
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(PibtError::invalid(format!("copula correlation must lie in [-1, 1], got {}", self.rho)));
        }
        check_probability_open("assignment probability", self.treat_prob)
    }

    /// One `(Y(0), Y(1))` pair from a standard normal pair `(e₁, e₂)`.
    fn couple(&self, e1: f64, e2: f64) -> (f64, f64) {
        let z1 = self.rho * e1 + (1.0 - self.rho * self.rho).sqrt() * e2;
        (self.y0.from_standard_normal(e1), self.y1.from_standard_normal(z1))
    }

    /// `θ(δ)` in closed form when both marginals are normal.
    pub fn exact_pibt(&self, delta: f64) -> Option<f64> {
        match (self.y0, self.y1) {
            (Marginal::Normal { mean: m0, sd: s0 }, Marginal::Normal { mean: m1, sd: s1 }) => {
                let var = s1 * s1 + s0 * s0 - 2.0 * self.rho * s0 * s1;
                let mean = m1 - m0 - delta;
                if var <= 1e-24 * (s0 * s0 + s1 * s1) {
                    Some(if mean > 0.0 { 1.0 } else { 0.0 })
                } else {
                    Some(normal_cdf(mean / var.sqrt()))
                }
            }
            _ => None,
        }
    }

    /// Population Makarov bounds: closed form for two normals, grid search otherwise.
    pub fn population_bounds(&self, delta: f64) -> Result<PibtBoundPair> {
        if let (Marginal::Normal { mean: m0, sd: s0 }, Marginal::Normal { mean: m1, sd: s1 }) = (self.y0, self.y1) {
            return population_bounds_normal(m1, s1, m0, s0, delta);
        }
        let (lo1, hi1) = self.y1.support_hint();
        let (lo0, hi0) = self.y0.support_hint();
        let lo = (lo1 - delta / 2.0).min(lo0 + delta / 2.0) - 1.0;
        let hi = (hi1 - delta / 2.0).max(hi0 + delta / 2.0) + 1.0;
        let grid = OptimizerGrid::covering(lo, hi)?;
        let (y1, y0) = (self.y1, self.y0);
        population_bounds(&|y: f64| y1.cdf(y), &|y: f64| y0.cdf(y), delta, &grid)
    }
}

/// Both potential outcomes and the assignment of one unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RctUnit {
    pub y0: f64,
    pub y1: f64,
    pub treated: bool,
}

impl RctUnit {
    /// `Y = W·Y(1) + (1 − W)·Y(0)`.
    pub fn observed(&self) -> f64 {
        if self.treated {
            self.y1
        } else {
            self.y0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RctDraw {
    pub sample: TwoArmSample,
    /// Per-unit potential outcomes, never shown to estimators.
    pub ledger: Vec<RctUnit>,
}

/// `n` units for replicate 0 of the scenario's seed.
pub fn generate_rct(scenario: &RctScenario, n: usize) -> Result<RctDraw> {
    generate_rct_replicate(scenario, n, 0)
}

/// Complete randomization: exactly `round(π·n)` treated units (at least one
/// per arm).
pub fn generate_rct_replicate(scenario: &RctScenario, n: usize, replicate: u64) -> Result<RctDraw> {
    scenario.validate()?;
    if n < 2 {
        return Err(PibtError::invalid(format!("an RCT needs at least 2 units, got {n}")));
    }
    let mut rng = stream(scenario.seed, replicate, Purpose::Outcomes);
    let pairs: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let e1: f64 = rng.sample(StandardNormal);
            let e2: f64 = rng.sample(StandardNormal);
            scenario.couple(e1, e2)
        })
        .collect();
    let n1 = ((scenario.treat_prob * n as f64).round() as usize).clamp(1, n - 1);
    let mut assignment: Vec<bool> = (0..n).map(|i| i < n1).collect();
    assignment.shuffle(&mut stream(scenario.seed, replicate, Purpose::Assignment));
    let ledger: Vec<RctUnit> = pairs
        .iter()
        .zip(&assignment)
        .map(|(&(y0, y1), &treated)| RctUnit { y0, y1, treated })
        .collect();
    let outcomes: Vec<f64> = ledger.iter().map(RctUnit::observed).collect();
    let sample = TwoArmSample::from_observations(&outcomes, &assignment)?;
    Ok(RctDraw { sample, ledger })
}

/// Monte Carlo estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub standard_error: f64,
    pub draws: usize,
}

pub const MIN_TRUTH_DRAWS: usize = 10_000;

/// `θ(δ) = P(Y(1) − Y(0) > δ)` from `n_mc` fresh joint draws.
pub fn true_pibt(scenario: &RctScenario, delta: f64, n_mc: usize) -> Result<MonteCarloEstimate> {
    Ok(true_pibt_curve(scenario, &[delta], n_mc)?[0])
}

/// `θ(δ)` at every grid point from one shared set of `n_mc` draws.
pub fn true_pibt_curve(scenario: &RctScenario, deltas: &[f64], n_mc: usize) -> Result<Vec<MonteCarloEstimate>> {
    scenario.validate()?;
    if n_mc < MIN_TRUTH_DRAWS {
        return Err(PibtError::invalid(format!(
            "truth needs at least {MIN_TRUTH_DRAWS} draws, got {n_mc}"
        )));
    }
    let mut rng = stream(scenario.seed, 0, Purpose::Truth);
    let mut diffs: Vec<f64> = (0..n_mc)
        .map(|_| {
            let e1: f64 = rng.sample(StandardNormal);
            let e2: f64 = rng.sample(StandardNormal);
            let (y0, y1) = scenario.couple(e1, e2);
            y1 - y0
        })
        .collect();
    diffs.sort_by(f64::total_cmp);
    let n = n_mc as f64;
    Ok(deltas
        .iter()
        .map(|&d| {
            let above = n_mc - diffs.partition_point(|&v| v <= d);
            let p = above as f64 / n;
            MonteCarloEstimate {
                estimate: p,
                standard_error: (p * (1.0 - p) / n).sqrt(),
                draws: n_mc,
            }
        })
        .collect())
}
