//! Scenario files for `pibt simulate`.
//!
//! A scenario is a flat TOML table whose `kind` key selects the experiment:
//!
//! ```toml
//! kind = "rct_power"
//! epsilon = 0.05
//! confidence = 0.90
//! n_min = 100
//! n_max = 10000
//! n_step = 2
//! ```
//!
//! | kind                | keys                                                                                      |
//! |---------------------|-------------------------------------------------------------------------------------------|
//! | `rct_power`         | `epsilon`, `confidence`, `n_min`, `n_max`, `n_step` (default 1)                           |
//! | `conditional_power` | `p`, `q`, `m`, `sigma0`, `sigma1`, `rho`, `beta0`, `beta1`, `seed`, `alpha`, `n_grid`, `replicates` (30), `split_fraction` (0.5), `conservative_max` (false) |
//! | `rct_coverage`      | `y0`, `y1`, `rho`, `treat_prob`, `seed`, `n`, `alpha`, `delta_min`, `delta_max`, `delta_points` (41), `replicates`, `n_mc` (10⁶) |
//!
//! Marginals are strings such as `"normal(0,1)"`. Unknown keys are rejected.

use std::path::Path;

use serde::Deserialize;

use crate::conditional::RegressionCombination;
use crate::error::{PibtError, Result};
use crate::rct::linspace;

use super::experiments::DEFAULT_REPLICATES;
use super::marginal::Marginal;
use super::observational_world::ObservationalScenario;
use super::rct_world::RctScenario;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RctPowerSpec {
    pub epsilon: f64,
    pub confidence: f64,
    pub n_min: usize,
    pub n_max: usize,
    #[serde(default = "one")]
    pub n_step: usize,
}

impl RctPowerSpec {
    pub fn n_grid(&self) -> Result<Vec<usize>> {
        if self.n_step == 0 || self.n_min > self.n_max {
            return Err(PibtError::invalid("need n_min ≤ n_max and n_step ≥ 1"));
        }
        Ok((self.n_min..=self.n_max).step_by(self.n_step).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionalPowerSpec {
    pub p: usize,
    pub q: u32,
    pub m: u32,
    #[serde(default = "unit")]
    pub sigma0: f64,
    #[serde(default = "unit")]
    pub sigma1: f64,
    #[serde(default)]
    pub rho: f64,
    #[serde(default)]
    pub beta0: Vec<f64>,
    #[serde(default)]
    pub beta1: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    pub alpha: f64,
    pub n_grid: Vec<usize>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "half")]
    pub split_fraction: f64,
    #[serde(default)]
    pub conservative_max: bool,
}

impl ConditionalPowerSpec {
    pub fn scenario(&self) -> Result<ObservationalScenario> {
        let mut s = ObservationalScenario {
            p: self.p,
            q: self.q,
            beta0: self.beta0.clone(),
            beta1: self.beta1.clone(),
            sigma0: self.sigma0,
            sigma1: self.sigma1,
            rho: self.rho,
            m: self.m,
            seed: self.seed,
        };
        s.fill_defaults()?;
        Ok(s)
    }

    pub fn combination(&self) -> RegressionCombination {
        if self.conservative_max {
            RegressionCombination::ConservativeMax
        } else {
            RegressionCombination::Sum
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RctCoverageSpec {
    pub y0: Marginal,
    pub y1: Marginal,
    #[serde(default)]
    pub rho: f64,
    #[serde(default = "half")]
    pub treat_prob: f64,
    #[serde(default)]
    pub seed: u64,
    pub n: usize,
    pub alpha: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    #[serde(default = "default_points")]
    pub delta_points: usize,
    pub replicates: usize,
    #[serde(default = "default_mc")]
    pub n_mc: usize,
}

impl RctCoverageSpec {
    pub fn scenario(&self) -> Result<RctScenario> {
        RctScenario::new(self.y0, self.y1, self.rho, self.treat_prob, self.seed)
    }

    pub fn delta_grid(&self) -> Result<Vec<f64>> {
        if self.delta_points == 0 || !(self.delta_min <= self.delta_max) {
            return Err(PibtError::invalid("need delta_min ≤ delta_max and delta_points ≥ 1"));
        }
        Ok(linspace(self.delta_min, self.delta_max, self.delta_points))
    }
}

fn one() -> usize {
    1
}
fn unit() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn default_replicates() -> usize {
    DEFAULT_REPLICATES
}
fn default_points() -> usize {
    crate::rct::DEFAULT_GRID_POINTS
}
fn default_mc() -> usize {
    1_000_000
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scenario {
    RctPower(RctPowerSpec),
    ConditionalPower(ConditionalPowerSpec),
    RctCoverage(RctCoverageSpec),
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| PibtError::invalid(format!("scenario: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PibtError::invalid(format!("cannot read scenario {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Replaces the master seed, where the scenario has one.
    pub fn set_seed(&mut self, seed: u64) {
        match self {
            Scenario::RctPower(_) => {}
            Scenario::ConditionalPower(s) => s.seed = seed,
            Scenario::RctCoverage(s) => s.seed = seed,
        }
    }
}
