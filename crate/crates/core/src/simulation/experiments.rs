use rayon::prelude::*;
use serde::Serialize;

use crate::conditional::{split_indices, LinearGaussianMargin, RegressionCombination};
use crate::error::{check_probability_open, Arm, PibtError, Result};
use crate::numerics::{symmetric_eigenvalue_bounds, SymmetricMatrix};
use crate::rct::{confidence_band, confidence_for_margin, continuous_control_size, rct_margin};
use crate::regression::DEFAULT_RANK_TOLERANCE;

use super::observational_world::{generate_observational, ObservationalScenario};
use super::rct_world::{generate_rct_replicate, true_pibt_curve, RctScenario};
use super::rng::child_seed;

/// One row of the RCT power curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RctPowerRow {
    pub n: usize,
    pub n0: usize,
    pub n1: usize,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RctPowerCurve {
    pub epsilon: f64,
    pub target_confidence: f64,
    pub rows: Vec<RctPowerRow>,
    /// First grid `n` whose confidence reaches the target.
    pub threshold: Option<usize>,
    /// Real-valued total `2·n₀*` at which the equal-arm confidence equals the target.
    pub continuous_crossing: f64,
}

/// Confidence attached to margin `ε` at each total `n`, split as
/// `n₀ = ⌊n/2⌋`, `n₁ = n − n₀`.
pub fn power_curve_rct(epsilon: f64, target_confidence: f64, n_grid: &[usize]) -> Result<RctPowerCurve> {
    check_probability_open("target confidence", target_confidence)?;
    if n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(PibtError::invalid("sample-size grid must be strictly ascending"));
    }
    let rows = n_grid
        .iter()
        .map(|&n| {
            if n < 2 {
                return Err(PibtError::invalid(format!("total sample size must be ≥ 2, got {n}")));
            }
            let n0 = n / 2;
            let n1 = n - n0;
            Ok(RctPowerRow {
                n,
                n0,
                n1,
                confidence: confidence_for_margin(n0, n1, epsilon)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let threshold = rows.iter().find(|r| r.confidence >= target_confidence).map(|r| r.n);
    Ok(RctPowerCurve {
        epsilon,
        target_confidence,
        rows,
        threshold,
        continuous_crossing: 2.0 * continuous_control_size(epsilon, target_confidence, 1.0),
    })
}

/// The linear-Gaussian margin of one replicate, computed from its split alone.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateMargin {
    pub replicate: u64,
    pub margin: LinearGaussianMargin,
    /// Arms whose fitting design was rank deficient (operator norm taken as ∞).
    pub singular_arms: Vec<Arm>,
}

/// Generates replicate `replicate` of size `n`, splits it with `fit_fraction`,
/// and evaluates the margin on the fitting-part Gram matrices.
///
/// The margin does not depend on `β` or `σ`, so no regression is fit. An arm
/// whose design fails the OLS rank check contributes the vacuous term 1.
pub fn replicate_margin(
    scenario: &ObservationalScenario,
    n: usize,
    replicate: u64,
    fit_fraction: f64,
    alpha: f64,
    combination: RegressionCombination,
) -> Result<ReplicateMargin> {
    let draw = generate_observational(scenario, n, replicate)?;
    let sample = &draw.sample;
    let split = split_indices(sample.treatments(), fit_fraction, child_seed(scenario.seed, replicate))?;
    let map = scenario.feature_map()?;
    let d = map.output_dim();
    let mut op_norms = [f64::INFINITY; 2];
    let mut singular_arms = Vec::new();
    for arm in Arm::BOTH {
        let rows = split
            .fit_indices
            .iter()
            .filter(|&&i| sample.treatments()[i] == arm)
            .map(|&i| map.features(&sample.covariates()[i]))
            .collect::<Result<Vec<_>>>()?;
        let gram = SymmetricMatrix::gram(d, &rows);
        let (lo, hi) = if rows.is_empty() { (0.0, 0.0) } else { symmetric_eigenvalue_bounds(&gram) };
        // singular values of Λ are square roots of the Gram eigenvalues
        if rows.len() >= d && hi > 0.0 && lo > 0.0 && (lo / hi).sqrt() > DEFAULT_RANK_TOLERANCE {
            op_norms[arm.index()] = 1.0 / lo.sqrt();
        } else {
            singular_arms.push(arm);
        }
    }
    let count = |arm: Arm| {
        split
            .residual_indices
            .iter()
            .filter(|&&i| sample.treatments()[i] == arm)
            .count()
    };
    let margin = LinearGaussianMargin::from_op_norms(op_norms, d, count(Arm::Control), count(Arm::Treated), alpha, combination)?;
    Ok(ReplicateMargin {
        replicate,
        margin,
        singular_arms,
    })
}

/// Median summary of one sample size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalPowerRow {
    pub n: usize,
    pub median_total: f64,
    pub median_regression_term: f64,
    pub median_dkw_term: f64,
    /// Replicates with at least one rank-deficient arm.
    pub singular_replicates: usize,
    pub replicates: usize,
}

pub const DEFAULT_REPLICATES: usize = 30;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Per-`n` medians of the total margin over `replicates` independent worlds.
/// Replicates run in parallel; results are reduced in replicate order.
pub fn power_curve_conditional(
    scenario: &ObservationalScenario,
    n_grid: &[usize],
    alpha: f64,
    replicates: usize,
    fit_fraction: f64,
    combination: RegressionCombination,
) -> Result<Vec<ConditionalPowerRow>> {
    if replicates == 0 {
        return Err(PibtError::invalid("need at least one replicate"));
    }
    n_grid
        .iter()
        .map(|&n| {
            let reps = (0..replicates as u64)
                .into_par_iter()
                .map(|r| replicate_margin(scenario, n, r, fit_fraction, alpha, combination))
                .collect::<Result<Vec<_>>>()?;
            Ok(ConditionalPowerRow {
                n,
                median_total: median(reps.iter().map(|r| r.margin.total).collect()),
                median_regression_term: median(reps.iter().map(|r| r.margin.regression_term).collect()),
                median_dkw_term: median(reps.iter().map(|r| r.margin.dkw_term).collect()),
                singular_replicates: reps.iter().filter(|r| !r.singular_arms.is_empty()).count(),
                replicates,
            })
        })
        .collect()
}

/// Outcome of an RCT band coverage experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub delta_grid: Vec<f64>,
    /// True `θ(δ)` per grid point.
    pub truth: Vec<f64>,
    /// Fraction of replicates whose clipped band contains the truth, per grid point.
    pub pointwise_coverage: Vec<f64>,
    /// Fraction of replicates covering the truth at every grid point at once.
    pub simultaneous_coverage: f64,
    pub margin: f64,
    pub replicates: usize,
    /// Whether the truth came from a closed form rather than Monte Carlo.
    pub exact_truth: bool,
}

/// Draws `replicates` trials of size `n`, builds the band on `delta_grid` at
/// level `α`, and checks it against `θ(δ)`.
pub fn rct_coverage(
    scenario: &RctScenario,
    n: usize,
    delta_grid: &[f64],
    alpha: f64,
    replicates: usize,
    n_mc: usize,
) -> Result<CoverageReport> {
    if replicates == 0 {
        return Err(PibtError::invalid("need at least one replicate"));
    }
    let exact: Option<Vec<f64>> = delta_grid.iter().map(|&d| scenario.exact_pibt(d)).collect();
    let exact_truth = exact.is_some();
    let truth = match exact {
        Some(t) => t,
        None => true_pibt_curve(scenario, delta_grid, n_mc)?
            .into_iter()
            .map(|e| e.estimate)
            .collect(),
    };
    let hits = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let draw = generate_rct_replicate(scenario, n, r)?;
            let band = confidence_band(&draw.sample, delta_grid, alpha)?;
            Ok((0..band.len()).map(|i| band.contains(i, truth[i])).collect::<Vec<bool>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let reps = replicates as f64;
    let pointwise_coverage = (0..delta_grid.len())
        .map(|i| hits.iter().filter(|h| h[i]).count() as f64 / reps)
        .collect();
    let simultaneous_coverage = hits.iter().filter(|h| h.iter().all(|&b| b)).count() as f64 / reps;
    let n1 = generate_rct_replicate(scenario, n, 0)?.sample.n1();
    Ok(CoverageReport {
        delta_grid: delta_grid.to_vec(),
        truth,
        pointwise_coverage,
        simultaneous_coverage,
        margin: rct_margin(n - n1, n1, alpha)?,
        replicates,
        exact_truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::marginal::Marginal;

    #[test]
    fn rct_power_curve_examples() {
        let c = power_curve_rct(0.05, 0.9, &[100, 200, 5902, 5904]).unwrap();
        assert_eq!(c.rows[0].confidence, 0.0);
        assert!(c.rows.windows(2).all(|w| w[1].confidence >= w[0].confidence));
        assert_eq!(c.threshold, Some(5904));
        assert!((c.continuous_crossing - 5902.207).abs() < 1e-2);
        assert!(power_curve_rct(0.05, 0.9, &[200, 100]).is_err());
    }

    #[test]
    fn replicate_margins_are_reproducible_and_ordered_in_degree() {
        let s1 = ObservationalScenario::with_unit_coefficients(2, 1, 1.0, 1.0, 0.0, 1, 17).unwrap();
        let s2 = ObservationalScenario::with_unit_coefficients(2, 2, 1.0, 1.0, 0.0, 1, 17).unwrap();
        let a = replicate_margin(&s1, 512, 3, 0.5, 0.05, RegressionCombination::Sum).unwrap();
        assert_eq!(a, replicate_margin(&s1, 512, 3, 0.5, 0.05, RegressionCombination::Sum).unwrap());
        let b = replicate_margin(&s2, 512, 3, 0.5, 0.05, RegressionCombination::Sum).unwrap();
        assert_eq!(a.margin.dkw_term, b.margin.dkw_term);
        assert!(b.margin.total > a.margin.total);
        assert_eq!(b.margin.d, 5);
    }

    #[test]
    fn rank_deficient_arm_gets_the_vacuous_term() {
        // a handful of units: with m = 6 the treated fitting part is tiny
        let s = ObservationalScenario::with_unit_coefficients(2, 2, 1.0, 1.0, 0.0, 6, 1).unwrap();
        let mut seen = false;
        for r in 0..40 {
            if let Ok(m) = replicate_margin(&s, 120, r, 0.5, 0.05, RegressionCombination::Sum) {
                if m.singular_arms.contains(&Arm::Treated) {
                    assert_eq!(m.margin.arm_terms[Arm::Treated.index()], 1.0);
                    seen = true;
                }
            }
        }
        assert!(seen);
    }

    #[test]
    fn conditional_curve_shrinks_with_n() {
        let s = ObservationalScenario::with_unit_coefficients(2, 1, 1.0, 1.0, 0.0, 1, 5).unwrap();
        let rows = power_curve_conditional(&s, &[256, 1024, 4096], 0.05, 10, 0.5, RegressionCombination::Sum).unwrap();
        assert!(rows.windows(2).all(|w| w[1].median_total < w[0].median_total));
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn small_coverage_run() {
        let s = RctScenario::new(Marginal::normal(0.0, 1.0).unwrap(), Marginal::normal(0.5, 1.0).unwrap(), 0.3, 0.5, 2).unwrap();
        let grid = crate::rct::linspace(-3.0, 3.0, 11);
        let r = rct_coverage(&s, 200, &grid, 0.1, 20, 10_000).unwrap();
        assert!(r.exact_truth);
        assert!(r.simultaneous_coverage >= 0.9);
        assert_eq!(r.pointwise_coverage.len(), 11);
    }
}
