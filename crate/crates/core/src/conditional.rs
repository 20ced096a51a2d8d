//! Covariate-conditional bounds from regression residuals.
//!
//! The sample is split in two. Per-arm regressions `μ̂_w` are fit on the
//! first part; residuals `R̂_i = Y_i − μ̂_w(X_i)` of the second part form a
//! pool per arm, and the conditional CDF at stratum `x` is the pool shifted
//! by `μ̂_w(x)`:
//!
//! ```text
//! F̂_w(y | x) = (1/n_w) Σ_{i ∈ S_w ∩ I₂} 1{μ̂_w(x) + R̂_i ≤ y}
//! ```
//!
//! Makarov bounds are then taken between the two shifted pools exactly as in
//! the marginal case.

use rand::seq::SliceRandom;

use crate::ecdf::EmpiricalCdf;
use crate::error::{check_probability_open, Arm, PibtError, Result};
use crate::makarov::{step_difference_bounds, step_difference_segments, PibtBoundPair, StepSegment};
use crate::numerics::{chi2_quantile, min_eigenvalue, normal_cdf, SymmetricMatrix};
use crate::rct::rct_margin;
use crate::regression::{FeatureMap, RegressionFit};
use crate::simulation::rng::{stream, Purpose};

/// Observed `(X_i, W_i, Y_i)` triples.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationalSample {
    covariates: Vec<Vec<f64>>,
    treatments: Vec<Arm>,
    outcomes: Vec<f64>,
}

impl ObservationalSample {
    pub fn new(covariates: Vec<Vec<f64>>, treatments: Vec<Arm>, outcomes: Vec<f64>) -> Result<Self> {
        let n = outcomes.len();
        if covariates.len() != n || treatments.len() != n {
            return Err(PibtError::invalid(format!(
                "covariates ({}), treatments ({}) and outcomes ({n}) must have equal lengths",
                covariates.len(),
                treatments.len()
            )));
        }
        let p = covariates.first().map_or(0, Vec::len);
        if p == 0 || covariates.iter().any(|x| x.len() != p) {
            return Err(PibtError::invalid("covariate rows must share a positive length"));
        }
        if covariates.iter().flatten().chain(&outcomes).any(|v| !v.is_finite()) {
            return Err(PibtError::invalid("covariates and outcomes must be finite"));
        }
        for arm in Arm::BOTH {
            if !treatments.contains(&arm) {
                return Err(PibtError::DegenerateData(format!("the {arm} arm is empty")));
            }
        }
        Ok(Self {
            covariates,
            treatments,
            outcomes,
        })
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn covariate_dim(&self) -> usize {
        self.covariates[0].len()
    }

    pub fn covariates(&self) -> &[Vec<f64>] {
        &self.covariates
    }

    pub fn treatments(&self) -> &[Arm] {
        &self.treatments
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }
}

/// Partition of the unit indices into a fitting part `I₁` and a residual part `I₂`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSplit {
    /// `I₁`, ascending.
    pub fit_indices: Vec<usize>,
    /// `I₂`, ascending.
    pub residual_indices: Vec<usize>,
    pub seed: u64,
    /// Number of reseeds needed before both arms appeared in `I₂`.
    pub attempt: u32,
}

pub const MAX_SPLIT_RETRIES: u32 = 100;

/// Uniformly random split with `|I₁| = ⌊fit_fraction·n⌋`, deterministic in `seed`.
///
/// Reseeds (up to 100 times) until both arms are represented in `I₂`.
pub fn split_sample(sample: &ObservationalSample, fit_fraction: f64, seed: u64) -> Result<SampleSplit> {
    check_probability_open("fit fraction", fit_fraction)?;
    split_indices(sample.treatments(), fit_fraction, seed)
}

pub(crate) fn split_indices(treatments: &[Arm], fit_fraction: f64, seed: u64) -> Result<SampleSplit> {
    let n = treatments.len();
    let n_fit = (fit_fraction * n as f64).floor() as usize;
    for attempt in 0..=MAX_SPLIT_RETRIES {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut stream(seed, attempt as u64, Purpose::SampleSplit));
        let mut fit_indices = order[..n_fit].to_vec();
        let mut residual_indices = order[n_fit..].to_vec();
        let covered = Arm::BOTH
            .iter()
            .all(|arm| residual_indices.iter().any(|&i| treatments[i] == *arm));
        if covered {
            fit_indices.sort_unstable();
            residual_indices.sort_unstable();
            return Ok(SampleSplit {
                fit_indices,
                residual_indices,
                seed,
                attempt,
            });
        }
    }
    Err(PibtError::DegenerateSplit(format!(
        "an arm was missing from the residual split after {MAX_SPLIT_RETRIES} reseeds (n = {n}, fit part = {n_fit})"
    )))
}

/// Fitted two-learner with held-out residual pools.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalBoundsModel {
    /// Indexed by [`Arm::index`].
    fits: [RegressionFit; 2],
    /// Sorted residuals per arm from `I₂`.
    residual_pools: [Vec<f64>; 2],
    feature_map: FeatureMap,
    split: SampleSplit,
}

/// Per-arm OLS on `I₁`, residual pools on `I₂`.
pub fn fit_conditional_model(
    sample: &ObservationalSample,
    split: &SampleSplit,
    feature_map: &FeatureMap,
) -> Result<ConditionalBoundsModel> {
    let n = sample.len();
    let mut seen = vec![false; n];
    for &i in split.fit_indices.iter().chain(&split.residual_indices) {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(PibtError::invalid("split does not partition the sample"));
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(PibtError::invalid("split does not cover every unit"));
    }
    if feature_map.input_dim() != sample.covariate_dim() {
        return Err(PibtError::invalid(format!(
            "feature map expects p = {}, sample has p = {}",
            feature_map.input_dim(),
            sample.covariate_dim()
        )));
    }
    let rows_for = |indices: &[usize], arm: Arm| -> (Vec<Vec<f64>>, Vec<f64>) {
        indices
            .iter()
            .filter(|&&i| sample.treatments()[i] == arm)
            .map(|&i| (sample.covariates()[i].clone(), sample.outcomes()[i]))
            .unzip()
    };
    let fit_arm = |arm: Arm| -> Result<(RegressionFit, Vec<f64>)> {
        let (x_fit, y_fit) = rows_for(&split.fit_indices, arm);
        let fit = RegressionFit::fit(arm, feature_map, &x_fit, &y_fit)?;
        let (x_res, y_res) = rows_for(&split.residual_indices, arm);
        if x_res.is_empty() {
            return Err(PibtError::DegenerateSplit(format!("the {arm} arm has no residual units")));
        }
        let mut pool = fit.residuals(&x_res, &y_res)?;
        pool.sort_by(f64::total_cmp);
        Ok((fit, pool))
    };
    let (fit0, pool0) = fit_arm(Arm::Control)?;
    let (fit1, pool1) = fit_arm(Arm::Treated)?;
    Ok(ConditionalBoundsModel {
        fits: [fit0, fit1],
        residual_pools: [pool0, pool1],
        feature_map: feature_map.clone(),
        split: split.clone(),
    })
}

impl ConditionalBoundsModel {
    pub fn fit(&self, arm: Arm) -> &RegressionFit {
        &self.fits[arm.index()]
    }

    /// Sorted residual pool for `arm`.
    pub fn residual_pool(&self, arm: Arm) -> &[f64] {
        &self.residual_pools[arm.index()]
    }

    /// `n_w = |S_w ∩ I₂|`.
    pub fn pool_size(&self, arm: Arm) -> usize {
        self.residual_pools[arm.index()].len()
    }

    pub fn feature_map(&self) -> &FeatureMap {
        &self.feature_map
    }

    pub fn split(&self) -> &SampleSplit {
        &self.split
    }

    /// `μ̂_w(x)`.
    pub fn predict(&self, arm: Arm, x: &[f64]) -> Result<f64> {
        self.fits[arm.index()].predict(x)
    }

    /// Residual eCDF for `arm` (unshifted).
    pub fn residual_ecdf(&self, arm: Arm) -> EmpiricalCdf {
        EmpiricalCdf::from_vec(self.residual_pools[arm.index()].clone()).expect("pools are nonempty and finite")
    }

    /// `F̂_w(y | x)`.
    pub fn conditional_cdf(&self, arm: Arm, y: f64, x: &[f64]) -> Result<f64> {
        let mu = self.predict(arm, x)?;
        let pool = self.residual_pool(arm);
        Ok(pool.partition_point(|&r| mu + r <= y) as f64 / pool.len() as f64)
    }

    fn shifts(&self, delta: f64, x: &[f64]) -> Result<(f64, f64)> {
        if !delta.is_finite() {
            return Err(PibtError::invalid(format!("threshold δ must be finite, got {delta}")));
        }
        Ok((
            self.predict(Arm::Treated, x)? - delta / 2.0,
            self.predict(Arm::Control, x)? + delta / 2.0,
        ))
    }

    /// `(θ̂^L(δ, x), θ̂^U(δ, x))` by exact breakpoint evaluation.
    pub fn bounds(&self, delta: f64, x: &[f64]) -> Result<PibtBoundPair> {
        let (s1, s0) = self.shifts(delta, x)?;
        Ok(step_difference_bounds(
            self.residual_pool(Arm::Treated),
            s1,
            self.residual_pool(Arm::Control),
            s0,
            delta,
        ))
    }

    /// Piecewise-constant `Ĝ(·, δ, x)`.
    pub fn g_hat_segments(&self, delta: f64, x: &[f64]) -> Result<Vec<StepSegment>> {
        let (s1, s0) = self.shifts(delta, x)?;
        Ok(step_difference_segments(
            self.residual_pool(Arm::Treated),
            s1,
            self.residual_pool(Arm::Control),
            s0,
        ))
    }
}

pub fn conditional_cdf(model: &ConditionalBoundsModel, arm: Arm, y: f64, x: &[f64]) -> Result<f64> {
    model.conditional_cdf(arm, y, x)
}

pub fn conditional_pibt_bounds(model: &ConditionalBoundsModel, delta: f64, x: &[f64]) -> Result<PibtBoundPair> {
    model.bounds(delta, x)
}

/// How the two per-arm regression terms are combined into one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RegressionCombination {
    /// `Σ_w term_w`.
    #[default]
    Sum,
    /// `2·max_w term_w`, never smaller than the sum.
    ConservativeMax,
}

/// Uniform margin of error for the linear model with Gaussian residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearGaussianMargin {
    pub alpha: f64,
    pub d: usize,
    /// `v_{d,α}`, the `1 − α/2` quantile of `χ²_d`.
    pub chi2_quantile: f64,
    /// `‖(Λ_wᵀΛ_w)^{-1/2}‖_op` per arm (control, treated); infinite for a singular design.
    pub op_norms: [f64; 2],
    /// `Φ(√v·‖·‖) − Φ(−√v·‖·‖)` per arm.
    pub arm_terms: [f64; 2],
    pub regression_term: f64,
    pub dkw_term: f64,
    pub total: f64,
    /// `1 − 2α`.
    pub confidence: f64,
    pub n0: usize,
    pub n1: usize,
    pub combination: RegressionCombination,
}

/// `‖(ΛᵀΛ)^{-1/2}‖_op = λ_min(ΛᵀΛ)^{-1/2}`.
pub fn inverse_sqrt_op_norm(gram: &SymmetricMatrix) -> Result<f64> {
    let lambda = min_eigenvalue(gram);
    if lambda > 0.0 {
        Ok(1.0 / lambda.sqrt())
    } else {
        Err(PibtError::SingularDesign {
            arm: None,
            ratio: lambda,
            tolerance: 0.0,
        })
    }
}

fn window_term(sqrt_v: f64, op_norm: f64) -> f64 {
    if op_norm.is_infinite() {
        return 1.0;
    }
    let z = sqrt_v * op_norm;
    normal_cdf(z) - normal_cdf(-z)
}

impl LinearGaussianMargin {
    /// Assembles the margin from per-arm operator norms and residual-pool sizes.
    /// An infinite operator norm contributes the vacuous per-arm term 1.
    pub fn from_op_norms(
        op_norms: [f64; 2],
        d: usize,
        n0: usize,
        n1: usize,
        alpha: f64,
        combination: RegressionCombination,
    ) -> Result<Self> {
        check_probability_open("alpha", alpha)?;
        if d == 0 {
            return Err(PibtError::invalid("feature dimension must be ≥ 1"));
        }
        let v = chi2_quantile(d as u32, 1.0 - alpha / 2.0)?;
        let sqrt_v = v.sqrt();
        let arm_terms = op_norms.map(|op| window_term(sqrt_v, op));
        let regression_term = match combination {
            RegressionCombination::Sum => arm_terms[0] + arm_terms[1],
            RegressionCombination::ConservativeMax => 2.0 * arm_terms[0].max(arm_terms[1]),
        };
        let dkw_term = rct_margin(n0, n1, alpha)?;
        Ok(Self {
            alpha,
            d,
            chi2_quantile: v,
            op_norms,
            arm_terms,
            regression_term,
            dkw_term,
            total: regression_term + dkw_term,
            confidence: 1.0 - 2.0 * alpha,
            n0,
            n1,
            combination,
        })
    }

    /// Margin from realized Gram matrices; fails on a non-positive-definite one.
    pub fn from_grams(
        grams: [&SymmetricMatrix; 2],
        n0: usize,
        n1: usize,
        alpha: f64,
        combination: RegressionCombination,
    ) -> Result<Self> {
        let d = grams[0].order();
        if grams[1].order() != d {
            return Err(PibtError::invalid("both arms must share a feature dimension"));
        }
        let mut op_norms = [0.0; 2];
        for arm in Arm::BOTH {
            op_norms[arm.index()] = inverse_sqrt_op_norm(grams[arm.index()]).map_err(|e| e.with_arm(arm))?;
        }
        Self::from_op_norms(op_norms, d, n0, n1, alpha, combination)
    }
}

pub fn linear_gaussian_margin(model: &ConditionalBoundsModel, alpha: f64) -> Result<LinearGaussianMargin> {
    linear_gaussian_margin_with(model, alpha, RegressionCombination::Sum)
}

pub fn linear_gaussian_margin_with(
    model: &ConditionalBoundsModel,
    alpha: f64,
    combination: RegressionCombination,
) -> Result<LinearGaussianMargin> {
    LinearGaussianMargin::from_grams(
        [&model.fit(Arm::Control).design_gram, &model.fit(Arm::Treated).design_gram],
        model.pool_size(Arm::Control),
        model.pool_size(Arm::Treated),
        alpha,
        combination,
    )
}

/// Margin and confidence from the general residual inequality with explicit `t_w`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralMargin {
    pub t: [f64; 2],
    /// `sup_r P(r < R(w) ≤ r + 2t_w)` per arm.
    pub window_mass: [f64; 2],
    pub dkw_term: f64,
    pub margin: f64,
    /// `1 − α − Σ_w P(sup_x |μ̂_w − μ_w| > t_w)`, clipped to 0 when outside `[0, 1]`.
    pub confidence: f64,
    pub diagnostic: Option<String>,
}

/// General residual-based margin. `window_mass(arm, t)` must return
/// `sup_r P(r < R(w) ≤ r + 2t)` and `regression_miss(arm, t)` an upper bound on
/// `P(sup_x |μ̂_w(x) − μ_w(x)| > t)`.
pub fn general_margin(
    t: [f64; 2],
    window_mass: impl Fn(Arm, f64) -> f64,
    regression_miss: impl Fn(Arm, f64) -> f64,
    n0: usize,
    n1: usize,
    alpha: f64,
) -> Result<GeneralMargin> {
    if t.iter().any(|v| !(*v >= 0.0)) {
        return Err(PibtError::invalid("regression deviation radii t_w must be ≥ 0"));
    }
    let dkw_term = rct_margin(n0, n1, alpha)?;
    let mass = Arm::BOTH.map(|a| window_mass(a, t[a.index()]));
    let miss: f64 = Arm::BOTH.iter().map(|&a| regression_miss(a, t[a.index()])).sum();
    let raw = 1.0 - alpha - miss;
    let (confidence, diagnostic) = if (0.0..=1.0).contains(&raw) {
        (raw, None)
    } else {
        (
            0.0,
            Some(format!(
                "confidence 1 − α − Σ miss = {raw} is outside [0, 1]; α = {alpha} is not admissible for these t_w"
            )),
        )
    };
    Ok(GeneralMargin {
        t,
        window_mass: mass,
        dkw_term,
        margin: mass[0] + mass[1] + dkw_term,
        confidence,
        diagnostic,
    })
}

/// `sup_r P(r < R ≤ r + 2t)` for `R ~ N(0, σ²)`: the centred window, `2Φ(t/σ) − 1`.
pub fn gaussian_window_mass(t: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    normal_cdf(t / sigma) - normal_cdf(-t / sigma)
}

/// Bounds at one `x` with the shared uniform margin applied.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalBandPoint {
    pub x: Vec<f64>,
    pub bounds: PibtBoundPair,
}

/// Bounds over a covariate grid with one margin valid simultaneously over all
/// `x` (and `δ`).
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalBand {
    pub delta: f64,
    pub points: Vec<ConditionalBandPoint>,
    pub margin: LinearGaussianMargin,
}

impl ConditionalBand {
    pub fn lower_clipped(&self, i: usize) -> f64 {
        (self.points[i].bounds.lower - self.margin.total).max(0.0)
    }

    pub fn upper_clipped(&self, i: usize) -> f64 {
        (self.points[i].bounds.upper + self.margin.total).min(1.0)
    }

    pub fn contains(&self, i: usize, value: f64) -> bool {
        self.lower_clipped(i) <= value && value <= self.upper_clipped(i)
    }
}

pub fn uniform_confidence_band(
    model: &ConditionalBoundsModel,
    delta: f64,
    x_grid: &[Vec<f64>],
    alpha: f64,
) -> Result<ConditionalBand> {
    uniform_confidence_band_with(model, delta, x_grid, alpha, RegressionCombination::Sum)
}

pub fn uniform_confidence_band_with(
    model: &ConditionalBoundsModel,
    delta: f64,
    x_grid: &[Vec<f64>],
    alpha: f64,
    combination: RegressionCombination,
) -> Result<ConditionalBand> {
    if x_grid.is_empty() {
        return Err(PibtError::invalid("covariate grid must be nonempty"));
    }
    let margin = linear_gaussian_margin_with(model, alpha, combination)?;
    let points = x_grid
        .iter()
        .map(|x| {
            Ok(ConditionalBandPoint {
                x: x.clone(),
                bounds: model.bounds(delta, x)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConditionalBand { delta, points, margin })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_sample() -> ObservationalSample {
        // six units on a line; outcomes exactly 2x (treated) and -x (control), plus a bump
        let xs = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8];
        let arms = [1, 0, 1, 0, 1, 0, 1, 0];
        let covs: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        let treatments: Vec<Arm> = arms.iter().map(|&w| Arm::from_indicator(w).unwrap()).collect();
        let outcomes: Vec<f64> = xs
            .iter()
            .zip(&arms)
            .map(|(&x, &w)| if w == 1 { 2.0 * x } else { -x })
            .collect();
        ObservationalSample::new(covs, treatments, outcomes).unwrap()
    }

    #[test]
    fn split_sizes_and_determinism() {
        let covs: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64]).collect();
        let arms: Vec<Arm> = (0..100).map(|i| if i % 2 == 0 { Arm::Treated } else { Arm::Control }).collect();
        let s = ObservationalSample::new(covs, arms, vec![0.0; 100]).unwrap();
        let a = split_sample(&s, 0.5, 42).unwrap();
        assert_eq!((a.fit_indices.len(), a.residual_indices.len()), (50, 50));
        assert_eq!(a, split_sample(&s, 0.5, 42).unwrap());
        assert_ne!(a.fit_indices, split_sample(&s, 0.5, 43).unwrap().fit_indices);

        let small = ObservationalSample::new(
            (0..10).map(|i| vec![i as f64]).collect(),
            (0..10).map(|i| if i < 5 { Arm::Treated } else { Arm::Control }).collect(),
            vec![0.0; 10],
        )
        .unwrap();
        let b = split_sample(&small, 0.3, 1).unwrap();
        assert_eq!(b.fit_indices.len(), 3);
        assert!(split_sample(&small, 1.0, 1).is_err());
    }

    #[test]
    fn split_fails_when_an_arm_cannot_reach_the_residual_part() {
        let mut arms = vec![Arm::Control; 20];
        arms[0] = Arm::Treated;
        let s = ObservationalSample::new((0..20).map(|i| vec![i as f64]).collect(), arms, vec![0.0; 20]).unwrap();
        // 19 of 20 units go to the fit part; the single treated unit lands in I₂ with
        // probability 1/20 per attempt, so success is likely but not certain.
        match split_sample(&s, 0.95, 5) {
            Ok(split) => assert!(split.residual_indices.contains(&0)),
            Err(e) => assert!(matches!(e, PibtError::DegenerateSplit(_))),
        }
        // a split leaving I₂ empty can never succeed
        let err = split_sample(&s, 0.999, 5).unwrap_err();
        assert!(matches!(err, PibtError::DegenerateSplit(_)));
    }

    #[test]
    fn sample_validation() {
        assert!(matches!(
            ObservationalSample::new(vec![vec![0.0]; 2], vec![Arm::Treated; 2], vec![1.0, 2.0]),
            Err(PibtError::DegenerateData(_))
        ));
        assert!(ObservationalSample::new(vec![vec![0.0]; 2], vec![Arm::Treated, Arm::Control], vec![1.0]).is_err());
    }

    fn hand_split() -> SampleSplit {
        SampleSplit {
            fit_indices: vec![0, 1, 2, 3],
            residual_indices: vec![4, 5, 6, 7],
            seed: 0,
            attempt: 0,
        }
    }

    #[test]
    fn hand_traced_model() {
        let s = toy_sample();
        let map = FeatureMap::new(1, 1).unwrap();
        let model = fit_conditional_model(&s, &hand_split(), &map).unwrap();
        // noiseless lines through the origin: slopes 2 and -1, zero residuals
        assert!((model.predict(Arm::Treated, &[1.0]).unwrap() - 2.0).abs() < 1e-12);
        assert!((model.predict(Arm::Control, &[1.0]).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(model.pool_size(Arm::Treated), 2);
        assert_eq!(model.pool_size(Arm::Control), 2);
        for arm in Arm::BOTH {
            assert!(model.residual_pool(arm).iter().all(|r| r.abs() < 1e-12));
        }
        // point masses at μ̂_w(x): at x = 0.5, 1.0 vs −0.5
        assert_eq!(model.conditional_cdf(Arm::Treated, 0.99, &[0.5]).unwrap(), 0.0);
        assert_eq!(model.conditional_cdf(Arm::Treated, 1.01, &[0.5]).unwrap(), 1.0);
        let b = model.bounds(0.0, &[0.5]).unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 1.0));
        // at x = 0 both regressions give 0: Δ is (up to rounding) the point mass at 0
        let b = model.bounds(-1.0, &[0.0]).unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 1.0));
        let b = model.bounds(1.0, &[0.0]).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
    }

    fn pooled_model(pool1: Vec<f64>, pool0: Vec<f64>, mu1: f64, mu0: f64) -> ConditionalBoundsModel {
        let map = FeatureMap::new(1, 1).unwrap();
        let fits = [
            RegressionFit::from_coefficients(Arm::Control, &map, vec![mu0]).unwrap(),
            RegressionFit::from_coefficients(Arm::Treated, &map, vec![mu1]).unwrap(),
        ];
        let mut p0 = pool0;
        let mut p1 = pool1;
        p0.sort_by(f64::total_cmp);
        p1.sort_by(f64::total_cmp);
        ConditionalBoundsModel {
            fits,
            residual_pools: [p0, p1],
            feature_map: map,
            split: hand_split(),
        }
    }

    #[test]
    fn shift_and_count() {
        let m = pooled_model(vec![-1.0, 1.0], vec![0.0], 2.0, 0.0);
        assert_eq!(m.conditional_cdf(Arm::Treated, 1.5, &[1.0]).unwrap(), 0.5);
        assert_eq!(m.conditional_cdf(Arm::Treated, 1e300, &[1.0]).unwrap(), 1.0);
        assert_eq!(m.conditional_cdf(Arm::Treated, -1e300, &[1.0]).unwrap(), 0.0);
    }

    #[test]
    fn conditional_bounds_examples() {
        let m = pooled_model(vec![-0.3, 0.4, 1.0], vec![-0.3, 0.4, 1.0], 0.7, 0.7);
        let b = m.bounds(0.0, &[1.0]).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 1.0));

        let m = pooled_model(vec![0.0], vec![0.0], 2.0, 0.0);
        let b = m.bounds(0.0, &[1.0]).unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 1.0));

        // the marginal {1,2} vs {0,3} enumeration, shifted by a common 5
        let m = pooled_model(vec![-4.0, -3.0], vec![-5.0, -2.0], 5.0, 5.0);
        let b = m.bounds(0.0, &[1.0]).unwrap();
        assert_eq!((b.lower, b.upper), (0.5, 0.5));
    }

    #[test]
    fn margin_from_scalar_gram() {
        let gram = SymmetricMatrix::from_diagonal(&[100.0]);
        let m = LinearGaussianMargin::from_grams([&gram, &gram], 2951, 2951, 0.1, RegressionCombination::Sum).unwrap();
        assert!((m.chi2_quantile - 3.841_459).abs() < 1e-5);
        assert!((m.op_norms[0] - 0.1).abs() < 1e-15);
        // 2Φ(0.19599640)−1 per arm; scipy: 0.15539…; DKW term 0.0500009
        assert!((m.arm_terms[0] - 0.155_39).abs() < 1e-5);
        assert!((m.total - 0.360_78).abs() < 1e-5);
        assert!((m.confidence - 0.8).abs() < 1e-15);

        let big = gram.scaled(4.0);
        let m4 = LinearGaussianMargin::from_grams([&big, &big], 2951, 2951, 0.1, RegressionCombination::Sum).unwrap();
        assert!((m4.op_norms[0] - 0.05).abs() < 1e-15);
        assert!(m4.regression_term < m.regression_term);

        let huge = gram.scaled(1e16);
        let mh = LinearGaussianMargin::from_grams([&huge, &huge], 2951, 2951, 0.1, RegressionCombination::Sum).unwrap();
        assert!(mh.regression_term < 1e-6);
        assert!((mh.total - mh.dkw_term).abs() < 1e-6);

        let singular = SymmetricMatrix::zeros(1);
        let err = LinearGaussianMargin::from_grams([&gram, &singular], 10, 10, 0.1, RegressionCombination::Sum).unwrap_err();
        assert!(matches!(err, PibtError::SingularDesign { arm: Some(Arm::Treated), .. }));
    }

    #[test]
    fn conservative_combination_dominates() {
        let m = LinearGaussianMargin::from_op_norms([0.1, 0.4], 3, 50, 80, 0.05, RegressionCombination::Sum).unwrap();
        let c = LinearGaussianMargin::from_op_norms([0.1, 0.4], 3, 50, 80, 0.05, RegressionCombination::ConservativeMax).unwrap();
        assert!(c.regression_term > m.regression_term);
        assert!((c.regression_term - 2.0 * m.arm_terms[1]).abs() < 1e-15);
        let inf = LinearGaussianMargin::from_op_norms([f64::INFINITY, 0.4], 3, 50, 80, 0.05, RegressionCombination::Sum).unwrap();
        assert_eq!(inf.arm_terms[0], 1.0);
    }

    #[test]
    fn linear_gaussian_is_the_general_margin_with_gaussian_plug_ins() {
        let (alpha, d) = (0.05, 5);
        let op = [0.21, 0.37];
        let sigma = [0.8, 2.5];
        let v = chi2_quantile(d as u32, 1.0 - alpha / 2.0).unwrap();
        let t = [0, 1].map(|w| v.sqrt() * sigma[w] * op[w]);
        let g = general_margin(
            t,
            |a, t| gaussian_window_mass(t, sigma[a.index()]),
            |_, _| alpha / 2.0,
            40,
            70,
            alpha,
        )
        .unwrap();
        let p = LinearGaussianMargin::from_op_norms(op, d, 40, 70, alpha, RegressionCombination::Sum).unwrap();
        assert!((g.margin - p.total).abs() < 1e-14);
        assert!((g.confidence - p.confidence).abs() < 1e-15);
        assert!(g.diagnostic.is_none());

        let bad = general_margin([0.1, 0.1], |_, _| 0.0, |_, _| 0.6, 40, 70, 0.05).unwrap();
        assert_eq!(bad.confidence, 0.0);
        assert!(bad.diagnostic.is_some());
        assert!(general_margin([-1.0, 0.1], |_, _| 0.0, |_, _| 0.0, 4, 4, 0.1).is_err());
    }

    #[test]
    fn band_shares_one_margin() {
        let s = toy_sample();
        let map = FeatureMap::new(1, 1).unwrap();
        let model = fit_conditional_model(&s, &hand_split(), &map).unwrap();
        let grid = vec![vec![0.0], vec![0.5], vec![0.9]];
        let band = uniform_confidence_band(&model, 0.0, &grid, 0.1).unwrap();
        assert_eq!(band.points.len(), 3);
        let single = uniform_confidence_band(&model, 0.0, &grid[1..2], 0.1).unwrap();
        let direct = model.bounds(0.0, &grid[1]).unwrap();
        assert_eq!(single.points[0].bounds, direct);
        assert_eq!(single.margin, band.margin);
        assert_eq!(
            single.lower_clipped(0),
            (direct.lower - band.margin.total).max(0.0)
        );
        assert!(uniform_confidence_band(&model, 0.0, &[], 0.1).is_err());
    }
}
