//! Polynomial feature maps and per-arm ordinary least squares (the two-learner).

use crate::error::{Arm, PibtError, Result};
use crate::numerics::SymmetricMatrix;

/// Default rank tolerance: smallest singular value must exceed this fraction of the largest.
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-10;

/// All monomials of total degree `1..=q` in `p` inputs, scaled by `1/√d`.
///
/// There is no intercept column; add a constant pseudo-covariate if one is
/// wanted. For `x ∈ [0, 1]^p` every monomial lies in `[0, 1]`, so the scaling
/// gives `‖Ψ(x)‖₂ ≤ 1`. Outside the unit cube that norm bound is the caller's
/// responsibility.
///
/// Ordering is frozen: by total degree, then by number of distinct variables
/// (descending), then by exponent vector (descending lexicographic). For
/// `p = q = 2` this is `(x₁, x₂, x₁x₂, x₁², x₂²)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureMap {
    input_dim: usize,
    degree: u32,
    exponents: Vec<Vec<u32>>,
}

fn compositions(p: usize, total: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() + 1 == p {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for e in (0..=total).rev() {
        prefix.push(e);
        compositions(p, total - e, prefix, out);
        prefix.pop();
    }
}

impl FeatureMap {
    pub fn new(input_dim: usize, degree: u32) -> Result<Self> {
        if input_dim == 0 || degree == 0 {
            return Err(PibtError::invalid(format!(
                "feature map needs p ≥ 1 and q ≥ 1, got p={input_dim}, q={degree}"
            )));
        }
        let mut exponents = Vec::new();
        for k in 1..=degree {
            let mut block = Vec::new();
            compositions(input_dim, k, &mut Vec::new(), &mut block);
            block.sort_by(|a, b| {
                let support = |e: &Vec<u32>| e.iter().filter(|&&x| x > 0).count();
                support(b).cmp(&support(a)).then_with(|| b.cmp(a))
            });
            exponents.extend(block);
        }
        Ok(Self {
            input_dim,
            degree,
            exponents,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// `d`, the number of features.
    pub fn output_dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn scale(&self) -> f64 {
        1.0 / (self.output_dim() as f64).sqrt()
    }

    /// Exponent vector of each feature, in output order.
    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    /// `Ψ(x)`.
    pub fn features(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(PibtError::invalid(format!(
                "covariate vector has length {}, feature map expects {}",
                x.len(),
                self.input_dim
            )));
        }
        let scale = self.scale();
        Ok(self
            .exponents
            .iter()
            .map(|e| scale * e.iter().zip(x).map(|(&k, &v)| v.powi(k as i32)).product::<f64>())
            .collect())
    }
}

pub fn polynomial_features(x: &[f64], map: &FeatureMap) -> Result<Vec<f64>> {
    map.features(x)
}

/// Least-squares solution on an explicit design.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsSolution {
    pub coefficients: Vec<f64>,
    /// `ΛᵀΛ`, accumulated directly from the rows.
    pub gram: SymmetricMatrix,
    /// `σ_min(Λ)/σ_max(Λ)`.
    pub singular_value_ratio: f64,
}

/// Singular values of a square matrix given by columns (one-sided Jacobi).
fn singular_values(mut cols: Vec<Vec<f64>>) -> Vec<f64> {
    let d = cols.len();
    for _ in 0..100 {
        let mut rotated = false;
        for p in 0..d {
            for q in p + 1..d {
                let alpha: f64 = cols[p].iter().map(|v| v * v).sum();
                let beta: f64 = cols[q].iter().map(|v| v * v).sum();
                let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(a, b)| a * b).sum();
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..cols[p].len() {
                    let (a, b) = (cols[p][k], cols[q][k]);
                    cols[p][k] = c * a - s * b;
                    cols[q][k] = s * a + c * b;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    cols.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect()
}

/// Ordinary least squares by Householder QR of the design (never the normal
/// equations). Rejects designs whose singular-value ratio is at or below
/// `rank_tolerance`.
pub fn fit_ols_with_tolerance(
    design_rows: &[Vec<f64>],
    outcomes: &[f64],
    rank_tolerance: f64,
) -> Result<OlsSolution> {
    if design_rows.len() != outcomes.len() {
        return Err(PibtError::invalid(format!(
            "design has {} rows but {} outcomes",
            design_rows.len(),
            outcomes.len()
        )));
    }
    let d = match design_rows.first() {
        Some(r) => r.len(),
        None => {
            return Err(PibtError::SingularDesign {
                arm: None,
                ratio: 0.0,
                tolerance: rank_tolerance,
            })
        }
    };
    if d == 0 || design_rows.iter().any(|r| r.len() != d) {
        return Err(PibtError::invalid("design rows must share a positive length"));
    }
    let n = design_rows.len();
    if n < d {
        return Err(PibtError::SingularDesign {
            arm: None,
            ratio: 0.0,
            tolerance: rank_tolerance,
        });
    }
    let gram = SymmetricMatrix::gram(d, design_rows);

    let mut cols: Vec<Vec<f64>> = (0..d).map(|j| design_rows.iter().map(|r| r[j]).collect()).collect();
    let mut y = outcomes.to_vec();
    let mut r = vec![vec![0.0; d]; d];
    for k in 0..d {
        let norm = cols[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if cols[k][k] > 0.0 { -norm } else { norm };
        let mut v = cols[k][k..].to_vec();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        let reflect = |target: &mut [f64]| {
            let dot: f64 = v.iter().zip(target.iter()).map(|(a, b)| a * b).sum();
            let f = 2.0 * dot / vv;
            for (t, vi) in target.iter_mut().zip(&v) {
                *t -= f * vi;
            }
        };
        for col in cols.iter_mut().skip(k + 1) {
            reflect(&mut col[k..]);
        }
        reflect(&mut y[k..]);
        cols[k][k] = alpha;
        for val in cols[k][k + 1..].iter_mut() {
            *val = 0.0;
        }
    }
    for (j, col) in cols.iter().enumerate() {
        for (i, row) in r.iter_mut().enumerate().take(j + 1) {
            row[j] = col[i];
        }
    }
    let r_cols: Vec<Vec<f64>> = (0..d).map(|j| (0..d).map(|i| r[i][j]).collect()).collect();
    let sv = singular_values(r_cols);
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let ratio = if max > 0.0 { min / max } else { 0.0 };
    if ratio <= rank_tolerance || !ratio.is_finite() {
        return Err(PibtError::SingularDesign {
            arm: None,
            ratio,
            tolerance: rank_tolerance,
        });
    }
    let mut beta = vec![0.0; d];
    for i in (0..d).rev() {
        let s: f64 = (i + 1..d).map(|j| r[i][j] * beta[j]).sum();
        beta[i] = (y[i] - s) / r[i][i];
    }
    Ok(OlsSolution {
        coefficients: beta,
        gram,
        singular_value_ratio: ratio,
    })
}

pub fn fit_ols(design_rows: &[Vec<f64>], outcomes: &[f64]) -> Result<OlsSolution> {
    fit_ols_with_tolerance(design_rows, outcomes, DEFAULT_RANK_TOLERANCE)
}

/// One arm's regression `μ̂_w(x) = Ψ(x)ᵀβ̂_w`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub arm: Arm,
    pub coefficients: Vec<f64>,
    pub feature_map: FeatureMap,
    /// `Λ_wᵀΛ_w`.
    pub design_gram: SymmetricMatrix,
    pub in_sample_count: usize,
}

impl RegressionFit {
    /// Fits arm `arm` on raw covariate rows.
    pub fn fit(arm: Arm, feature_map: &FeatureMap, covariates: &[Vec<f64>], outcomes: &[f64]) -> Result<Self> {
        let design = covariates
            .iter()
            .map(|x| feature_map.features(x))
            .collect::<Result<Vec<_>>>()?;
        let sol = fit_ols(&design, outcomes).map_err(|e| e.with_arm(arm))?;
        Ok(Self {
            arm,
            coefficients: sol.coefficients,
            feature_map: feature_map.clone(),
            design_gram: sol.gram,
            in_sample_count: covariates.len(),
        })
    }

    /// A fit with given coefficients and no training data (gram is zero).
    pub fn from_coefficients(arm: Arm, feature_map: &FeatureMap, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != feature_map.output_dim() {
            return Err(PibtError::invalid("coefficient count must equal the feature dimension"));
        }
        Ok(Self {
            arm,
            design_gram: SymmetricMatrix::zeros(coefficients.len()),
            coefficients,
            feature_map: feature_map.clone(),
            in_sample_count: 0,
        })
    }

    /// `μ̂_w(x)`.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let psi = self.feature_map.features(x)?;
        Ok(psi.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum())
    }

    /// `Y_i − μ̂_w(X_i)` for each row.
    pub fn residuals(&self, covariates: &[Vec<f64>], outcomes: &[f64]) -> Result<Vec<f64>> {
        if covariates.len() != outcomes.len() {
            return Err(PibtError::invalid("covariates and outcomes differ in length"));
        }
        covariates
            .iter()
            .zip(outcomes)
            .map(|(x, &y)| Ok(y - self.predict(x)?))
            .collect()
    }
}
