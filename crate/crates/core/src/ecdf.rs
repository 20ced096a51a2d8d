//! Empirical CDFs with right-continuous step evaluation.

use crate::error::{check_probability_open, PibtError, Result};

/// Empirical CDF `F̂_n(y) = (1/n) Σ 1{Y_i ≤ y}` over a finite sample.
///
/// Duplicates are stored, so every jump height is a multiple of `1/n` and
/// evaluation reduces to integer counting.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    /// Builds the eCDF of `values`. Fails on an empty sample or a non-finite value.
    pub fn new(values: &[f64]) -> Result<Self> {
        Self::from_vec(values.to_vec())
    }

    pub fn from_vec(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(PibtError::invalid("empirical CDF needs at least one value"));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(PibtError::invalid(format!(
                "empirical CDF values must be finite, got {bad}"
            )));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { sorted: values })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Sample values in ascending order, ties included.
    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }

    /// Number of sample values `≤ y`.
    pub fn count_le(&self, y: f64) -> usize {
        self.sorted.partition_point(|&v| v <= y)
    }

    /// Number of sample values `< y`.
    pub fn count_lt(&self, y: f64) -> usize {
        self.sorted.partition_point(|&v| v < y)
    }

    /// `F̂_n(y)`: fraction of the sample `≤ y`.
    pub fn eval(&self, y: f64) -> f64 {
        self.count_le(y) as f64 / self.len() as f64
    }

    /// `F̂_n(y−)`: fraction of the sample strictly below `y`.
    pub fn left_limit(&self, y: f64) -> f64 {
        self.count_lt(y) as f64 / self.len() as f64
    }
}

/// One-sample DKW radius: the `t` solving `2·exp(−2·n·t²) = α`.
pub fn dkw_margin(n: usize, alpha: f64) -> Result<f64> {
    if n == 0 {
        return Err(PibtError::invalid("DKW margin needs n ≥ 1"));
    }
    check_probability_open("alpha", alpha)?;
    Ok(((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt())
}

/// Exact Kolmogorov distance `sup_y |F̂_n(y) − F(y)|` against a continuous CDF.
///
/// The supremum over a step function minus a continuous monotone function is
/// attained at a jump, from one side or the other.
pub fn kolmogorov_distance<F: Fn(f64) -> f64>(cdf: &EmpiricalCdf, truth: F) -> f64 {
    let n = cdf.len() as f64;
    let values = cdf.sorted_values();
    let mut sup = 0.0f64;
    let mut i = 0;
    while i < values.len() {
        let v = values[i];
        let below = i;
        while i < values.len() && values[i] == v {
            i += 1;
        }
        let f = truth(v);
        sup = sup.max((i as f64 / n - f).abs());
        sup = sup.max((f - below as f64 / n).abs());
    }
    sup
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_point_mass() {
        let f = EmpiricalCdf::new(&[1.0]).unwrap();
        assert_eq!(f.eval(0.9), 0.0);
        assert_eq!(f.eval(1.0), 1.0);
    }

    #[test]
    fn unsorted_input_counts() {
        let f = EmpiricalCdf::new(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(f.eval(1.5), 1.0 / 3.0);
        assert_eq!(f.eval(2.0), 2.0 / 3.0);
        assert_eq!(f.sorted_values(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn ties_make_one_jump() {
        let f = EmpiricalCdf::new(&[1.0, 1.0]).unwrap();
        assert_eq!(f.eval(1.0), 1.0);
        assert_eq!(f.left_limit(1.0), 0.0);
        assert_eq!(f.len(), 2);
    }

    #[test]
    fn eval_and_left_limit_on_small_sample() {
        let f = EmpiricalCdf::new(&[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(f.eval(1.0), 2.0 / 3.0);
        assert_eq!(f.eval(-5.0), 0.0);
        assert_eq!(f.eval(99.0), 1.0);
        assert_eq!(f.left_limit(1.0), 1.0 / 3.0);
        assert_eq!(f.left_limit(0.0), 0.0);
        let g = EmpiricalCdf::new(&[5.0]).unwrap();
        assert_eq!(g.left_limit(5.0), 0.0);
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(matches!(
            EmpiricalCdf::new(&[]),
            Err(PibtError::InvalidInput(_))
        ));
        assert!(EmpiricalCdf::new(&[1.0, f64::NAN]).is_err());
        assert!(EmpiricalCdf::new(&[f64::INFINITY]).is_err());
    }

    #[test]
    fn dkw_margin_values() {
        // sqrt(ln(40)/200), evaluated with mpmath
        let t = dkw_margin(100, 0.05).unwrap();
        assert!((t - 0.135_810_151_574_061_95).abs() < 1e-15);
        let alpha = 2.0 * (-2.0f64).exp();
        assert!((dkw_margin(1, alpha).unwrap() - 1.0).abs() < 1e-14);
        assert!((dkw_margin(400, 0.05).unwrap() - t / 2.0).abs() < 1e-15);
        assert!(dkw_margin(10, 0.0).is_err());
        assert!(dkw_margin(10, 1.0).is_err());
        assert!(dkw_margin(0, 0.5).is_err());
    }

    #[test]
    fn dkw_margin_monotone_on_grid() {
        let alphas = [0.001, 0.01, 0.05, 0.1, 0.2, 0.5, 0.9];
        for n in 1..200 {
            for w in alphas.windows(2) {
                let tight = dkw_margin(n, w[1]).unwrap();
                let loose = dkw_margin(n, w[0]).unwrap();
                assert!(loose > tight);
            }
            for &a in &alphas {
                assert!(dkw_margin(n, a).unwrap() > dkw_margin(n + 1, a).unwrap());
            }
        }
    }

    proptest! {
        #[test]
        fn left_limit_gap_is_multiplicity(
            values in prop::collection::vec(-5i32..5, 1..40),
            y in -6i32..6,
        ) {
            let xs: Vec<f64> = values.iter().map(|&v| v as f64).collect();
            let f = EmpiricalCdf::new(&xs).unwrap();
            let y = y as f64;
            let mult = xs.iter().filter(|&&v| v == y).count() as f64;
            prop_assert!(f.left_limit(y) <= f.eval(y));
            prop_assert!((f.eval(y) - f.left_limit(y) - mult / xs.len() as f64).abs() < 1e-15);
        }

        #[test]
        fn eval_is_monotone_and_on_lattice(
            values in prop::collection::vec(-1e3f64..1e3, 1..60),
            a in -2e3f64..2e3,
            b in -2e3f64..2e3,
        ) {
            let f = EmpiricalCdf::new(&values).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(f.eval(lo) <= f.eval(hi));
            let k = f.eval(hi) * values.len() as f64;
            prop_assert!((k - k.round()).abs() < 1e-9);
            prop_assert_eq!(f.eval(f.max()), 1.0);
            prop_assert_eq!(f.left_limit(f.min()), 0.0);
        }
    }
}
