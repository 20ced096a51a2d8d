//! Makarov bounds on `θ(δ) = P(Y(1) − Y(0) > δ)` from the two marginal CDFs.
//!
//! With `G(y) = F₁(y + δ/2) − F₀(y − δ/2)`:
//!
//! ```text
//! θ^L(δ) = −min(inf_y G(y), 0)        θ^U(δ) = 1 − max(sup_y G(y), 0)
//! ```
//!
//! For empirical CDFs `G` is a difference of step functions, so its extrema
//! over the real line are attained at jump points (right values) or just
//! before them (left limits), or approached at ±∞ where `G → 0`. A single
//! merged sweep over both samples visits all of them with integer counts.

use crate::ecdf::EmpiricalCdf;
use crate::error::{PibtError, Result};
use crate::numerics::normal_cdf;

/// Whether a bound pair was estimated from data or computed from known marginals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Estimated,
    Population,
}

/// Lower and upper bound on the benefit probability at one threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PibtBoundPair {
    pub delta: f64,
    pub lower: f64,
    pub upper: f64,
    pub provenance: Provenance,
}

impl PibtBoundPair {
    fn from_extrema(delta: f64, extrema: Extrema, provenance: Provenance) -> Self {
        Self {
            delta,
            lower: (-extrema.inf).clamp(0.0, 1.0),
            upper: (1.0 - extrema.sup).clamp(0.0, 1.0),
            provenance,
        }
    }

    /// Whether `value` lies in `[lower, upper]`.
    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

/// `sup` and `inf` of `G` over the extended real line; both include the value
/// 0 taken at ±∞, so `inf ≤ 0 ≤ sup`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrema {
    pub sup: f64,
    pub inf: f64,
}

/// A CDF that can be evaluated pointwise.
pub trait Cdf {
    fn cdf(&self, y: f64) -> f64;
}

impl Cdf for EmpiricalCdf {
    fn cdf(&self, y: f64) -> f64 {
        self.eval(y)
    }
}

impl<F: Fn(f64) -> f64> Cdf for F {
    fn cdf(&self, y: f64) -> f64 {
        self(y)
    }
}

/// `G(y) = F₁(y + δ/2) − F₀(y − δ/2)` for any pair of CDFs.
pub struct GEvaluator<'a, A: ?Sized, B: ?Sized> {
    pub f1: &'a A,
    pub f0: &'a B,
    pub delta: f64,
}

impl<'a, A: Cdf + ?Sized, B: Cdf + ?Sized> GEvaluator<'a, A, B> {
    pub fn new(f1: &'a A, f0: &'a B, delta: f64) -> Self {
        Self { f1, f0, delta }
    }

    pub fn value(&self, y: f64) -> f64 {
        self.f1.cdf(y + self.delta / 2.0) - self.f0.cdf(y - self.delta / 2.0)
    }
}

/// One constant piece of a step difference: the value on `[start, next start)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSegment {
    pub start: f64,
    pub value: f64,
}

/// Merged sweep over the jump points `a_i + shift_a` and `b_j + shift_b` of
/// `F_a − F_b`. Calls `visit(t, numerator)` once per distinct jump point with the
/// right-continuous value at `t` expressed as `numerator / (n_a·n_b)`.
///
/// Jump points closer than a few ulps of the operands are one point: adding
/// the shifts rounds, and `0.3 − 0.1` must tie with `0.1 + 0.1`.
fn sweep(a: &[f64], shift_a: f64, b: &[f64], shift_b: f64, mut visit: impl FnMut(f64, i128)) {
    let (na, nb) = (a.len() as i128, b.len() as i128);
    let (mut i, mut j) = (0usize, 0usize);
    let shift_scale = shift_a.abs().max(shift_b.abs());
    while i < a.len() || j < b.len() {
        let next_a = a.get(i).map_or(f64::INFINITY, |v| v + shift_a);
        let next_b = b.get(j).map_or(f64::INFINITY, |v| v + shift_b);
        let t = next_a.min(next_b);
        let reach = t + TIE_ULPS * f64::EPSILON * t.abs().max(shift_scale);
        while i < a.len() && a[i] + shift_a <= reach {
            i += 1;
        }
        while j < b.len() && b[j] + shift_b <= reach {
            j += 1;
        }
        visit(t, i as i128 * nb - j as i128 * na);
    }
}

const TIE_ULPS: f64 = 4.0;

/// Exact extrema of `F_a(y) − F_b(y)` where `F_a` is the eCDF of the sorted
/// sample `a` shifted by `shift_a` (likewise `b`).
pub fn step_difference_extrema(a: &[f64], shift_a: f64, b: &[f64], shift_b: f64) -> Extrema {
    let (mut hi, mut lo) = (0i128, 0i128);
    sweep(a, shift_a, b, shift_b, |_, num| {
        hi = hi.max(num);
        lo = lo.min(num);
    });
    let denom = (a.len() * b.len()) as f64;
    Extrema {
        sup: hi as f64 / denom,
        inf: lo as f64 / denom,
    }
}

/// Plug-in bounds between two shifted samples, each rounded once from its
/// exact rational value so that `lower ≤ upper` holds in floating point too.
pub fn step_difference_bounds(a: &[f64], shift_a: f64, b: &[f64], shift_b: f64, delta: f64) -> PibtBoundPair {
    let (mut hi, mut lo) = (0i128, 0i128);
    sweep(a, shift_a, b, shift_b, |_, num| {
        hi = hi.max(num);
        lo = lo.min(num);
    });
    let denom = (a.len() * b.len()) as i128;
    PibtBoundPair {
        delta,
        lower: -lo as f64 / denom as f64,
        upper: (denom - hi) as f64 / denom as f64,
        provenance: Provenance::Estimated,
    }
}

/// The full piecewise-constant description of `F_a − F_b`; the value before
/// the first segment is 0.
pub fn step_difference_segments(
    a: &[f64],
    shift_a: f64,
    b: &[f64],
    shift_b: f64,
) -> Vec<StepSegment> {
    let denom = (a.len() * b.len()) as f64;
    let mut out = Vec::with_capacity(a.len() + b.len());
    sweep(a, shift_a, b, shift_b, |t, num| {
        out.push(StepSegment {
            start: t,
            value: num as f64 / denom,
        })
    });
    out
}

/// Which change of variables is used to place the two CDFs on a common axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parameterization {
    /// `sup_y {F₁(y + δ/2) − F₀(y − δ/2)}`.
    #[default]
    Symmetric,
    /// `sup_u {F₁(u) − F₀(u − δ)}`.
    Shifted,
}

fn check_delta(delta: f64) -> Result<()> {
    if delta.is_finite() {
        Ok(())
    } else {
        Err(PibtError::invalid(format!("threshold δ must be finite, got {delta}")))
    }
}

/// Plug-in bounds `(θ̂^L(δ), θ̂^U(δ))` from the treated and control eCDFs.
pub fn pibt_bounds(f1: &EmpiricalCdf, f0: &EmpiricalCdf, delta: f64) -> Result<PibtBoundPair> {
    pibt_bounds_with(f1, f0, delta, Parameterization::Symmetric)
}

pub fn pibt_bounds_with(
    f1: &EmpiricalCdf,
    f0: &EmpiricalCdf,
    delta: f64,
    parameterization: Parameterization,
) -> Result<PibtBoundPair> {
    check_delta(delta)?;
    if f1.is_empty() || f0.is_empty() {
        return Err(PibtError::invalid("both empirical CDFs must be nonempty"));
    }
    let (shift1, shift0) = match parameterization {
        Parameterization::Symmetric => (-delta / 2.0, delta / 2.0),
        Parameterization::Shifted => (0.0, delta),
    };
    Ok(step_difference_bounds(f1.sorted_values(), shift1, f0.sorted_values(), shift0, delta))
}

pub(crate) fn check_ascending_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(PibtError::invalid("δ grid must be nonempty"));
    }
    if let Some(bad) = grid.iter().find(|d| !d.is_finite()) {
        return Err(PibtError::invalid(format!("δ grid values must be finite, got {bad}")));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(PibtError::invalid("δ grid must be sorted ascending"));
    }
    Ok(())
}

/// Bounds at every threshold of an ascending grid. Both coordinates come out
/// nonincreasing along the grid.
pub fn pibt_bounds_curve(
    f1: &EmpiricalCdf,
    f0: &EmpiricalCdf,
    delta_grid: &[f64],
) -> Result<Vec<PibtBoundPair>> {
    check_ascending_grid(delta_grid)?;
    delta_grid.iter().map(|&d| pibt_bounds(f1, f0, d)).collect()
}

/// Bounds on `P(Ỹ(1)/Ỹ(0) > δ̃)` from eCDFs of log outcomes; the returned
/// pair carries `δ̃` (not its log) in `delta`.
pub fn pibt_bounds_ratio(
    f1_log: &EmpiricalCdf,
    f0_log: &EmpiricalCdf,
    delta_tilde: f64,
) -> Result<PibtBoundPair> {
    if !(delta_tilde.is_finite() && delta_tilde > 0.0) {
        return Err(PibtError::invalid(format!(
            "ratio threshold must be positive and finite, got {delta_tilde}"
        )));
    }
    let mut pair = pibt_bounds(f1_log, f0_log, delta_tilde.ln())?;
    pair.delta = delta_tilde;
    Ok(pair)
}

/// Natural logs of strictly positive outcomes.
pub fn log_outcomes(values: &[f64]) -> Result<Vec<f64>> {
    values
        .iter()
        .map(|&v| {
            if v > 0.0 && v.is_finite() {
                Ok(v.ln())
            } else {
                Err(PibtError::invalid(format!(
                    "ratio-scale outcomes must be strictly positive, got {v}"
                )))
            }
        })
        .collect()
}

/// Search grid over `y` for extrema of `G` with analytic marginals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl OptimizerGrid {
    pub const DEFAULT_POINTS: usize = 20_001;

    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) || points < 3 {
            return Err(PibtError::invalid(format!(
                "optimizer grid needs finite lo < hi and ≥ 3 points, got [{lo}, {hi}] × {points}"
            )));
        }
        Ok(Self { lo, hi, points })
    }

    pub fn covering(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, Self::DEFAULT_POINTS)
    }

    fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.points - 1) as f64
    }

    fn at(&self, k: usize) -> f64 {
        self.lo + k as f64 * self.step()
    }
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximization of `f` on `[a, b]`; returns the best value seen.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = fc.max(fd);
    for _ in 0..100 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
        best = best.max(fc).max(fd);
        if (b - a).abs() <= 1e-14 * (1.0 + a.abs()) {
            break;
        }
    }
    best
}

/// Numerical population bounds for analytic marginals.
///
/// `G` is scanned on the grid and the best grid cell refined by golden-section
/// search. Every value used is an attained value of `G`, so the computed `sup`
/// never exceeds the true one (and `inf` never undershoots): the resulting
/// interval always contains the exact one, wider by at most the search error.
/// For smooth marginals whose extrema lie inside the grid, that error is at the
/// level of floating-point noise; for marginals with atoms it is bounded by the
/// variation of `G` over one grid cell.
pub fn population_bounds<A: Cdf + ?Sized, B: Cdf + ?Sized>(
    f1: &A,
    f0: &B,
    delta: f64,
    grid: &OptimizerGrid,
) -> Result<PibtBoundPair> {
    check_delta(delta)?;
    let g = GEvaluator::new(f1, f0, delta);
    let mut prev = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let (mut best_hi, mut k_hi) = (f64::NEG_INFINITY, 0);
    let (mut best_lo, mut k_lo) = (f64::INFINITY, 0);
    for k in 0..grid.points {
        let y = grid.at(k);
        let a = f1.cdf(y + delta / 2.0);
        let b = f0.cdf(y - delta / 2.0);
        for (name, v, p) in [("f1", a, prev.0), ("f0", b, prev.1)] {
            if !(-1e-12..=1.0 + 1e-12).contains(&v) || v < p - 1e-12 {
                return Err(PibtError::invalid(format!(
                    "{name} is not a valid CDF on the optimizer grid near y = {y}"
                )));
            }
        }
        prev = (a, b);
        let v = a - b;
        if v > best_hi {
            best_hi = v;
            k_hi = k;
        }
        if v < best_lo {
            best_lo = v;
            k_lo = k;
        }
    }
    let cell = |k: usize| (grid.at(k.saturating_sub(1)), grid.at((k + 1).min(grid.points - 1)));
    let (a, b) = cell(k_hi);
    let sup = best_hi.max(golden_max(|y| g.value(y), a, b));
    let (a, b) = cell(k_lo);
    let inf = best_lo.min(-golden_max(|y| -g.value(y), a, b));
    let extrema = Extrema {
        sup: sup.max(0.0),
        inf: inf.min(0.0),
    };
    Ok(PibtBoundPair::from_extrema(delta, extrema, Provenance::Population))
}

/// Stationary points of `y ↦ Φ((y − c1)/s1) − Φ((y − c0)/s0)`.
pub(crate) fn normal_difference_stationary_points(c1: f64, s1: f64, c0: f64, s0: f64) -> Vec<f64> {
    // φ(z1)/s1 = φ(z0)/s0  ⇔  z0² − z1² = 2·ln(s1/s0)
    let a = 1.0 / (s0 * s0) - 1.0 / (s1 * s1);
    let b = -2.0 * c0 / (s0 * s0) + 2.0 * c1 / (s1 * s1);
    let c = c0 * c0 / (s0 * s0) - c1 * c1 / (s1 * s1) - 2.0 * (s1 / s0).ln();
    if a.abs() <= 1e-14 * (1.0 / (s0 * s0)).max(1.0 / (s1 * s1)) {
        if b == 0.0 {
            return Vec::new();
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    // numerically stable pair of roots
    let q = -0.5 * (b + b.signum() * sq);
    let mut roots = Vec::with_capacity(2);
    if q != 0.0 {
        roots.push(q / a);
        roots.push(c / q);
    } else {
        roots.push(-b / (2.0 * a));
    }
    roots
}

/// Closed-form extrema of `G` for normal marginals `Y(1) ~ N(m1, s1²)`,
/// `Y(0) ~ N(m0, s0²)` with `s0, s1 > 0`.
pub fn normal_pair_extrema(m1: f64, s1: f64, m0: f64, s0: f64, delta: f64) -> Extrema {
    let (c1, c0) = (m1 - delta / 2.0, m0 + delta / 2.0);
    let g = |y: f64| normal_cdf((y - c1) / s1) - normal_cdf((y - c0) / s0);
    let mut extrema = Extrema { sup: 0.0, inf: 0.0 };
    for y in normal_difference_stationary_points(c1, s1, c0, s0) {
        let v = g(y);
        extrema.sup = extrema.sup.max(v);
        extrema.inf = extrema.inf.min(v);
    }
    extrema
}

/// Exact population bounds for normal marginals.
pub fn population_bounds_normal(
    m1: f64,
    s1: f64,
    m0: f64,
    s0: f64,
    delta: f64,
) -> Result<PibtBoundPair> {
    check_delta(delta)?;
    if !(s1 > 0.0 && s0 > 0.0 && s1.is_finite() && s0.is_finite()) {
        return Err(PibtError::invalid("normal marginals need positive finite scales"));
    }
    Ok(PibtBoundPair::from_extrema(
        delta,
        normal_pair_extrema(m1, s1, m0, s0, delta),
        Provenance::Population,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ecdf(v: &[f64]) -> EmpiricalCdf {
        EmpiricalCdf::new(v).unwrap()
    }

    #[test]
    fn decimal_shifts_tie_with_their_exact_counterparts() {
        // 0.3 − 0.1 and 0.1 + 0.1 round differently but are the same jump point,
        // so G ≡ 0; a spurious piece in between would force the upper bound to 0
        let b = pibt_bounds(&ecdf(&[0.3]), &ecdf(&[0.1]), 0.2).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 1.0));
        let s = pibt_bounds_with(&ecdf(&[0.3]), &ecdf(&[0.1]), 0.2, Parameterization::Shifted).unwrap();
        assert_eq!((s.lower, s.upper), (0.0, 1.0));
        let segs = step_difference_segments(&[0.3], -0.1, &[0.1], 0.1);
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].value, 0.0);
    }

    #[test]
    fn separated_point_masses_force_benefit() {
        let b = pibt_bounds(&ecdf(&[3.0]), &ecdf(&[1.0]), 0.0).unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 1.0));
        assert_eq!(b.provenance, Provenance::Estimated);
    }

    #[test]
    fn identical_samples_are_vacuous() {
        let s = [0.3, -1.2, 4.0, 4.0, 2.2];
        let b = pibt_bounds(&ecdf(&s), &ecdf(&s), 0.0).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 1.0));
    }

    #[test]
    fn two_point_hand_enumeration() {
        // Ĝ: 0 on (-∞,0), -1/2 on [0,1), 0 on [1,2), 1/2 on [2,3), 0 on [3,∞)
        let b = pibt_bounds(&ecdf(&[1.0, 2.0]), &ecdf(&[0.0, 3.0]), 0.0).unwrap();
        assert_eq!((b.lower, b.upper), (0.5, 0.5));
        let segs = step_difference_segments(&[1.0, 2.0], 0.0, &[0.0, 3.0], 0.0);
        let values: Vec<f64> = segs.iter().map(|s| s.value).collect();
        assert_eq!(values, vec![-0.5, 0.0, 0.5, 0.0]);
    }

    #[test]
    fn extreme_thresholds() {
        let s = [-3.0, 0.5, 7.0, 99.0];
        let curve = pibt_bounds_curve(&ecdf(&s), &ecdf(&s), &[-1e9, 1e9]).unwrap();
        assert_eq!((curve[0].lower, curve[0].upper), (1.0, 1.0));
        assert_eq!((curve[1].lower, curve[1].upper), (0.0, 0.0));
    }

    #[test]
    fn curve_rejects_bad_grids() {
        let f = ecdf(&[1.0, 2.0]);
        assert!(pibt_bounds_curve(&f, &f, &[]).is_err());
        assert!(pibt_bounds_curve(&f, &f, &[1.0, 0.0]).is_err());
        assert!(pibt_bounds_curve(&f, &f, &[0.0, f64::NAN]).is_err());
        assert!(pibt_bounds(&f, &f, f64::INFINITY).is_err());
    }

    #[test]
    fn ratio_scale() {
        let f1 = ecdf(&log_outcomes(&[4.0]).unwrap());
        let f0 = ecdf(&log_outcomes(&[2.0]).unwrap());
        let b = pibt_bounds_ratio(&f1, &f0, 1.5).unwrap();
        assert_eq!((b.lower, b.upper, b.delta), (1.0, 1.0, 1.5));
        let b = pibt_bounds_ratio(&f1, &f0, 3.0).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
        assert!(pibt_bounds_ratio(&f1, &f0, 0.0).is_err());
        assert!(pibt_bounds_ratio(&f1, &f0, -1.0).is_err());
        assert!(log_outcomes(&[1.0, 0.0]).is_err());

        let a = ecdf(&log_outcomes(&[1.0, 2.5, 9.0, 0.3]).unwrap());
        let c = ecdf(&log_outcomes(&[0.7, 2.0, 3.0]).unwrap());
        let r = pibt_bounds_ratio(&a, &c, 1.0).unwrap();
        let d = pibt_bounds(&a, &c, 0.0).unwrap();
        assert_eq!((r.lower, r.upper), (d.lower, d.upper));
    }

    #[test]
    fn population_identical_normals() {
        let grid = OptimizerGrid::covering(-10.0, 10.0).unwrap();
        let b = population_bounds(&normal_cdf, &normal_cdf, 0.0, &grid).unwrap();
        assert_eq!(b.lower, 0.0);
        assert!((b.upper - 1.0).abs() < 1e-15);
        assert_eq!(b.provenance, Provenance::Population);
    }

    #[test]
    fn population_unit_shift() {
        // sup_y {Φ(y) − Φ(y − 1)} over y is 2Φ(1/2) − 1 at y = 1/2, so
        // θ^L = 2Φ(1/2) − 1 ≈ 0.382925 and inf G = 0 gives θ^U = 1.
        let f1 = |y: f64| normal_cdf(y - 1.0);
        let grid = OptimizerGrid::covering(-10.0, 10.0).unwrap();
        let b = population_bounds(&f1, &normal_cdf, 0.0, &grid).unwrap();
        let expected = 2.0 * normal_cdf(0.5) - 1.0;
        assert!((expected - 0.382_924_922_548_026).abs() < 1e-12);
        assert!((b.lower - expected).abs() < 1e-12);
        assert_eq!(b.upper, 1.0);
        let closed = population_bounds_normal(1.0, 1.0, 0.0, 1.0, 0.0).unwrap();
        assert!((closed.lower - expected).abs() < 1e-14);
        assert_eq!(closed.upper, 1.0);
    }

    #[test]
    fn population_rejects_non_monotone_callable() {
        let bad = |y: f64| (y.sin() + 1.0) / 2.0;
        let grid = OptimizerGrid::covering(-5.0, 5.0).unwrap();
        assert!(matches!(
            population_bounds(&bad, &normal_cdf, 0.0, &grid),
            Err(PibtError::InvalidInput(_))
        ));
        let out_of_range = |y: f64| 2.0 * normal_cdf(y);
        assert!(population_bounds(&out_of_range, &normal_cdf, 0.0, &grid).is_err());
        assert!(OptimizerGrid::new(1.0, 0.0, 10).is_err());
    }

    #[test]
    fn closed_form_matches_grid_for_unequal_scales() {
        let grid = OptimizerGrid::covering(-30.0, 30.0).unwrap();
        for &(m1, s1, m0, s0) in &[(0.5, 2.0, 0.0, 1.0), (-1.0, 0.5, 0.3, 1.7), (2.0, 1.0, 0.0, 3.0)] {
            for &delta in &[-2.0, -0.3, 0.0, 0.8, 3.0] {
                let f1 = move |y: f64| normal_cdf((y - m1) / s1);
                let f0 = move |y: f64| normal_cdf((y - m0) / s0);
                let g = population_bounds(&f1, &f0, delta, &grid).unwrap();
                let c = population_bounds_normal(m1, s1, m0, s0, delta).unwrap();
                assert!((g.lower - c.lower).abs() < 1e-10, "{m1} {s1} {m0} {s0} {delta}");
                assert!((g.upper - c.upper).abs() < 1e-10);
                // grid search never beats the exact extremum
                assert!(g.lower <= c.lower + 1e-15 && g.upper >= c.upper - 1e-15);
            }
        }
    }

    fn sample() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-20.0f64..20.0, 1..30)
    }

    proptest! {
        #[test]
        fn bounds_are_ordered_probabilities(a in sample(), b in sample(), delta in -45.0f64..45.0) {
            let p = pibt_bounds(&ecdf(&a), &ecdf(&b), delta).unwrap();
            prop_assert!(0.0 <= p.lower && p.lower <= p.upper && p.upper <= 1.0);
        }

        #[test]
        fn parameterizations_agree(a in sample(), b in sample(), delta in -10.0f64..10.0) {
            let (f1, f0) = (ecdf(&a), ecdf(&b));
            let s = pibt_bounds_with(&f1, &f0, delta, Parameterization::Symmetric).unwrap();
            let t = pibt_bounds_with(&f1, &f0, delta, Parameterization::Shifted).unwrap();
            prop_assert!((s.lower - t.lower).abs() <= 1e-12);
            prop_assert!((s.upper - t.upper).abs() <= 1e-12);
        }

        #[test]
        fn curves_are_nonincreasing(a in sample(), b in sample(), mut grid in prop::collection::vec(-40.0f64..40.0, 1..12)) {
            grid.sort_by(f64::total_cmp);
            let curve = pibt_bounds_curve(&ecdf(&a), &ecdf(&b), &grid).unwrap();
            for w in curve.windows(2) {
                prop_assert!(w[1].lower <= w[0].lower);
                prop_assert!(w[1].upper <= w[0].upper);
            }
        }
    }
}
