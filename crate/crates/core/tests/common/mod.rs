//! Independent reference implementations used only by tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use pibt::ecdf::EmpiricalCdf;

/// `Γ(d/2)` for a positive integer `d` by the half-integer recurrence.
pub fn gamma_half_integer(d: u32) -> f64 {
    let (mut g, mut a) = if d.is_multiple_of(2) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    while a < d as f64 / 2.0 - 1e-9 {
        g *= a;
        a += 1.0;
    }
    g
}

/// `P(χ²_d ≤ x)` by composite Simpson quadrature of the gamma density after
/// the substitution `t = u²`, which removes the singularity at 0 for `d = 1`.
pub fn chi2_cdf_quadrature(d: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let a = d as f64 / 2.0;
    // ∫₀^{x/2} t^{a−1} e^{−t} dt = ∫₀^{√(x/2)} 2u^{2a−1} e^{−u²} du
    let f = |u: f64| 2.0 * u.powf(2.0 * a - 1.0) * (-u * u).exp();
    let upper = (x / 2.0).sqrt();
    let m = 20_000;
    let h = upper / m as f64;
    let mut s = f(0.0) + f(upper);
    for k in 1..m {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    (s * h / 3.0 / gamma_half_integer(d)).min(1.0)
}

/// Quantile of `χ²_d` by bisection on [`chi2_cdf_quadrature`].
pub fn chi2_quantile_oracle(d: u32, p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    while chi2_cdf_quadrature(d, hi) < p {
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if chi2_cdf_quadrature(d, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

fn rayleigh(a: &[Vec<f64>], v: &[f64]) -> f64 {
    let av: Vec<f64> = a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect();
    av.iter().zip(v).map(|(x, y)| x * y).sum()
}

/// Smallest eigenvalue by inverse iteration with a shift below the spectrum.
pub fn min_eigenvalue_inverse_iteration(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let radius = a
        .iter()
        .enumerate()
        .map(|(i, row)| row[i] - row.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, v)| v.abs()).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let shift = radius - 1.0;
    let shifted: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| a[i][j] - if i == j { shift } else { 0.0 }).collect())
        .collect();
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * i as f64).collect();
    normalize(&mut v);
    let mut prev = f64::INFINITY;
    for _ in 0..20_000 {
        v = solve(shifted.clone(), v);
        normalize(&mut v);
        let lambda = rayleigh(a, &v);
        if (lambda - prev).abs() < 1e-15 * lambda.abs().max(1.0) {
            break;
        }
        prev = lambda;
    }
    rayleigh(a, &v)
}

/// Brute-force `sup_y` and `inf_y` of `F̂₁(y + δ/2) − F̂₀(y − δ/2)` on a grid of
/// step `h` covering every jump, with the values 0 at ±∞ included.
pub fn grid_extrema(f1: &EmpiricalCdf, f0: &EmpiricalCdf, delta: f64, h: f64) -> (f64, f64) {
    let lo = (f1.min() - delta / 2.0).min(f0.min() + delta / 2.0) - 1.0;
    let hi = (f1.max() - delta / 2.0).max(f0.max() + delta / 2.0) + 1.0;
    let steps = ((hi - lo) / h).ceil() as usize;
    let (mut sup, mut inf) = (0.0f64, 0.0f64);
    for k in 0..=steps {
        let y = lo + k as f64 * h;
        let g = f1.eval(y + delta / 2.0) - f0.eval(y - delta / 2.0);
        sup = sup.max(g);
        inf = inf.min(g);
    }
    (sup, inf)
}
