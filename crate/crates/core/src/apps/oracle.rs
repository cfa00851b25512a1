//! Closed-form reference solutions used to check the SDP results.

use nalgebra::{DMatrix, SymmetricEigen};

use super::AppError;
use crate::chebkit::{InterpolationGrid, Interpolant};

/// Roots of the monic orthogonal polynomial with recurrence coefficients
/// `a` (diagonal) and `b` (off-diagonal), ascending and Newton-polished.
fn golub_welsch(a: &[f64], b: &[f64]) -> Vec<f64> {
    let k = a.len();
    let mut j = DMatrix::zeros(k, k);
    for i in 0..k {
        j[(i, i)] = a[i];
        if i + 1 < k {
            j[(i, i + 1)] = b[i];
            j[(i + 1, i)] = b[i];
        }
    }
    let mut r: Vec<f64> = SymmetricEigen::new(j).eigenvalues.iter().copied().collect();
    for x in r.iter_mut() {
        for _ in 0..2 {
            let (p, dp) = char_poly(a, b, *x);
            if dp != 0.0 {
                let step = p / dp;
                if step.is_finite() && step.abs() < 1e-6 {
                    *x -= step;
                }
            }
        }
    }
    r.sort_by(|x, y| x.partial_cmp(y).unwrap());
    r
}

// characteristic polynomial of the Jacobi matrix and its derivative
fn char_poly(a: &[f64], b: &[f64], t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (0.0, 1.0);
    let (mut d0, mut d1) = (0.0, 0.0);
    for i in 0..a.len() {
        let bb = if i == 0 { 0.0 } else { b[i - 1] * b[i - 1] };
        let p2 = (t - a[i]) * p1 - bb * p0;
        let d2 = p1 + (t - a[i]) * d1 - bb * d0;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

/// Zeros of the Legendre polynomial of degree `k`, ascending.
pub fn legendre_roots(k: usize) -> Vec<f64> {
    let a = vec![0.0; k];
    let b: Vec<f64> = (1..k)
        .map(|j| {
            let j = j as f64;
            j / (4.0 * j * j - 1.0).sqrt()
        })
        .collect();
    let mut r = golub_welsch(&a, &b);
    // the spectrum is symmetric; enforce it exactly
    for i in 0..k / 2 {
        let m = 0.5 * (r[k - 1 - i] - r[i]);
        r[i] = -m;
        r[k - 1 - i] = m;
    }
    if k % 2 == 1 {
        r[k / 2] = 0.0;
    }
    r
}

/// Zeros of the Jacobi polynomial `P_k^{(0,1)}` (weight `1 + t`), ascending.
pub fn jacobi01_roots(k: usize) -> Vec<f64> {
    let a: Vec<f64> = (0..k)
        .map(|n| {
            let n = n as f64;
            1.0 / ((2.0 * n + 1.0) * (2.0 * n + 3.0))
        })
        .collect();
    let b: Vec<f64> = (1..k)
        .map(|n| {
            let n = n as f64;
            (n * (n + 1.0)).sqrt() / (2.0 * n + 1.0)
        })
        .collect();
    golub_welsch(&a, &b)
}

/// Best `L1` approximation of `f` from below by degree-`n` polynomials,
/// valid when `f^{(n+1)} >= 0` on `(-1, 1)` (not checked).
///
/// Hermite interpolation of `f` and `f'` at the Legendre zeros for odd
/// `n`; for even `n` the value at `-1` plus values and slopes at the
/// zeros of `P_k^{(0,1)}`. Returned on the first-kind grid of degree `n`.
pub fn hermite_l1_oracle(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    n: usize,
) -> Result<Interpolant, AppError> {
    let mut z: Vec<f64> = Vec::with_capacity(n + 1);
    let nodes = if n % 2 == 1 {
        legendre_roots(n.div_ceil(2))
    } else {
        z.push(-1.0);
        jacobi01_roots(n / 2)
    };
    for &t in &nodes {
        z.push(t);
        z.push(t);
    }
    debug_assert_eq!(z.len(), n + 1);
    let coef = divided_differences(&z, &f, &df);
    let grid = InterpolationGrid::cheb1(n);
    Ok(Interpolant::from_fn(grid, |t| newton_eval(&z, &coef, t)))
}

/// Newton coefficients for nodes where repeats are adjacent and at most
/// doubled; a repeated node's first difference is the slope.
fn divided_differences(z: &[f64], f: &impl Fn(f64) -> f64, df: &impl Fn(f64) -> f64) -> Vec<f64> {
    let n = z.len();
    let mut q: Vec<f64> = z.iter().map(|&t| f(t)).collect();
    let mut out = vec![q[0]];
    for j in 1..n {
        for i in (j..n).rev() {
            let den = z[i] - z[i - j];
            q[i] = if den == 0.0 {
                df(z[i])
            } else {
                (q[i] - q[i - 1]) / den
            };
        }
        out.push(q[j]);
    }
    out
}

fn newton_eval(z: &[f64], c: &[f64], t: f64) -> f64 {
    let n = c.len();
    let mut acc = c[n - 1];
    for i in (0..n - 1).rev() {
        acc = acc * (t - z[i]) + c[i];
    }
    acc
}
