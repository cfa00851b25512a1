use std::f64::consts::PI;

/// Smallest `n` for which `4V / (pi k (n - k)^k) <= tol`, the uniform error
/// bound for Chebyshev interpolation of a function whose `k`-th derivative
/// has total variation `V`. Returns `k + 1` when `V = 0`.
pub fn error_bound_points(k: u32, v: f64, tol: f64) -> usize {
    assert!(k >= 1, "k must be at least 1");
    assert!(tol > 0.0 && v >= 0.0);
    let k_us = k as usize;
    if v == 0.0 {
        return k_us + 1;
    }
    let bound = |n: usize| 4.0 * v / (PI * k as f64 * ((n - k_us) as f64).powi(k as i32));
    let guess = (4.0 * v / (PI * k as f64 * tol)).powf(1.0 / k as f64).ceil() as usize;
    let mut n = k_us + guess.max(1);
    while n > k_us + 1 && bound(n - 1) <= tol {
        n -= 1;
    }
    while bound(n) > tol {
        n += 1;
    }
    n
}
