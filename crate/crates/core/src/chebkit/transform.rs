//! Values <-> Chebyshev coefficient transforms and Chebyshev series helpers.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::grid::{GridKind, InterpolationGrid};
use super::ChebError;

/// Above this size the FFT route is used.
pub const EXPLICIT_TRANSFORM_MAX: usize = 64;

/// Row `i` holds `T_i` at every point, by the three-term recurrence.
pub fn chebyshev_t_values(max_degree: usize, points: &[f64]) -> Vec<Vec<f64>> {
    let mut rows = Vec::with_capacity(max_degree + 1);
    rows.push(vec![1.0; points.len()]);
    if max_degree >= 1 {
        rows.push(points.to_vec());
    }
    for i in 2..=max_degree {
        let row: Vec<f64> = points
            .iter()
            .enumerate()
            .map(|(j, &t)| 2.0 * t * rows[i - 1][j] - rows[i - 2][j])
            .collect();
        rows.push(row);
    }
    rows
}

/// Chebyshev coefficients of the interpolant through `values` on a
/// first- or second-kind grid.
pub fn values_to_coeffs(grid: &InterpolationGrid, values: &[f64]) -> Result<Vec<f64>, ChebError> {
    check_len(grid, values)?;
    if grid.len() <= EXPLICIT_TRANSFORM_MAX + 1 {
        values_to_coeffs_explicit(grid, values)
    } else {
        values_to_coeffs_fft(grid, values)
    }
}

/// Orthogonality-sum transform, O(n^2).
pub fn values_to_coeffs_explicit(
    grid: &InterpolationGrid,
    values: &[f64],
) -> Result<Vec<f64>, ChebError> {
    check_len(grid, values)?;
    let n = grid.degree();
    match grid.kind() {
        GridKind::Cheb1 => {
            let np1 = (n + 1) as f64;
            Ok((0..=n)
                .map(|i| {
                    let s: f64 = values
                        .iter()
                        .enumerate()
                        .map(|(l, f)| f * cos_reduced(i * (2 * l + 1), 2 * (n + 1)))
                        .sum();
                    let scale = if i == 0 { 1.0 } else { 2.0 };
                    scale * s / np1
                })
                .collect())
        }
        GridKind::Cheb2 => {
            if n == 0 {
                return Ok(values.to_vec());
            }
            Ok((0..=n)
                .map(|i| {
                    let s: f64 = values
                        .iter()
                        .enumerate()
                        .map(|(l, f)| {
                            let h = if l == 0 || l == n { 0.5 } else { 1.0 };
                            h * f * cos_reduced(2 * i * l, 2 * n)
                        })
                        .sum();
                    let scale = if i == 0 || i == n { 1.0 } else { 2.0 };
                    scale * s / n as f64
                })
                .collect())
        }
        GridKind::General => Err(ChebError::GeneralGrid("coefficient transform")),
    }
}

/// FFT-based transform, O(n log n).
pub fn values_to_coeffs_fft(
    grid: &InterpolationGrid,
    values: &[f64],
) -> Result<Vec<f64>, ChebError> {
    check_len(grid, values)?;
    let n = grid.degree();
    let mut planner = FftPlanner::<f64>::new();
    match grid.kind() {
        GridKind::Cheb2 => {
            if n == 0 {
                return Ok(values.to_vec());
            }
            // even extension of length 2n
            let mut buf: Vec<Complex<f64>> = values
                .iter()
                .chain(values[1..n].iter().rev())
                .map(|&v| Complex::new(v, 0.0))
                .collect();
            planner.plan_fft_forward(2 * n).process(&mut buf);
            Ok((0..=n)
                .map(|i| {
                    let d = if i == 0 || i == n { 2.0 * n as f64 } else { n as f64 };
                    buf[i].re / d
                })
                .collect())
        }
        GridKind::Cheb1 => {
            let m = n + 1;
            let mut buf: Vec<Complex<f64>> = values
                .iter()
                .chain(values.iter().rev())
                .map(|&v| Complex::new(v, 0.0))
                .collect();
            planner.plan_fft_forward(2 * m).process(&mut buf);
            Ok((0..m)
                .map(|i| {
                    let ang = -PI * i as f64 / (2 * m) as f64;
                    let tw = Complex::new(ang.cos(), ang.sin());
                    let s = 0.5 * (tw * buf[i]).re;
                    let scale = if i == 0 { 1.0 } else { 2.0 };
                    scale * s / m as f64
                })
                .collect())
        }
        GridKind::General => Err(ChebError::GeneralGrid("coefficient transform")),
    }
}

/// Values of a Chebyshev series at the points of a grid.
pub fn coeffs_to_values(coeffs: &[f64], grid: &InterpolationGrid) -> Vec<f64> {
    grid.points().iter().map(|&t| clenshaw(coeffs, t)).collect()
}

fn check_len(grid: &InterpolationGrid, values: &[f64]) -> Result<(), ChebError> {
    if grid.len() != values.len() {
        return Err(ChebError::DimensionMismatch {
            expected: grid.len(),
            found: values.len(),
        });
    }
    Ok(())
}

/// `cos(pi * num / den)` with the argument reduced exactly first.
pub(crate) fn cos_reduced(num: usize, den: usize) -> f64 {
    let period = 2 * den;
    let r = num % period;
    // cos is symmetric about pi
    let r = if r > den { period - r } else { r };
    (PI * r as f64 / den as f64).cos()
}

/// Evaluate `sum c_i T_i(t)` by Clenshaw's recurrence.
pub fn clenshaw(coeffs: &[f64], t: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = c + 2.0 * t * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs.first().copied().unwrap_or(0.0) + t * b1 - b2
}

/// Coefficients of the derivative of `sum c_i T_i`.
pub fn derivative_coeffs(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len();
    if n <= 1 {
        return vec![0.0];
    }
    let mut d = vec![0.0; n + 1];
    for i in (1..n).rev() {
        d[i - 1] = d[i + 1] + 2.0 * i as f64 * coeffs[i];
    }
    d[0] *= 0.5;
    d.truncate(n - 1);
    d
}

/// `int_{-1}^{1} T_i(t) dt`.
pub fn chebyshev_moment(i: usize) -> f64 {
    if i % 2 == 1 {
        0.0
    } else {
        2.0 / (1.0 - (i * i) as f64)
    }
}

/// `int_{-1}^{1} sum c_i T_i(t) dt`.
pub fn integrate_coeffs(coeffs: &[f64]) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| c * chebyshev_moment(i))
        .sum()
}

/// Drop trailing coefficients below `rel * max|c|`; keeps at least one.
pub fn trim_coeffs(coeffs: &[f64], rel: f64) -> Vec<f64> {
    let scale = coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let mut end = coeffs.len();
    while end > 1 && coeffs[end - 1].abs() <= rel * scale {
        end -= 1;
    }
    coeffs[..end.max(1)].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_values_basic() {
        let v = chebyshev_t_values(3, &[0.5, 0.0, 2.0]);
        assert_eq!(v[0], vec![1.0; 3]);
        assert_eq!(v[2][0], -0.5);
        assert_eq!(v[3][2], 4.0 * 8.0 - 6.0);
    }

    #[test]
    fn t3_at_first_kind_points_matches_trig_identity() {
        let g = InterpolationGrid::cheb1(2);
        let v = chebyshev_t_values(3, g.points());
        for (j, &t) in g.points().iter().enumerate() {
            let want = (3.0 * t.acos()).cos();
            assert!((v[3][j] - want).abs() <= 1e-14);
        }
    }

    #[test]
    fn explicit_and_fft_agree() {
        for n in [1usize, 2, 5, 17, 64, 65, 200, 513] {
            for grid in [InterpolationGrid::cheb1(n), InterpolationGrid::cheb2(n).unwrap()] {
                let vals: Vec<f64> = grid
                    .points()
                    .iter()
                    .map(|&t| (3.0 * t).sin() + (t * t).exp() / (1.5 + t))
                    .collect();
                let a = values_to_coeffs_explicit(&grid, &vals).unwrap();
                let b = values_to_coeffs_fft(&grid, &vals).unwrap();
                let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                for (x, y) in a.iter().zip(&b) {
                    assert!((x - y).abs() <= 1e-13 * scale, "n={n} {x} {y}");
                }
            }
        }
    }

    #[test]
    fn transform_inverts_clenshaw() {
        let coeffs = [0.3, -1.0, 0.25, 0.0, 2.0, -0.125];
        for grid in [InterpolationGrid::cheb1(5), InterpolationGrid::cheb2(5).unwrap()] {
            let vals = coeffs_to_values(&coeffs, &grid);
            let back = values_to_coeffs(&grid, &vals).unwrap();
            for (a, b) in coeffs.iter().zip(&back) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn derivative_of_t3() {
        // T3' = 12t^2 - 3 = 3 T0 + 6 T2
        let d = derivative_coeffs(&[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(d, vec![3.0, 0.0, 6.0]);
    }

    #[test]
    fn moments() {
        assert_eq!(chebyshev_moment(0), 2.0);
        assert_eq!(chebyshev_moment(3), 0.0);
        assert!((chebyshev_moment(4) + 2.0 / 15.0).abs() < 1e-16);
    }
}
