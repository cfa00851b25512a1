use nalgebra::DMatrix;

use super::interp::Interpolant;
use super::transform::trim_coeffs;
use super::ChebError;

const TRIM_REL: f64 = 1e-13;
const IMAG_TOL: f64 = 1e-8;
const EDGE_TOL: f64 = 1e-8;
const DEDUP: f64 = 1e-10;

/// Real roots of `sum c_i T_i` (eigenvalues of the colleague matrix) with
/// `|imag| <= imag_tol`, unsorted.
pub fn colleague_roots(coeffs: &[f64], imag_tol: f64) -> Result<Vec<f64>, ChebError> {
    let c = trim_coeffs(coeffs, TRIM_REL);
    let n = c.len() - 1;
    match n {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![-c[0] / c[1]]),
        _ => {}
    }
    let mut m = DMatrix::<f64>::zeros(n, n);
    m[(0, 1)] = 1.0;
    for i in 1..n {
        m[(i, i - 1)] = 0.5;
        if i + 1 < n {
            m[(i, i + 1)] = 0.5;
        }
    }
    for j in 0..n {
        m[(n - 1, j)] -= c[j] / (2.0 * c[n]);
    }
    let schur = nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 1000 * n)
        .ok_or(ChebError::EigenFailure(n))?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= imag_tol)
        .map(|z| z.re)
        .collect())
}

/// Real roots of `p` in `[a, b]`, ascending.
pub fn interpolant_roots(p: &Interpolant, a: f64, b: f64) -> Result<Vec<f64>, ChebError> {
    if a > b || a < -1.0 || b > 1.0 {
        return Err(ChebError::InvalidArgument(format!(
            "interval [{a}, {b}] not inside [-1, 1]"
        )));
    }
    if p.values().iter().all(|&v| v == 0.0) {
        return Err(ChebError::ZeroInterpolant);
    }
    let coeffs = p.chebyshev_coeffs()?;
    let raw = colleague_roots(&coeffs, IMAG_TOL)?;
    let mut roots: Vec<f64> = raw
        .into_iter()
        .filter(|&r| r >= a - EDGE_TOL && r <= b + EDGE_TOL)
        .map(|r| newton_once(p, r.clamp(a, b), a, b))
        .collect();
    sort_dedup(&mut roots, DEDUP);
    Ok(roots)
}

// A single guarded Newton step on the barycentric form.
fn newton_once(p: &Interpolant, r: f64, a: f64, b: f64) -> f64 {
    let f = p.eval(r);
    let df = p.eval_derivative(r);
    if f == 0.0 || df == 0.0 || !df.is_finite() {
        return r;
    }
    let s = r - f / df;
    if s >= a && s <= b && p.eval(s).abs() <= f.abs() {
        s
    } else {
        r
    }
}

fn sort_dedup(v: &mut Vec<f64>, tol: f64) {
    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
    v.dedup_by(|x, y| (*x - *y).abs() <= tol);
}

/// Points of `[a, b]` where `p` vanishes, including touching (double)
/// zeros that the colleague-matrix filter misses or places poorly.
///
/// Candidates are the simple roots, the local minima of `|p|` on a dense
/// probe (refined by golden-section search) and the endpoints, kept when
/// `|p| <= rel_tol * max|p|`. Candidates not separated by a stretch where
/// `|p|` exceeds that threshold describe the same contact; the one with the
/// smallest `|p|` is returned.
pub fn contact_points(p: &Interpolant, a: f64, b: f64, rel_tol: f64) -> Result<Vec<f64>, ChebError> {
    let scale = p.max_abs();
    if scale == 0.0 {
        return Err(ChebError::ZeroInterpolant);
    }
    let thresh = rel_tol * scale;
    let mut cand: Vec<f64> = interpolant_roots(p, a, b)?;
    let m = (16 * p.grid().len()).max(2000);
    let ts: Vec<f64> = (0..=m).map(|i| a + (b - a) * i as f64 / m as f64).collect();
    let vs: Vec<f64> = ts.iter().map(|&t| p.eval(t).abs()).collect();
    for i in 1..m {
        if vs[i] <= vs[i - 1] && vs[i] <= vs[i + 1] {
            cand.push(golden_min(|t| p.eval(t).abs(), ts[i - 1], ts[i + 1]));
        }
    }
    cand.push(a);
    cand.push(b);
    let mut cand: Vec<(f64, f64)> = cand
        .into_iter()
        .map(|t| (t, p.eval(t).abs()))
        .filter(|&(_, v)| v <= thresh)
        .collect();
    cand.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut out: Vec<(f64, f64)> = Vec::new();
    for c in cand {
        match out.last_mut() {
            Some(last) if !separated(p, last.0, c.0, thresh) => {
                if c.1 < last.1 {
                    *last = c;
                }
            }
            _ => out.push(c),
        }
    }
    Ok(out.into_iter().map(|(t, _)| t).collect())
}

// whether |p| rises above `thresh` somewhere strictly between x and y
fn separated(p: &Interpolant, x: f64, y: f64, thresh: f64) -> bool {
    const SAMPLES: usize = 64;
    (1..SAMPLES).any(|i| p.eval(x + (y - x) * i as f64 / SAMPLES as f64).abs() > thresh)
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo <= 1e-15 * (1.0 + lo.abs()) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}
