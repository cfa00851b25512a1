use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::SosError;
use crate::chebkit::InterpolationGrid;
use std::f64::consts::PI;

/// Weight multiplying a squared basis in a Lukács decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Weight {
    One,
    OnePlusT,
    OneMinusT,
    OneMinusTSquared,
    /// Caller-supplied weight values.
    Custom,
}

impl Weight {
    /// Value at `t`; `Custom` has no closed form and reports 1.
    pub fn eval(self, t: f64) -> f64 {
        match self {
            Weight::One | Weight::Custom => 1.0,
            Weight::OnePlusT => 1.0 + t,
            Weight::OneMinusT => 1.0 - t,
            Weight::OneMinusTSquared => (1.0 - t) * (1.0 + t),
        }
    }
}

/// `P[(l, i)] = sqrt(w(t_l)) p_i(t_l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisMatrix {
    p: DMatrix<f64>,
    points: Vec<f64>,
    weight: Weight,
}

impl BasisMatrix {
    pub fn new(p: DMatrix<f64>, points: Vec<f64>, weight: Weight) -> Result<Self, SosError> {
        if p.nrows() != points.len() {
            return Err(SosError::DimensionMismatch {
                expected: points.len(),
                found: p.nrows(),
            });
        }
        Ok(Self { p, points, weight })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weight(&self) -> Weight {
        self.weight
    }

    pub fn num_points(&self) -> usize {
        self.p.nrows()
    }

    /// Number of basis polynomials (`k + 1`).
    pub fn dim(&self) -> usize {
        self.p.ncols()
    }

    pub fn row(&self, l: usize) -> Vec<f64> {
        self.p.row(l).iter().copied().collect()
    }

    /// `max |(P^T P - I)_{ij}|`.
    pub fn gram_defect(&self) -> f64 {
        gram_defect(&self.p)
    }
}

pub(crate) fn gram_defect(p: &DMatrix<f64>) -> f64 {
    match parity_split(p) {
        Some((even, odd)) => {
            let h = p.nrows() / 2;
            let mid = (p.nrows() % 2 == 1).then_some(h);
            let fold = |cols: &[usize]| -> f64 {
                if cols.is_empty() {
                    return 0.0;
                }
                let top = DMatrix::from_fn(h, cols.len(), |l, c| p[(l, cols[c])]);
                let m = mid.map(|r| DMatrix::from_fn(1, cols.len(), |_, c| p[(r, cols[c])]));
                upper_defect(&top, 2.0, m.as_ref())
            };
            // rows l and n-l cancel in every even-odd inner product
            fold(&even).max(fold(&odd))
        }
        None => upper_defect(p, 1.0, None),
    }
}

/// Column indices of exactly even and exactly odd columns when every
/// column is one or the other under row reversal.
fn parity_split(p: &DMatrix<f64>) -> Option<(Vec<usize>, Vec<usize>)> {
    let m = p.nrows();
    let (mut even, mut odd) = (Vec::new(), Vec::new());
    for j in 0..p.ncols() {
        let c = p.column(j);
        if (0..m).all(|l| c[m - 1 - l] == c[l]) {
            even.push(j);
        } else if (0..m).all(|l| c[m - 1 - l] == -c[l]) {
            odd.push(j);
        } else {
            return None;
        }
    }
    Some((even, odd))
}

// max |G - I| over the upper triangle of G = scale * A^T A + R^T R, one
// block column at a time, each by a single gemm over the rows of A^T that
// reach the diagonal.
fn upper_defect(a: &DMatrix<f64>, scale: f64, r: Option<&DMatrix<f64>>) -> f64 {
    const BS: usize = 128;
    let n = a.ncols();
    let at = a.transpose();
    let rt = r.map(|r| r.transpose());
    let mut worst = 0.0f64;
    for jb in (0..n).step_by(BS) {
        let je = (jb + BS).min(n);
        let mut g = at.rows(0, je) * a.columns(jb, je - jb) * scale;
        if let (Some(r), Some(rt)) = (r, &rt) {
            g += rt.rows(0, je) * r.columns(jb, je - jb);
        }
        for (c, j) in (jb..je).enumerate() {
            for i in 0..=j {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, c)] - target).abs());
            }
        }
    }
    worst
}

/// `T_i(t_l)` for `i <= degree` on a first-kind grid of `n + 1` points,
/// from a table of `cos(pi r / (2n + 2))` so every entry is a correctly
/// reduced cosine.
pub(crate) fn cheb1_t_matrix(n: usize, degree: usize) -> DMatrix<f64> {
    let den = 2 * (n + 1);
    // cos(pi - x) = -cos(x) imposed exactly, with an exact zero at pi/2
    let half = den / 2;
    let mut table: Vec<f64> = (0..=den).map(|r| (PI * r as f64 / den as f64).cos()).collect();
    table[half] = 0.0;
    for r in half + 1..=den {
        table[r] = -table[den - r];
    }
    let period = 2 * den;
    DMatrix::from_fn(n + 1, degree + 1, |l, i| {
        let r = (i * (2 * l + 1)) % period;
        let r = if r > den { period - r } else { r };
        table[r]
    })
}

/// Orthonormal scaled Chebyshev basis of degree `k` on the first-kind grid
/// of `2k + 1` points: `p_0 = T_0 / sqrt(2k+1)`, `p_i = sqrt(2/(2k+1)) T_i`.
pub fn scaled_chebyshev_basis(k: usize) -> BasisMatrix {
    let n = 2 * k;
    let mut p = cheb1_t_matrix(n, k);
    let s0 = (1.0 / (n + 1) as f64).sqrt();
    let s = (2.0 / (n + 1) as f64).sqrt();
    for i in 0..=k {
        let f = if i == 0 { s0 } else { s };
        p.column_mut(i).scale_mut(f);
    }
    BasisMatrix {
        p,
        points: InterpolationGrid::cheb1(n).points().to_vec(),
        weight: Weight::One,
    }
}

/// Thin QR of `diag(sqrt(w)) * values`, signs fixed so `diag(R) > 0`.
pub fn orthonormalize_at_points(
    values: &DMatrix<f64>,
    weights: Option<&[f64]>,
) -> Result<DMatrix<f64>, SosError> {
    let mut a = values.clone();
    if let Some(w) = weights {
        if w.len() != a.nrows() {
            return Err(SosError::DimensionMismatch {
                expected: a.nrows(),
                found: w.len(),
            });
        }
        for (l, &wl) in w.iter().enumerate() {
            if !(wl >= 0.0) {
                return Err(SosError::InvalidArgument(format!("negative weight {wl} at row {l}")));
            }
            a.row_mut(l).scale_mut(wl.sqrt());
        }
    }
    if a.ncols() > a.nrows() {
        return Err(SosError::RankDeficient {
            column: a.nrows(),
            ratio: 0.0,
        });
    }
    let qr = a.qr();
    let r = qr.r();
    let diag: Vec<f64> = (0..r.ncols()).map(|i| r[(i, i)]).collect();
    let big = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    for (i, d) in diag.iter().enumerate() {
        if !(d.abs() >= 1e-10 * big) || big == 0.0 {
            return Err(SosError::RankDeficient {
                column: i,
                ratio: if big > 0.0 { d.abs() / big } else { 0.0 },
            });
        }
    }
    let mut q = qr.q();
    for (i, d) in diag.iter().enumerate() {
        if *d < 0.0 {
            q.column_mut(i).neg_mut();
        }
    }
    Ok(q)
}

/// Chebyshev polynomials up to `degree` on the first-kind grid of `n + 1`
/// points, weight-scaled and orthonormalized. `Weight::One` with
/// `n = 2 * degree` short-circuits to the closed-form scaling.
pub fn weighted_chebyshev_basis(n: usize, degree: usize, weight: Weight) -> Result<BasisMatrix, SosError> {
    if weight == Weight::One && n == 2 * degree {
        return Ok(scaled_chebyshev_basis(degree));
    }
    if weight == Weight::Custom {
        return Err(SosError::InvalidArgument("custom weights need explicit values".into()));
    }
    let grid = InterpolationGrid::cheb1(n);
    let values = cheb1_t_matrix(n, degree);
    let w: Vec<f64> = grid.points().iter().map(|&t| weight.eval(t)).collect();
    let q = orthonormalize_at_points(&values, Some(&w))?;
    BasisMatrix::new(q, grid.points().to_vec(), weight)
}

/// `Y(y) = P^T diag(y) P`.
pub fn dual_matrix(y: &[f64], basis: &BasisMatrix) -> Result<DMatrix<f64>, SosError> {
    let p = basis.matrix();
    if y.len() != p.nrows() {
        return Err(SosError::DimensionMismatch {
            expected: p.nrows(),
            found: y.len(),
        });
    }
    let mut dp = p.clone();
    for (l, &yl) in y.iter().enumerate() {
        dp.row_mut(l).scale_mut(yl);
    }
    Ok(p.tr_mul(&dp))
}
