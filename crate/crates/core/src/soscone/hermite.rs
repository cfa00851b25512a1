use nalgebra::DMatrix;

use super::SosError;

/// Cone of SOS polynomials of degree `2d` described through prescribed
/// derivatives: `A^(l,m) . X = q^(m)(t_l)` for `m <= m_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteSosCone {
    points: Vec<f64>,
    multiplicities: Vec<usize>,
    d: usize,
    matrices: Vec<Vec<DMatrix<f64>>>,
}

impl HermiteSosCone {
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    /// Half degree of the represented polynomials.
    pub fn d(&self) -> usize {
        self.d
    }

    /// `A^(l,m)`.
    pub fn matrix(&self, l: usize, m: usize) -> &DMatrix<f64> {
        &self.matrices[l][m]
    }

    /// `[l][m] -> A^(l,m) . X`.
    pub fn apply(&self, x: &DMatrix<f64>) -> Vec<Vec<f64>> {
        self.matrices
            .iter()
            .map(|ms| ms.iter().map(|a| a.dot(x)).collect())
            .collect()
    }
}

/// Derivatives `T_i^(m)(t)` for `i <= degree`, `m <= order`; entry `[m][i]`.
pub(crate) fn chebyshev_derivatives(degree: usize, order: usize, t: f64) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; degree + 1]; order + 1];
    // values
    d[0][0] = 1.0;
    if degree >= 1 {
        d[0][1] = t;
    }
    for i in 2..=degree {
        d[0][i] = 2.0 * t * d[0][i - 1] - d[0][i - 2];
    }
    if order == 0 {
        return d;
    }
    // T_i' = i U_{i-1}
    let mut u = vec![0.0; degree.max(1)];
    u[0] = 1.0;
    if degree >= 2 {
        u[1] = 2.0 * t;
    }
    for i in 2..degree {
        u[i] = 2.0 * t * u[i - 1] - u[i - 2];
    }
    for i in 1..=degree {
        d[1][i] = i as f64 * u[i - 1];
    }
    // differentiate T_i = 2t T_{i-1} - T_{i-2} m times
    for m in 2..=order {
        for i in 2..=degree {
            d[m][i] = 2.0 * t * d[m][i - 1] + 2.0 * m as f64 * d[m - 1][i - 1] - d[m][i - 2];
        }
    }
    d
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Basis `p_i = s_i T_i` with the orthonormal scaling for degree `d` on the
/// first-kind grid of `2d + 1` points; the constraint points need not be
/// that grid.
pub fn hermite_sos_cone(points: &[f64], multiplicities: &[usize]) -> Result<HermiteSosCone, SosError> {
    if points.len() != multiplicities.len() {
        return Err(SosError::DimensionMismatch {
            expected: points.len(),
            found: multiplicities.len(),
        });
    }
    if points.is_empty() {
        return Err(SosError::InvalidArgument("no interpolation points".into()));
    }
    for (i, a) in points.iter().enumerate() {
        if points[..i].contains(a) {
            return Err(SosError::InvalidArgument(format!("repeated point {a}")));
        }
    }
    let total: usize = multiplicities.iter().map(|m| m + 1).sum();
    if total % 2 == 0 {
        return Err(SosError::InvalidArgument(format!(
            "total number of conditions {total} is even; it must equal 2d + 1"
        )));
    }
    let d = (total - 1) / 2;
    let s0 = (1.0 / (2 * d + 1) as f64).sqrt();
    let s = (2.0 / (2 * d + 1) as f64).sqrt();
    let scale = |i: usize| if i == 0 { s0 } else { s };
    let matrices = points
        .iter()
        .zip(multiplicities)
        .map(|(&t, &ml)| {
            let der = chebyshev_derivatives(d, ml, t);
            let p: Vec<Vec<f64>> = der
                .iter()
                .map(|row| row.iter().enumerate().map(|(i, v)| scale(i) * v).collect())
                .collect();
            (0..=ml)
                .map(|m| {
                    DMatrix::from_fn(d + 1, d + 1, |i, j| {
                        (0..=m)
                            .map(|r| binomial(m, r) * p[r][i] * p[m - r][j])
                            .sum()
                    })
                })
                .collect()
        })
        .collect();
    Ok(HermiteSosCone {
        points: points.to_vec(),
        multiplicities: multiplicities.to_vec(),
        d,
        matrices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::soscone::lagrange_sos_cone;

    #[test]
    fn derivatives_of_t3() {
        let t: f64 = 0.3;
        let d = chebyshev_derivatives(3, 3, t);
        assert!((d[0][3] - (4.0 * t.powi(3) - 3.0 * t)).abs() < 1e-15);
        assert!((d[1][3] - (12.0 * t * t - 3.0)).abs() < 1e-15);
        assert!((d[2][3] - 24.0 * t).abs() < 1e-14);
        assert!((d[3][3] - 24.0).abs() < 1e-14);
        assert_eq!(d[3][2], 0.0);
    }

    #[test]
    fn quadratic_at_origin() {
        let c = hermite_sos_cone(&[0.0], &[2]).unwrap();
        assert_eq!(c.d(), 1);
        let (a, cc) = (0.7, 1.3);
        let s0 = (1.0f64 / 3.0).sqrt();
        let s1 = (2.0f64 / 3.0).sqrt();
        let x = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![cc / (s0 * s0), a / (s1 * s1)]));
        let f = c.apply(&x);
        assert!((f[0][0] - cc).abs() < 1e-14);
        assert!(f[0][1].abs() < 1e-14);
        assert!((f[0][2] - 2.0 * a).abs() < 1e-14);
    }

    #[test]
    fn zero_multiplicities_match_lagrange() {
        let l = lagrange_sos_cone(4);
        let m = vec![0; l.num_constraints()];
        let h = hermite_sos_cone(l.basis().points(), &m).unwrap();
        for k in 0..l.num_constraints() {
            assert!((h.matrix(k, 0) - l.constraint_matrix(k)).abs().max() <= 1e-14);
        }
    }

    #[test]
    fn first_derivative_is_leibniz() {
        let c = hermite_sos_cone(&[0.2, -0.5], &[1, 2]).unwrap();
        let der = chebyshev_derivatives(c.d(), 1, -0.5);
        let s = |i: usize| ((if i == 0 { 1.0 } else { 2.0 }) / (2 * c.d() + 1) as f64).sqrt();
        let p = nalgebra::DVector::from_fn(c.d() + 1, |i, _| s(i) * der[0][i]);
        let dp = nalgebra::DVector::from_fn(c.d() + 1, |i, _| s(i) * der[1][i]);
        let want = &dp * p.transpose() + &p * dp.transpose();
        assert!((c.matrix(1, 1) - want).abs().max() < 1e-14);
    }

    #[test]
    fn even_total_rejected() {
        assert!(hermite_sos_cone(&[0.0, 0.5], &[0, 0]).is_err());
        assert!(hermite_sos_cone(&[0.0, 0.0], &[0, 1]).is_err());
    }
}
