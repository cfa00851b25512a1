use nalgebra::DMatrix;

use super::interval::IntervalNonnegCone;
use super::SosError;
use crate::sdp::{self, BlockKind, BlockSdpProblem, Coef, Sense, SolverConfig, Status};

/// Gram matrices witnessing membership in an interval cone.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub grams: Vec<DMatrix<f64>>,
    /// `max_l |sum_j A_{j,l} . X_j - f_l| / max(1, max|f|)`.
    pub residual: f64,
    pub status: Status,
}

/// Searches for Gram matrices reproducing `values` (on the cone's grid) by
/// solving a small SDP; `Ok(None)` when the solver proves infeasibility.
pub fn certify_nonneg(cone: &IntervalNonnegCone, values: &[f64]) -> Result<Option<Certificate>, SosError> {
    if values.len() != cone.degree() + 1 {
        return Err(SosError::DimensionMismatch {
            expected: cone.degree() + 1,
            found: values.len(),
        });
    }
    let mut p = BlockSdpProblem::new(Sense::Min);
    let blocks: Vec<usize> = cone
        .block_sizes()
        .iter()
        .map(|&s| p.add_block(BlockKind::Psd(s)))
        .collect();
    for (l, &f) in values.iter().enumerate() {
        let k = p.add_constraint(f);
        for (m, &b) in cone.members().iter().zip(&blocks) {
            p.set_coef(k, b, Coef::rank1(1.0, &m.basis().row(l)))
                .map_err(|e| SosError::Solver(e.to_string()))?;
        }
    }
    // minimal total trace keeps the certificate bounded
    for (&b, &s) in blocks.iter().zip(&cone.block_sizes()) {
        p.set_objective(b, Coef::Dense(DMatrix::identity(s, s)))
            .map_err(|e| SosError::Solver(e.to_string()))?;
    }
    // only feasibility is being certified; the trace objective just keeps the
    // Gram matrices bounded and need not be solved to full accuracy
    let cfg = SolverConfig {
        tol_gap: 1e-6,
        ..SolverConfig::default()
    };
    let sol = sdp::solve(&p, &cfg).map_err(|e| SosError::Solver(e.to_string()))?;
    match sol.status {
        Status::PrimalInfeasible => Ok(None),
        Status::DualInfeasible => Err(SosError::Solver("unexpected dual infeasibility".into())),
        status => {
            let grams: Vec<DMatrix<f64>> = blocks.iter().map(|&b| sol.x[b].matrix().clone()).collect();
            let got = cone.apply(&grams)?;
            let scale = values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            let residual = got
                .iter()
                .zip(values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                / scale;
            Ok(Some(Certificate {
                grams,
                residual,
                status,
            }))
        }
    }
}
