//! Best polynomial approximation from below in the `L1` norm.

use super::{attach_cone, require_usable, AppError};
use crate::chebkit::{clenshaw_curtis_weights, upsample_matrix, InterpolationGrid, Interpolant, UpsampleMatrix};
use crate::sdp::{BlockKind, BlockSdpProblem, Coef, SdpSolution, Sense};
use crate::soscone::interval_nonneg_cone;

/// Lower approximation program for a degree-`N` interpolant.
///
/// Primal: `max w^T B c` over the values `c` of a degree-`n` polynomial on
/// the coarse grid, with `f - B c` in the nonnegative cone of degree `N`.
/// Its dual is `min sum f_l y_l` over the cone's dual with
/// `B^T (w - y) = 0`.
#[derive(Debug, Clone)]
pub struct OnesidedSdp {
    pub problem: BlockSdpProblem,
    pub fine: InterpolationGrid,
    pub coarse: InterpolationGrid,
    pub upsample: UpsampleMatrix,
    pub weights: Vec<f64>,
    pub c_block: usize,
}

pub fn onesided_dual(f: &Interpolant, n: usize) -> Result<OnesidedSdp, AppError> {
    let big_n = f.degree();
    if n >= big_n {
        return Err(AppError::InvalidArgument(format!(
            "approximation degree {n} must be below the interpolant degree {big_n}"
        )));
    }
    let cone = interval_nonneg_cone(big_n)?;
    let fine = cone.grid().clone();
    let coarse = InterpolationGrid::cheb1(n);
    let up = upsample_matrix(&coarse, &fine)?;
    let weights = clenshaw_curtis_weights(&fine)?.w;
    let fv = f.eval_many(fine.points());

    let mut prob = BlockSdpProblem::new(Sense::Max);
    let c_block = prob.add_block(BlockKind::Free(n + 1));
    let rows: Vec<usize> = fv
        .iter()
        .enumerate()
        .map(|(l, &v)| {
            let k = prob.add_constraint(v);
            let row: Vec<f64> = up.b.row(l).iter().copied().collect();
            prob.set_coef(k, c_block, Coef::vector(&row)).map(|_| k)
        })
        .collect::<Result<_, _>>()?;
    attach_cone(&mut prob, &cone, &rows)?;
    prob.set_objective(c_block, Coef::vector(&up.apply_transpose(&weights)))?;
    Ok(OnesidedSdp {
        problem: prob,
        fine,
        coarse,
        upsample: up,
        weights,
        c_block,
    })
}

/// The lower approximant on the coarse grid.
pub fn onesided_recover(os: &OnesidedSdp, sol: &SdpSolution) -> Result<Interpolant, AppError> {
    require_usable(sol)?;
    Ok(Interpolant::new(os.coarse.clone(), sol.x[os.c_block].vector().iter().copied().collect())?)
}
