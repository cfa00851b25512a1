//! Best polynomial lower approximation of the minimum of polynomials.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{attach_cone, require_usable, AppError};
use crate::chebkit::{clenshaw_curtis_weights, InterpolationGrid, Interpolant};
use crate::sdp::{BlockKind, BlockSdpProblem, Coef, SdpSolution, Sense};
use crate::soscone::interval_nonneg_cone;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnvelopeOptions {
    /// Shift the data so the envelope values can be kept in a nonnegative
    /// orthant block (as `-p`) instead of a free block.
    pub nonpositive: bool,
}

/// The envelope SDP together with what is needed to read the answer back.
///
/// The problem is posed with the envelope values `p` as primal variables:
/// `max sum_l w_l p_l` subject to `p_l + sum_j A_{j,l} . X_{i,j} = p_i(t_l)`.
/// The constraint multipliers are then exactly the `y_{i,l}` of the dual
/// form `min sum p_i(t_l) y_{i,l}`, `sum_i y_{i,l} = w_l`.
#[derive(Debug, Clone)]
pub struct EnvelopeSdp {
    pub problem: BlockSdpProblem,
    pub grid: InterpolationGrid,
    pub weights: Vec<f64>,
    /// Block holding the envelope values (negated when `nonpositive`).
    pub p_block: usize,
    /// `rows[i][l]` is the constraint index for polynomial `i` at `t_l`.
    pub rows: Vec<Vec<usize>>,
    pub shift: f64,
    pub nonpositive: bool,
}

/// Builds the envelope program for `polys` on the first-kind grid of degree
/// `n`.
pub fn envelope_dual(polys: &[Interpolant], n: usize, opts: EnvelopeOptions) -> Result<EnvelopeSdp, AppError> {
    if polys.is_empty() {
        return Err(AppError::InvalidArgument("at least one polynomial is required".into()));
    }
    if let Some(p) = polys.iter().find(|p| p.degree() > n) {
        return Err(AppError::InvalidArgument(format!(
            "polynomial of degree {} exceeds envelope degree {n}",
            p.degree()
        )));
    }
    let cone = interval_nonneg_cone(n)?;
    let grid = cone.grid().clone();
    let weights = clenshaw_curtis_weights(&grid)?.w;
    let values: Vec<Vec<f64>> = polys.iter().map(|p| p.eval_many(grid.points())).collect();
    let shift = if opts.nonpositive {
        values.iter().flatten().fold(0.0f64, |a, &v| a.max(v))
    } else {
        0.0
    };

    let mut prob = BlockSdpProblem::new(Sense::Max);
    let sign = if opts.nonpositive { -1.0 } else { 1.0 };
    let p_block = prob.add_block(if opts.nonpositive {
        BlockKind::Nonneg(n + 1)
    } else {
        BlockKind::Free(n + 1)
    });
    let mut rows = Vec::with_capacity(polys.len());
    for vals in &values {
        let r: Vec<usize> = vals
            .iter()
            .enumerate()
            .map(|(l, v)| {
                let k = prob.add_constraint(v - shift);
                prob.set_coef(k, p_block, Coef::unit(l, sign)).map(|_| k)
            })
            .collect::<Result<_, _>>()?;
        attach_cone(&mut prob, &cone, &r)?;
        rows.push(r);
    }
    let obj: Vec<f64> = weights.iter().map(|w| sign * w).collect();
    prob.set_objective(p_block, Coef::vector(&obj))?;
    Ok(EnvelopeSdp {
        problem: prob,
        grid,
        weights,
        p_block,
        rows,
        shift,
        nonpositive: opts.nonpositive,
    })
}

/// The envelope as an interpolant on the problem grid.
pub fn envelope_recover(env: &EnvelopeSdp, sol: &SdpSolution) -> Result<Interpolant, AppError> {
    require_usable(sol)?;
    let sign = if env.nonpositive { -1.0 } else { 1.0 };
    let vals = sol.x[env.p_block].vector().iter().map(|v| sign * v + env.shift).collect();
    Ok(Interpolant::new(env.grid.clone(), vals)?)
}

/// `m` random polynomials of degree `d` with integer Chebyshev coefficients
/// in `[-9, 9]`, on the second-kind grid of degree `d`.
pub fn random_envelope_instance(m: usize, d: usize, seed: u64) -> Result<Vec<Interpolant>, AppError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = InterpolationGrid::cheb2(d.max(1))?;
    Ok((0..m)
        .map(|_| {
            let c: Vec<f64> = (0..=d).map(|_| rng.gen_range(-9i32..=9) as f64).collect();
            Interpolant::from_coeffs(grid.clone(), &c)
        })
        .collect())
}
