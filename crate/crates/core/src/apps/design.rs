//! Optimal experimental design: support polynomials and design weights.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::{attach_cone, require_usable, sampler, AppError, Sampler};
use crate::chebkit::{adaptive_interpolate, contact_points, InterpolationGrid, Interpolant};
use crate::sdp::{solve, BlockKind, BlockSdpProblem, Coef, SdpSolution, Sense, SolveRecord, SolverConfig};
use crate::soscone::interval_nonneg_cone;

/// Regression basis `f_1..f_m` and noise weight `omega`.
#[derive(Clone)]
pub struct FisherModel {
    pub basis: Vec<Sampler>,
    pub omega: Sampler,
}

impl std::fmt::Debug for FisherModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FisherModel").field("m", &self.basis.len()).finish_non_exhaustive()
    }
}

impl FisherModel {
    /// Model with `omega = 1`.
    pub fn new(basis: Vec<Sampler>) -> Self {
        Self {
            basis,
            omega: sampler(|_| 1.0),
        }
    }

    pub fn with_omega(mut self, omega: Sampler) -> Self {
        self.omega = omega;
        self
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `f(t) f(t)^T omega(t)`.
    pub fn information(&self, t: f64) -> DMatrix<f64> {
        let f = DMatrix::from_iterator(self.dim(), 1, self.basis.iter().map(|b| b(t)));
        &f * f.transpose() * (self.omega)(t)
    }

    /// Mixture of Gaussian bumps `exp(-scale (t - mu)^2)`.
    pub fn gaussian_mixture(mus: &[f64], scale: f64) -> Self {
        Self::new(
            mus.iter()
                .map(|&mu| sampler(move |t: f64| (-scale * (t - mu).powi(2)).exp()))
                .collect(),
        )
    }
}

/// Information matrix of a finitely supported design.
pub fn fisher_matrix(model: &FisherModel, points: &[f64], weights: &[f64]) -> Result<DMatrix<f64>, AppError> {
    if points.len() != weights.len() {
        return Err(AppError::InvalidArgument("points and weights differ in length".into()));
    }
    if weights.iter().any(|&r| r < 0.0) {
        return Err(AppError::InvalidArgument("negative design weight".into()));
    }
    let s: f64 = weights.iter().sum();
    if (s - 1.0).abs() > 1e-10 {
        return Err(AppError::InvalidArgument(format!("weights sum to {s}, not 1")));
    }
    let m = model.dim();
    Ok(points
        .iter()
        .zip(weights)
        .fold(DMatrix::zeros(m, m), |acc, (&t, &r)| acc + model.information(t) * r))
}

/// Model linearized at `beta_hat`; `grad(t, beta)` returns `df/dbeta`.
pub fn local_design_model(
    grad: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    beta_hat: &[f64],
) -> FisherModel {
    let grad = Arc::new(grad);
    let beta: Arc<[f64]> = beta_hat.into();
    let basis = (0..beta_hat.len())
        .map(|i| {
            let g = Arc::clone(&grad);
            let b = Arc::clone(&beta);
            sampler(move |t| g(t, &b)[i])
        })
        .collect();
    FisherModel::new(basis)
}

/// Two-parameter logistic regression `1 / (1 + exp(-b0 - b1 t))`
/// linearized at `(b0, b1)`.
pub fn logistic_model(b0: f64, b1: f64) -> FisherModel {
    local_design_model(
        |t, b| {
            let g = 1.0 / (2.0 + 2.0 * (b[0] + b[1] * t).cosh());
            vec![g, t * g]
        },
        &[b0, b1],
    )
}

/// One block of `A(M) + B z + C(u) + D ⪰ 0`.
///
/// `a[q]` is the image of the `q`-th symmetric unit matrix (pairs `a <= b`
/// in row-major order, off-diagonal units having both entries set); `c[r]`
/// is the image of the `r`-th unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionBlock {
    pub a: Vec<DMatrix<f64>>,
    pub b: DMatrix<f64>,
    pub c: Vec<DMatrix<f64>>,
    pub d: DMatrix<f64>,
}

/// Semidefinite representation of a criterion: `Phi(M) >= z` iff some `u`
/// makes every block PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionRep {
    pub m: usize,
    pub ell: usize,
    pub blocks: Vec<CriterionBlock>,
}

fn sym_pairs(m: usize) -> Vec<(usize, usize)> {
    (0..m).flat_map(|a| (a..m).map(move |b| (a, b))).collect()
}

fn sym_unit(k: usize, a: usize, b: usize) -> DMatrix<f64> {
    let mut e = DMatrix::zeros(k, k);
    e[(a, b)] = 1.0;
    e[(b, a)] = 1.0;
    e
}

impl CriterionRep {
    /// Smallest eigenvalue: `M - z I ⪰ 0`.
    pub fn e_optimal(m: usize) -> Self {
        let a = sym_pairs(m).into_iter().map(|(i, j)| sym_unit(m, i, j)).collect();
        Self {
            m,
            ell: 0,
            blocks: vec![CriterionBlock {
                a,
                b: -DMatrix::identity(m, m),
                c: Vec::new(),
                d: DMatrix::zeros(m, m),
            }],
        }
    }

    /// `-tr(M^{-1})`: `[[M, I], [I, U]] ⪰ 0` and `-tr U - z >= 0`, with `u`
    /// the upper triangle of `U`.
    pub fn a_optimal(m: usize) -> Self {
        let k = 2 * m;
        let pairs = sym_pairs(m);
        let a = pairs.iter().map(|&(i, j)| sym_unit(k, i, j)).collect();
        let c: Vec<DMatrix<f64>> = pairs.iter().map(|&(i, j)| sym_unit(k, m + i, m + j)).collect();
        let mut d = DMatrix::zeros(k, k);
        for i in 0..m {
            d[(i, m + i)] = 1.0;
            d[(m + i, i)] = 1.0;
        }
        let trace_part: Vec<DMatrix<f64>> = pairs
            .iter()
            .map(|&(i, j)| DMatrix::from_element(1, 1, if i == j { -1.0 } else { 0.0 }))
            .collect();
        Self {
            m,
            ell: pairs.len(),
            blocks: vec![
                CriterionBlock {
                    a,
                    b: DMatrix::zeros(k, k),
                    c,
                    d,
                },
                CriterionBlock {
                    a: vec![DMatrix::zeros(1, 1); pairs.len()],
                    b: DMatrix::from_element(1, 1, -1.0),
                    c: trace_part,
                    d: DMatrix::zeros(1, 1),
                },
            ],
        }
    }

    /// `det(M)^{1/m}`: `[[M, L], [L^T, Diag(L)]] ⪰ 0` with `L` lower
    /// triangular, and `z` below the geometric mean of `diag(L)` through a
    /// binary tree of `[[a, s], [s, b]] ⪰ 0` blocks (leaves padded with `z`).
    /// `u` holds the entries of `L` (row-major, `i >= j`) followed by the
    /// inner tree nodes.
    pub fn d_optimal(m: usize) -> Self {
        if m == 1 {
            return Self::e_optimal(1);
        }
        let k = 2 * m;
        let lower: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..=i).map(move |j| (i, j))).collect();
        let leaves = m.next_power_of_two();
        let inner = leaves - 2; // tree nodes other than the leaves and the root
        let ell = lower.len() + inner;
        let a = sym_pairs(m).into_iter().map(|(i, j)| sym_unit(k, i, j)).collect();
        let mut c = vec![DMatrix::zeros(k, k); ell];
        for (r, &(i, j)) in lower.iter().enumerate() {
            c[r][(i, m + j)] = 1.0;
            c[r][(m + j, i)] = 1.0;
            if i == j {
                c[r][(m + i, m + i)] = 1.0;
            }
        }
        let mut blocks = vec![CriterionBlock {
            a,
            b: DMatrix::zeros(k, k),
            c,
            d: DMatrix::zeros(k, k),
        }];
        // node ids: level 0 holds the leaves; Var::Z is the root and padding
        #[derive(Clone, Copy)]
        enum Var {
            U(usize),
            Z,
        }
        let diag_u = |i: usize| lower.iter().position(|&p| p == (i, i)).unwrap();
        let mut level: Vec<Var> = (0..leaves)
            .map(|i| if i < m { Var::U(diag_u(i)) } else { Var::Z })
            .collect();
        let mut next_u = lower.len();
        while level.len() > 1 {
            let parents: Vec<Var> = if level.len() == 2 {
                vec![Var::Z]
            } else {
                (0..level.len() / 2)
                    .map(|_| {
                        next_u += 1;
                        Var::U(next_u - 1)
                    })
                    .collect()
            };
            for (pi, &par) in parents.iter().enumerate() {
                let mut b = DMatrix::zeros(2, 2);
                let mut cc = vec![DMatrix::zeros(2, 2); ell];
                let mut put = |v: Var, i: usize, j: usize| {
                    let tgt = match v {
                        Var::U(r) => &mut cc[r],
                        Var::Z => &mut b,
                    };
                    tgt[(i, j)] += 1.0;
                    if i != j {
                        tgt[(j, i)] += 1.0;
                    }
                };
                put(level[2 * pi], 0, 0);
                put(level[2 * pi + 1], 1, 1);
                put(par, 0, 1);
                blocks.push(CriterionBlock {
                    a: vec![DMatrix::zeros(2, 2); m * (m + 1) / 2],
                    b,
                    c: cc,
                    d: DMatrix::zeros(2, 2),
                });
            }
            level = parents;
        }
        debug_assert_eq!(next_u, ell);
        Self { m, ell, blocks }
    }

    pub fn validate(&self) -> Result<(), AppError> {
        let q = self.m * (self.m + 1) / 2;
        for (i, blk) in self.blocks.iter().enumerate() {
            let k = blk.b.nrows();
            let ok = blk.b.shape() == (k, k)
                && blk.d.shape() == (k, k)
                && blk.a.len() == q
                && blk.c.len() == self.ell
                && blk.a.iter().chain(&blk.c).all(|x| x.shape() == (k, k));
            if !ok {
                return Err(AppError::InvalidArgument(format!("criterion block {i} has inconsistent dimensions")));
            }
        }
        Ok(())
    }

    /// `A_i(M)`.
    pub fn apply_a(&self, i: usize, mat: &DMatrix<f64>) -> DMatrix<f64> {
        let blk = &self.blocks[i];
        let k = blk.b.nrows();
        sym_pairs(self.m)
            .into_iter()
            .zip(&blk.a)
            .fold(DMatrix::zeros(k, k), |acc, ((a, b), img)| acc + img * mat[(a, b)])
    }
}

#[derive(Debug, Clone)]
pub struct DesignOptions {
    /// Accuracy of the adaptive interpolants of `f_i f_j omega`.
    pub tol: f64,
    /// Interpolate the basis on this many first-kind points instead of
    /// adaptively; `pi` then lives on the same number of points.
    pub points: Option<usize>,
    pub solver: SolverConfig,
    /// Relative threshold for `|pi|` at a support point.
    pub root_tol: f64,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self {
            tol: 1e-14,
            points: None,
            solver: SolverConfig::default(),
            root_tol: 1e-6,
        }
    }
}

/// The support-polynomial SDP: `min y` with `pi = y - sum_i <W_i, A_i(M_t) + D_i>`
/// nonnegative on `[-1, 1]`, `sum_i <W_i, B_i> = -1`, `sum_i C_i^*(W_i) = 0`.
#[derive(Debug, Clone)]
pub struct SupportSdp {
    pub problem: BlockSdpProblem,
    pub grid: InterpolationGrid,
    pub y_block: usize,
    pub w_blocks: Vec<usize>,
    /// `g[l][i] = A_i(M_{t_l}) + D_i`.
    g: Vec<Vec<DMatrix<f64>>>,
}

impl SupportSdp {
    /// Degree of `pi`.
    pub fn degree(&self) -> usize {
        self.grid.degree()
    }

    /// `pi` on the problem grid.
    pub fn pi(&self, sol: &SdpSolution) -> Result<Interpolant, AppError> {
        require_usable(sol)?;
        let y = sol.x[self.y_block].vector()[0];
        let vals = self
            .g
            .iter()
            .map(|gl| {
                y - gl
                    .iter()
                    .zip(&self.w_blocks)
                    .map(|(g, &b)| g.dot(sol.x[b].matrix()))
                    .sum::<f64>()
            })
            .collect();
        Ok(Interpolant::new(self.grid.clone(), vals)?)
    }
}

/// Degree needed for `pi` and the information matrices on its grid.
fn information_on_grid(model: &FisherModel, opts: &DesignOptions) -> Result<(InterpolationGrid, Vec<DMatrix<f64>>), AppError> {
    let m = model.dim();
    match opts.points {
        Some(npts) => {
            if npts < 2 {
                return Err(AppError::InvalidArgument("need at least two points".into()));
            }
            let src = InterpolationGrid::cheb1(npts - 1);
            let fs: Vec<Interpolant> = model
                .basis
                .iter()
                .map(|f| Interpolant::from_fn(src.clone(), |t| f(t)))
                .collect();
            let om = Interpolant::from_fn(src, |t| (model.omega)(t));
            let grid = InterpolationGrid::cheb1(round_odd(npts - 1));
            let mats = grid
                .points()
                .iter()
                .map(|&t| {
                    let f = DMatrix::from_iterator(m, 1, fs.iter().map(|p| p.eval(t)));
                    &f * f.transpose() * om.eval(t)
                })
                .collect();
            Ok((grid, mats))
        }
        None => {
            let mut d = 1;
            for (a, b) in sym_pairs(m) {
                let (fa, fb, om) = (&model.basis[a], &model.basis[b], &model.omega);
                let p = adaptive_interpolate(|t| fa(t) * fb(t) * om(t), opts.tol)
                    .map_err(|source| AppError::Adaptive { row: a * m + b, source })?;
                d = d.max(p.effective_degree(opts.tol)?);
            }
            let grid = InterpolationGrid::cheb1(round_odd(d));
            let mats = grid.points().iter().map(|&t| model.information(t)).collect();
            Ok((grid, mats))
        }
    }
}

fn round_odd(d: usize) -> usize {
    if d % 2 == 1 {
        d
    } else {
        d + 1
    }
}

pub fn general_support_sdp(model: &FisherModel, crit: &CriterionRep, opts: &DesignOptions) -> Result<SupportSdp, AppError> {
    crit.validate()?;
    if crit.m != model.dim() || model.dim() == 0 {
        return Err(AppError::InvalidArgument(format!(
            "criterion for m = {} but model has {} basis functions",
            crit.m,
            model.dim()
        )));
    }
    let (grid, mats) = information_on_grid(model, opts)?;
    let cone = interval_nonneg_cone(grid.degree())?;

    let mut prob = BlockSdpProblem::new(Sense::Min);
    let y_block = prob.add_block(BlockKind::Free(1));
    prob.set_objective(y_block, Coef::unit(0, 1.0))?;
    let w_blocks: Vec<usize> = crit
        .blocks
        .iter()
        .map(|b| prob.add_block(BlockKind::Psd(b.b.nrows())))
        .collect();

    let kb = prob.add_constraint(-1.0);
    for (blk, &w) in crit.blocks.iter().zip(&w_blocks) {
        if blk.b.iter().any(|&v| v != 0.0) {
            prob.set_coef(kb, w, Coef::Dense(blk.b.clone()))?;
        }
    }
    for r in 0..crit.ell {
        let k = prob.add_constraint(0.0);
        for (blk, &w) in crit.blocks.iter().zip(&w_blocks) {
            if blk.c[r].iter().any(|&v| v != 0.0) {
                prob.set_coef(k, w, Coef::Dense(blk.c[r].clone()))?;
            }
        }
    }
    // -y + sum_i <W_i, G_il> + cone_l = 0
    let mut g = Vec::with_capacity(grid.len());
    let mut rows = Vec::with_capacity(grid.len());
    for mt in &mats {
        let k = prob.add_constraint(0.0);
        prob.set_coef(k, y_block, Coef::unit(0, -1.0))?;
        let gl: Vec<DMatrix<f64>> = (0..crit.blocks.len())
            .map(|i| crit.apply_a(i, mt) + &crit.blocks[i].d)
            .collect();
        for (gi, &w) in gl.iter().zip(&w_blocks) {
            if gi.iter().any(|&v| v != 0.0) {
                prob.set_coef(k, w, Coef::Dense(gi.clone()))?;
            }
        }
        g.push(gl);
        rows.push(k);
    }
    attach_cone(&mut prob, &cone, &rows)?;
    Ok(SupportSdp {
        problem: prob,
        grid,
        y_block,
        w_blocks,
        g,
    })
}

/// Support SDP for the smallest-eigenvalue criterion.
pub fn eoptimal_support_sdp(model: &FisherModel, opts: &DesignOptions) -> Result<SupportSdp, AppError> {
    general_support_sdp(model, &CriterionRep::e_optimal(model.dim()), opts)
}

/// Weights maximizing the criterion over designs supported on `support`,
/// and the optimal criterion value. Weights below `1e-8` are dropped and
/// the rest renormalized.
pub fn design_weights(
    support: &[f64],
    model: &FisherModel,
    crit: &CriterionRep,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, f64), AppError> {
    if support.is_empty() {
        return Err(AppError::InvalidArgument("empty support".into()));
    }
    crit.validate()?;
    let s = support.len();
    let infos: Vec<DMatrix<f64>> = support.iter().map(|&t| model.information(t)).collect();

    let mut prob = BlockSdpProblem::new(Sense::Max);
    let r_block = prob.add_block(BlockKind::Nonneg(s));
    let z_block = prob.add_block(BlockKind::Free(1));
    let u_block = (crit.ell > 0).then(|| prob.add_block(BlockKind::Free(crit.ell)));
    prob.set_objective(z_block, Coef::unit(0, 1.0))?;
    let k = prob.add_constraint(1.0);
    prob.set_coef(k, r_block, Coef::vector(&vec![1.0; s]))?;

    for (i, blk) in crit.blocks.iter().enumerate() {
        let kk = blk.b.nrows();
        let sb = prob.add_block(BlockKind::Psd(kk));
        let images: Vec<DMatrix<f64>> = infos.iter().map(|mt| crit.apply_a(i, mt)).collect();
        for a in 0..kk {
            for b in a..kk {
                let c = prob.add_constraint(blk.d[(a, b)]);
                prob.set_coef(c, sb, Coef::Entries(vec![(a, b, if a == b { 1.0 } else { 0.5 })]))?;
                let rc: Vec<f64> = images.iter().map(|im| -im[(a, b)]).collect();
                prob.set_coef(c, r_block, Coef::vector(&rc))?;
                if blk.b[(a, b)] != 0.0 {
                    prob.set_coef(c, z_block, Coef::unit(0, -blk.b[(a, b)]))?;
                }
                if let Some(ub) = u_block {
                    let uc: Vec<f64> = blk.c.iter().map(|cm| -cm[(a, b)]).collect();
                    prob.set_coef(c, ub, Coef::vector(&uc))?;
                }
            }
        }
    }
    let sol = solve(&prob, cfg)?;
    require_usable(&sol)?;
    let raw = sol.x[r_block].vector();
    let mut w: Vec<f64> = raw.iter().map(|&v| if v < 1e-8 { 0.0 } else { v }).collect();
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return Err(AppError::Degenerate("all design weights vanished".into()));
    }
    w.iter_mut().for_each(|v| *v /= total);
    Ok((w, sol.x[z_block].vector()[0]))
}

#[derive(Debug, Clone, Serialize)]
pub struct DesignResult {
    pub support: Vec<f64>,
    pub weights: Vec<f64>,
    /// Criterion value of the design.
    pub value: f64,
    /// Optimal `y` of the support SDP.
    pub y: f64,
    pub pi: Interpolant,
    pub record: SolveRecord,
}

/// Support SDP, root extraction and weight SDP in one go.
pub fn solve_design(model: &FisherModel, crit: &CriterionRep, opts: &DesignOptions) -> Result<DesignResult, AppError> {
    let sup = general_support_sdp(model, crit, opts)?;
    let sol = solve(&sup.problem, &opts.solver)?;
    let pi = sup.pi(&sol)?;
    let y = sol.x[sup.y_block].vector()[0];
    let scale = pi.max_abs();
    if scale <= 1e-9 * (1.0 + y.abs()) {
        return Err(AppError::Degenerate(
            "pi vanishes identically; every point is a candidate support point".into(),
        ));
    }
    let mut support = contact_points(&pi, -1.0, 1.0, opts.root_tol)?;
    support.dedup_by(|a, b| (*a - *b).abs() < 1e-8);
    if support.is_empty() {
        return Err(AppError::Degenerate("pi has no zeros on [-1, 1]".into()));
    }
    let (weights, value) = design_weights(&support, model, crit, &opts.solver)?;
    let (support, weights): (Vec<f64>, Vec<f64>) = support.into_iter().zip(weights).filter(|(_, w)| *w > 0.0).unzip();
    Ok(DesignResult {
        support,
        weights,
        value,
        y,
        pi,
        record: sol.record(),
    })
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn lambda_min(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}
