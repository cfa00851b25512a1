//! Infeasible primal-dual path following with the HKM direction and
//! Mehrotra's predictor-corrector.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use super::problem::{BlockKind, BlockSdpProblem, Coef};
use super::solution::{residuals, BlockValue, Residuals, SdpSolution, SolverConfig, Status};
use super::SdpError;

const INFEAS_TOL: f64 = 1e-8;
const STALL_WINDOW: usize = 3;
const STALL_RATIO: f64 = 0.9;
const INV_GAP_FLOOR: f64 = 1e-3;

struct PsdData {
    block: usize,
    n: usize,
    r1: Vec<usize>,
    r1_scale: Vec<f64>,
    u: DMatrix<f64>,
    gen: Vec<usize>,
    gen_a: Vec<DMatrix<f64>>,
    c: DMatrix<f64>,
}

struct Model {
    m: usize,
    b: DVector<f64>,
    psd: Vec<PsdData>,
    // all nonnegative blocks stacked
    lin_blocks: Vec<(usize, usize, usize)>,
    lin_a: DMatrix<f64>,
    lin_c: DVector<f64>,
    // all free blocks stacked
    free_blocks: Vec<(usize, usize, usize)>,
    free_a: DMatrix<f64>,
    free_c: DVector<f64>,
    // original constraint index of each row
    rows: Vec<usize>,
    cone_dim: usize,
    // b and C are divided by these; the iterates are then invariant under
    // positive scaling of the data
    sb: f64,
    sc: f64,
}

#[derive(Clone)]
struct Iterate {
    xs: Vec<DMatrix<f64>>,
    zs: Vec<DMatrix<f64>>,
    xl: DVector<f64>,
    zl: DVector<f64>,
    xf: DVector<f64>,
    y: DVector<f64>,
}

struct Dual {
    ps: Vec<DMatrix<f64>>,
    lin: DVector<f64>,
    free: DVector<f64>,
}

struct Direction {
    dxs: Vec<DMatrix<f64>>,
    dzs: Vec<DMatrix<f64>>,
    dxl: DVector<f64>,
    dzl: DVector<f64>,
    dxf: DVector<f64>,
    dy: DVector<f64>,
}

fn sym(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

impl Model {
    fn build(p: &BlockSdpProblem, keep: &[usize]) -> Self {
        let sign = p.sense().sign();
        let m = keep.len();
        let b = DVector::from_iterator(m, keep.iter().map(|&k| p.constraints()[k].rhs));
        let mut psd = Vec::new();
        let mut lin_blocks = Vec::new();
        let mut free_blocks = Vec::new();
        let (mut nl, mut nf) = (0, 0);
        for (bi, kind) in p.blocks().iter().enumerate() {
            match *kind {
                BlockKind::Psd(n) => {
                    let mut r1 = Vec::new();
                    let mut r1_scale = Vec::new();
                    let mut r1_rows: Vec<DVector<f64>> = Vec::new();
                    let mut gen = Vec::new();
                    let mut gen_a = Vec::new();
                    for (row, &k) in keep.iter().enumerate() {
                        let terms: Vec<&Coef> = p.constraints()[k]
                            .terms
                            .iter()
                            .filter(|(b, _)| *b == bi)
                            .map(|(_, c)| c)
                            .collect();
                        match terms.as_slice() {
                            [] => {}
                            [Coef::Rank1 { scale, v }] => {
                                r1.push(row);
                                r1_scale.push(*scale);
                                r1_rows.push(v.clone());
                            }
                            ts => {
                                let mut a = DMatrix::zeros(n, n);
                                for c in ts {
                                    a += c.to_dense(n);
                                }
                                if a.iter().any(|v| *v != 0.0) {
                                    gen.push(row);
                                    gen_a.push(a);
                                }
                            }
                        }
                    }
                    let u = DMatrix::from_fn(r1_rows.len(), n, |i, j| r1_rows[i][j]);
                    psd.push(PsdData {
                        block: bi,
                        n,
                        r1,
                        r1_scale,
                        u,
                        gen,
                        gen_a,
                        c: p.objective_dense(bi) * sign,
                    });
                }
                BlockKind::Nonneg(n) => {
                    lin_blocks.push((bi, nl, n));
                    nl += n;
                }
                BlockKind::Free(n) => {
                    free_blocks.push((bi, nf, n));
                    nf += n;
                }
            }
        }
        let stack = |blocks: &[(usize, usize, usize)], total: usize| {
            let mut a = DMatrix::zeros(m, total);
            let mut c = DVector::zeros(total);
            for &(bi, off, n) in blocks {
                for (row, &k) in keep.iter().enumerate() {
                    for (b, coef) in &p.constraints()[k].terms {
                        if *b == bi {
                            let d = coef.to_diag(n);
                            for j in 0..n {
                                a[(row, off + j)] += d[j];
                            }
                        }
                    }
                }
                c.rows_mut(off, n).copy_from(&(p.objective_diag(bi) * sign));
            }
            (a, c)
        };
        let (lin_a, lin_c) = stack(&lin_blocks, nl);
        let (free_a, free_c) = stack(&free_blocks, nf);
        let cone_dim = psd.iter().map(|d| d.n).sum::<usize>() + nl;
        Model {
            m,
            b,
            psd,
            lin_blocks,
            lin_a,
            lin_c,
            free_blocks,
            free_a,
            free_c,
            rows: keep.to_vec(),
            cone_dim,
            sb: 1.0,
            sc: 1.0,
        }
    }

    fn normalize(&mut self) {
        let nz = |v: f64| if v > 0.0 && v.is_finite() { v } else { 1.0 };
        self.sb = nz(self.b.norm());
        self.sc = nz((self.psd.iter().map(|d| d.c.norm_squared()).sum::<f64>()
            + self.lin_c.norm_squared()
            + self.free_c.norm_squared())
        .sqrt());
        self.b /= self.sb;
        for d in &mut self.psd {
            d.c /= self.sc;
        }
        self.lin_c /= self.sc;
        self.free_c /= self.sc;
    }

    fn a_op(&self, xs: &[DMatrix<f64>], xl: &DVector<f64>, xf: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.m);
        for (d, x) in self.psd.iter().zip(xs) {
            if !d.r1.is_empty() {
                let ux = &d.u * x;
                for (i, &row) in d.r1.iter().enumerate() {
                    out[row] += d.r1_scale[i] * ux.row(i).dot(&d.u.row(i));
                }
            }
            for (a, &row) in d.gen_a.iter().zip(&d.gen) {
                out[row] += a.dot(x);
            }
        }
        if !xl.is_empty() {
            out += &self.lin_a * xl;
        }
        if !xf.is_empty() {
            out += &self.free_a * xf;
        }
        out
    }

    fn at_op(&self, y: &DVector<f64>) -> Dual {
        let ps = self
            .psd
            .iter()
            .map(|d| {
                let mut s = DMatrix::zeros(d.n, d.n);
                if !d.r1.is_empty() {
                    let mut su = d.u.clone();
                    for (i, &row) in d.r1.iter().enumerate() {
                        su.row_mut(i).scale_mut(d.r1_scale[i] * y[row]);
                    }
                    s += d.u.tr_mul(&su);
                }
                for (a, &row) in d.gen_a.iter().zip(&d.gen) {
                    s += a * y[row];
                }
                sym(&s)
            })
            .collect();
        Dual {
            ps,
            lin: self.lin_a.tr_mul(y),
            free: self.free_a.tr_mul(y),
        }
    }

    fn schur(&self, it: &Iterate, zinv: &[DMatrix<f64>]) -> DMatrix<f64> {
        let mut mm = DMatrix::zeros(self.m, self.m);
        for ((d, x), zi) in self.psd.iter().zip(&it.xs).zip(zinv) {
            if !d.r1.is_empty() {
                let uxu = &d.u * x * d.u.transpose();
                let uzu = &d.u * zi * d.u.transpose();
                for (a, &ra) in d.r1.iter().enumerate() {
                    for (b, &rb) in d.r1.iter().enumerate() {
                        mm[(ra, rb)] += d.r1_scale[a] * d.r1_scale[b] * uxu[(a, b)] * uzu[(a, b)];
                    }
                }
            }
            for (ga, &rk) in d.gen_a.iter().zip(&d.gen) {
                let g = x * ga * zi;
                for (gb, &rl) in d.gen_a.iter().zip(&d.gen) {
                    mm[(rk, rl)] += gb.dot(&g);
                }
                if !d.r1.is_empty() {
                    let gu = &d.u * &g;
                    for (i, &rl) in d.r1.iter().enumerate() {
                        let v = d.r1_scale[i] * gu.row(i).dot(&d.u.row(i));
                        mm[(rk, rl)] += v;
                        mm[(rl, rk)] += v;
                    }
                }
            }
        }
        if !it.xl.is_empty() {
            let ratio = it.xl.component_div(&it.zl);
            let mut ad = self.lin_a.clone();
            for j in 0..ad.ncols() {
                ad.column_mut(j).scale_mut(ratio[j]);
            }
            mm += ad * self.lin_a.transpose();
        }
        sym(&mm)
    }
}

/// Cholesky with diagonal shifts `1e-12 * max diag`, escalated tenfold, at
/// most four attempts after the unshifted one.
/// Cholesky factor of `D^{-1/2} M D^{-1/2}` with `D = diag(M)`, shifted by
/// a small multiple of the identity if needed.
struct ScaledChol {
    d: DVector<f64>,
    c: Cholesky<f64, Dyn>,
}

impl ScaledChol {
    fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut x = self.c.solve(&b.component_mul(&self.d));
        x.component_mul_assign(&self.d);
        x
    }

    fn solve_mat(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = b.clone();
        for mut col in out.column_iter_mut() {
            let v = self.solve(&col.clone_owned());
            col.copy_from(&v);
        }
        out
    }
}

fn chol_shifted(m: &DMatrix<f64>) -> Option<(ScaledChol, f64)> {
    let n = m.nrows();
    let d = DVector::from_iterator(
        n,
        m.diagonal().iter().map(|&v| if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 }),
    );
    let mut s = m.clone();
    for j in 0..n {
        for i in 0..n {
            s[(i, j)] *= d[i] * d[j];
        }
    }
    if let Some(c) = Cholesky::new(s.clone()) {
        return Some((ScaledChol { d, c }, 0.0));
    }
    let mut shift = 1e-14;
    for _ in 0..6 {
        let mut t = s.clone();
        for i in 0..n {
            t[(i, i)] += shift;
        }
        if let Some(c) = Cholesky::new(t) {
            return Some((ScaledChol { d, c }, shift));
        }
        shift *= 10.0;
    }
    None
}

struct Kkt<'a> {
    m: &'a DMatrix<f64>,
    f: &'a DMatrix<f64>,
    cm: ScaledChol,
    cs: Option<ScaledChol>,
}

impl<'a> Kkt<'a> {
    fn factor(m: &'a DMatrix<f64>, f: &'a DMatrix<f64>) -> Result<Self, String> {
        let (cm, shift) = chol_shifted(m).ok_or("Schur complement factorization failed")?;
        if shift > 0.0 {
            log::debug!("Schur complement regularized by {shift:e} (relative)");
        }
        let cs = if f.ncols() > 0 {
            let mf = cm.solve_mat(f);
            let s = sym(&f.tr_mul(&mf));
            let (cs, _) = chol_shifted(&s).ok_or("free-variable Schur complement factorization failed")?;
            Some(cs)
        } else {
            None
        };
        Ok(Self { m, f, cm, cs })
    }

    fn raw(&self, h: &DVector<f64>, rf: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        match &self.cs {
            None => (self.cm.solve(h), DVector::zeros(0)),
            Some(cs) => {
                let mh = self.cm.solve(h);
                let dx = cs.solve(&(self.f.tr_mul(&mh) - rf));
                let dy = self.cm.solve(&(h - self.f * &dx));
                (dy, dx)
            }
        }
    }

    fn solve(&self, h: &DVector<f64>, rf: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let (mut dy, mut dx) = self.raw(h, rf);
        for _ in 0..2 {
            let r1 = h - self.m * &dy - self.f * &dx;
            let r2 = rf - self.f.tr_mul(&dy);
            let (ey, ex) = self.raw(&r1, &r2);
            dy += ey;
            dx += ex;
        }
        (dy, dx)
    }
}

/// Largest step (capped at 1) keeping `x + a dx` in the cone, times `tau`.
fn step_psd(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> Option<f64> {
    let l = Cholesky::new(x.clone())?.l();
    let li = l.clone().try_inverse()?;
    let w = sym(&(&li * dx * li.transpose()));
    let lmin = SymmetricEigen::new(w).eigenvalues.min();
    Some(if lmin < 0.0 { -1.0 / lmin } else { f64::INFINITY })
}

fn step_lin(x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
    x.iter()
        .zip(dx.iter())
        .filter(|(_, d)| **d < 0.0)
        .map(|(v, d)| -v / d)
        .fold(f64::INFINITY, f64::min)
}

struct Measures {
    res: Residuals,
    // the same quantities for the normalized data, relative to the size of
    // the objectives; these do not change when b or C are scaled
    inv: Residuals,
    pobj: f64,
    dobj: f64,
    mu: f64,
}

pub fn solve(p: &BlockSdpProblem, cfg: &SolverConfig) -> Result<SdpSolution, SdpError> {
    cfg.validate().map_err(SdpError::Invalid)?;
    if p.num_constraints() == 0 {
        return Err(SdpError::Invalid("problem has no constraints".into()));
    }
    // presolve: constraints without coefficients
    let mut keep = Vec::new();
    for (k, c) in p.constraints().iter().enumerate() {
        let empty = (0..p.blocks().len()).all(|b| p.entries(Some(k), b).is_empty());
        if empty {
            if c.rhs != 0.0 {
                return Ok(trivially_infeasible(p, k));
            }
        } else {
            keep.push(k);
        }
    }
    let mut model = Model::build(p, &keep);
    model.normalize();
    if model.cone_dim == 0 {
        return Err(SdpError::Invalid("problem has no conic variables".into()));
    }
    Ok(Ipm::new(&model, cfg).run(p))
}

fn trivially_infeasible(p: &BlockSdpProblem, k: usize) -> SdpSolution {
    let x: Vec<BlockValue> = p.blocks().iter().map(|b| BlockValue::zeros(*b)).collect();
    let z = x.clone();
    let mut y = vec![0.0; p.num_constraints()];
    y[k] = p.constraints()[k].rhs.signum();
    let res = residuals(p, &x, &y, &z);
    SdpSolution {
        status: Status::PrimalInfeasible,
        x,
        y,
        z,
        iterations: 0,
        residuals: res,
        primal_objective: 0.0,
        dual_objective: p.constraints()[k].rhs.abs(),
        diagnostic: Some(format!("constraint {k} has no coefficients but a nonzero right-hand side")),
    }
}

struct Ipm<'a> {
    md: &'a Model,
    cfg: &'a SolverConfig,
    bnorm: f64,
    cnorm: f64,
}

impl<'a> Ipm<'a> {
    fn new(md: &'a Model, cfg: &'a SolverConfig) -> Self {
        // residuals are judged in the units of the original data
        let bnorm = md.b.norm() * md.sb;
        let cnorm = (md.psd.iter().map(|d| d.c.norm_squared()).sum::<f64>()
            + md.lin_c.norm_squared()
            + md.free_c.norm_squared())
        .sqrt()
            * md.sc;
        Self { md, cfg, bnorm, cnorm }
    }

    fn initial(&self) -> Iterate {
        let md = self.md;
        // Frobenius norm of each constraint restricted to each cone block
        let mut xs = Vec::new();
        let mut zs = Vec::new();
        for d in &md.psd {
            let n = d.n as f64;
            let mut xi = 10f64.max(n.sqrt());
            let mut eta = 10f64.max(n.sqrt()).max(d.c.norm());
            for (i, &row) in d.r1.iter().enumerate() {
                let nrm = d.r1_scale[i].abs() * d.u.row(i).norm_squared();
                xi = xi.max(n * (1.0 + md.b[row].abs()) / (1.0 + nrm));
                eta = eta.max(nrm);
            }
            for (a, &row) in d.gen_a.iter().zip(&d.gen) {
                let nrm = a.norm();
                xi = xi.max(n * (1.0 + md.b[row].abs()) / (1.0 + nrm));
                eta = eta.max(nrm);
            }
            xs.push(DMatrix::identity(d.n, d.n) * xi);
            zs.push(DMatrix::identity(d.n, d.n) * eta);
        }
        let nl = md.lin_c.len();
        let (mut xi, mut eta) = (10f64, 10f64.max(md.lin_c.norm()));
        if nl > 0 {
            let n = nl as f64;
            xi = xi.max(n.sqrt());
            eta = eta.max(n.sqrt());
            for row in 0..md.m {
                let nrm = md.lin_a.row(row).norm();
                if nrm > 0.0 {
                    xi = xi.max(n * (1.0 + md.b[row].abs()) / (1.0 + nrm));
                    eta = eta.max(nrm);
                }
            }
        }
        Iterate {
            xs,
            zs,
            xl: DVector::from_element(nl, xi),
            zl: DVector::from_element(nl, eta),
            xf: DVector::zeros(md.free_c.len()),
            y: DVector::zeros(md.m),
        }
    }

    fn dual_residual(&self, it: &Iterate) -> (Vec<DMatrix<f64>>, DVector<f64>, DVector<f64>) {
        let at = self.md.at_op(&it.y);
        let rd: Vec<DMatrix<f64>> = self
            .md
            .psd
            .iter()
            .zip(&at.ps)
            .zip(&it.zs)
            .map(|((d, a), z)| &d.c - a - z)
            .collect();
        let rl = &self.md.lin_c - &at.lin - &it.zl;
        let rf = &self.md.free_c - &at.free;
        (rd, rl, rf)
    }

    fn measures(&self, it: &Iterate) -> Measures {
        let md = self.md;
        let rp = &md.b - md.a_op(&it.xs, &it.xl, &it.xf);
        let (rd, rl, rf) = self.dual_residual(it);
        let dnorm = (rd.iter().map(|r| r.norm_squared()).sum::<f64>() + rl.norm_squared() + rf.norm_squared()).sqrt();
        let pobj = md.psd.iter().zip(&it.xs).map(|(d, x)| d.c.dot(x)).sum::<f64>()
            + md.lin_c.dot(&it.xl)
            + md.free_c.dot(&it.xf);
        let dobj = md.b.dot(&it.y);
        let inv = Residuals {
            pinf: rp.norm(),
            dinf: dnorm,
            gap: (pobj - dobj).abs() / (pobj.abs() + dobj.abs()).max(INV_GAP_FLOOR),
        };
        let (rp_norm, dnorm, pobj, dobj) = (rp.norm() * md.sb, dnorm * md.sc, pobj * md.sb * md.sc, dobj * md.sb * md.sc);
        let xz = it.xs.iter().zip(&it.zs).map(|(x, z)| x.dot(z)).sum::<f64>() + it.xl.dot(&it.zl);
        Measures {
            res: Residuals {
                pinf: rp_norm / (1.0 + self.bnorm),
                dinf: dnorm / (1.0 + self.cnorm),
                gap: (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs()),
            },
            inv,
            pobj,
            dobj,
            mu: xz / md.cone_dim as f64,
        }
    }

    fn converged(&self, ms: &Measures) -> bool {
        self.merit(ms) <= 1.0
    }

    fn merit(&self, ms: &Measures) -> f64 {
        let m = |r: &Residuals| {
            (r.pinf / self.cfg.tol_feas)
                .max(r.dinf / self.cfg.tol_feas)
                .max(r.gap / self.cfg.tol_gap)
        };
        m(&ms.res).max(m(&ms.inv))
    }

    fn infeasibility(&self, it: &Iterate, ms: &Measures) -> Option<Status> {
        let md = self.md;
        let dobj = ms.dobj / (md.sb * md.sc);
        if dobj > 0.0 {
            let at = md.at_op(&it.y);
            let s: f64 = at.ps.iter().zip(&it.zs).map(|(a, z)| (a + z).norm_squared()).sum::<f64>()
                + (&at.lin + &it.zl).norm_squared()
                + at.free.norm_squared();
            if s.sqrt() / dobj < INFEAS_TOL {
                return Some(Status::PrimalInfeasible);
            }
        }
        let cx = md.psd.iter().zip(&it.xs).map(|(d, x)| d.c.dot(x)).sum::<f64>()
            + md.lin_c.dot(&it.xl)
            + md.free_c.dot(&it.xf);
        if cx < 0.0 {
            let ax = md.a_op(&it.xs, &it.xl, &it.xf);
            if ax.norm() / -cx < INFEAS_TOL {
                return Some(Status::DualInfeasible);
            }
        }
        None
    }

    /// Solves for a direction. `corr` holds the second-order terms of the
    /// corrector (`None` for the predictor).
    fn direction(
        &self,
        it: &Iterate,
        zinv: &[DMatrix<f64>],
        kkt: &Kkt,
        sigma_mu: f64,
        corr: Option<(&[DMatrix<f64>], &DVector<f64>)>,
    ) -> Direction {
        let md = self.md;
        let (rd, rl, rf) = self.dual_residual(it);
        let rp = &md.b - md.a_op(&it.xs, &it.xl, &it.xf);
        // base part of dX not depending on dy
        let base: Vec<DMatrix<f64>> = (0..md.psd.len())
            .map(|i| {
                let x = &it.xs[i];
                let zi = &zinv[i];
                let mut t = zi * sigma_mu - x - sym(&(x * &rd[i] * zi));
                if let Some((c, _)) = corr {
                    t -= &c[i];
                }
                t
            })
            .collect();
        let zl_inv = it.zl.map(|v| 1.0 / v);
        let mut base_l = zl_inv.map(|v| v * sigma_mu) - &it.xl - it.xl.component_mul(&rl).component_mul(&zl_inv);
        if let Some((_, cl)) = corr {
            base_l -= cl;
        }
        let zero_f = DVector::zeros(it.xf.len());
        let h = &rp - md.a_op(&base, &base_l, &zero_f);
        let (dy, dxf) = kkt.solve(&h, &rf);
        let at = md.at_op(&dy);
        let dzs: Vec<DMatrix<f64>> = rd.iter().zip(&at.ps).map(|(r, a)| sym(&(r - a))).collect();
        let dxs: Vec<DMatrix<f64>> = (0..md.psd.len())
            .map(|i| {
                let x = &it.xs[i];
                let t = &base[i] + sym(&(x * (&rd[i] - &dzs[i]) * &zinv[i]));
                sym(&t)
            })
            .collect();
        let dzl = &rl - &at.lin;
        let dxl = &base_l + it.xl.component_mul(&(&rl - &dzl)).component_mul(&zl_inv);
        Direction {
            dxs,
            dzs,
            dxl,
            dzl,
            dxf,
            dy,
        }
    }

    fn steps(&self, it: &Iterate, d: &Direction, tau: f64) -> Option<(f64, f64)> {
        let mut ap = step_lin(&it.xl, &d.dxl);
        let mut ad = step_lin(&it.zl, &d.dzl);
        for i in 0..it.xs.len() {
            ap = ap.min(step_psd(&it.xs[i], &d.dxs[i])?);
            ad = ad.min(step_psd(&it.zs[i], &d.dzs[i])?);
        }
        Some(((tau * ap).min(1.0), (tau * ad).min(1.0)))
    }

    fn run(&self, p: &BlockSdpProblem) -> SdpSolution {
        let mut it = self.initial();
        let mut best = it.clone();
        let mut best_merit = f64::INFINITY;
        let mut history: Vec<(f64, f64)> = Vec::new();
        let mut diagnostic = None;
        let mut status = Status::IterLimit;
        let mut iterations = 0;
        let stall_mode = self.cfg.allow_stall_exit;
        for iter in 0..=self.cfg.max_iter {
            iterations = iter;
            let ms = self.measures(&it);
            if !(ms.res.pinf.is_finite() && ms.res.dinf.is_finite() && ms.res.gap.is_finite()) {
                diagnostic = Some("non-finite iterate".into());
                break;
            }
            let merit = self.merit(&ms);
            if merit < best_merit {
                best_merit = merit;
                best = it.clone();
            }
            log::trace!(
                "iter {iter:3} pobj {:+.10e} dobj {:+.10e} pinf {:.2e} dinf {:.2e} gap {:.2e} mu {:.2e}",
                ms.pobj,
                ms.dobj,
                ms.res.pinf,
                ms.res.dinf,
                ms.res.gap,
                ms.mu
            );
            if !stall_mode && self.converged(&ms) {
                status = Status::Optimal;
                break;
            }
            if let Some(s) = self.infeasibility(&it, &ms) {
                status = s;
                best = it.clone();
                break;
            }
            history.push((merit, ms.mu));
            if history.len() > STALL_WINDOW {
                // the relative gap saturates near 1 while the objectives are
                // still far apart, so complementarity counts as progress too
                let (old, old_mu) = history[history.len() - 1 - STALL_WINDOW];
                if merit > STALL_RATIO * old && ms.mu > STALL_RATIO * old_mu {
                    status = Status::SlowProgress;
                    diagnostic = Some(format!("less than 10% progress over {STALL_WINDOW} iterations"));
                    break;
                }
            }
            if iter == self.cfg.max_iter {
                break;
            }
            match self.iterate(&it, ms.mu) {
                Ok((next, ap, ad)) => {
                    if ap < 1e-12 && ad < 1e-12 {
                        status = Status::SlowProgress;
                        diagnostic = Some("step length vanished".into());
                        break;
                    }
                    it = next;
                }
                Err(e) => {
                    diagnostic = Some(e);
                    break;
                }
            }
        }
        let final_it = if status == Status::PrimalInfeasible || status == Status::DualInfeasible {
            it
        } else {
            best
        };
        let best_ok = self.converged(&self.measures(&final_it));
        status = match status {
            Status::Optimal | Status::PrimalInfeasible | Status::DualInfeasible => status,
            _ if stall_mode && best_ok => Status::SlowProgress,
            Status::SlowProgress => Status::SlowProgress,
            _ if best_ok => Status::Optimal,
            _ => Status::IterLimit,
        };
        if status == Status::IterLimit && diagnostic.is_none() {
            diagnostic = Some(format!("iteration limit {} reached", self.cfg.max_iter));
        }
        if let Some(d) = &diagnostic {
            log::debug!("solver stopped: {d}");
        }
        self.export(p, &final_it, status, iterations, diagnostic)
    }

    fn iterate(&self, it: &Iterate, mu: f64) -> Result<(Iterate, f64, f64), String> {
        let md = self.md;
        let mut zinv = Vec::with_capacity(it.zs.len());
        for z in &it.zs {
            let c = Cholesky::new(z.clone()).ok_or("dual slack lost definiteness")?;
            zinv.push(sym(&c.inverse()));
        }
        let m = md.schur(it, &zinv);
        let kkt = Kkt::factor(&m, &md.free_a)?;
        let pred = self.direction(it, &zinv, &kkt, 0.0, None);
        let (ap, ad) = self.steps(it, &pred, 1.0).ok_or("step length computation failed")?;
        let xz_aff: f64 = (0..it.xs.len())
            .map(|i| (&it.xs[i] + &pred.dxs[i] * ap).dot(&(&it.zs[i] + &pred.dzs[i] * ad)))
            .sum::<f64>()
            + (&it.xl + &pred.dxl * ap).dot(&(&it.zl + &pred.dzl * ad));
        let mu_aff = xz_aff / md.cone_dim as f64;
        let expon = 1f64.max(3.0 * ap.min(ad).powi(2));
        let sigma = (mu_aff / mu).max(0.0).powf(expon).min(1.0);
        let corr_s: Vec<DMatrix<f64>> = (0..it.xs.len())
            .map(|i| sym(&(&pred.dxs[i] * &pred.dzs[i] * &zinv[i])))
            .collect();
        let corr_l = pred.dxl.component_mul(&pred.dzl).component_div(&it.zl);
        let d = self.direction(it, &zinv, &kkt, sigma * mu, Some((&corr_s, &corr_l)));
        // stay further from the boundary when the predictor was blocked
        let tau = self.cfg.step_fraction.min(0.9 + 0.09 * ap.min(ad));
        let (ap, ad) = self.steps(it, &d, tau).ok_or("step length computation failed")?;
        let next = Iterate {
            xs: it.xs.iter().zip(&d.dxs).map(|(x, dx)| sym(&(x + dx * ap))).collect(),
            zs: it.zs.iter().zip(&d.dzs).map(|(z, dz)| sym(&(z + dz * ad))).collect(),
            xl: &it.xl + &d.dxl * ap,
            zl: &it.zl + &d.dzl * ad,
            xf: &it.xf + &d.dxf * ap,
            y: &it.y + &d.dy * ad,
        };
        Ok((next, ap, ad))
    }

    fn export(
        &self,
        p: &BlockSdpProblem,
        it: &Iterate,
        status: Status,
        iterations: usize,
        diagnostic: Option<String>,
    ) -> SdpSolution {
        let md = self.md;
        let sign = p.sense().sign();
        let mut x: Vec<BlockValue> = p.blocks().iter().map(|b| BlockValue::zeros(*b)).collect();
        let mut z = x.clone();
        for (i, d) in md.psd.iter().enumerate() {
            x[d.block] = BlockValue::Matrix(&it.xs[i] * md.sb);
            z[d.block] = BlockValue::Matrix(&it.zs[i] * md.sc);
        }
        for &(bi, off, n) in &md.lin_blocks {
            x[bi] = BlockValue::Vector(it.xl.rows(off, n) * md.sb);
            z[bi] = BlockValue::Vector(it.zl.rows(off, n) * md.sc);
        }
        for &(bi, off, n) in &md.free_blocks {
            x[bi] = BlockValue::Vector(it.xf.rows(off, n) * md.sb);
        }
        let mut y = vec![0.0; p.num_constraints()];
        for (row, &k) in md.rows.iter().enumerate() {
            y[k] = sign * it.y[row] * md.sc;
        }
        let res = residuals(p, &x, &y, &z);
        let pobj = super::solution::primal_objective(p, &x);
        let dobj: f64 = p.rhs().iter().zip(&y).map(|(a, b)| a * b).sum();
        SdpSolution {
            status,
            x,
            y,
            z,
            iterations,
            residuals: res,
            primal_objective: pobj,
            dual_objective: dobj,
            diagnostic,
        }
    }
}
