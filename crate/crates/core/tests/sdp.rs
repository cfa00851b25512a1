use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sosinterp::sdp::*;

fn sym(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    (&a + a.transpose()) * 0.5
}

fn pd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(n, n) * 0.5
}

fn coef_for(rng: &mut ChaCha8Rng, kind: BlockKind) -> Coef {
    match kind {
        BlockKind::Psd(n) => Coef::Dense(sym(rng, n)),
        BlockKind::Nonneg(n) | BlockKind::Free(n) => {
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            Coef::vector(&v)
        }
    }
}

fn interior(rng: &mut ChaCha8Rng, kind: BlockKind, free_zero: bool) -> BlockValue {
    match kind {
        BlockKind::Psd(n) => BlockValue::Matrix(pd(rng, n)),
        BlockKind::Nonneg(n) => BlockValue::Vector(DVector::from_fn(n, |_, _| rng.gen_range(0.5..2.0))),
        BlockKind::Free(n) => BlockValue::Vector(if free_zero {
            DVector::zeros(n)
        } else {
            DVector::from_fn(n, |_, _| rng.gen_range(-2.0..2.0))
        }),
    }
}

fn to_coef(v: &BlockValue) -> Coef {
    match v {
        BlockValue::Matrix(m) => Coef::Dense(m.clone()),
        BlockValue::Vector(v) => Coef::vector(v.as_slice()),
    }
}

fn add(a: &BlockValue, b: &BlockValue, s: f64) -> BlockValue {
    match (a, b) {
        (BlockValue::Matrix(x), BlockValue::Matrix(y)) => BlockValue::Matrix(x + y * s),
        (BlockValue::Vector(x), BlockValue::Vector(y)) => BlockValue::Vector(x + y * s),
        _ => unreachable!(),
    }
}

/// A problem with a strictly feasible primal-dual pair, so an optimum
/// exists and is attained. `scale` multiplies `b` and `C`.
fn feasible_problem(seed: u64, scale: f64) -> BlockSdpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sense = if rng.gen_bool(0.5) { Sense::Min } else { Sense::Max };
    let mut kinds = vec![BlockKind::Psd(rng.gen_range(2..=4))];
    if rng.gen_bool(0.6) {
        kinds.push(BlockKind::Nonneg(rng.gen_range(1..=3)));
    }
    if rng.gen_bool(0.4) {
        kinds.push(BlockKind::Free(1));
    }
    // at most as many constraints as variables, so that A is onto and y unique
    let dim: usize = kinds
        .iter()
        .map(|k| match *k {
            BlockKind::Psd(n) => n * (n + 1) / 2,
            BlockKind::Nonneg(n) | BlockKind::Free(n) => n,
        })
        .sum();
    let m = rng.gen_range(1..=dim.min(4));
    let coefs: Vec<Vec<Coef>> = (0..m).map(|_| kinds.iter().map(|&k| coef_for(&mut rng, k)).collect()).collect();
    let x0: Vec<BlockValue> = kinds.iter().map(|&k| interior(&mut rng, k, false)).collect();
    let z0: Vec<BlockValue> = kinds.iter().map(|&k| interior(&mut rng, k, true)).collect();
    let y0: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();

    let mut p = BlockSdpProblem::new(sense);
    for &k in &kinds {
        p.add_block(k);
    }
    for row in &coefs {
        let c = p.add_constraint(0.0);
        for (b, coef) in row.iter().enumerate() {
            p.set_coef(c, b, coef.clone()).unwrap();
        }
    }
    let b = apply_constraints(&p, &x0);
    for (k, v) in b.iter().enumerate() {
        p.set_rhs(k, v * scale);
    }
    // min: C = A^T y + Z; max: C = A^T y - Z
    let aty = apply_adjoint(&p, &y0);
    let s = match sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    for (bi, (a, z)) in aty.iter().zip(&z0).enumerate() {
        let c = add(a, z, s);
        let c = match c {
            BlockValue::Matrix(m) => BlockValue::Matrix(m * scale),
            BlockValue::Vector(v) => BlockValue::Vector(v * scale),
        };
        p.set_objective(bi, to_coef(&c)).unwrap();
    }
    p
}

fn block_norm(v: &[BlockValue]) -> f64 {
    v.iter()
        .map(|b| match b {
            BlockValue::Matrix(m) => m.norm_squared(),
            BlockValue::Vector(v) => v.norm_squared(),
        })
        .sum::<f64>()
        .sqrt()
}

fn block_diff(a: &[BlockValue], b: &[BlockValue], s: f64) -> f64 {
    let d: Vec<BlockValue> = a.iter().zip(b).map(|(x, y)| add(x, y, -s)).collect();
    block_norm(&d)
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(40) })]

    #[test]
    fn optimal_solutions_certify_themselves(seed in any::<u64>()) {
        let p = feasible_problem(seed, 1.0);
        let cfg = SolverConfig::default();
        let sol = solve(&p, &cfg).unwrap();
        prop_assert_eq!(sol.status, Status::Optimal, "{:?}", sol.diagnostic);
        let r = residuals(&p, &sol.x, &sol.y, &sol.z);
        prop_assert!(r.pinf <= cfg.tol_feas && r.dinf <= cfg.tol_feas && r.gap <= cfg.tol_gap, "{r:?}");
        prop_assert!((r.pinf - sol.residuals.pinf).abs() <= 1e-12);
        prop_assert!((r.dinf - sol.residuals.dinf).abs() <= 1e-12);
        prop_assert!((r.gap - sol.residuals.gap).abs() <= 1e-12);
    }

    #[test]
    fn weak_duality_holds(seed in any::<u64>()) {
        let p = feasible_problem(seed, 1.0);
        let sol = solve(&p, &SolverConfig::default()).unwrap();
        let r = residuals(&p, &sol.x, &sol.y, &sol.z);
        prop_assume!(r.pinf < 1e-6 && r.dinf < 1e-6);
        let pobj = primal_objective(&p, &sol.x);
        let dobj: f64 = p.rhs().iter().zip(&sol.y).map(|(b, y)| b * y).sum();
        let scale = 1.0 + pobj.abs() + dobj.abs();
        match p.sense() {
            Sense::Min => prop_assert!(pobj >= dobj - 1e-8 * scale, "{pobj} {dobj}"),
            Sense::Max => prop_assert!(pobj <= dobj + 1e-8 * scale, "{pobj} {dobj}"),
        }
    }

    #[test]
    fn solves_are_deterministic(seed in any::<u64>()) {
        let p = feasible_problem(seed, 1.0);
        let a = solve(&p, &SolverConfig::default()).unwrap();
        let b = solve(&p, &SolverConfig::default()).unwrap();
        prop_assert_eq!(a.iterations, b.iterations);
        prop_assert_eq!(&a.x, &b.x);
        prop_assert_eq!(&a.y, &b.y);
        prop_assert_eq!(&a.z, &b.z);
    }

    #[test]
    fn scaling_data_scales_the_solution(seed in any::<u64>()) {
        let p = feasible_problem(seed, 1.0);
        let q = feasible_problem(seed, 1e3);
        let a = solve(&p, &SolverConfig::default()).unwrap();
        let b = solve(&q, &SolverConfig::default()).unwrap();
        prop_assert_eq!(a.status, Status::Optimal);
        prop_assert_eq!(b.status, Status::Optimal);
        // X follows b, y follows C
        let dx = block_diff(&b.x, &a.x, 1e3) / (1e3 * block_norm(&a.x)).max(1e-300);
        let ny = a.y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let dy = b.y.iter().zip(&a.y).map(|(u, v)| (u - 1e3 * v).powi(2)).sum::<f64>().sqrt() / (1e3 * ny).max(1e-300);
        prop_assert!(dx <= 1e-6 && dy <= 1e-6, "dx={dx} dy={dy}");
    }

    #[test]
    fn sdpa_round_trip_preserves_data(seed in any::<u64>()) {
        let p = feasible_problem(seed, 1.0);
        let mut buf = Vec::new();
        export_sdpa(&p, &mut buf).unwrap();
        let q = import_sdpa(buf.as_slice()).unwrap();
        prop_assert!(p.same_data(&q));
    }
}

#[test]
fn dual_residual_grows_with_the_perturbation() {
    let p = feasible_problem(3, 1.0);
    let sol = solve(&p, &SolverConfig::default()).unwrap();
    let c_norm = block_norm(&objective_blocks(&p));
    let mut y = sol.y.clone();
    y[0] += 1e-3;
    let r = residuals(&p, &sol.x, &y, &sol.z);
    // oracle: the change in A^T y alone
    let mut e = vec![0.0; y.len()];
    e[0] = 1e-3;
    let want = block_norm(&apply_adjoint(&p, &e)) / (1.0 + c_norm);
    assert!((r.dinf - want).abs() <= 0.2 * want, "{} vs {want}", r.dinf);
}

#[test]
fn zero_point_has_relative_primal_residual_of_b() {
    let p = feasible_problem(5, 1.0);
    let x: Vec<BlockValue> = p
        .blocks()
        .iter()
        .map(|k| match *k {
            BlockKind::Psd(n) => BlockValue::Matrix(DMatrix::zeros(n, n)),
            BlockKind::Nonneg(n) | BlockKind::Free(n) => BlockValue::Vector(DVector::zeros(n)),
        })
        .collect();
    let y = vec![0.0; p.num_constraints()];
    let b = p.rhs().iter().map(|v| v * v).sum::<f64>().sqrt();
    let r = residuals(&p, &x, &y, &x);
    assert!((r.pinf - b / (1.0 + b)).abs() <= 1e-15);
}

#[test]
fn sdpa_entry_count_matches_upper_triangles() {
    let mut p = BlockSdpProblem::new(Sense::Min);
    let a = p.add_block(BlockKind::Psd(3));
    let d = p.add_block(BlockKind::Nonneg(2));
    let k = p.add_constraint(1.0);
    p.set_coef(k, a, Coef::Entries(vec![(0, 0, 1.0), (0, 2, 0.5), (1, 1, -2.0)])).unwrap();
    p.set_coef(k, d, Coef::vector(&[0.0, 3.0])).unwrap();
    p.set_objective(a, Coef::Dense(DMatrix::identity(3, 3))).unwrap();
    let mut buf = Vec::new();
    export_sdpa(&p, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let entries = text
        .lines()
        .filter(|l| !l.starts_with('*') && l.split_whitespace().count() == 5)
        .count();
    // three identity entries, three in A_1 block 1, one in A_1 block 2
    assert_eq!(entries, 7);
}

#[test]
fn plain_sdpa_file_reads_as_minimization() {
    // min x11 + x22 s.t. x12 = 1 (as SDPA dual data)
    let text = "1\n1\n2\n1.0\n0 1 1 1 -1.0\n0 1 2 2 -1.0\n1 1 1 2 0.5\n";
    let p = import_sdpa(text.as_bytes()).unwrap();
    assert_eq!(p.sense(), Sense::Min);
    let sol = solve(&p, &SolverConfig::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.primal_objective - 2.0).abs() < 1e-7);
}

#[test]
fn free_blocks_survive_export() {
    let p = feasible_problem(17, 1.0);
    let mut buf = Vec::new();
    export_sdpa(&p, &mut buf).unwrap();
    let q = import_sdpa(buf.as_slice()).unwrap();
    let a = solve(&p, &SolverConfig::default()).unwrap();
    let b = solve(&q, &SolverConfig::default()).unwrap();
    assert!((a.primal_objective - b.primal_objective).abs() <= 1e-8 * (1.0 + a.primal_objective.abs()));
}

