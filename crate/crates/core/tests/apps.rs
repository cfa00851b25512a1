use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sosinterp::apps::*;
use sosinterp::chebkit::*;
use sosinterp::sdp::*;

fn probe(m: usize) -> Vec<f64> {
    (0..m).map(|i| -1.0 + 2.0 * i as f64 / (m - 1) as f64).collect()
}

fn solve_ok(p: &BlockSdpProblem) -> SdpSolution {
    let sol = solve(p, &SolverConfig::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal, "{:?}", sol.diagnostic);
    sol
}

fn quadrature(grid: &InterpolationGrid, f: impl Fn(f64) -> f64) -> f64 {
    let w = clenshaw_curtis_weights(grid).unwrap().w;
    grid.points().iter().zip(&w).map(|(&t, w)| w * f(t)).sum()
}

#[test]
fn envelope_of_one_polynomial_is_itself() {
    let p = &random_envelope_instance(1, 5, 7).unwrap()[0];
    for n in [5, 6] {
        let env = envelope_dual(std::slice::from_ref(p), n, EnvelopeOptions::default()).unwrap();
        let sol = solve_ok(&env.problem);
        let e = envelope_recover(&env, &sol).unwrap();
        for t in probe(1001) {
            assert!((e.eval(t) - p.eval(t)).abs() <= 1e-6, "n={n} t={t}");
        }
        let want = quadrature(&env.grid, |t| p.eval(t));
        assert!((sol.primal_objective - want).abs() <= 1e-8 * (1.0 + want.abs()));
    }
}

#[test]
fn envelope_ignores_a_polynomial_lying_above() {
    let p1 = random_envelope_instance(1, 4, 3).unwrap().remove(0);
    let p2 = Interpolant::from_fn(p1.grid().clone(), |t| p1.eval(t) + 1.0);
    let env = envelope_dual(&[p1.clone(), p2], 5, EnvelopeOptions::default()).unwrap();
    let sol = solve_ok(&env.problem);
    let want = quadrature(&env.grid, |t| p1.eval(t));
    assert!((sol.primal_objective - want).abs() <= 1e-8 * (1.0 + want.abs()));
}

#[test]
fn envelope_of_three_quintics() {
    let polys = random_envelope_instance(3, 5, 2013).unwrap();
    let env = envelope_dual(&polys, 75, EnvelopeOptions::default()).unwrap();
    let sol = solve_ok(&env.problem);
    let e = envelope_recover(&env, &sol).unwrap();

    // lower bound on a dense probe
    for t in probe(10_000) {
        let lo = polys.iter().map(|p| p.eval(t)).fold(f64::INFINITY, f64::min);
        assert!(e.eval(t) <= lo + 1e-7, "t={t}: {} > {lo}", e.eval(t));
    }

    // touches the minimum where some p_i - e has a double root
    let mut contacts = 0;
    for p in &polys {
        let gap = Interpolant::from_fn(env.grid.clone(), |t| p.eval(t) - e.eval(t));
        for t in contact_points(&gap, -1.0, 1.0, 1e-6).unwrap() {
            let lo = polys.iter().map(|p| p.eval(t)).fold(f64::INFINITY, f64::min);
            assert!((lo - e.eval(t)).abs() <= 1e-6, "t={t}");
            contacts += 1;
        }
    }
    assert!(contacts >= 2, "only {contacts} contact points");

    // the multipliers of each grid point add up to its quadrature weight
    for (l, w) in env.weights.iter().enumerate() {
        let s: f64 = env.rows.iter().map(|r| sol.y[r[l]]).sum();
        assert!((s - w).abs() <= 1e-10, "l={l}: {s} vs {w}");
    }
}

#[test]
fn nonpositive_formulation_has_the_same_optimum() {
    let polys = random_envelope_instance(2, 5, 11).unwrap();
    let a = envelope_dual(&polys, 15, EnvelopeOptions::default()).unwrap();
    let b = envelope_dual(&polys, 15, EnvelopeOptions { nonpositive: true }).unwrap();
    let (sa, sb) = (solve_ok(&a.problem), solve_ok(&b.problem));
    let (ea, eb) = (envelope_recover(&a, &sa).unwrap(), envelope_recover(&b, &sb).unwrap());
    let (ia, ib) = (ea.integral().unwrap(), eb.integral().unwrap());
    assert!((ia - ib).abs() <= 1e-8 * (1.0 + ia.abs()), "{ia} vs {ib}");
    // near the endpoints the quadrature weights are small and the values
    // are less sharply determined
    for t in probe(501) {
        assert!((ea.eval(t) - eb.eval(t)).abs() <= 1e-6 * (1.0 + ea.eval(t).abs()), "t={t} {} {}", ea.eval(t), eb.eval(t));
    }
}

#[test]
fn onesided_reproduces_a_polynomial_of_the_target_degree() {
    let f = Interpolant::from_fn(InterpolationGrid::cheb1(10), |t| 1.0 + t - 2.0 * t.powi(3) + 0.5 * t.powi(4));
    let os = onesided_dual(&f, 4).unwrap();
    let p = onesided_recover(&os, &solve_ok(&os.problem)).unwrap();
    for t in probe(501) {
        assert!((p.eval(t) - f.eval(t)).abs() <= 1e-6, "t={t}");
    }
}

#[test]
fn onesided_square_matches_the_oracle() {
    // below t^2 the best line in L1 is the tangent at 0
    let f = Interpolant::from_fn(InterpolationGrid::cheb1(8), |t| t * t);
    let os = onesided_dual(&f, 1).unwrap();
    let p = onesided_recover(&os, &solve_ok(&os.problem)).unwrap();
    let q = hermite_l1_oracle(|t| t * t, |t| 2.0 * t, 1).unwrap();
    for t in probe(201) {
        assert!((p.eval(t) - q.eval(t)).abs() <= 1e-6, "t={t}");
        assert!(q.eval(t).abs() <= 1e-14);
    }
}

#[test]
fn onesided_stays_below_and_agrees_with_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let c: f64 = rng.gen_range(0.5..2.5);
        let n = rng.gen_range(2..=7usize);
        let f = move |t: f64| (c * t).exp();
        let fi = Interpolant::from_fn(InterpolationGrid::cheb1(40), f);
        let os = onesided_dual(&fi, n).unwrap();
        let p = onesided_recover(&os, &solve_ok(&os.problem)).unwrap();
        for t in probe(2001) {
            assert!(p.eval(t) <= f(t) + 1e-7, "c={c} n={n} t={t}");
        }
        let q = hermite_l1_oracle(f, move |t| c * (c * t).exp(), n).unwrap();
        let (a, b) = (p.integral().unwrap(), q.integral().unwrap());
        assert!((a - b).abs() <= 1e-6 * b.abs(), "c={c} n={n}: {a} vs {b}");
    }
}

fn example3() -> FisherModel {
    FisherModel::gaussian_mixture(&[-0.5, 0.0, 0.5], 3.0)
}

#[test]
fn e_optimal_design_certificates() {
    let model = example3();
    let r = solve_design(&model, &CriterionRep::e_optimal(3), &DesignOptions::default()).unwrap();
    let m = fisher_matrix(&model, &r.support, &r.weights).unwrap();
    assert!((lambda_min(&m) - r.y).abs() <= 1e-6, "{} vs {}", lambda_min(&m), r.y);

    let scale = r.pi.max_abs();
    for t in probe(10_001) {
        assert!(r.pi.eval(t) >= -1e-8, "pi({t}) = {}", r.pi.eval(t));
    }
    for &s in &r.support {
        assert!(r.pi.eval(s).abs() <= 1e-6 * scale);
    }

    let n = r.weights.len();
    // on an exactly symmetric support the weights are symmetric
    let a = (r.support[n - 1] - r.support[0]) / 2.0;
    let (w, _) = design_weights(&[-a, 0.0, a], &model, &CriterionRep::e_optimal(3), &SolverConfig::default()).unwrap();
    assert!((w[0] - w[2]).abs() <= 1e-8, "{w:?}");

    // no other weighting of the same support does better
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let e: Vec<f64> = (0..n).map(|_| -rng.gen_range(f64::EPSILON..1.0).ln()).collect();
        let s: f64 = e.iter().sum();
        let w: Vec<f64> = e.iter().map(|v| v / s).collect();
        let lm = lambda_min(&fisher_matrix(&model, &r.support, &w).unwrap());
        assert!(lm <= r.value + 1e-9, "{lm} > {}", r.value);
    }
}

#[test]
fn e_optimal_builder_is_the_general_one() {
    let model = example3();
    let opts = DesignOptions::default();
    let a = eoptimal_support_sdp(&model, &opts).unwrap();
    let b = general_support_sdp(&model, &CriterionRep::e_optimal(3), &opts).unwrap();
    assert!(a.problem.same_data(&b.problem));
    assert_eq!(a.grid, b.grid);
}

#[test]
fn a_optimal_linear_model_uses_the_endpoints() {
    // symmetric two-point designs +-a: tr M^{-1} = 1 + 1/a^2, best at a = 1
    let model = FisherModel::new(vec![sampler(|_| 1.0), sampler(|t| t)]);
    let r = solve_design(&model, &CriterionRep::a_optimal(2), &DesignOptions::default()).unwrap();
    assert_eq!(r.support.len(), 2, "{:?}", r.support);
    assert!((r.support[0] + 1.0).abs() <= 1e-4 && (r.support[1] - 1.0).abs() <= 1e-4);
    assert!((r.weights[0] - 0.5).abs() <= 1e-6);
    let best = (1..=1000)
        .map(|i| i as f64 / 1000.0)
        .map(|a| -(1.0 + 1.0 / (a * a)))
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((r.value - best).abs() <= 1e-6, "{} vs {best}", r.value);
}

#[test]
fn criterion_without_z_is_infeasible() {
    let model = example3();
    let mut crit = CriterionRep::e_optimal(3);
    crit.blocks[0].b = DMatrix::zeros(3, 3);
    let sup = general_support_sdp(&model, &crit, &DesignOptions::default()).unwrap();
    let sol = solve(&sup.problem, &SolverConfig::default()).unwrap();
    assert_eq!(sol.status, Status::PrimalInfeasible);
    assert!(sup.pi(&sol).is_err());
}

#[test]
fn e_optimal_design_through_the_silp_builder() {
    let model = example3();
    let want = solve_design(&model, &CriterionRep::e_optimal(3), &DesignOptions::default())
        .unwrap()
        .support;

    // x = (y, W_11, W_12, W_13, W_22, W_23, W_33):
    // W . M_t - y <= 0 for all t, tr W = 1, W ⪰ 0, minimize y
    let pairs: Vec<(usize, usize)> = (0..3).flat_map(|i| (i..3).map(move |j| (i, j))).collect();
    let mut row = vec![sampler(|_| -1.0)];
    for &(i, j) in &pairs {
        let f = model.clone();
        let mult = if i == j { 1.0 } else { 2.0 };
        row.push(sampler(move |t| mult * f.information(t)[(i, j)]));
    }
    let mut sip = SemiInfiniteProgram::new(1 + pairs.len());
    sip.add_row(row, 0.0);
    sip.objective[0] = 1.0;
    let tr: Vec<f64> = std::iter::once(0.0).chain(pairs.iter().map(|&(i, j)| if i == j { 1.0 } else { 0.0 })).collect();
    sip.equalities.push((tr, 1.0));
    let mut fi = vec![DMatrix::zeros(3, 3)];
    for &(i, j) in &pairs {
        let mut e = DMatrix::zeros(3, 3);
        e[(i, j)] = 1.0;
        e[(j, i)] = 1.0;
        fi.push(e);
    }
    sip.lmis.push(Lmi { f0: DMatrix::zeros(3, 3), fi });

    let s = build_silp_sdp(&sip, 1e-14).unwrap();
    let sol = solve_ok(&s.problem);
    let x: Vec<f64> = sol.x[s.x_block].vector().iter().copied().collect();
    let pi = s.residual(0, 0.0, &x);
    let got = contact_points(&pi, -1.0, 1.0, 1e-6).unwrap();
    assert_eq!(got.len(), want.len(), "{got:?} vs {want:?}");
    for (a, b) in got.iter().zip(&want) {
        assert!((a - b).abs() <= 1e-4, "{a} vs {b}");
    }
}

#[test]
fn logistic_weight_function_needs_chebyshev_points() {
    let g = |t: f64| 1.0 / (2.0 + 2.0 * (12.0 * t).cosh());
    let equi = InterpolationGrid::general(probe(100)).unwrap();
    let pe = Interpolant::from_fn(equi, g);
    let pc = Interpolant::from_fn(InterpolationGrid::cheb1(199), g);
    let pts = probe(10_001);
    let err = |p: &Interpolant| pts.iter().map(|&t| (p.eval(t) - g(t)).abs()).fold(0.0, f64::max);
    assert!(err(&pe) > 1e-1, "equispaced error {}", err(&pe));
    assert!(err(&pc) < 1e-13, "Chebyshev error {}", err(&pc));
}

#[test]
fn linearizing_a_linear_model_gives_its_basis() {
    let model = local_design_model(|t, _| vec![1.0, t, t * t], &[0.3, -2.0, 5.0]);
    for t in probe(11) {
        let f: Vec<f64> = model.basis.iter().map(|b| b(t)).collect();
        assert_eq!(f, vec![1.0, t, t * t]);
    }
}

#[test]
fn logistic_model_basis_matches_the_derivatives() {
    let model = logistic_model(0.0, 12.0);
    for t in probe(21) {
        let g = 1.0 / (2.0 + 2.0 * (12.0 * t).cosh());
        assert!((model.basis[0](t) - g).abs() <= 1e-16);
        assert!((model.basis[1](t) - t * g).abs() <= 1e-16);
    }
}
