//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when a criterion without a recorded deviation fails.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sosinterp::apps::*;
use sosinterp::chebkit::*;
use sosinterp::sdp::*;
use sosinterp::soscone::*;

struct Outcome {
    pass: bool,
    detail: String,
    /// Sub-results that fail for a documented reason and do not fail the run.
    known: Vec<(bool, String)>,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail, known: Vec::new() }
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn probe(m: usize) -> Vec<f64> {
    (0..m).map(|i| -1.0 + 2.0 * i as f64 / (m - 1) as f64).collect()
}

// 1. Gram matrices of the scaled basis
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut worst_k = 0;
    for k in 1..=1000 {
        let d = scaled_chebyshev_basis(k).gram_defect();
        if d > worst {
            worst = d;
            worst_k = k;
        }
    }
    let el = start.elapsed();
    let pass = worst <= 1e-12 && el < Duration::from_secs(30);
    Outcome::new(
        pass,
        format!("max ||P^T P - I|| = {worst:.2e} (k={worst_k}) over k=1..1000 in {}", secs(el)),
    )
}

// 2. Envelope instances
fn criterion_2() -> Outcome {
    let polys = random_envelope_instance(2, 5, 2013).expect("instance");
    let mut pass = true;
    let mut parts = Vec::new();
    for points in [100usize, 200, 300] {
        let start = Instant::now();
        let env = envelope_dual(&polys, points - 1, EnvelopeOptions::default()).expect("build");
        let sol = solve(&env.problem, &SolverConfig::default()).expect("solve");
        let el = start.elapsed();
        let r = solution_residuals(&env.problem, &sol);
        let ok = r.gap <= 1e-8 && r.pinf <= 1e-7 && r.dinf <= 1e-7 && el < Duration::from_secs(600);
        pass &= ok;
        parts.push(format!(
            "n+1={points}: {:?} gap={:.1e} pinf={:.1e} dinf={:.1e} {}",
            sol.status,
            r.gap,
            r.pinf,
            r.dinf,
            secs(el)
        ));
    }
    Outcome::new(pass, parts.join("; "))
}

// Left half of the Legendre-25 roots as tabulated to 15 digits.
const TABLE4_EXACT: [f64; 13] = [
    -0.995556969790498,
    -0.976663921459518,
    -0.942974571228974,
    -0.894991997878275,
    -0.833442628760834,
    -0.759259263037358,
    -0.673566368473468,
    -0.577662930241223,
    -0.473002731445715,
    -0.361172305809388,
    -0.243866883720988,
    -0.12286469261071,
    0.0,
];

// 3. Lower approximation of exp(t^100)
fn criterion_3() -> Outcome {
    let start = Instant::now();
    let f = Interpolant::from_fn(InterpolationGrid::cheb1(199), |t: f64| t.powi(100).exp());
    let os = onesided_dual(&f, 49).expect("build");
    let cfg = SolverConfig { allow_stall_exit: true, ..Default::default() };
    let sol = solve(&os.problem, &cfg).expect("solve");
    let p = match onesided_recover(&os, &sol) {
        Ok(p) => p,
        Err(e) => return Outcome::new(false, format!("solver: {e}")),
    };
    let diff = Interpolant::from_fn(InterpolationGrid::cheb1(199), |t| f.eval(t) - p.eval(t));
    let cp = contact_points(&diff, -1.0, 1.0, 1e-6).expect("contacts");
    let el = start.elapsed();
    let exact = legendre_roots(25);
    let table: Vec<f64> = TABLE4_EXACT
        .iter()
        .copied()
        .chain(TABLE4_EXACT[..12].iter().rev().map(|v| -v))
        .collect();
    let table_ok = exact.len() == 25 && exact.iter().zip(&table).all(|(a, b)| (a - b).abs() <= 1e-14);
    if cp.len() != 25 {
        return Outcome::new(false, format!("{} contact points found, expected 25 ({})", cp.len(), secs(el)));
    }
    let err = cp.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let pass = table_ok && err <= 1e-5 && el < Duration::from_secs(300);
    Outcome::new(
        pass,
        format!(
            "25 contacts, max root error {err:.2e}, table roots reproduced: {table_ok}, {:?}, {}",
            sol.status,
            secs(el)
        ),
    )
}

// 4. E-optimal design for the Gaussian mixture
fn criterion_4() -> Outcome {
    let start = Instant::now();
    let model = FisherModel::gaussian_mixture(&[-0.5, 0.0, 0.5], 3.0);
    let r = match solve_design(&model, &CriterionRep::e_optimal(3), &DesignOptions::default()) {
        Ok(r) => r,
        Err(e) => return Outcome::new(false, format!("design failed: {e}")),
    };
    let el = start.elapsed();
    let want = [-0.7410, 0.0, 0.7410];
    let roots_ok = r.support.len() == 3 && r.support.iter().zip(want).all(|(a, b)| (a - b).abs() <= 1e-3);
    let pts = r.pi.grid().len();
    let size_ok = (30..=50).contains(&pts);
    Outcome::new(
        roots_ok && size_ok && el < Duration::from_secs(60),
        format!(
            "support {:?}, weights {:?}, pi on {pts} points, {}",
            r.support.iter().map(|s| format!("{s:.5}")).collect::<Vec<_>>(),
            r.weights.iter().map(|s| format!("{s:.4}")).collect::<Vec<_>>(),
            secs(el)
        ),
    )
}

fn logistic_run(points: usize) -> Result<(Vec<f64>, f64), AppError> {
    let model = logistic_model(0.0, 12.0);
    let opts = DesignOptions { points: Some(points), ..Default::default() };
    let sup = general_support_sdp(&model, &CriterionRep::d_optimal(2), &opts)?;
    let sol = solve(&sup.problem, &opts.solver)?;
    let pi = sup.pi(&sol)?;
    let scale = pi.max_abs();
    let min_pi = probe(20001).iter().map(|&t| pi.eval(t)).fold(f64::INFINITY, f64::min) / scale;
    let roots = contact_points(&pi, -1.0, 1.0, opts.root_tol)?;
    Ok((roots, min_pi))
}

// 5. Local D-optimal design for logistic regression
fn criterion_5() -> Outcome {
    let want = [-0.08697, 0.08697];
    let start = Instant::now();
    let main = match logistic_run(200) {
        Ok((roots, _)) => {
            let ok = roots.len() == 2 && roots.iter().zip(want).all(|(a, b)| (a - b).abs() <= 1e-4);
            (ok, format!("200 points: roots {:?} ({})", roots.iter().map(|r| format!("{r:.6}")).collect::<Vec<_>>(), secs(start.elapsed())))
        }
        Err(e) => (false, format!("200 points: {e}")),
    };
    let mut out = Outcome::new(main.0, main.1);
    let sub = match logistic_run(100) {
        Ok((roots, min_pi)) => {
            let deviates = roots.len() != 2 || roots.iter().zip(want).any(|(a, b)| (a - b).abs() > 1e-2);
            let broken = min_pi < -1e-3 || deviates;
            (
                broken,
                format!(
                    "100 points expected to break the support property: roots {:?}, min pi/max|pi| = {min_pi:.1e}",
                    roots.iter().map(|r| format!("{r:.6}")).collect::<Vec<_>>()
                ),
            )
        }
        // a failed solve is also a wrong result
        Err(e) => (true, format!("100 points: {e}")),
    };
    out.known.push(sub);
    out
}

// 6. SDP lower approximants agree with the Hermite interpolation oracle
fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    let mut pass = true;
    for _ in 0..20 {
        let terms: Vec<(f64, f64)> = (0..rng.gen_range(1..=3))
            .map(|_| (rng.gen_range(0.1..2.0), rng.gen_range(0.2..3.0)))
            .collect();
        let n = rng.gen_range(1..=9usize);
        let tf = terms.clone();
        let f = move |t: f64| tf.iter().map(|(a, c)| a * (c * t).exp()).sum::<f64>();
        let td = terms.clone();
        let df = move |t: f64| td.iter().map(|(a, c)| a * c * (c * t).exp()).sum::<f64>();
        let fi = Interpolant::from_fn(InterpolationGrid::cheb1(63), &f);
        let os = onesided_dual(&fi, n).expect("build");
        let sol = solve(&os.problem, &SolverConfig::default()).expect("solve");
        let Ok(p) = onesided_recover(&os, &sol) else {
            pass = false;
            continue;
        };
        let q = hermite_l1_oracle(&f, &df, n).expect("oracle");
        let a = p.integral().expect("integral");
        let b = q.integral().expect("integral");
        let rel = (a - b).abs() / b.abs().max(1e-300);
        worst = worst.max(rel);
        pass &= rel <= 1e-6;
    }
    Outcome::new(pass, format!("20 functions, max relative objective mismatch {worst:.2e}"))
}

fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let r = rng.gen_range(1..=n);
    let v = DMatrix::from_fn(n, r, |_, _| rng.gen_range(-1.0..1.0));
    let x = &v * v.transpose();
    let tr = x.trace();
    x / tr
}

fn min_on_probe(p: &Interpolant) -> f64 {
    probe(2001).iter().map(|&t| p.eval(t)).fold(f64::INFINITY, f64::min)
}

// Direct evaluation of sum X_ij s_i s_j T_i T_j with the orthonormal
// scaling for degree d.
fn hermite_quadratic_form(x: &DMatrix<f64>, d: usize, t: f64) -> f64 {
    let s0 = (1.0 / (2 * d + 1) as f64).sqrt();
    let s = (2.0 / (2 * d + 1) as f64).sqrt();
    let th = t.acos();
    let v: Vec<f64> = (0..=d)
        .map(|i| (if i == 0 { s0 } else { s }) * (i as f64 * th).cos())
        .collect();
    let mut acc = 0.0;
    for i in 0..=d {
        for j in 0..=d {
            acc += x[(i, j)] * v[i] * v[j];
        }
    }
    acc
}

// 7. SOS soundness and completeness
fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let slack = -1e-9;

    let mut lag_min = f64::INFINITY;
    for _ in 0..200 {
        let k = rng.gen_range(1..=12);
        let cone = lagrange_sos_cone(k);
        let x = random_psd(&mut rng, cone.size());
        let vals = cone.apply(&x).expect("apply");
        let grid = InterpolationGrid::general(cone.basis().points().to_vec()).expect("grid");
        let pts = grid.points().to_vec();
        // general grids sort descending; reorder values accordingly
        let mut pairs: Vec<(f64, f64)> = cone.basis().points().iter().copied().zip(vals).collect();
        pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        assert!(pairs.iter().zip(&pts).all(|(a, b)| a.0 == *b));
        let p = Interpolant::new(grid, pairs.into_iter().map(|(_, v)| v).collect()).expect("interp");
        lag_min = lag_min.min(min_on_probe(&p));
    }

    let mut int_min = f64::INFINITY;
    for _ in 0..200 {
        let n = rng.gen_range(1..=24);
        let cone = interval_nonneg_cone(n).expect("cone");
        let xs: Vec<DMatrix<f64>> = cone.block_sizes().iter().map(|&s| random_psd(&mut rng, s)).collect();
        let vals = cone.apply(&xs).expect("apply");
        let p = Interpolant::new(cone.grid().clone(), vals).expect("interp");
        int_min = int_min.min(min_on_probe(&p));
    }

    let mut her_min = f64::INFINITY;
    let mut her_consistent = 0.0f64;
    for _ in 0..200 {
        let d = rng.gen_range(1..=6usize);
        let mut left = 2 * d + 1;
        let mut points: Vec<f64> = Vec::new();
        let mut mults = Vec::new();
        while left > 0 {
            let m = rng.gen_range(0..left.min(3));
            let t = rng.gen_range(-1.0..1.0);
            if points.contains(&t) {
                continue;
            }
            points.push(t);
            mults.push(m);
            left -= m + 1;
        }
        let cone = hermite_sos_cone(&points, &mults).expect("cone");
        let x = random_psd(&mut rng, d + 1);
        let data = cone.apply(&x);
        for (l, &t) in points.iter().enumerate() {
            her_consistent = her_consistent.max((data[l][0] - hermite_quadratic_form(&x, d, t)).abs());
        }
        let m = probe(2001).iter().map(|&t| hermite_quadratic_form(&x, d, t)).fold(f64::INFINITY, f64::min);
        her_min = her_min.min(m);
    }

    // nonnegative by construction, certified
    let mut certified = 0;
    let mut worst_res = 0.0f64;
    for i in 0..100 {
        let n = rng.gen_range(1..=12usize);
        let cone = interval_nonneg_cone(n).expect("cone");
        let f: Box<dyn Fn(f64) -> f64> = if i % 2 == 0 {
            // weighted sums of squares
            let k = n / 2;
            let (wa, ka, wb, kb): (fn(f64) -> f64, usize, fn(f64) -> f64, usize) = if n % 2 == 1 {
                (|t| 1.0 + t, k, |t| 1.0 - t, k)
            } else {
                (|t| 1.0 - t * t, k.saturating_sub(1), |_| 1.0, k)
            };
            let ca: Vec<f64> = (0..=ka).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let cb: Vec<f64> = (0..=kb).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let with_a = !(n % 2 == 0 && k == 0);
            Box::new(move |t| {
                let a = if with_a { wa(t) * clenshaw(&ca, t).powi(2) } else { 0.0 };
                a + wb(t) * clenshaw(&cb, t).powi(2)
            })
        } else {
            // products of squared linear factors with roots inside the interval
            let roots: Vec<f64> = (0..n / 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let lead: f64 = rng.gen_range(0.5..2.0);
            let odd = n % 2 == 1;
            let side = rng.gen_bool(0.5);
            Box::new(move |t| {
                let base = roots.iter().map(|r| (t - r).powi(2)).product::<f64>() * lead;
                if odd {
                    base * if side { 1.0 + t } else { 1.0 - t }
                } else {
                    base
                }
            })
        };
        let vals: Vec<f64> = cone.grid().points().iter().map(|&t| f(t)).collect();
        if let Some(c) = certify_nonneg(&cone, &vals).expect("certify") {
            if c.residual <= 1e-7 {
                certified += 1;
            }
            worst_res = worst_res.max(c.residual);
        }
    }

    let pass = lag_min >= slack && int_min >= slack && her_min >= slack && her_consistent <= 1e-12 && certified == 100;
    Outcome::new(
        pass,
        format!(
            "min on probe: lagrange {lag_min:.1e}, interval {int_min:.1e}, hermite {her_min:.1e}; \
             certified {certified}/100 (max residual {worst_res:.1e})"
        ),
    )
}

fn random_problem(rng: &mut ChaCha8Rng) -> BlockSdpProblem {
    let sense = if rng.gen_bool(0.5) { Sense::Min } else { Sense::Max };
    let mut p = BlockSdpProblem::new(sense);
    let nb = rng.gen_range(1..=4);
    for _ in 0..nb {
        let n = rng.gen_range(1..=5);
        let kind = match rng.gen_range(0..3) {
            0 => BlockKind::Psd(n),
            1 => BlockKind::Nonneg(n),
            _ => BlockKind::Free(n),
        };
        p.add_block(kind);
    }
    let value = |rng: &mut ChaCha8Rng| -> f64 {
        // a mix of exact small numbers and full-precision noise
        if rng.gen_bool(0.5) {
            rng.gen_range(-5..=5) as f64 * 0.5
        } else {
            rng.gen_range(-1e3..1e3)
        }
    };
    let entries = |rng: &mut ChaCha8Rng, kind: BlockKind| -> Vec<(usize, usize, f64)> {
        let n = kind.size();
        let mut e = Vec::new();
        for i in 0..n {
            for j in i..n {
                if (kind.is_matrix() || i == j) && rng.gen_bool(0.4) {
                    let v = value(rng);
                    if v != 0.0 {
                        e.push((i, j, v));
                    }
                }
            }
        }
        e
    };
    let blocks = p.blocks().to_vec();
    let m = rng.gen_range(1..=6);
    for _ in 0..m {
        let rhs = value(rng);
        let k = p.add_constraint(rhs);
        for (b, &kind) in blocks.iter().enumerate() {
            let e = entries(rng, kind);
            if !e.is_empty() {
                p.set_coef(k, b, Coef::Entries(e)).expect("coef");
            }
        }
    }
    for (b, &kind) in blocks.iter().enumerate() {
        let e = entries(rng, kind);
        if !e.is_empty() {
            p.set_objective(b, Coef::Entries(e)).expect("objective");
        }
    }
    p
}

// 8. SDPA round trip
fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut ok = 0;
    for _ in 0..50 {
        let p = random_problem(&mut rng);
        let mut buf = Vec::new();
        export_sdpa(&p, &mut buf).expect("export");
        let q = import_sdpa(buf.as_slice()).expect("import");
        if p.same_data(&q) {
            ok += 1;
        }
    }
    Outcome::new(
        ok == 50,
        format!("{ok}/50 problems round-trip exactly; external-solver agreement is a manual check (see README)"),
    )
}

fn main() {
    // honour `cargo test -- <filter>` loosely: a filter that is not ours skips the suite
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return;
    }
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("orthonormal scaling", criterion_1),
        ("envelope at desk scale", criterion_2),
        ("one-sided approximation of exp(t^100)", criterion_3),
        ("E-optimal design, Gaussian mixture", criterion_4),
        ("local design, logistic regression", criterion_5),
        ("oracle equivalence", criterion_6),
        ("SOS soundness", criterion_7),
        ("SDPA round trip", criterion_8),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let out = run();
        println!("criterion {} [{}] {name}: {}", i + 1, verdict(out.pass), out.detail);
        for (ok, detail) in &out.known {
            println!(
                "criterion {}b [{}] {detail}{}",
                i + 1,
                verdict(*ok),
                if *ok { "" } else { " (known deviation, see README)" }
            );
        }
        if !out.pass {
            failed.push(i + 1);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
