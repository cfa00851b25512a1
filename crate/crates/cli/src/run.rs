//! Executing one experiment.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;
use std::time::Instant;

use anyhow::Context;
use serde::Serialize;
use sosinterp::apps::{
    envelope_dual, jacobi01_roots, legendre_roots, logistic_model, onesided_dual, onesided_recover,
    random_envelope_instance, solve_design, AppError, CriterionRep, DesignOptions, EnvelopeOptions, FisherModel,
};
use sosinterp::chebkit::{contact_points, InterpolationGrid, Interpolant};
use sosinterp::sdp::{export_sdpa, import_sdpa, solution_residuals, solve, BlockSdpProblem, SdpError, SolverConfig, Status};

use crate::config::{CriterionName, DesignArgs, EnvelopeArgs, Experiment, ModelName, OnesidedArgs, SolveSdpaArgs};
use crate::expr;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_INFEASIBLE: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

/// Result of a finished experiment.
#[derive(Debug)]
pub struct Report {
    /// The table (CSV or JSON); goes to `out` or stdout.
    pub table: String,
    /// One human-readable line for stderr.
    pub summary: String,
    pub code: u8,
}

/// An experiment that produced no table.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn config(error: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_CONFIG, error: error.into() }
    }
}

impl From<AppError> for Failure {
    fn from(e: AppError) -> Self {
        let code = match &e {
            AppError::InvalidArgument(_) | AppError::Sdp(SdpError::Invalid(_)) => EXIT_CONFIG,
            AppError::NotSolved { status, .. } => status_code(*status, false),
            _ => EXIT_NUMERICAL,
        };
        Self { code, error: e.into() }
    }
}

impl From<SdpError> for Failure {
    fn from(e: SdpError) -> Self {
        AppError::from(e).into()
    }
}

pub fn status_code(status: Status, stall: bool) -> u8 {
    match status {
        Status::Optimal => EXIT_OK,
        Status::SlowProgress if stall => EXIT_OK,
        Status::PrimalInfeasible | Status::DualInfeasible => EXIT_INFEASIBLE,
        Status::SlowProgress | Status::IterLimit => EXIT_NUMERICAL,
    }
}

/// Runs `e` and writes its table to `out` when one is configured.
pub fn execute(e: &Experiment) -> Result<Report, Failure> {
    e.validate().map_err(Failure::config)?;
    let report = match e {
        Experiment::Envelope(a) => envelope(a),
        Experiment::Onesided(a) => onesided(a),
        Experiment::Design(a) => design(a),
        Experiment::SolveSdpa(a) => solve_file(a),
    }?;
    if let Some(path) = e.out() {
        std::fs::write(path, &report.table)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::config)?;
    }
    Ok(report)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed().as_secs_f64())
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn nonzeros(p: &BlockSdpProblem) -> usize {
    (0..p.num_constraints())
        .map(|k| (0..p.blocks().len()).map(|b| p.entries(Some(k), b).len()).sum::<usize>())
        .sum()
}

fn envelope(a: &EnvelopeArgs) -> Result<Report, Failure> {
    let cfg = a.solver.config(false).map_err(Failure::config)?;
    let polys = random_envelope_instance(a.m, a.d, a.seed)?;
    let env = envelope_dual(&polys, a.n, EnvelopeOptions { nonpositive: a.nonpositive })?;
    if let Some(path) = &a.export_sdpa {
        let f = File::create(path)
            .with_context(|| format!("creating {}", path.display()))
            .map_err(Failure::config)?;
        export_sdpa(&env.problem, BufWriter::new(f))?;
    }
    let (sol, secs) = timed(|| solve(&env.problem, &cfg));
    let sol = sol?;
    let r = solution_residuals(&env.problem, &sol);

    let mut header = vec!["n_plus_1", "nonzeros", "iterations"];
    let mut row = vec![(a.n + 1).to_string(), nonzeros(&env.problem).to_string(), sol.iterations.to_string()];
    if !a.omit_timing {
        header.push("solver_time_s");
        row.push(format!("{secs:.3}"));
    }
    header.extend(["primal_inf", "dual_inf", "duality_gap", "status", "objective"]);
    row.extend([
        format!("{:e}", r.pinf),
        format!("{:e}", r.dinf),
        format!("{:e}", r.gap),
        format!("{:?}", sol.status),
        sol.primal_objective.to_string(),
    ]);
    let table = csv_table(&header, &[row]).map_err(Failure::config)?;
    Ok(Report {
        table,
        summary: format!(
            "envelope m={} d={} n={}: {:?} after {} iterations, gap {:.1e}",
            a.m, a.d, a.n, sol.status, sol.iterations, r.gap
        ),
        code: status_code(sol.status, false),
    })
}

/// Contact points of the best lower approximant of degree `n - 1` when the
/// error has constant sign in its `n`-th derivative: Gauss points for odd
/// degree, `-1` and Gauss-Radau points for even degree.
fn gauss_contacts(n_points: usize) -> Vec<f64> {
    let deg = n_points - 1;
    if deg % 2 == 1 {
        legendre_roots(deg.div_ceil(2))
    } else {
        std::iter::once(-1.0).chain(jacobi01_roots(deg / 2)).collect()
    }
}

fn onesided(a: &OnesidedArgs) -> Result<Report, Failure> {
    let stall = !a.strict;
    let cfg = a.solver.config(stall).map_err(Failure::config)?;
    let (f, label) = match (&a.function, &a.expr) {
        (Some(name), _) => (expr::named(name).expect("validated"), name.clone()),
        (None, Some(src)) => (expr::parse(src).map_err(Failure::config)?, src.clone()),
        (None, None) => unreachable!("validated"),
    };
    let grid = InterpolationGrid::cheb1(a.points - 1);
    let fi = Interpolant::from_fn(grid.clone(), |t| f(t));
    if fi.values().iter().any(|v| !v.is_finite()) {
        return Err(Failure::config(anyhow::anyhow!("`{label}` is not finite on [-1, 1]")));
    }
    let os = onesided_dual(&fi, a.n - 1)?;
    let (sol, secs) = timed(|| solve(&os.problem, &cfg));
    let sol = sol?;
    let code = status_code(sol.status, stall);
    if code != EXIT_OK {
        return Err(Failure {
            code,
            error: anyhow::anyhow!("solver finished with status {:?}", sol.status),
        });
    }
    let p = onesided_recover(&os, &sol)?;
    let diff = Interpolant::from_fn(grid, |t| fi.eval(t) - p.eval(t));
    let found = contact_points(&diff, -1.0, 1.0, 1e-6).map_err(AppError::from)?;
    let exact = gauss_contacts(a.n);
    let matched = exact.len() == found.len();

    let rows: Vec<Vec<String>> = found
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let (e, err) = if matched {
                (exact[i].to_string(), format!("{:e}", (c - exact[i]).abs()))
            } else {
                (String::new(), String::new())
            };
            vec![(i + 1).to_string(), c.to_string(), e, err]
        })
        .collect();
    let table = csv_table(&["index", "computed_contact", "exact_contact", "abs_error"], &rows).map_err(Failure::config)?;
    let mut summary = format!(
        "onesided {label} n={}: {:?} after {} iterations, {} contact points",
        a.n,
        sol.status,
        sol.iterations,
        found.len()
    );
    if !matched {
        let _ = write!(summary, " (expected {} for a sign-definite derivative)", exact.len());
    }
    if !a.omit_timing {
        let _ = write!(summary, ", {secs:.2} s");
    }
    Ok(Report { table, summary, code })
}

fn design_model(a: &DesignArgs) -> Result<FisherModel, Failure> {
    Ok(match a.model {
        ModelName::GaussMixture => FisherModel::gaussian_mixture(&a.mus, a.scale),
        ModelName::Logistic => logistic_model(a.beta0, a.beta1),
        ModelName::Custom => {
            let basis = a
                .basis
                .as_deref()
                .unwrap_or_default()
                .split(';')
                .map(|s| expr::parse(s.trim()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(Failure::config)?;
            let model = FisherModel::new(basis);
            match &a.omega {
                Some(w) => model.with_omega(expr::parse(w).map_err(Failure::config)?),
                None => model,
            }
        }
    })
}

fn design(a: &DesignArgs) -> Result<Report, Failure> {
    let model = design_model(a)?;
    let m = model.dim();
    let crit = match a.criterion {
        CriterionName::E => CriterionRep::e_optimal(m),
        CriterionName::A => CriterionRep::a_optimal(m),
        CriterionName::D => CriterionRep::d_optimal(m),
    };
    let opts = DesignOptions {
        points: a.points,
        solver: a.solver.config(false).map_err(Failure::config)?,
        ..Default::default()
    };
    let (res, secs) = timed(|| solve_design(&model, &crit, &opts));
    let res = res?;
    let rows: Vec<Vec<String>> = res
        .support
        .iter()
        .zip(&res.weights)
        .map(|(s, w)| vec![s.to_string(), w.to_string()])
        .collect();
    let table = csv_table(&["support", "weight"], &rows).map_err(Failure::config)?;
    let mut summary = format!(
        "design {:?}/{:?}: {} support points, criterion value {:e}, support polynomial on {} points",
        a.model,
        a.criterion,
        res.support.len(),
        res.value,
        res.pi.grid().len()
    );
    if !a.omit_timing {
        let _ = write!(summary, ", {secs:.2} s");
    }
    Ok(Report { table, summary, code: status_code(res.record.status, false) })
}

#[derive(Serialize)]
struct SdpaRecord<'a> {
    file: &'a Path,
    #[serde(flatten)]
    record: sosinterp::sdp::SolveRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    solver_time_s: Option<f64>,
}

fn solve_file(a: &SolveSdpaArgs) -> Result<Report, Failure> {
    let cfg: SolverConfig = a.solver.config(a.stall).map_err(Failure::config)?;
    let f = File::open(&a.file)
        .with_context(|| format!("opening {}", a.file.display()))
        .map_err(Failure::config)?;
    let p = import_sdpa(BufReader::new(f)).map_err(|e| Failure::config(anyhow::Error::from(e).context(a.file.display().to_string())))?;
    let (sol, secs) = timed(|| solve(&p, &cfg));
    let sol = sol?;
    let rec = SdpaRecord {
        file: &a.file,
        record: sol.record(),
        solver_time_s: (!a.omit_timing).then_some(secs),
    };
    let mut table = serde_json::to_string_pretty(&rec).map_err(Failure::config)?;
    table.push('\n');
    Ok(Report {
        table,
        summary: format!("{}: {:?} after {} iterations", a.file.display(), sol.status, sol.iterations),
        code: status_code(sol.status, a.stall),
    })
}
