//! Experiment parameters. Each struct is both a set of command-line flags
//! and an `[[experiment]]` table of a run config.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::Deserialize;
use sosinterp::sdp::SolverConfig;

use crate::expr;

fn default_m() -> usize {
    2
}
fn default_d() -> usize {
    5
}
fn default_seed() -> u64 {
    2013
}
fn default_onesided_n() -> usize {
    50
}
fn default_fine_points() -> usize {
    200
}
fn default_mus() -> Vec<f64> {
    vec![-0.5, 0.0, 0.5]
}
fn default_scale() -> f64 {
    3.0
}
fn default_beta1() -> f64 {
    12.0
}
fn default_tol() -> f64 {
    1e-9
}
fn default_max_iter() -> usize {
    200
}

/// Solver tolerances shared by every command.
#[derive(Debug, Clone, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverArgs {
    #[arg(long, default_value_t = default_tol())]
    #[serde(default = "default_tol")]
    pub tol_gap: f64,
    #[arg(long, default_value_t = default_tol())]
    #[serde(default = "default_tol")]
    pub tol_feas: f64,
    #[arg(long, default_value_t = default_max_iter())]
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

impl Default for SolverArgs {
    fn default() -> Self {
        Self {
            tol_gap: default_tol(),
            tol_feas: default_tol(),
            max_iter: default_max_iter(),
        }
    }
}

impl SolverArgs {
    pub fn config(&self, stall: bool) -> Result<SolverConfig> {
        let cfg = SolverConfig {
            tol_gap: self.tol_gap,
            tol_feas: self.tol_feas,
            max_iter: self.max_iter,
            allow_stall_exit: stall,
            ..Default::default()
        };
        cfg.validate().map_err(anyhow::Error::msg)?;
        Ok(cfg)
    }
}

/// Lower envelope of random polynomials.
#[derive(Debug, Clone, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeArgs {
    /// Number of polynomials.
    #[arg(long, default_value_t = default_m())]
    #[serde(default = "default_m")]
    pub m: usize,
    /// Their degree.
    #[arg(long, default_value_t = default_d())]
    #[serde(default = "default_d")]
    pub d: usize,
    /// Degree of the envelope; the grid has n+1 points.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = default_seed())]
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Keep the envelope values in a nonnegative block instead of a free one.
    #[arg(long)]
    #[serde(default)]
    pub nonpositive: bool,
    /// Also write the SDP in SDPA sparse format.
    #[arg(long)]
    #[serde(default)]
    pub export_sdpa: Option<PathBuf>,
    #[command(flatten)]
    #[serde(default)]
    pub solver: SolverArgs,
    /// Write the table here instead of stdout.
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Leave out wall-clock figures so reruns are byte-identical.
    #[arg(long)]
    #[serde(default)]
    pub omit_timing: bool,
}

/// Best L1 approximation from below.
#[derive(Debug, Clone, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OnesidedArgs {
    /// Built-in function (exp_t100, runge).
    #[arg(long = "fn", conflicts_with = "expr")]
    #[serde(default, rename = "fn")]
    pub function: Option<String>,
    /// Expression in `t`, e.g. "exp(t) * cosh(2*t)".
    #[arg(long)]
    #[serde(default)]
    pub expr: Option<String>,
    /// Number of interpolation points of the approximant.
    #[arg(long, default_value_t = default_onesided_n())]
    #[serde(default = "default_onesided_n")]
    pub n: usize,
    /// Number of interpolation points used for the function.
    #[arg(long, default_value_t = default_fine_points())]
    #[serde(default = "default_fine_points")]
    pub points: usize,
    /// Stop at the tolerances instead of iterating until progress stalls.
    #[arg(long)]
    #[serde(default)]
    pub strict: bool,
    #[command(flatten)]
    #[serde(default)]
    pub solver: SolverArgs,
    /// Write the table here instead of stdout.
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Leave out wall-clock figures so reruns are byte-identical.
    #[arg(long)]
    #[serde(default)]
    pub omit_timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ModelName {
    GaussMixture,
    Logistic,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriterionName {
    E,
    A,
    D,
}

fn default_criterion() -> CriterionName {
    CriterionName::E
}

/// Optimal design on [-1, 1].
#[derive(Debug, Clone, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignArgs {
    #[arg(long, value_enum)]
    pub model: ModelName,
    #[arg(long, value_enum, default_value_t = CriterionName::E)]
    #[serde(default = "default_criterion")]
    pub criterion: CriterionName,
    /// Interpolate on this many points instead of adaptively.
    #[arg(long)]
    #[serde(default)]
    pub points: Option<usize>,
    /// Centres of the Gaussian mixture.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = default_mus())]
    #[serde(default = "default_mus")]
    pub mus: Vec<f64>,
    /// Width scale of the Gaussian mixture.
    #[arg(long, default_value_t = default_scale())]
    #[serde(default = "default_scale")]
    pub scale: f64,
    /// Logistic parameter estimates.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    #[serde(default)]
    pub beta0: f64,
    #[arg(long, default_value_t = default_beta1(), allow_hyphen_values = true)]
    #[serde(default = "default_beta1")]
    pub beta1: f64,
    /// Basis of a custom model, expressions separated by `;`.
    #[arg(long)]
    #[serde(default)]
    pub basis: Option<String>,
    /// Weight function of a custom model.
    #[arg(long)]
    #[serde(default)]
    pub omega: Option<String>,
    #[command(flatten)]
    #[serde(default)]
    pub solver: SolverArgs,
    /// Write the table here instead of stdout.
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Leave out wall-clock figures so reruns are byte-identical.
    #[arg(long)]
    #[serde(default)]
    pub omit_timing: bool,
}

/// Solve an SDPA sparse file.
#[derive(Debug, Clone, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSdpaArgs {
    pub file: PathBuf,
    #[arg(long)]
    #[serde(default)]
    pub stall: bool,
    #[command(flatten)]
    #[serde(default)]
    pub solver: SolverArgs,
    /// Write the table here instead of stdout.
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Leave out wall-clock figures so reruns are byte-identical.
    #[arg(long)]
    #[serde(default)]
    pub omit_timing: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Experiment {
    Envelope(EnvelopeArgs),
    Onesided(OnesidedArgs),
    Design(DesignArgs),
    SolveSdpa(SolveSdpaArgs),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Vec<Experiment>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: RunConfig = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for e in &mut cfg.experiment {
            e.rebase(base);
        }
        if cfg.experiment.is_empty() {
            bail!("{}: no [[experiment]] entries", path.display());
        }
        let mut seen = HashSet::new();
        for (i, e) in cfg.experiment.iter().enumerate() {
            e.validate().with_context(|| format!("experiment {}", i + 1))?;
            for p in e.written_paths() {
                if !seen.insert(p.clone()) {
                    bail!("experiment {}: {} is written by more than one job", i + 1, p.display());
                }
            }
        }
        Ok(cfg)
    }
}

impl Experiment {
    pub fn validate(&self) -> Result<()> {
        match self {
            Experiment::Envelope(a) => a.validate(),
            Experiment::Onesided(a) => a.validate(),
            Experiment::Design(a) => a.validate(),
            Experiment::SolveSdpa(a) => a.validate(),
        }
    }

    pub fn out(&self) -> Option<&Path> {
        match self {
            Experiment::Envelope(a) => a.out.as_deref(),
            Experiment::Onesided(a) => a.out.as_deref(),
            Experiment::Design(a) => a.out.as_deref(),
            Experiment::SolveSdpa(a) => a.out.as_deref(),
        }
    }

    /// Makes relative paths relative to `base`.
    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let (out, other) = match self {
            Experiment::Envelope(a) => (&mut a.out, a.export_sdpa.as_mut()),
            Experiment::Onesided(a) => (&mut a.out, None),
            Experiment::Design(a) => (&mut a.out, None),
            Experiment::SolveSdpa(a) => (&mut a.out, Some(&mut a.file)),
        };
        out.iter_mut().chain(other).for_each(fix);
    }

    fn written_paths(&self) -> Vec<PathBuf> {
        let (out, extra) = match self {
            Experiment::Envelope(a) => (&a.out, a.export_sdpa.clone()),
            Experiment::Onesided(a) => (&a.out, None),
            Experiment::Design(a) => (&a.out, None),
            Experiment::SolveSdpa(a) => (&a.out, None),
        };
        out.iter().cloned().chain(extra).collect()
    }
}

impl EnvelopeArgs {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            bail!("--m must be at least 1");
        }
        if self.n < self.d {
            bail!("--n {} is below the polynomial degree {}", self.n, self.d);
        }
        self.solver.config(false)?;
        Ok(())
    }
}

impl OnesidedArgs {
    pub fn validate(&self) -> Result<()> {
        match (&self.function, &self.expr) {
            (None, None) => bail!("one of --fn or --expr is required"),
            (Some(_), Some(_)) => bail!("--fn and --expr are mutually exclusive"),
            (Some(name), None) if expr::named(name).is_none() => {
                bail!("unknown function `{name}` (known: {})", expr::NAMED.join(", "))
            }
            (None, Some(src)) => {
                expr::parse(src)?;
            }
            _ => {}
        }
        if self.n < 2 {
            bail!("--n must be at least 2");
        }
        if self.points <= self.n {
            bail!("--points {} must exceed --n {}", self.points, self.n);
        }
        self.solver.config(!self.strict)?;
        Ok(())
    }
}

impl DesignArgs {
    pub fn validate(&self) -> Result<()> {
        match self.model {
            ModelName::GaussMixture => {
                if self.mus.is_empty() {
                    bail!("--mus needs at least one centre");
                }
                if !(self.scale > 0.0 && self.scale.is_finite()) {
                    bail!("--scale must be positive");
                }
            }
            ModelName::Logistic => {
                if !(self.beta0.is_finite() && self.beta1.is_finite()) {
                    bail!("--beta0 and --beta1 must be finite");
                }
            }
            ModelName::Custom => {
                let Some(basis) = &self.basis else {
                    bail!("--model custom needs --basis");
                };
                for part in basis.split(';') {
                    expr::parse(part.trim())?;
                }
                if let Some(w) = &self.omega {
                    expr::parse(w)?;
                }
            }
        }
        if self.model != ModelName::Custom && (self.basis.is_some() || self.omega.is_some()) {
            bail!("--basis and --omega only apply to --model custom");
        }
        if let Some(p) = self.points {
            if p < 3 {
                bail!("--points must be at least 3");
            }
        }
        self.solver.config(false)?;
        Ok(())
    }
}

impl SolveSdpaArgs {
    pub fn validate(&self) -> Result<()> {
        if !self.file.is_file() {
            bail!("{} is not a readable file", self.file.display());
        }
        self.solver.config(self.stall)?;
        Ok(())
    }
}
