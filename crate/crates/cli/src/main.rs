//! `sosinterp`: run the envelope, one-sided approximation and design
//! experiments, or solve SDPA files.
//!
//! Exit codes: 0 solved, 1 bad configuration, 2 infeasible, 3 numerical
//! failure. `run` exits with the largest code among its experiments.

mod config;
mod expr;
mod run;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use config::{DesignArgs, EnvelopeArgs, Experiment, OnesidedArgs, RunConfig, SolveSdpaArgs};
use run::{execute, Failure, Report, EXIT_CONFIG};

#[derive(Parser)]
#[command(name = "sosinterp", version, about = "Polynomial optimization on an interval via interpolant SOS cones")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lower envelope of random polynomials; prints one CSV row of solver statistics.
    Envelope(EnvelopeArgs),
    /// Best L1 approximation from below; prints the contact points.
    Onesided(OnesidedArgs),
    /// Optimal design; prints support points and weights.
    Design(DesignArgs),
    /// Solve an SDPA sparse file; prints a JSON record.
    SolveSdpa(SolveSdpaArgs),
    /// Run the [[experiment]] entries of a TOML file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Number of experiments run at once.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

/// Prints the outcome of one experiment and returns its exit code.
fn report(e: &Experiment, outcome: Result<Report, Failure>) -> u8 {
    match outcome {
        Ok(r) => {
            if e.out().is_none() {
                print!("{}", r.table);
            }
            eprintln!("{}", r.summary);
            r.code
        }
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            f.code
        }
    }
}

fn run_config(path: &Path, jobs: usize) -> u8 {
    let cfg = match RunConfig::load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_CONFIG;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let outcomes: Vec<_> = pool.install(|| cfg.experiment.par_iter().map(execute).collect());
    cfg.experiment
        .iter()
        .zip(outcomes)
        .map(|(e, o)| report(e, o))
        .max()
        .unwrap_or(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    let code = match cli.command {
        Command::Run { config, jobs } => run_config(&config, jobs),
        cmd => {
            let e = match cmd {
                Command::Envelope(a) => Experiment::Envelope(a),
                Command::Onesided(a) => Experiment::Onesided(a),
                Command::Design(a) => Experiment::Design(a),
                Command::SolveSdpa(a) => Experiment::SolveSdpa(a),
                Command::Run { .. } => unreachable!(),
            };
            let outcome = execute(&e);
            report(&e, outcome)
        }
    };
    let _ = std::io::stdout().flush();
    ExitCode::from(code)
}
