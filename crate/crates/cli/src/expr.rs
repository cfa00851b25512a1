//! Functions of `t` given on the command line.
//!
//! Grammar: numbers, `t`, `+ - * /` (also `×` and `÷`), `^`, parentheses,
//! and the calls `exp`, `cosh`, `pow(a, b)` (plus the other elementary
//! functions `meval` knows).

use std::sync::Arc;

use anyhow::{anyhow, Result};
use sosinterp::apps::{sampler, Sampler};

thread_local! {
    static CONTEXT: meval::Context<'static> = {
        let mut c = meval::Context::new();
        c.func2("pow", f64::powf);
        c
    };
}

/// Parses `src` and checks that it only refers to `t`.
pub fn parse(src: &str) -> Result<Sampler> {
    let text = src.replace('×', "*").replace('÷', "/").replace('−', "-");
    let expr: meval::Expr = text.parse().map_err(|e| anyhow!("cannot parse `{src}`: {e}"))?;
    CONTEXT
        .with(|c| expr.eval_with_context((("t", 0.0), c)))
        .map_err(|e| anyhow!("in `{src}`: {e}"))?;
    let expr = Arc::new(expr);
    Ok(sampler(move |t| {
        CONTEXT.with(|c| expr.eval_with_context((("t", t), c)).unwrap_or(f64::NAN))
    }))
}

/// Functions known by name.
pub fn named(name: &str) -> Option<Sampler> {
    match name {
        "exp_t100" => Some(sampler(|t: f64| t.powi(100).exp())),
        "runge" => Some(sampler(|t: f64| 1.0 / (1.0 + 25.0 * t * t))),
        _ => None,
    }
}

pub const NAMED: &[&str] = &["exp_t100", "runge"];
