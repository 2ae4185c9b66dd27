//! The truncation operator `W[T]` and the combined bound `Q[R]`.

use std::collections::HashMap;
use std::sync::RwLock;

use serde::Serialize;

use super::cumulant::CumulantModel;
use crate::error::{Error, Result};
use crate::numeric::{bracket_min, golden_section_min, GoldenOptions};
use crate::tail_core::TailFunction;

/// Which term of `Q` attained the minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Branch {
    #[serde(rename = "W")]
    W,
    #[serde(rename = "chi-star")]
    ChiStar,
    #[serde(rename = "chebyshev")]
    Chebyshev,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::W => "W",
            Branch::ChiStar => "chi-star",
            Branch::Chebyshev => "chebyshev",
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// `W[T](x) = min(1, 4 inf_{z>0} [exp(−x²/(8z²)) + E(ξ²; |ξ| > z)])`.
///
/// Step tails are minimized over their atoms (the objective increases
/// between atoms); continuous tails by golden-section search on `log z`.
pub fn w_operator(tail: &TailFunction, x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Ok(1.0);
    }
    let gauss = |z: f64| (-x * x / (8.0 * z * z)).exp();
    if let Some(atoms) = tail.atoms() {
        // z → 0+ leaves the full second moment.
        let mut best = tail.second_moment();
        for z in atoms {
            best = best.min(gauss(z) + tail.second_moment_tail(z)?);
        }
        return Ok((4.0 * best).clamp(0.0, 1.0));
    }

    let mut failure = None;
    let mut objective = |t: f64| {
        let z = t.exp();
        match tail.second_moment_tail(z) {
            Ok(m) => gauss(z) + m,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    };
    let start = (x / 3.0).ln();
    let (a, _, c) = bracket_min(&mut objective, start, 4f64.ln(), 1.0, 60).map_err(|e| {
        Error::numerical("w_operator", format!("x = {x}: {e}"))
    })?;
    let best = golden_section_min(&mut objective, a, c, GoldenOptions::default());
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((4.0 * best.value).clamp(0.0, 1.0))
}

/// Value of `Q[R](x)` with its parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QValue {
    pub value: f64,
    pub branch: Branch,
    pub w: f64,
    pub chernoff: f64,
    pub chebyshev: f64,
}

/// `Q[R](x) = min(W[R](x), exp(−χ*(x)), 1, σ²/x²)`.
pub fn q_operator(tail: &TailFunction, model: &CumulantModel, x: f64) -> Result<QValue> {
    let w = w_operator(tail, x)?;
    let chernoff = (-model.chi_star(x).value).exp().min(1.0);
    let chebyshev = if x > 0.0 {
        (tail.second_moment() / (x * x)).min(1.0)
    } else {
        1.0
    };
    let branch = if chebyshev < w.min(chernoff) {
        Branch::Chebyshev
    } else if chernoff < w {
        Branch::ChiStar
    } else {
        Branch::W
    };
    Ok(QValue {
        value: w.min(chernoff).min(chebyshev),
        branch,
        w,
        chernoff,
        chebyshev,
    })
}

/// Memoized `Q` for one summand law, keyed by the exact argument.
pub struct QEvaluator<'a> {
    tail: &'a TailFunction,
    model: &'a CumulantModel,
    memo: RwLock<HashMap<u64, QValue>>,
}

impl<'a> QEvaluator<'a> {
    pub fn new(tail: &'a TailFunction, model: &'a CumulantModel) -> Self {
        Self {
            tail,
            model,
            memo: RwLock::new(HashMap::new()),
        }
    }

    pub fn tail(&self) -> &TailFunction {
        self.tail
    }

    pub fn eval(&self, x: f64) -> Result<QValue> {
        let key = x.to_bits();
        if let Some(v) = self.memo.read().expect("memo lock").get(&key) {
            return Ok(*v);
        }
        let v = q_operator(self.tail, self.model, x)?;
        self.memo.write().expect("memo lock").insert(key, v);
        Ok(v)
    }
}
