//! Bounds for the normed random sum `S = Σ_{i≤η} ξ(i) / (σ√A)`.

use serde::Serialize;

use super::operators::{Branch, QEvaluator};
use crate::error::{Error, Result};
use crate::tail_core::IndexLaw;

/// Default remaining index mass below which the series is cut.
pub const DEFAULT_EPS_TAIL: f64 = 1e-12;

/// Longest series summed before giving up on a law.
const MAX_TERMS: u64 = 50_000_000;

/// One evaluation of `E Q(σx√(A/η))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RandomSumBound {
    pub value: f64,
    /// Branch of the largest series term.
    pub branch: Branch,
    /// `n` of the largest series term (smallest on ties).
    pub dominant_n: u64,
    /// Number of summed terms `n*`.
    pub terms: u64,
    /// `P(η > n*)`, added in full.
    pub remainder: f64,
}

/// `min(1, x⁻², Σ_{n≤n*} q_n Q(σx√(A/n)) + P(η > n*))`, where `n*` is
/// the smallest index with `P(η > n*) < eps_tail`.
pub fn random_sum_bound(
    q: &QEvaluator<'_>,
    law: &IndexLaw,
    sigma: f64,
    x: f64,
    eps_tail: f64,
) -> Result<RandomSumBound> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::domain(format!("sigma must be positive, got {sigma}")));
    }
    if !(eps_tail > 0.0 && eps_tail < 1.0) {
        return Err(Error::domain(format!("eps_tail must lie in (0, 1), got {eps_tail}")));
    }
    let top = law.cutoff(eps_tail);
    if top > MAX_TERMS {
        return Err(Error::domain(format!(
            "index law needs {top} terms to reach mass 1 - {eps_tail}; at most {MAX_TERMS} are summed"
        )));
    }
    let remainder = law.survival(top);
    if x <= 0.0 {
        return Ok(RandomSumBound {
            value: 1.0,
            branch: Branch::W,
            dominant_n: 1,
            terms: top,
            remainder,
        });
    }
    let a = law.mean();
    let mut total = 0.0;
    let mut best = (f64::NEG_INFINITY, 1u64, Branch::W);
    for n in 1..=top {
        let weight = law.pmf(n);
        if weight == 0.0 {
            continue;
        }
        let qv = q.eval(sigma * x * (a / n as f64).sqrt())?;
        let term = weight * qv.value;
        total += term;
        if term > best.0 {
            best = (term, n, qv.branch);
        }
    }
    let mut value = (total + remainder).min(1.0);
    let mut branch = best.2;
    let chebyshev = 1.0 / (x * x);
    if chebyshev < value {
        value = chebyshev;
        branch = Branch::Chebyshev;
    }
    Ok(RandomSumBound {
        value,
        branch,
        dominant_n: best.1,
        terms: top,
        remainder,
    })
}

/// Bound values on a grid of `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCurve {
    pub x: Vec<f64>,
    pub values: Vec<f64>,
    pub branch: Vec<Branch>,
    pub dominant_n: Vec<u64>,
}

impl BoundCurve {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// CSV body with header `x,bound,branch,dominant_n`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Input(format!("writing bound CSV: {e}"));
        w.write_record(["x", "bound", "branch", "dominant_n"]).map_err(io)?;
        for i in 0..self.len() {
            w.write_record([
                format!("{}", self.x[i]),
                format!("{:e}", self.values[i]),
                self.branch[i].label().to_string(),
                self.dominant_n[i].to_string(),
            ])
            .map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::Input(format!("writing bound CSV: {e}")))
    }
}

/// [`random_sum_bound`] over a grid.
///
/// A bound at `x₁` also bounds the tail at every `x₂ > x₁`, so the curve is
/// replaced by its running minimum; this only removes quadrature noise.
pub fn bound_curve(
    q: &QEvaluator<'_>,
    law: &IndexLaw,
    sigma: f64,
    grid: &[f64],
    eps_tail: f64,
) -> Result<BoundCurve> {
    if grid.windows(2).any(|w| !(w[0] < w[1])) || grid.iter().any(|x| !(*x >= 0.0)) {
        return Err(Error::Input("x grid must be non-negative and strictly increasing".into()));
    }
    let mut curve = BoundCurve {
        x: Vec::with_capacity(grid.len()),
        values: Vec::with_capacity(grid.len()),
        branch: Vec::with_capacity(grid.len()),
        dominant_n: Vec::with_capacity(grid.len()),
    };
    let mut running = 1.0_f64;
    for &x in grid {
        let b = random_sum_bound(q, law, sigma, x, eps_tail)?;
        running = running.min(b.value);
        curve.x.push(x);
        curve.values.push(running);
        curve.branch.push(b.branch);
        curve.dominant_n.push(b.dominant_n);
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bound_engine::{q_operator, CumulantModel};
    use crate::tail_core::TailFunction;

    #[test]
    fn deterministic_law_reduces_to_q() {
        let t = TailFunction::normal(1.0).unwrap();
        let m = CumulantModel::normal(1.0);
        let q = QEvaluator::new(&t, &m);
        let law = IndexLaw::deterministic(7).unwrap();
        for x in [0.5, 1.7, 3.0] {
            let b = random_sum_bound(&q, &law, 1.0, x, DEFAULT_EPS_TAIL).unwrap();
            let direct = q_operator(&t, &m, x).unwrap().value.min(1.0 / (x * x));
            assert_eq!(b.value, direct);
            assert_eq!(b.dominant_n, 7);
        }
    }

    #[test]
    fn zero_gives_one() {
        let t = TailFunction::normal(1.0).unwrap();
        let m = CumulantModel::normal(1.0);
        let q = QEvaluator::new(&t, &m);
        let law = IndexLaw::geometric(4.0).unwrap();
        assert_eq!(random_sum_bound(&q, &law, 1.0, 0.0, 1e-12).unwrap().value, 1.0);
    }

    #[test]
    fn geometric_matches_long_sum() {
        let t = TailFunction::normal(1.0).unwrap();
        let m = CumulantModel::normal(1.0);
        let q = QEvaluator::new(&t, &m);
        let law = IndexLaw::geometric(4.0).unwrap();
        let x = 3.0;
        let long: f64 = (1..=10_000u64)
            .map(|n| {
                let u = x * (4.0 / n as f64).sqrt();
                law.pmf(n) * q_operator(&t, &m, u).unwrap().value
            })
            .sum();
        let b = random_sum_bound(&q, &law, 1.0, x, DEFAULT_EPS_TAIL).unwrap();
        assert!((b.value - long.min(1.0 / 9.0)).abs() < 1e-10, "{} vs {long}", b.value);
    }

    #[test]
    fn curve_rejects_bad_grid() {
        let t = TailFunction::normal(1.0).unwrap();
        let m = CumulantModel::normal(1.0);
        let q = QEvaluator::new(&t, &m);
        let law = IndexLaw::geometric(4.0).unwrap();
        assert!(bound_curve(&q, &law, 1.0, &[1.0, 1.0], 1e-12).is_err());
    }

    #[test]
    fn csv_header() {
        let curve = BoundCurve {
            x: vec![0.0, 1.0],
            values: vec![1.0, 0.5],
            branch: vec![Branch::W, Branch::ChiStar],
            dominant_n: vec![1, 3],
        };
        let mut buf = Vec::new();
        curve.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,bound,branch,dominant_n\n0,1e0,W,1\n1,5e-1,chi-star,3\n"));
    }
}
