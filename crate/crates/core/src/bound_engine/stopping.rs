//! Exponents for sums stopped at a random time, and moment-growth reference curves.

use serde::Serialize;

use crate::error::{Error, Result};

/// Tail `exp(−C x^q log^w x)` of a stopped sum whose index has tail
/// exponents `(a, b)` and whose summands have exponents `(m, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StoppingExponents {
    pub a: f64,
    pub b: f64,
    pub m: f64,
    pub r: f64,
    pub q: f64,
    pub w: f64,
}

impl StoppingExponents {
    /// `p`-exponent `1/q` of the moment growth `|S|_p ≲ p^{1/q} (log p)^{−w/q}`.
    pub fn moment_power(&self) -> f64 {
        1.0 / self.q
    }

    /// Log exponent `−w/q` of the moment growth.
    pub fn moment_log_power(&self) -> f64 {
        -self.w / self.q
    }

    /// `p^{1/q} (log p)^{−w/q}` scaled to equal `anchor_value` at `anchor_p`.
    pub fn moment_curve(&self, anchor_p: f64, anchor_value: f64, p: f64) -> f64 {
        let shape = |p: f64| self.moment_power() * p.ln() + self.moment_log_power() * p.ln().ln();
        anchor_value * (shape(p) - shape(anchor_p)).exp()
    }
}

/// `q = 2am/(2am+2a+m)`, `w = (2arm+mb+2am)/(2am+2a+m)`; `m = +∞` takes the limit
/// `q = 2a/(2a+1)`, `w = (2ar+b+2a)/(2a+1)`.
pub fn stopping_exponents(a: f64, b: f64, m: f64, r: f64) -> Result<StoppingExponents> {
    if !(a.is_finite() && a > 0.0) || !(m > 0.0) || !b.is_finite() || !r.is_finite() {
        return Err(Error::domain(format!(
            "stopping exponents need a > 0, m > 0 and finite b, r; got a={a}, b={b}, m={m}, r={r}"
        )));
    }
    let (q, w) = if m.is_infinite() {
        let den = 2.0 * a + 1.0;
        (2.0 * a / den, (2.0 * a * r + b + 2.0 * a) / den)
    } else {
        let den = 2.0 * a * m + 2.0 * a + m;
        (
            2.0 * a * m / den,
            (2.0 * a * r * m + m * b + 2.0 * a * m) / den,
        )
    };
    Ok(StoppingExponents { a, b, m, r, q, w })
}

/// Reference moment-growth curves (constants 1) at one `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentGrowthRow {
    pub p: f64,
    /// `p^{1/2 + 1/min(m,2)} / √log p`.
    pub random_sum: f64,
    /// `p^{1+1/m} / log p`.
    pub linear_log: f64,
    /// `p^{1+1/m} / √log p`.
    pub linear_sqrt_log: f64,
}

/// The three growth curves for `sup |S|_p` with summands in `G(m, 0)`.
pub fn moment_growth_comparison(m: f64, p_grid: &[f64]) -> Result<Vec<MomentGrowthRow>> {
    if !(m > 1.0) {
        return Err(Error::domain(format!("moment growth comparison needs m > 1, got {m}")));
    }
    if p_grid.iter().any(|p| !(*p > 1.0)) {
        return Err(Error::domain("moment orders must exceed 1"));
    }
    Ok(p_grid
        .iter()
        .map(|&p| {
            let lp = p.ln();
            MomentGrowthRow {
                p,
                random_sum: p.powf(0.5 + 1.0 / m.min(2.0)) / lp.sqrt(),
                linear_log: p.powf(1.0 + 1.0 / m) / lp,
                linear_sqrt_log: p.powf(1.0 + 1.0 / m) / lp.sqrt(),
            }
        })
        .collect())
}
