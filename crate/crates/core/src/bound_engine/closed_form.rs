//! Closed-form random-sum bounds and the dominant series index.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::tail_core::{IndexLaw, MlExponents};

/// `min(1, Ccap·exp(−C·x^{2M/(M+2)}·(log x)^{2L/(M+2)}))` for geometric `η`.
pub fn closed_form_geometric(mlexp: MlExponents, c: f64, c_cap: f64, x: f64) -> f64 {
    closed_form_with(mlexp.random_sum_power(), mlexp.geometric_log_power(), c, c_cap, x)
}

/// `min(1, Ccap·exp(−C·x^{2M/(M+2)}·(log x)^{(2L+M)/(M+2)}))` for Poisson `η`.
pub fn closed_form_poisson(mlexp: MlExponents, c: f64, c_cap: f64, x: f64) -> f64 {
    closed_form_with(mlexp.random_sum_power(), mlexp.poisson_log_power(), c, c_cap, x)
}

pub(crate) fn closed_form_with(power: f64, log_power: f64, c: f64, c_cap: f64, x: f64) -> f64 {
    (c_cap * (-c * x.powf(power) * x.ln().powf(log_power)).exp()).min(1.0)
}

/// [`dominant_index_with`] with `C = 1`, `C₂ = e`.
pub fn dominant_index(law: &IndexLaw, mlexp: MlExponents, x: f64) -> Result<u64> {
    dominant_index_with(law, mlexp, x, 1.0, std::f64::consts::E)
}

/// `argmax_n [log q_n − C u^M log^L(C₂ + u)]` with `u = x√(A/n)`; ties go to
/// the smaller `n`.
///
/// The scan stops once the pmf is past its mode and `log q_n` alone falls
/// below the best term, since the second part is never positive.
pub fn dominant_index_with(
    law: &IndexLaw,
    mlexp: MlExponents,
    x: f64,
    c: f64,
    c2: f64,
) -> Result<u64> {
    let ln_pmf: Box<dyn Fn(u64) -> f64> = match *law {
        IndexLaw::Geometric { mean } => {
            let lq = (1.0 - 1.0 / mean).ln();
            Box::new(move |n| (n - 1) as f64 * lq - mean.ln())
        }
        IndexLaw::ShiftedPoisson { mean } => {
            let rate = mean - 1.0;
            Box::new(move |n| {
                let k = (n - 1) as f64;
                -rate + k * rate.ln() - ln_gamma(k + 1.0)
            })
        }
        _ => {
            return Err(Error::domain(
                "dominant index is defined for geometric and shifted Poisson laws only",
            ))
        }
    };
    let a = law.mean();
    let term = |n: u64| {
        let u = x * (a / n as f64).sqrt();
        ln_pmf(n) - c * u.powf(mlexp.power) * (c2 + u).ln().powf(mlexp.log_power)
    };
    let mut best = (term(1), 1u64);
    let mut n = 1u64;
    loop {
        n += 1;
        let lp = ln_pmf(n);
        if lp < best.0 && lp <= ln_pmf(n - 1) {
            return Ok(best.1);
        }
        let v = term(n);
        if v > best.0 {
            best = (v, n);
        }
    }
}
