//! Lower-bound constructions: the exact two-point index example and the
//! simulated geometric / Poisson overlays.

use serde::Serialize;

use crate::bound_engine::closed_form_poisson;
use crate::error::{Error, Result};
use crate::mc_verifier::{simulate_tail, slope, CompoundSpec, EmpiricalTail, FeasibilityGate, TailOptions};
use crate::numeric::special::normal_tail;
use crate::tail_core::{GmrSpec, IndexLaw, MlExponents, SummandLaw};

/// `η = 2` with probability `1 − α`, `η = ⌊x²⌋ = 1/α` with probability `α`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoPointConstruction {
    pub x: f64,
    pub alpha: f64,
    /// `A = 3 − 2α`.
    pub a: f64,
    pub law: IndexLaw,
}

impl TwoPointConstruction {
    pub fn new(x: f64) -> Result<Self> {
        if !(x.is_finite() && x >= 3.0) {
            return Err(Error::domain(format!("two-point construction needs x >= 3, got {x}")));
        }
        let top = (x * x).floor();
        let alpha = 1.0 / top;
        let law = IndexLaw::two_point(alpha)?;
        Ok(Self {
            x,
            alpha,
            a: law.mean(),
            law,
        })
    }

    /// Standard normal summands with this index law.
    pub fn compound_spec(&self) -> CompoundSpec {
        CompoundSpec::new(SummandLaw::Normal { sigma: 1.0 }, self.law.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoPointTail {
    pub x: f64,
    /// `P(S > x) = (1−α)Ψ(x√(A/2)) + αΨ(x√(Aα))`.
    pub exact: f64,
    /// `αΨ(x√(Aα))`.
    pub single_term: f64,
    /// `x⁻² Ψ(3√(3/8))`.
    pub floor: f64,
}

/// `Ψ(3√(3/8))`.
pub fn two_point_floor_constant() -> f64 {
    normal_tail(3.0 * (3.0f64 / 8.0).sqrt())
}

/// Exact tail of `S` for the two-point construction with standard normal summands.
///
/// Given `η = k`, `S = N(0, k)/√A` is exactly normal.
pub fn exact_two_point_tail(x: f64) -> Result<TwoPointTail> {
    let c = TwoPointConstruction::new(x)?;
    let single_term = c.alpha * normal_tail(x * (c.a * c.alpha).sqrt());
    let exact = (1.0 - c.alpha) * normal_tail(x * (c.a / 2.0).sqrt()) + single_term;
    Ok(TwoPointTail {
        x,
        exact,
        single_term,
        floor: two_point_floor_constant() / (x * x),
    })
}

/// Constants of the overlay curves (all default to 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlayConstants {
    /// Lower curve `C_lo exp(−K_lo x^{…} (log x)^{…})`.
    pub lower_scale: f64,
    pub lower_rate: f64,
    /// Upper curve `C_up exp(−K_up x^{…} (log x)^{…})`.
    pub upper_scale: f64,
    pub upper_rate: f64,
}

impl Default for OverlayConstants {
    fn default() -> Self {
        Self {
            lower_scale: 1.0,
            lower_rate: 1.0,
            upper_scale: 1.0,
            upper_rate: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerBoundOptions {
    pub constants: OverlayConstants,
    pub level: f64,
    pub gate: FeasibilityGate,
    /// Smallest `x` used in the slope regression.
    pub slope_from: f64,
}

impl Default for LowerBoundOptions {
    fn default() -> Self {
        Self {
            constants: OverlayConstants::default(),
            level: 0.99,
            gate: FeasibilityGate::Strict { min_hits: 100 },
            slope_from: 2.0,
        }
    }
}

/// Simulated tail next to the matching lower and upper closed forms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundMc {
    pub tail: EmpiricalTail,
    pub exponents: MlExponents,
    /// `C_lo exp(−K_lo x^{2M/(M+2)} (log x)^{2L/(M+2)})` on `tail.x`.
    pub lower: Vec<f64>,
    /// The same form with the upper constants.
    pub upper: Vec<f64>,
    /// Slope of `log(−log T̂)` against `log x` over `x ≥ slope_from`, if
    /// at least three such points have `0 < T̂ < 1`.
    pub slope: Option<f64>,
}

/// Simulates compound geometric sums with G(m, r) summands, `m > 1`.
pub fn geometric_lower_bound_mc(
    spec: &GmrSpec,
    a: f64,
    x_grid: &[f64],
    n: u64,
    seed: u64,
    options: LowerBoundOptions,
) -> Result<LowerBoundMc> {
    if !(spec.m() > 1.0) {
        return Err(Error::domain(format!("lower bound needs m > 1, got m = {}", spec.m())));
    }
    if x_grid.iter().any(|x| !(*x >= 2.0)) {
        return Err(Error::domain("lower bound grid must satisfy x >= 2"));
    }
    let exponents = spec.ml_exponents()?;
    let compound = CompoundSpec::new(SummandLaw::Gmr(*spec), IndexLaw::geometric(a)?);
    let tail = simulate_tail(
        &compound,
        x_grid,
        n,
        seed,
        TailOptions {
            level: options.level,
            gate: options.gate,
        },
    )?;
    let power = exponents.random_sum_power();
    let log_power = exponents.geometric_log_power();
    let k = options.constants;
    let curve = |scale: f64, rate: f64| -> Vec<f64> {
        tail.x
            .iter()
            .map(|&x| crate::bound_engine::closed_form_with(power, log_power, rate, scale, x))
            .collect()
    };
    let lower = curve(k.lower_scale, k.lower_rate);
    let upper = curve(k.upper_scale, k.upper_rate);
    let points: Vec<(f64, f64)> = tail
        .x
        .iter()
        .zip(&tail.estimate)
        .filter(|(&x, &t)| x >= options.slope_from && t > 0.0 && t < 1.0)
        .map(|(&x, &t)| (x.ln(), (-t.ln()).ln()))
        .collect();
    let slope = (points.len() >= 3).then(|| slope(&points));
    Ok(LowerBoundMc {
        tail,
        exponents,
        lower,
        upper,
        slope,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlayRow {
    pub x: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Poisson-index lower and upper closed forms on `x_grid` (`x ≥ 2`); both
/// carry `x^{2M/(M+2)} (log x)^{(2L+M)/(M+2)}`.
pub fn poisson_lower_overlay(
    spec: &GmrSpec,
    x_grid: &[f64],
    constants: OverlayConstants,
) -> Result<Vec<OverlayRow>> {
    if x_grid.iter().any(|x| !(*x >= 2.0)) {
        return Err(Error::domain("overlay grid must satisfy x >= 2"));
    }
    let ml = spec.ml_exponents()?;
    Ok(x_grid
        .iter()
        .map(|&x| OverlayRow {
            x,
            lower: closed_form_poisson(ml, constants.lower_rate, constants.lower_scale, x),
            upper: closed_form_poisson(ml, constants.upper_rate, constants.upper_scale, x),
        })
        .collect())
}
