//! The G(m, r) family: tails `exp(-C₁ xᵐ logʳ(C₂ + x))` and the exponent map
//! `(m, r) -> (M, L)` describing how normalized sums of such summands decay.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{integrate_to_infinity, QuadOptions};

/// Parameters of a G(m, r) tail `x ↦ exp(-c1·xᵐ·logʳ(c2 + x))`.
///
/// `m = +∞` is the bounded-summand sentinel: the tail becomes the indicator
/// `1{x < ess_sup}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GmrSpec {
    m: f64,
    r: f64,
    c1: f64,
    c2: f64,
    ess_sup: f64,
    sigma: f64,
}

impl GmrSpec {
    /// Spec with the default constants `C₁ = 1`, `C₂ = e`.
    pub fn with_defaults(m: f64, r: f64) -> Result<Self> {
        Self::new(m, r, 1.0, std::f64::consts::E)
    }

    pub fn new(m: f64, r: f64, c1: f64, c2: f64) -> Result<Self> {
        if m.is_infinite() && m > 0.0 {
            return Self::bounded(1.0);
        }
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::domain(format!("G(m,r) requires m > 0, got m = {m}")));
        }
        if !r.is_finite() {
            return Err(Error::domain(format!("G(m,r) requires finite r, got r = {r}")));
        }
        if !(c1.is_finite() && c1 > 0.0) {
            return Err(Error::domain(format!("tail rate constant C1 must be > 0, got {c1}")));
        }
        if !(c2.is_finite() && c2 >= std::f64::consts::E) {
            return Err(Error::domain(format!("log shift C2 must be >= e, got {c2}")));
        }
        if r < 0.0 && !exponent_is_monotone(m, r, c2) {
            return Err(Error::domain(format!(
                "tail exp(-C1 x^{m} log^{r}(C2 + x)) is not monotone for C2 = {c2}; increase C2"
            )));
        }
        let mut spec = Self {
            m,
            r,
            c1,
            c2,
            ess_sup: f64::INFINITY,
            sigma: f64::NAN,
        };
        // E ξ² = ∫ 2y T(y) dy for the absolute tail T.
        let scale = (1.0 / c1).powf(1.0 / m).max(1e-3);
        let second = integrate_to_infinity(
            |y| 2.0 * y * spec.tail(y),
            0.0,
            scale,
            QuadOptions::default(),
        )?;
        spec.sigma = second.value.sqrt();
        Ok(spec)
    }

    /// Bounded summand `±ess_sup` (the `m = +∞` sentinel).
    pub fn bounded(ess_sup: f64) -> Result<Self> {
        if !(ess_sup.is_finite() && ess_sup > 0.0) {
            return Err(Error::domain(format!("essential supremum must be > 0, got {ess_sup}")));
        }
        Ok(Self {
            m: f64::INFINITY,
            r: 0.0,
            c1: 1.0,
            c2: std::f64::consts::E,
            ess_sup,
            sigma: ess_sup,
        })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    /// Essential supremum of `|ξ|`; `+∞` unless the spec is bounded.
    pub fn ess_sup(&self) -> f64 {
        self.ess_sup
    }

    pub fn is_bounded(&self) -> bool {
        self.m.is_infinite()
    }

    /// Standard deviation of the symmetric law with this absolute tail.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `C₁ xᵐ logʳ(C₂ + x)`, i.e. `-log` of the tail (finite `m` only).
    pub(crate) fn rate(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        self.c1 * x.powf(self.m) * (self.c2 + x).ln().powf(self.r)
    }

    /// `log T(x)`; `-∞` beyond the support of a bounded spec.
    pub fn log_tail(&self, x: f64) -> f64 {
        if self.is_bounded() {
            if x < self.ess_sup {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        } else {
            -self.rate(x)
        }
    }

    /// The tail value `min(1, exp(-C₁ xᵐ logʳ(C₂ + x)))`.
    pub fn tail(&self, x: f64) -> f64 {
        self.log_tail(x.max(0.0)).exp().min(1.0)
    }

    /// Exponents `(M, L)` of normalized sums of summands in this space.
    pub fn ml_exponents(&self) -> Result<MlExponents> {
        ml_exponents(self.m, self.r)
    }
}

/// Free-function form of [`GmrSpec::tail`].
pub fn gmr_tail(spec: &GmrSpec, x: f64) -> f64 {
    spec.tail(x)
}

// d/dx [m ln x + r ln ln(C2 + x)] >= 0  <=>  m (C2 + x) ln(C2 + x) >= |r| x.
fn exponent_is_monotone(m: f64, r: f64, c2: f64) -> bool {
    let steps = 4000;
    (0..=steps).all(|i| {
        let x = 10f64.powf(-8.0 + 20.0 * i as f64 / steps as f64);
        m * (c2 + x) * (c2 + x).ln() >= r.abs() * x
    })
}

/// Tail exponents `(M, L)` of normalized sums: `exp(-C x^M log^L x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlExponents {
    /// The power `M ∈ (0, 2]`.
    pub power: f64,
    /// The logarithmic power `L`.
    pub log_power: f64,
}

impl MlExponents {
    pub const GAUSSIAN: MlExponents = MlExponents {
        power: 2.0,
        log_power: 0.0,
    };

    /// x-exponent `2M/(M+2)` shared by the geometric and Poisson random-sum bounds.
    pub fn random_sum_power(&self) -> f64 {
        2.0 * self.power / (self.power + 2.0)
    }

    /// Log exponent `2L/(M+2)` for geometric index laws.
    pub fn geometric_log_power(&self) -> f64 {
        2.0 * self.log_power / (self.power + 2.0)
    }

    /// Log exponent `(2L+M)/(M+2)` for shifted-Poisson index laws.
    pub fn poisson_log_power(&self) -> f64 {
        (2.0 * self.log_power + self.power) / (self.power + 2.0)
    }
}

/// Piecewise exponent map.
///
/// | input | `(M, L)` |
/// |---|---|
/// | `m ∈ (0,1)`, or `m = 1, r < 0` | `(2m/(m+2), 2r/(m+2))` |
/// | `m = 1, r ≥ 0`, or `m ∈ (1,2), r < 0` | `(m, r)` |
/// | `m = 2, r ≥ 0`, or `m > 2`, or `m = +∞` | `(2, 0)` |
///
/// Any other `(m, r)` is a domain error; no continuation is guessed.
pub fn ml_exponents(m: f64, r: f64) -> Result<MlExponents> {
    if m.is_nan() || r.is_nan() || m <= 0.0 {
        return Err(Error::domain(format!("exponent map needs m > 0, got (m, r) = ({m}, {r})")));
    }
    if m == f64::INFINITY {
        return Ok(MlExponents::GAUSSIAN);
    }
    if !r.is_finite() {
        return Err(Error::domain(format!("exponent map needs finite r, got {r}")));
    }
    let exps = if m < 1.0 || (m == 1.0 && r < 0.0) {
        MlExponents {
            power: 2.0 * m / (m + 2.0),
            log_power: 2.0 * r / (m + 2.0),
        }
    } else if (m == 1.0 && r >= 0.0) || (m > 1.0 && m < 2.0 && r < 0.0) {
        MlExponents {
            power: m,
            log_power: r,
        }
    } else if (m == 2.0 && r >= 0.0) || m > 2.0 {
        MlExponents::GAUSSIAN
    } else {
        return Err(Error::domain(format!(
            "(m, r) = ({m}, {r}) is not covered by the exponent table"
        )));
    };
    Ok(exps)
}
