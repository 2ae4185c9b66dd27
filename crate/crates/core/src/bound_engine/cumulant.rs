//! Cumulant `φ`, its envelope `χ` and the Legendre transform `χ*`.

use std::sync::OnceLock;

use crate::numeric::{golden_section_min, integrate_to_infinity, GoldenOptions, QuadOptions};
use crate::tail_core::{SummandLaw, TailFunction, TailRepr};

/// Where `φ(λ) = max_± log E exp(±λξ)` comes from.
#[derive(Debug, Clone)]
pub enum CumulantSource {
    /// `φ(λ) = σ²λ²/2`.
    Normal { sigma: f64 },
    /// `ξ = ±s` with equal probabilities: `φ(λ) = log cosh(sλ)`.
    Rademacher { scale: f64 },
    /// `E cosh(λξ)` integrated against a symmetric law's absolute tail.
    NumericTail(TailFunction),
    /// Empirical exponential moments of centered samples.
    Samples(Vec<f64>),
}

/// `φ` with a validity radius, plus the `χ`/`χ*` transforms built on it.
///
/// Numeric sources tabulate `φ` once, lazily, on a logarithmic grid and
/// interpolate along chords; the table is shared by all readers.
#[derive(Debug)]
pub struct CumulantModel {
    source: CumulantSource,
    variance: f64,
    table: OnceLock<PhiTable>,
}

impl Clone for CumulantModel {
    fn clone(&self) -> Self {
        Self {
            source: self.source.clone(),
            variance: self.variance,
            table: self.table.clone(),
        }
    }
}

/// Sup-scan and Kramer settings.
const DENSE_N: f64 = 256.0;
const N_STRIDE: f64 = 1.05;
const N_CAP: f64 = 1e9;
const FLAT_STRETCH: usize = 50;
const TABLE_MIN: f64 = 1e-4;
const TABLE_MAX: f64 = 256.0;
const TABLE_RATIO: f64 = 1.005;
const KRAMER_REL_TOL: f64 = 1e-8;

/// `χ(λ)` with scan diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiValue {
    pub value: f64,
    /// Index attaining the scanned maximum.
    pub n: f64,
    /// The scan reached the cap of `10⁹` terms without settling.
    pub hit_cap: bool,
}

/// `χ*(x)` and its maximizing `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiStar {
    pub value: f64,
    pub lambda: f64,
}

impl CumulantModel {
    pub fn normal(sigma: f64) -> Self {
        Self::from_source(CumulantSource::Normal { sigma }, sigma * sigma)
    }

    pub fn rademacher(scale: f64) -> Self {
        Self::from_source(CumulantSource::Rademacher { scale }, scale * scale)
    }

    /// Symmetric law given by its absolute tail.
    pub fn from_tail(tail: TailFunction) -> Self {
        let variance = tail.second_moment();
        Self::from_source(CumulantSource::NumericTail(tail), variance)
    }

    /// Samples are centered before use.
    pub fn from_samples(samples: &[f64]) -> Self {
        assert!(!samples.is_empty(), "cumulant model needs samples");
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let centered: Vec<f64> = samples.iter().map(|x| x - mean).collect();
        let variance = centered.iter().map(|x| x * x).sum::<f64>() / n;
        Self::from_source(CumulantSource::Samples(centered), variance)
    }

    /// Model matching a summand law: closed forms where available.
    pub fn for_summand(law: &SummandLaw) -> Self {
        match law {
            SummandLaw::Normal { sigma } => Self::normal(*sigma),
            SummandLaw::TwoPointPm1 => Self::rademacher(1.0),
            SummandLaw::Gmr(spec) if spec.is_bounded() => Self::rademacher(spec.ess_sup()),
            SummandLaw::Gmr(_) => Self::from_tail(law.tail_function()),
        }
    }

    fn from_source(source: CumulantSource, variance: f64) -> Self {
        Self {
            source,
            variance,
            table: OnceLock::new(),
        }
    }

    pub fn source(&self) -> &CumulantSource {
        &self.source
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// `φ(λ)`; tabulated for numeric sources. `+∞` outside the Kramer radius.
    pub fn phi(&self, lambda: f64) -> f64 {
        let s = lambda.abs();
        if s == 0.0 {
            return 0.0;
        }
        match &self.source {
            CumulantSource::Normal { sigma } => 0.5 * sigma * sigma * s * s,
            CumulantSource::Rademacher { scale } => ln_cosh(scale * s),
            _ => self.table.get_or_init(|| PhiTable::build(self)).eval(s),
        }
    }

    /// `φ(λ)` evaluated directly, without the table.
    pub fn phi_exact(&self, lambda: f64) -> f64 {
        let s = lambda.abs();
        if s == 0.0 {
            return 0.0;
        }
        match &self.source {
            CumulantSource::NumericTail(tail) => numeric_phi(tail, s),
            CumulantSource::Samples(xs) => sample_phi(xs, s),
            _ => self.phi(s),
        }
    }

    /// `χ(λ) = sup_n n φ(λ/√n)`.
    pub fn chi(&self, lambda: f64) -> f64 {
        self.chi_detailed(lambda).value
    }

    /// Scans `n` densely up to 256 and then with a 5% stride, stopping
    /// after 50 terms in a row fail to improve the maximum. The limit
    /// `σ²λ²/2` of the sequence is always included.
    pub fn chi_detailed(&self, lambda: f64) -> ChiValue {
        let lam = lambda.abs();
        if lam == 0.0 {
            return ChiValue {
                value: 0.0,
                n: 1.0,
                hit_cap: false,
            };
        }
        let term = |n: f64| n * self.phi(lam / n.sqrt());
        let mut best = term(1.0);
        let mut best_n = 1.0;
        if !best.is_finite() {
            return ChiValue {
                value: f64::INFINITY,
                n: 1.0,
                hit_cap: false,
            };
        }
        let mut n = 1.0;
        let mut flat = 0;
        let mut hit_cap = true;
        loop {
            n = if n < DENSE_N { n + 1.0 } else { (n * N_STRIDE).ceil() };
            if n > N_CAP {
                break;
            }
            let v = term(n);
            if v > best {
                best = v;
                best_n = n;
                flat = 0;
            } else {
                flat += 1;
                if flat >= FLAT_STRETCH {
                    hit_cap = false;
                    break;
                }
            }
        }
        let limit = 0.5 * self.variance * lam * lam;
        if limit > best {
            best = limit;
            best_n = f64::INFINITY;
        }
        ChiValue {
            value: best,
            n: best_n,
            hit_cap,
        }
    }

    /// `χ*(x) = sup_{λ≥0} (λx − χ(λ))`.
    pub fn chi_star(&self, x: f64) -> ChiStar {
        let zero = ChiStar {
            value: 0.0,
            lambda: 0.0,
        };
        if x <= 0.0 {
            return zero;
        }
        let h = |lam: f64| lam * x - self.chi(lam);
        // h is concave with h(0) = 0 and h'(0+) = x > 0.
        let mut b = x / self.variance.max(f64::MIN_POSITIVE);
        let mut hb = h(b);
        let mut shrinks = 0;
        while !(hb > 0.0) {
            b *= 0.25;
            hb = h(b);
            shrinks += 1;
            if shrinks > 60 {
                return zero;
            }
        }
        let mut a = 0.0;
        let mut c = 4.0 * b;
        let mut hc = h(c);
        let mut grows = 0;
        while hc > hb && grows < 200 {
            a = b;
            b = c;
            hb = hc;
            c *= 4.0;
            hc = h(c);
            grows += 1;
        }
        let best = golden_section_min(|lam| -h(lam), a, c, GoldenOptions::default());
        if -best.value > hb {
            ChiStar {
                value: -best.value,
                lambda: best.arg,
            }
        } else {
            ChiStar {
                value: hb,
                lambda: b,
            }
        }
    }
}

/// `log cosh t` without overflow or cancellation near 0.
fn ln_cosh(t: f64) -> f64 {
    let t = t.abs();
    if t < 20.0 {
        (2.0 * (0.5 * t).sinh().powi(2)).ln_1p()
    } else {
        t - std::f64::consts::LN_2 + (-2.0 * t).exp().ln_1p()
    }
}

/// Radius of `E exp(λ|ξ|) < ∞` known from the tail's form, if any.
///
/// Quadrature cannot see divergence that sets in beyond its reach (for
/// `m < 1` at small `λ` the integrand only turns up near `y ~ λ^{-1/(1-m)}`),
/// so G(m, r) tails use the exact radius.
fn analytic_radius(tail: &TailFunction) -> f64 {
    match tail.repr() {
        TailRepr::Gmr(spec) if !spec.is_bounded() => {
            if spec.m() > 1.0 || (spec.m() == 1.0 && spec.r() > 0.0) {
                f64::INFINITY
            } else if spec.m() == 1.0 && spec.r() == 0.0 {
                spec.c1()
            } else {
                0.0
            }
        }
        _ => f64::INFINITY,
    }
}

/// `log E cosh(sξ) = log(1 + ∫_0^∞ s sinh(sy) T(y) dy)` for symmetric `ξ`.
fn numeric_phi(tail: &TailFunction, s: f64) -> f64 {
    if s >= analytic_radius(tail) {
        return f64::INFINITY;
    }
    if let Some(atoms) = tail.atoms() {
        // Step tails: sum cosh over the jump masses.
        let mut prev = 1.0;
        let mut total = 0.0;
        for x in atoms {
            let t = tail.eval(x);
            total += (prev - t) * (s * x).cosh();
            prev = t;
        }
        return total.ln();
    }
    let integrand = |y: f64| {
        let sy = s * y;
        if sy < 300.0 {
            s * sy.sinh() * tail.eval(y)
        } else {
            0.5 * s * (sy + tail.ln_eval(y)).exp()
        }
    };
    let opts = QuadOptions {
        abs_tol: 1e-300,
        rel_tol: KRAMER_REL_TOL,
        ..QuadOptions::default()
    };
    let panel = tail.second_moment().sqrt().max(1e-6);
    match integrate_to_infinity(integrand, 0.0, panel, opts) {
        Ok(i) if i.value.is_finite() => i.value.max(0.0).ln_1p(),
        _ => f64::INFINITY,
    }
}

fn sample_phi(xs: &[f64], s: f64) -> f64 {
    let side = |sign: f64| {
        let top = xs
            .iter()
            .map(|x| sign * s * x)
            .fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = xs.iter().map(|x| (sign * s * x - top).exp()).sum();
        top + (sum / xs.len() as f64).ln()
    };
    side(1.0).max(side(-1.0)).max(0.0)
}

/// `φ` on a log grid `s_j = s_min·ratio^j`, interpolated along chords.
/// Below `s_min` the curvature `φ(s)/s²` at `s_min` is used.
#[derive(Debug, Clone)]
struct PhiTable {
    ln_s0: f64,
    ln_ratio: f64,
    values: Vec<f64>,
    /// First grid index where `φ` is infinite, if any.
    radius_index: Option<usize>,
}

impl PhiTable {
    fn build(model: &CumulantModel) -> Self {
        let mut values = Vec::new();
        let mut radius_index = None;
        let mut s = TABLE_MIN;
        while s <= TABLE_MAX * TABLE_RATIO {
            let v = model.phi_exact(s);
            if !v.is_finite() {
                radius_index = Some(values.len());
                break;
            }
            values.push(v);
            s *= TABLE_RATIO;
        }
        Self {
            ln_s0: TABLE_MIN.ln(),
            ln_ratio: TABLE_RATIO.ln(),
            values,
            radius_index,
        }
    }

    fn eval(&self, s: f64) -> f64 {
        if self.values.is_empty() {
            return f64::INFINITY;
        }
        let pos = (s.ln() - self.ln_s0) / self.ln_ratio;
        if pos <= 0.0 {
            return self.values[0] * (s / TABLE_MIN).powi(2);
        }
        let j = pos.floor() as usize;
        if j + 1 >= self.values.len() {
            if self.radius_index.is_some() {
                return f64::INFINITY;
            }
            // Beyond the table: φ is convex, so extend along the last chord.
            let k = self.values.len() - 1;
            let (s0, s1) = (self.grid(k - 1), self.grid(k));
            let slope = (self.values[k] - self.values[k - 1]) / (s1 - s0);
            return self.values[k] + slope * (s - s1);
        }
        let (s0, s1) = (self.grid(j), self.grid(j + 1));
        let w = (s - s0) / (s1 - s0);
        self.values[j] + w * (self.values[j + 1] - self.values[j])
    }

    fn grid(&self, j: usize) -> f64 {
        (self.ln_s0 + j as f64 * self.ln_ratio).exp()
    }
}
