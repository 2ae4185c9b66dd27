//! Adaptive 21-point Gauss–Kronrod quadrature.
//!
//! Finite intervals are bisected adaptively on the panel with the largest
//! error estimate. Semi-infinite integrals are split into geometrically
//! growing panels which are summed until they stop contributing.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// Kronrod abscissae on [-1, 1], largest first; odd indices are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_36,
    0.295_524_224_714_752_87,
];

/// Tolerances shared by the integrators.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-10,
            max_panels: 4000,
        }
    }
}

/// Result of a quadrature together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(10).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += wk * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Panel { a, b, value, error }
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<Integral> {
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            evals: 0,
        });
    }
    let first = gk21(&f, a, b);
    let mut evals = 21;
    let mut value = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    while error > opts.abs_tol.max(opts.rel_tol * value.abs()) {
        if !value.is_finite() {
            return Err(Error::numerical(
                "integrate",
                format!("non-finite integrand on [{a}, {b}]"),
            ));
        }
        if heap.len() >= opts.max_panels {
            return Err(Error::numerical(
                "integrate",
                format!(
                    "no convergence on [{a}, {b}] after {} panels: value {value:e}, error {error:e}",
                    heap.len()
                ),
            ));
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel cannot be split further in floating point; accept it.
            heap.push(Panel { error: 0.0, ..worst });
            error = heap.iter().map(|p| p.error).sum();
            if heap.iter().all(|p| p.error == 0.0) {
                break;
            }
            continue;
        }
        let left = gk21(&f, worst.a, mid);
        let right = gk21(&f, mid, worst.b);
        evals += 42;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to avoid drift from the incremental updates.
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error: f64 = heap.iter().map(|p| p.error).sum();
    if !value.is_finite() {
        return Err(Error::numerical(
            "integrate",
            format!("non-finite result on [{a}, {b}]"),
        ));
    }
    Ok(Integral {
        value,
        error,
        evals,
    })
}

/// Integrates `f` over `[a, ∞)` using panels `[a + s(2^k - 1), a + s(2^{k+1} - 1)]`.
///
/// Stops once two consecutive panels each contribute less than the relative
/// tolerance of the running total. A divergent integral either produces a
/// non-finite panel or exhausts the panel budget; both are reported as
/// numerical errors.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    scale: f64,
    opts: QuadOptions,
) -> Result<Integral> {
    const MAX_DOUBLINGS: u32 = 64;
    let mut total = 0.0;
    let mut error = 0.0;
    let mut evals = 0;
    let mut quiet = 0;
    let mut lo = a;
    let mut width = scale;
    for _ in 0..MAX_DOUBLINGS {
        let hi = lo + width;
        let piece = integrate(&f, lo, hi, opts)?;
        total += piece.value;
        error += piece.error;
        evals += piece.evals;
        if !total.is_finite() {
            return Err(Error::numerical(
                "integrate_to_infinity",
                format!("integral diverges beyond x = {lo}"),
            ));
        }
        if piece.value.abs() <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            quiet += 1;
            if quiet >= 2 {
                return Ok(Integral {
                    value: total,
                    error,
                    evals,
                });
            }
        } else {
            quiet = 0;
        }
        lo = hi;
        width *= 2.0;
    }
    Err(Error::numerical(
        "integrate_to_infinity",
        format!("panels did not decay after {MAX_DOUBLINGS} doublings from x = {a}"),
    ))
}
