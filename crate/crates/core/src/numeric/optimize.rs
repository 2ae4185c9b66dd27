//! One-dimensional golden-section search with geometric bracketing.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Stopping rule for [`golden_section_min`].
#[derive(Debug, Clone, Copy)]
pub struct GoldenOptions {
    /// Stop when the objective spread over the bracket is below this fraction of the best value.
    pub rel_tol: f64,
    /// Absolute floor added to the spread tolerance.
    pub abs_tol: f64,
    /// Stop when the bracket is narrower than this.
    pub min_width: f64,
    pub max_iter: usize,
}

impl Default for GoldenOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-300,
            min_width: 1e-12,
            max_iter: 300,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub arg: f64,
    pub value: f64,
    pub evals: usize,
}

/// Minimizes `f` over `[lo, hi]`, assuming it is unimodal there.
///
/// `NaN` values are treated as `+∞`. The returned point is the best
/// point evaluated, including the bracket ends.
pub fn golden_section_min<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    opts: GoldenOptions,
) -> Minimum {
    let mut eval = |t: f64| {
        let v = f(t);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut fa = eval(a);
    let mut fb = eval(b);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    let mut evals = 4;

    for _ in 0..opts.max_iter {
        let best = fa.min(fb).min(f1).min(f2);
        let worst_end = fa.max(fb);
        let spread = worst_end - f1.min(f2);
        if (spread.is_finite() && spread <= opts.rel_tol * best.abs() + opts.abs_tol)
            || (b - a) <= opts.min_width * (1.0 + a.abs().max(b.abs()))
        {
            break;
        }
        if f1 <= f2 {
            b = x2;
            fb = f2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            fa = f1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = eval(x2);
        }
        evals += 1;
    }

    [(a, fa), (x1, f1), (x2, f2), (b, fb)]
        .into_iter()
        .fold(
            Minimum {
                arg: a,
                value: f64::INFINITY,
                evals,
            },
            |m, (t, v)| {
                if v < m.value {
                    Minimum { arg: t, value: v, evals }
                } else {
                    m
                }
            },
        )
}

/// Expands `[start - step, start + step]` geometrically by `factor` until the
/// middle point is no worse than both ends, returning `(a, b, c)` with
/// `f(b) <= min(f(a), f(c))`.
pub fn bracket_min<F: FnMut(f64) -> f64>(
    mut f: F,
    start: f64,
    step: f64,
    factor: f64,
    max_expansions: usize,
) -> Result<(f64, f64, f64)> {
    let mut eval = |t: f64| {
        let v = f(t);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut b = start;
    let mut fb = eval(b);
    let mut step = step;
    for _ in 0..max_expansions {
        let a = b - step;
        let c = b + step;
        let fa = eval(a);
        let fc = eval(c);
        if fb <= fa && fb <= fc {
            return Ok((a, b, c));
        }
        // Move toward the lower side and widen.
        if fa < fc {
            b = a;
            fb = fa;
        } else {
            b = c;
            fb = fc;
        }
        step *= factor;
    }
    Err(Error::numerical(
        "bracket_min",
        format!("objective not eventually increasing after {max_expansions} expansions from {start}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola_minimum() {
        let m = golden_section_min(|x| (x - 1.3).powi(2) + 2.0, -10.0, 10.0, GoldenOptions::default());
        assert!((m.value - 2.0).abs() < 1e-8 * 2.0 + 1e-15);
        assert!((m.arg - 1.3).abs() < 1e-3);
    }

    #[test]
    fn minimum_at_boundary() {
        let m = golden_section_min(|x| x, 0.0, 5.0, GoldenOptions::default());
        assert_eq!(m.value, 0.0);
    }

    #[test]
    fn bracket_finds_distant_minimum() {
        let (a, b, c) = bracket_min(|t| (t - 40.0).abs(), 0.0, 1.0, 4.0, 60).unwrap();
        assert!(a < 40.0 + 1e-9 && c > 40.0 - 1e-9);
        assert!(b >= a && b <= c);
    }

    #[test]
    fn bracket_fails_on_monotone_objective() {
        assert!(bracket_min(|t| -t, 0.0, 1.0, 4.0, 20).is_err());
    }
}
