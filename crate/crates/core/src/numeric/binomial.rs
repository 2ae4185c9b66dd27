//! Exact (Clopper–Pearson) binomial confidence intervals.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub fn contains(&self, p: f64) -> bool {
        self.low <= p && p <= self.high
    }
}

/// Two-sided Clopper–Pearson interval for `hits` successes in `trials` at
/// confidence `level` (e.g. 0.99).
pub fn clopper_pearson(hits: u64, trials: u64, level: f64) -> Interval {
    assert!(trials > 0, "binomial interval needs at least one trial");
    assert!(hits <= trials, "more hits than trials");
    assert!(level > 0.0 && level < 1.0, "confidence level must lie in (0, 1)");
    let half_alpha = 0.5 * (1.0 - level);
    let k = hits as f64;
    let n = trials as f64;

    // P(X >= k | p) = I_p(k, n - k + 1), increasing in p.
    let low = if hits == 0 {
        0.0
    } else {
        solve_increasing(|p| beta_reg(k, n - k + 1.0, p), half_alpha)
    };
    // P(X <= k | p) = 1 - I_p(k + 1, n - k), decreasing in p.
    let high = if hits == trials {
        1.0
    } else {
        solve_increasing(|p| beta_reg(k + 1.0, n - k, p), 1.0 - half_alpha)
    };
    Interval { low, high }
}

fn solve_increasing<F: Fn(f64) -> f64>(g: F, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
