use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::compound::{for_each_batch, spec_hash, CompoundSpec};
use crate::tail_core::SummandLaw;
use crate::error::{Error, Result};
use crate::numeric::clopper_pearson;

/// Smallest run accepted by the simulators.
pub const MIN_PATHS: u64 = 1_000;

/// Default minimum hit count for a grid point to count as resolved.
pub const DEFAULT_MIN_HITS: u64 = 100;

/// What to do with grid points that saw too few hits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FeasibilityGate {
    /// Keep every point.
    Off,
    /// Fail, reporting the feasible range.
    Strict { min_hits: u64 },
    /// Drop unresolved points.
    Trim { min_hits: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailOptions {
    /// Confidence level of the reported intervals.
    pub level: f64,
    pub gate: FeasibilityGate,
}

impl Default for TailOptions {
    fn default() -> Self {
        Self {
            level: 0.99,
            gate: FeasibilityGate::Off,
        }
    }
}

/// Monte Carlo estimates of `T(S, x) = max(P(S ≥ x), P(S ≤ −x))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalTail {
    pub x: Vec<f64>,
    pub estimate: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    /// `max(upper_hits, lower_hits)`.
    pub hits: Vec<u64>,
    pub upper_hits: Vec<u64>,
    pub lower_hits: Vec<u64>,
    pub n: u64,
    pub seed: u64,
    pub level: f64,
    pub spec_hash: String,
}

impl EmpiricalTail {
    /// Builds estimates and intervals from per-side hit counts.
    ///
    /// Each side gets a Clopper–Pearson interval at level `1 − (1−L)/2`, so
    /// the interval for the larger side holds at level `L`.
    pub fn from_counts(
        x: Vec<f64>,
        upper_hits: Vec<u64>,
        lower_hits: Vec<u64>,
        n: u64,
        seed: u64,
        level: f64,
        spec_hash: String,
    ) -> Self {
        let side_level = 1.0 - 0.5 * (1.0 - level);
        let mut out = EmpiricalTail {
            x: Vec::new(),
            estimate: Vec::new(),
            ci_low: Vec::new(),
            ci_high: Vec::new(),
            hits: Vec::new(),
            upper_hits: Vec::new(),
            lower_hits: Vec::new(),
            n,
            seed,
            level,
            spec_hash,
        };
        for i in 0..x.len() {
            let (up, low) = (upper_hits[i], lower_hits[i]);
            let a = clopper_pearson(up, n, side_level);
            let b = clopper_pearson(low, n, side_level);
            let hits = up.max(low);
            out.x.push(x[i]);
            out.estimate.push(hits as f64 / n as f64);
            out.ci_low.push(a.low.max(b.low));
            out.ci_high.push(a.high.max(b.high));
            out.hits.push(hits);
            out.upper_hits.push(up);
            out.lower_hits.push(low);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// CSV with header `x,estimate,ci_low,ci_high,hits,N`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Input(format!("writing tail CSV: {e}"));
        w.write_record(["x", "estimate", "ci_low", "ci_high", "hits", "N"])
            .map_err(io)?;
        for i in 0..self.len() {
            w.write_record([
                format!("{}", self.x[i]),
                format!("{:e}", self.estimate[i]),
                format!("{:e}", self.ci_low[i]),
                format!("{:e}", self.ci_high[i]),
                self.hits[i].to_string(),
                self.n.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::Input(format!("writing tail CSV: {e}")))
    }

    fn retain(&mut self, keep: &[bool]) {
        fn filter<T: Copy>(v: &mut Vec<T>, keep: &[bool]) {
            let mut i = 0;
            v.retain(|_| {
                i += 1;
                keep[i - 1]
            });
        }
        filter(&mut self.x, keep);
        filter(&mut self.estimate, keep);
        filter(&mut self.ci_low, keep);
        filter(&mut self.ci_high, keep);
        filter(&mut self.hits, keep);
        filter(&mut self.upper_hits, keep);
        filter(&mut self.lower_hits, keep);
    }

    /// Applies a feasibility gate to the finished estimate.
    pub fn gate(mut self, gate: FeasibilityGate) -> Result<Self> {
        let min_hits = match gate {
            FeasibilityGate::Off => return Ok(self),
            FeasibilityGate::Strict { min_hits } | FeasibilityGate::Trim { min_hits } => min_hits,
        };
        let keep: Vec<bool> = self.hits.iter().map(|&h| h >= min_hits).collect();
        if keep.iter().all(|&k| k) {
            return Ok(self);
        }
        if let FeasibilityGate::Strict { .. } = gate {
            let feasible: Vec<f64> = self
                .x
                .iter()
                .zip(&keep)
                .filter(|(_, &k)| k)
                .map(|(x, _)| *x)
                .collect();
            let range = match (feasible.first(), feasible.last()) {
                (Some(a), Some(b)) => format!("[{a}, {b}]"),
                _ => "empty".to_string(),
            };
            let bad: Vec<String> = self
                .x
                .iter()
                .zip(&keep)
                .filter(|(_, &k)| !k)
                .map(|(x, _)| x.to_string())
                .collect();
            return Err(Error::Infeasible {
                detail: format!(
                    "fewer than {min_hits} hits in {} paths at x = {}",
                    self.n,
                    bad.join(", ")
                ),
                feasible: range,
            });
        }
        self.retain(&keep);
        Ok(self)
    }
}

/// Counts `S ≥ x_j` and `S ≤ −x_j` over a sorted grid.
pub(crate) struct TwoSidedCounter {
    grid: Vec<f64>,
    upper: Vec<u64>,
    lower: Vec<u64>,
}

impl TwoSidedCounter {
    pub(crate) fn new(grid: &[f64]) -> Result<Self> {
        if grid.is_empty() || grid.windows(2).any(|w| !(w[0] < w[1])) || grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::Input("x grid must be finite and strictly increasing".into()));
        }
        Ok(Self {
            grid: grid.to_vec(),
            upper: vec![0; grid.len() + 1],
            lower: vec![0; grid.len() + 1],
        })
    }

    pub(crate) fn add(&mut self, s: f64) {
        // Bucket k holds values with exactly k grid points at or below them.
        self.upper[self.grid.partition_point(|&g| g <= s)] += 1;
        self.lower[self.grid.partition_point(|&g| g <= -s)] += 1;
    }

    /// `(upper_hits, lower_hits)` per grid point.
    pub(crate) fn finish(self) -> (Vec<f64>, Vec<u64>, Vec<u64>) {
        let cumulate = |buckets: &[u64]| {
            let mut out = vec![0; self.grid.len()];
            let mut acc = 0;
            for j in (0..self.grid.len()).rev() {
                acc += buckets[j + 1];
                out[j] = acc;
            }
            out
        };
        let up = cumulate(&self.upper);
        let low = cumulate(&self.lower);
        (self.grid, up, low)
    }
}

/// Simulates `n` paths of `S` and estimates its two-sided tail on `x_grid`.
///
/// Deterministic in `(spec, x_grid, n, seed)`.
pub fn simulate_tail(
    spec: &CompoundSpec,
    x_grid: &[f64],
    n: u64,
    seed: u64,
    options: TailOptions,
) -> Result<EmpiricalTail> {
    simulate_tail_with(x_grid, n, seed, options, spec.hash(), |rng| spec.sample(rng))
}

/// Tail of `n^{-1/2} Σ_{i≤n} ξ(i) / σ` for a fixed number of terms `n ≥ 1`.
pub fn simulate_normed_sum_tail(
    summand: &SummandLaw,
    terms: u64,
    x_grid: &[f64],
    n: u64,
    seed: u64,
    options: TailOptions,
) -> Result<EmpiricalTail> {
    if terms == 0 {
        return Err(Error::domain("need at least one term"));
    }
    let norm = summand.sigma() * (terms as f64).sqrt();
    let hash = spec_hash(&format!("{summand:?}|terms={terms}"));
    simulate_tail_with(x_grid, n, seed, options, hash, |rng| {
        summand.sample_sum(terms, rng) / norm
    })
}

fn simulate_tail_with(
    x_grid: &[f64],
    n: u64,
    seed: u64,
    options: TailOptions,
    spec_hash: String,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> f64,
) -> Result<EmpiricalTail> {
    if n < MIN_PATHS {
        return Err(Error::domain(format!("need at least {MIN_PATHS} paths, got {n}")));
    }
    if !(options.level > 0.0 && options.level < 1.0) {
        return Err(Error::domain(format!("confidence level must lie in (0, 1), got {}", options.level)));
    }
    let mut counter = TwoSidedCounter::new(x_grid)?;
    for_each_batch(n, seed, |rng, count| {
        for _ in 0..count {
            counter.add(draw(rng));
        }
    });
    let (x, up, low) = counter.finish();
    EmpiricalTail::from_counts(x, up, low, n, seed, options.level, spec_hash).gate(options.gate)
}
