use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::compound::{batch_rng, for_each_batch, CompoundSpec};
use super::tail::MIN_PATHS;
use crate::error::{Error, Result};
use crate::tail_core::IndexLaw;

/// Default moment orders; higher orders are dominated by a handful of paths.
pub const DEFAULT_MOMENT_P_GRID: [f64; 7] = [2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0];

/// Paths per bootstrap block.
const BLOCK: u64 = 4096;

/// Stream reserved for bootstrap resampling.
const BOOTSTRAP_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentOptions {
    /// `C_B` in `B(p) = C_B p / log p`.
    pub c_b: f64,
    pub bootstrap_replicates: usize,
    pub level: f64,
}

impl Default for MomentOptions {
    fn default() -> Self {
        Self {
            c_b: 1.0,
            bootstrap_replicates: 200,
            level: 0.95,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentRow {
    pub p: f64,
    /// `|S|_p`.
    pub s_norm: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Bootstrap standard error of `|S|_p`.
    pub se: f64,
    /// `|η|_p`.
    pub eta_norm: f64,
    /// `|ξ|_p`.
    pub xi_norm: f64,
    /// `B(p) = C_B p / log p`.
    pub b: f64,
    /// `B(p) |η|_p^{1/2} |ξ|_p / (σ√A)`.
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentTable {
    pub rows: Vec<MomentRow>,
    pub n: u64,
    pub seed: u64,
    /// `A` used in the normalization.
    pub mean_eta: f64,
    pub sigma: f64,
    pub spec_hash: String,
}

/// `|S|_p` on `p_grid` with block-bootstrap intervals, next to the moment
/// inequality's right side computed from empirical `|η|_p` and `|ξ|_p`.
pub fn empirical_moments(
    spec: &CompoundSpec,
    p_grid: &[f64],
    n: u64,
    seed: u64,
    options: MomentOptions,
) -> Result<MomentTable> {
    let summand = &spec.summand;
    let index = &spec.index;
    moment_table_with(
        p_grid,
        n,
        seed,
        options,
        spec.hash(),
        summand.sigma(),
        Some(index.mean()),
        |rng| {
            let eta = index.sample(rng);
            let s = summand.sample_sum(eta, rng);
            (s, eta, summand.sample(rng))
        },
    )
}

/// Shared engine: `draw` returns `(Σ_{i≤η} ξ(i), η, an independent ξ)`.
/// With `mean` unset, `A` is the empirical mean of `η`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn moment_table_with(
    p_grid: &[f64],
    n: u64,
    seed: u64,
    options: MomentOptions,
    spec_hash: String,
    sigma: f64,
    mean: Option<f64>,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> (f64, u64, f64),
) -> Result<MomentTable> {
    if n < MIN_PATHS {
        return Err(Error::domain(format!("need at least {MIN_PATHS} paths, got {n}")));
    }
    if p_grid.is_empty() || p_grid.iter().any(|p| !(*p >= 1.0 && p.is_finite())) {
        return Err(Error::domain("moment orders must be finite and at least 1"));
    }
    let k = p_grid.len();
    let mut blocks: Vec<Vec<f64>> = Vec::new();
    let mut block_counts: Vec<u64> = Vec::new();
    let mut current = vec![0.0; k];
    let mut in_block = 0u64;
    let mut eta_sums = vec![0.0; k];
    let mut xi_sums = vec![0.0; k];
    let mut eta_total = 0.0;
    for_each_batch(n, seed, |rng, count| {
        for _ in 0..count {
            let (s, eta, xi) = draw(rng);
            let (s, eta_f, xi) = (s.abs(), eta as f64, xi.abs());
            eta_total += eta_f;
            for (j, &p) in p_grid.iter().enumerate() {
                current[j] += s.powf(p);
                eta_sums[j] += eta_f.powf(p);
                xi_sums[j] += xi.powf(p);
            }
            in_block += 1;
            if in_block == BLOCK {
                blocks.push(std::mem::replace(&mut current, vec![0.0; k]));
                block_counts.push(in_block);
                in_block = 0;
            }
        }
    });
    if in_block > 0 {
        blocks.push(current);
        block_counts.push(in_block);
    }
    let nf = n as f64;
    let a = mean.unwrap_or(eta_total / nf);
    let norm = sigma * a.sqrt();

    // Bootstrap over blocks.
    let mut rng = batch_rng(seed, BOOTSTRAP_STREAM);
    let nb = blocks.len();
    let mut replicates = vec![Vec::with_capacity(options.bootstrap_replicates); k];
    for _ in 0..options.bootstrap_replicates {
        let mut sums = vec![0.0; k];
        let mut count = 0u64;
        for _ in 0..nb {
            let b = rng.random_range(0..nb);
            count += block_counts[b];
            for j in 0..k {
                sums[j] += blocks[b][j];
            }
        }
        for j in 0..k {
            replicates[j].push((sums[j] / count as f64).powf(1.0 / p_grid[j]) / norm);
        }
    }

    let rows = p_grid
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            let total: f64 = blocks.iter().map(|b| b[j]).sum();
            let s_norm = (total / nf).powf(1.0 / p) / norm;
            let reps = &mut replicates[j];
            reps.sort_by(f64::total_cmp);
            let (ci_low, ci_high, se) = if reps.is_empty() {
                (s_norm, s_norm, 0.0)
            } else {
                let q = |f: f64| reps[((f * (reps.len() - 1) as f64).round()) as usize];
                let m = reps.iter().sum::<f64>() / reps.len() as f64;
                let var = reps.iter().map(|r| (r - m).powi(2)).sum::<f64>()
                    / (reps.len().max(2) - 1) as f64;
                let tail = 0.5 * (1.0 - options.level);
                (q(tail).min(s_norm), q(1.0 - tail).max(s_norm), var.sqrt())
            };
            let eta_norm = (eta_sums[j] / nf).powf(1.0 / p);
            let xi_norm = (xi_sums[j] / nf).powf(1.0 / p);
            let b = options.c_b * p / p.ln();
            MomentRow {
                p,
                s_norm,
                ci_low,
                ci_high,
                se,
                eta_norm,
                xi_norm,
                b,
                rhs: b * eta_norm.sqrt() * xi_norm / norm,
            }
        })
        .collect();
    Ok(MomentTable {
        rows,
        n,
        seed,
        mean_eta: a,
        sigma,
        spec_hash,
    })
}

/// Empirical `|η − A|_p` on `p_grid`.
pub fn index_central_moments(law: &IndexLaw, p_grid: &[f64], n: u64, seed: u64) -> Result<Vec<(f64, f64)>> {
    if n < MIN_PATHS {
        return Err(Error::domain(format!("need at least {MIN_PATHS} paths, got {n}")));
    }
    let a = law.mean();
    let mut sums = vec![0.0; p_grid.len()];
    for_each_batch(n, seed, |rng, count| {
        for _ in 0..count {
            let d = (law.sample(rng) as f64 - a).abs();
            for (j, &p) in p_grid.iter().enumerate() {
                sums[j] += d.powf(p);
            }
        }
    });
    Ok(p_grid
        .iter()
        .zip(sums)
        .map(|(&p, s)| (p, (s / n as f64).powf(1.0 / p)))
        .collect())
}
