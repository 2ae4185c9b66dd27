use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::compound::{for_each_batch, spec_hash};
use super::moments::{moment_table_with, MomentOptions, MomentTable};
use crate::bound_engine::{stopping_exponents, StoppingExponents};
use crate::error::{Error, Result};
use crate::tail_core::{IndexLaw, SummandLaw};

/// Default hard truncation of `η`.
pub const DEFAULT_CAP: u64 = 1_000_000;

/// Largest tolerated fraction of paths stopped by the cap.
const MAX_TRUNCATED: f64 = 1e-4;

/// Observations required above the top of the fitted range.
const MIN_TOP_OBS: usize = 30;

const FIT_POINTS: usize = 20;

/// How the number of summands is chosen.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StoppingRule {
    /// First `n` with `|Σ_{i≤n} ξ(i)| ≥ level`.
    FirstPassage { level: f64 },
    /// `min(window, first n with |Σ_{i≤n} ξ(i)| ≥ level)`.
    FixedWindowMax { window: u64, level: f64 },
    /// `η` drawn independently of the summands.
    Independent { law: IndexLaw },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StoppingTimeSpec {
    pub rule: StoppingRule,
    pub cap: u64,
}

impl StoppingTimeSpec {
    pub fn new(rule: StoppingRule) -> Result<Self> {
        Self::with_cap(rule, DEFAULT_CAP)
    }

    pub fn with_cap(rule: StoppingRule, cap: u64) -> Result<Self> {
        match &rule {
            StoppingRule::FirstPassage { level } | StoppingRule::FixedWindowMax { level, .. }
                if !(level.is_finite() && *level > 0.0) =>
            {
                return Err(Error::domain(format!("stopping level must be positive, got {level}")))
            }
            StoppingRule::FixedWindowMax { window, .. } if *window < 2 => {
                return Err(Error::domain("window must be at least 2"))
            }
            _ => {}
        }
        if cap < 2 {
            return Err(Error::domain("cap must be at least 2"));
        }
        Ok(Self { rule, cap })
    }

    /// Draws `(Σ_{i≤η} ξ(i), η, truncated)`.
    fn draw(&self, summand: &SummandLaw, rng: &mut ChaCha8Rng) -> (f64, u64, bool) {
        let walk = |level: f64, limit: u64, rng: &mut ChaCha8Rng| {
            let mut s = 0.0;
            for n in 1..=limit {
                s += summand.sample(rng);
                if s.abs() >= level {
                    return (s, n, false);
                }
            }
            (s, limit, true)
        };
        match &self.rule {
            StoppingRule::FirstPassage { level } => walk(*level, self.cap, rng),
            StoppingRule::FixedWindowMax { window, level } => {
                let limit = (*window).min(self.cap);
                let (s, n, hit_limit) = walk(*level, limit, rng);
                (s, n, hit_limit && limit == self.cap && *window > self.cap)
            }
            StoppingRule::Independent { law } => {
                let eta = law.sample(rng);
                let n = eta.min(self.cap);
                (summand.sample_sum(n, rng), n, eta > self.cap)
            }
        }
    }
}

/// Least-squares fit `log(−log T̂(x)) ≈ c + a log x + b log log x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndexTailFit {
    pub c: f64,
    pub a: f64,
    pub b: f64,
    pub x_low: f64,
    pub x_high: f64,
    pub points: usize,
}

/// Fits the tail of the observed `η` over its upper decade.
///
/// The decade ends at the value exceeded by 30 observations; points with
/// `T̂ ∈ {0, 1}` are skipped. This is a heuristic, not an estimator with
/// guarantees.
pub fn fit_index_tail(etas: &[u64]) -> Result<IndexTailFit> {
    let mut sorted = etas.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    if n <= MIN_TOP_OBS {
        return Err(Error::domain("too few observations to fit an index tail"));
    }
    let x_high = sorted[n - MIN_TOP_OBS] as f64;
    let x_low = (x_high / 10.0).max(2.0);
    if x_high <= x_low {
        return Err(Error::numerical(
            "fit_index_tail",
            format!("observed index values span no decade (top {x_high})"),
        ));
    }
    let tail_at = |x: f64| {
        let below = sorted.partition_point(|&e| (e as f64) < x);
        (n - below) as f64 / n as f64
    };
    let mut xs: Vec<f64> = (0..FIT_POINTS)
        .map(|i| (x_low * (x_high / x_low).powf(i as f64 / (FIT_POINTS - 1) as f64)).ceil())
        .collect();
    xs.dedup();
    let rows: Vec<[f64; 4]> = xs
        .iter()
        .filter_map(|&x| {
            let t = tail_at(x);
            (t > 0.0 && t < 1.0).then(|| [1.0, x.ln(), x.ln().ln(), (-t.ln()).ln()])
        })
        .collect();
    if rows.len() < 4 {
        return Err(Error::numerical(
            "fit_index_tail",
            format!("only {} usable points in [{x_low}, {x_high}]", rows.len()),
        ));
    }
    let beta = least_squares3(&rows).ok_or_else(|| {
        Error::numerical("fit_index_tail", "singular design (index values too concentrated)")
    })?;
    if !(beta[1] > 0.0) {
        return Err(Error::numerical(
            "fit_index_tail",
            format!("fitted power a = {} is not positive", beta[1]),
        ));
    }
    Ok(IndexTailFit {
        c: beta[0],
        a: beta[1],
        b: beta[2],
        x_low,
        x_high,
        points: rows.len(),
    })
}

/// Solves the 3-parameter normal equations; rows are `[x0, x1, x2, y]`.
#[allow(clippy::needless_range_loop)]
fn least_squares3(rows: &[[f64; 4]]) -> Option<[f64; 3]> {
    let mut m = [[0.0; 4]; 3];
    for r in rows {
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += r[i] * r[j];
            }
            m[i][3] += r[i] * r[3];
        }
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..3 {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..4 {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

/// Results of a stopped-sum run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StoppingReport {
    pub fit: IndexTailFit,
    /// `(m, r)` of the summand law (`m = ∞` for bounded laws).
    pub summand_m: f64,
    pub summand_r: f64,
    pub exponents: StoppingExponents,
    pub mean_eta: f64,
    pub truncated_fraction: f64,
    pub moments: MomentTable,
    /// `p^{1/q} (log p)^{−w/q}` anchored at the first grid order.
    pub theorem_curve: Vec<f64>,
    /// Least-squares slope of `log |S|_p` against `log p`.
    pub growth_slope: f64,
}

/// Simulates `Σ_{i≤η} ξ(i) / (σ√A)` with `η` set by `spec.rule` on the
/// same path, with `A` the empirical mean of `η`.
pub fn stopping_time_experiment(
    spec: &StoppingTimeSpec,
    summand: &SummandLaw,
    p_grid: &[f64],
    n: u64,
    seed: u64,
    options: MomentOptions,
) -> Result<StoppingReport> {
    let mut etas = Vec::with_capacity(n as usize);
    let mut truncated = 0u64;
    // Index draws are stored separately for the tail fit; the moment engine
    // sees the same paths in the same order.
    let hash = spec_hash(&format!("{spec:?}|{summand:?}"));
    let moments = moment_table_with(
        p_grid,
        n,
        seed,
        options,
        hash,
        summand.sigma(),
        None,
        |rng| {
            let (s, eta, cut) = spec.draw(summand, rng);
            etas.push(eta);
            truncated += u64::from(cut);
            (s, eta, summand.sample(rng))
        },
    )?;
    let truncated_fraction = truncated as f64 / n as f64;
    if truncated_fraction >= MAX_TRUNCATED {
        return Err(Error::domain(format!(
            "cap {} stopped {:.3e} of paths (limit {MAX_TRUNCATED:e}); raise the cap",
            spec.cap, truncated_fraction
        )));
    }
    if moments.mean_eta < 2.0 {
        return Err(Error::domain(format!(
            "stopping rule gives mean index {} < 2",
            moments.mean_eta
        )));
    }
    let fit = fit_index_tail(&etas)?;
    let (m, r) = summand_exponents(summand);
    let exponents = stopping_exponents(fit.a, fit.b, m, r)?;
    let (p0, s0) = (moments.rows[0].p, moments.rows[0].s_norm);
    let theorem_curve = moments
        .rows
        .iter()
        .map(|row| exponents.moment_curve(p0, s0, row.p))
        .collect();
    let growth_slope = slope(
        &moments
            .rows
            .iter()
            .map(|r| (r.p.ln(), r.s_norm.ln()))
            .collect::<Vec<_>>(),
    );
    Ok(StoppingReport {
        fit,
        summand_m: m,
        summand_r: r,
        exponents,
        mean_eta: moments.mean_eta,
        truncated_fraction,
        moments,
        theorem_curve,
        growth_slope,
    })
}

fn summand_exponents(law: &SummandLaw) -> (f64, f64) {
    match law {
        SummandLaw::Gmr(spec) => (spec.m(), spec.r()),
        SummandLaw::Normal { .. } => (2.0, 0.0),
        SummandLaw::TwoPointPm1 => (f64::INFINITY, 0.0),
    }
}

/// Ordinary least-squares slope.
pub(crate) fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Stopping times by path, exposed for diagnostics.
pub fn sample_stopping_times(spec: &StoppingTimeSpec, summand: &SummandLaw, n: u64, seed: u64) -> Vec<u64> {
    let mut out = Vec::with_capacity(n as usize);
    for_each_batch(n, seed, |rng, count| {
        for _ in 0..count {
            out.push(spec.draw(summand, rng).1);
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_squares_recovers_plane() {
        let rows: Vec<[f64; 4]> = (1..30)
            .map(|i| {
                let x = i as f64 * 3.7;
                let (l, ll) = (x.ln(), x.ln().ln().abs() + 0.1 * i as f64);
                [1.0, l, ll, 0.5 + 1.5 * l - 0.25 * ll]
            })
            .collect();
        let b = least_squares3(&rows).unwrap();
        assert!((b[0] - 0.5).abs() < 1e-9 && (b[1] - 1.5).abs() < 1e-9 && (b[2] + 0.25).abs() < 1e-9);
    }

    #[test]
    fn fit_of_exact_weibull_like_index() {
        // P(η ≥ x) = exp(-x^{0.8}) evaluated on integers, so a ≈ 0.8, b ≈ 0.
        let n = 2_000_000usize;
        let etas: Vec<u64> = (0..n)
            .map(|i| {
                let u = (i as f64 + 0.5) / n as f64;
                (-u.ln()).powf(1.0 / 0.8).floor() as u64 + 1
            })
            .collect();
        let fit = fit_index_tail(&etas).unwrap();
        assert!((fit.a - 0.8).abs() < 0.2, "{fit:?}");
    }

    #[test]
    fn first_passage_of_pm1_stops_on_level() {
        let spec = StoppingTimeSpec::new(StoppingRule::FirstPassage { level: 3.0 }).unwrap();
        let mut rng = super::super::compound::batch_rng(1, 0);
        for _ in 0..1000 {
            let (s, n, cut) = spec.draw(&SummandLaw::TwoPointPm1, &mut rng);
            assert!(!cut && s.abs() == 3.0 && n % 2 == 1);
        }
        let etas = sample_stopping_times(&spec, &SummandLaw::TwoPointPm1, 100_000, 2);
        let mean = etas.iter().sum::<u64>() as f64 / etas.len() as f64;
        // Wald: E η = level².
        assert!((mean - 9.0).abs() < 0.15, "{mean}");
    }

    #[test]
    fn cap_violation_is_reported() {
        let spec = StoppingTimeSpec::with_cap(StoppingRule::FirstPassage { level: 50.0 }, 100).unwrap();
        let err = stopping_time_experiment(&spec, &SummandLaw::TwoPointPm1, &[2.0, 4.0], 2_000, 1, MomentOptions::default());
        assert!(matches!(err, Err(Error::Domain(_))));
    }
}
