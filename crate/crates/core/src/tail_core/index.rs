use rand::Rng;
use rand_distr::{Distribution, Geometric, Poisson};
use serde::Serialize;
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};

/// Law of the random number of summands `η ≥ 1`; every law has mean `A ≥ 2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IndexLaw {
    /// `P(η = n) = A⁻¹ (1 - 1/A)^{n-1}`.
    Geometric { mean: f64 },
    /// `η - 1 ~ Poisson(A - 1)`.
    ShiftedPoisson { mean: f64 },
    Deterministic { n: u64 },
    /// `P(η = 2) = 1 - α`, `P(η = 1/α) = α` with integer `1/α`.
    TwoPoint { alpha: f64 },
    /// `probs[k] = P(η = k + 1)`.
    Explicit { probs: Vec<f64> },
}

const MIN_MEAN: f64 = 2.0;

impl IndexLaw {
    pub fn geometric(mean: f64) -> Result<Self> {
        check_mean(mean)?;
        Ok(IndexLaw::Geometric { mean })
    }

    pub fn shifted_poisson(mean: f64) -> Result<Self> {
        check_mean(mean)?;
        Ok(IndexLaw::ShiftedPoisson { mean })
    }

    pub fn deterministic(n: u64) -> Result<Self> {
        check_mean(n as f64)?;
        Ok(IndexLaw::Deterministic { n })
    }

    pub fn two_point(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 0.5) {
            return Err(Error::domain(format!("two-point law needs alpha in (0, 1/2], got {alpha}")));
        }
        let inv = 1.0 / alpha;
        if (inv - inv.round()).abs() > 1e-9 * inv {
            return Err(Error::domain(format!("two-point law needs integer 1/alpha, got {inv}")));
        }
        Ok(IndexLaw::TwoPoint { alpha })
    }

    pub fn explicit(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::domain("explicit index law needs non-negative finite probabilities"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!(
                "explicit index law probabilities sum to {total}, not 1"
            )));
        }
        let law = IndexLaw::Explicit { probs };
        check_mean(law.mean())?;
        Ok(law)
    }

    /// `A = E η`.
    pub fn mean(&self) -> f64 {
        match self {
            IndexLaw::Geometric { mean } | IndexLaw::ShiftedPoisson { mean } => *mean,
            IndexLaw::Deterministic { n } => *n as f64,
            IndexLaw::TwoPoint { alpha } => 3.0 - 2.0 * alpha,
            IndexLaw::Explicit { probs } => probs
                .iter()
                .enumerate()
                .map(|(k, p)| (k + 1) as f64 * p)
                .sum(),
        }
    }

    fn upper_point(alpha: f64) -> u64 {
        (1.0 / alpha).round() as u64
    }

    /// `P(η = n)`.
    pub fn pmf(&self, n: u64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        match self {
            IndexLaw::Geometric { mean } => {
                let q = 1.0 - 1.0 / mean;
                (n as f64 - 1.0).mul_add(q.ln(), -mean.ln()).exp()
            }
            IndexLaw::ShiftedPoisson { mean } => {
                let rate = mean - 1.0;
                let k = (n - 1) as f64;
                (-rate + k * rate.ln() - ln_gamma(k + 1.0)).exp()
            }
            IndexLaw::Deterministic { n: d } => f64::from(u8::from(n == *d)),
            IndexLaw::TwoPoint { alpha } => {
                let hi = Self::upper_point(*alpha);
                let mut p = 0.0;
                if n == 2 {
                    p += 1.0 - alpha;
                }
                if n == hi {
                    p += alpha;
                }
                p
            }
            IndexLaw::Explicit { probs } => probs.get((n - 1) as usize).copied().unwrap_or(0.0),
        }
    }

    /// `P(η > n)`.
    pub fn survival(&self, n: u64) -> f64 {
        match self {
            IndexLaw::Geometric { mean } => (n as f64 * (1.0 - 1.0 / mean).ln()).exp(),
            IndexLaw::ShiftedPoisson { mean } => {
                // P(Pois(B) >= n) = P(n, B), the regularized lower gamma.
                if n == 0 {
                    1.0
                } else {
                    gamma_lr(n as f64, mean - 1.0)
                }
            }
            IndexLaw::Deterministic { n: d } => f64::from(u8::from(n < *d)),
            IndexLaw::TwoPoint { alpha } => {
                let hi = Self::upper_point(*alpha);
                if n < 2 {
                    1.0
                } else if n < hi {
                    *alpha
                } else {
                    0.0
                }
            }
            IndexLaw::Explicit { probs } => {
                let n = n as usize;
                if n >= probs.len() {
                    0.0
                } else {
                    probs[n..].iter().sum()
                }
            }
        }
    }

    /// Smallest `n*` with `P(η > n*) < eps`.
    pub fn cutoff(&self, eps: f64) -> u64 {
        match self {
            IndexLaw::Deterministic { n } => *n,
            IndexLaw::TwoPoint { alpha } => Self::upper_point(*alpha),
            IndexLaw::Explicit { probs } => {
                let mut n = probs.len() as u64;
                while n > 0 && self.survival(n - 1) < eps {
                    n -= 1;
                }
                n
            }
            IndexLaw::Geometric { mean } => {
                let guess = (eps.ln() / (1.0 - 1.0 / mean).ln()).floor().max(0.0) as u64;
                let mut n = guess.saturating_sub(2);
                while self.survival(n) >= eps {
                    n += 1;
                }
                n
            }
            IndexLaw::ShiftedPoisson { .. } => {
                let mut n = 0;
                while self.survival(n) >= eps {
                    n += 1;
                }
                n
            }
        }
    }

    /// `|η|_p = (E ηᵖ)^{1/p}` by summing the law to mass `1 - 1e-15`.
    pub fn moment_norm(&self, p: f64) -> f64 {
        let top = self.cutoff(1e-15);
        let sum: f64 = (1..=top)
            .map(|n| self.pmf(n) * (n as f64).powf(p))
            .sum();
        sum.powf(1.0 / p)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            IndexLaw::Geometric { mean } => {
                let failures = Geometric::new(1.0 / mean)
                    .expect("validated mean")
                    .sample(rng);
                failures + 1
            }
            IndexLaw::ShiftedPoisson { mean } => {
                let k: f64 = Poisson::new(mean - 1.0)
                    .expect("validated mean")
                    .sample(rng);
                k as u64 + 1
            }
            IndexLaw::Deterministic { n } => *n,
            IndexLaw::TwoPoint { alpha } => {
                if rng.random::<f64>() < *alpha {
                    Self::upper_point(*alpha)
                } else {
                    2
                }
            }
            IndexLaw::Explicit { probs } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (k, p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        return k as u64 + 1;
                    }
                }
                probs.iter().rposition(|&p| p > 0.0).unwrap_or(0) as u64 + 1
            }
        }
    }
}

fn check_mean(mean: f64) -> Result<()> {
    if mean.is_finite() && mean >= MIN_MEAN {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "index law must have mean A >= 2, got A = {mean}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn total_mass(law: &IndexLaw) -> f64 {
        (1..=law.cutoff(1e-15)).map(|n| law.pmf(n)).sum()
    }

    #[test]
    fn mean_below_two_is_rejected() {
        assert!(IndexLaw::deterministic(1).is_err());
        assert!(IndexLaw::geometric(1.5).is_err());
        assert!(IndexLaw::shifted_poisson(f64::NAN).is_err());
        assert!(IndexLaw::explicit(vec![0.5, 0.5]).is_err());
        assert!(IndexLaw::explicit(vec![0.5, 0.4]).is_err());
    }

    #[test]
    fn masses_and_means() {
        for law in [
            IndexLaw::geometric(4.0).unwrap(),
            IndexLaw::shifted_poisson(7.5).unwrap(),
            IndexLaw::deterministic(5).unwrap(),
            IndexLaw::two_point(1.0 / 9.0).unwrap(),
            IndexLaw::explicit(vec![0.0, 0.5, 0.25, 0.25]).unwrap(),
        ] {
            assert!((total_mass(&law) - 1.0).abs() < 1e-12, "{law:?}");
            let mean: f64 = (1..=law.cutoff(1e-16)).map(|n| n as f64 * law.pmf(n)).sum();
            assert!((mean - law.mean()).abs() < 1e-9, "{law:?}: {mean}");
        }
    }

    #[test]
    fn two_point_mean_matches_construction() {
        let law = IndexLaw::two_point(1.0 / 9.0).unwrap();
        assert!((law.mean() - 25.0 / 9.0).abs() < 1e-15);
        assert!((law.pmf(2) - 8.0 / 9.0).abs() < 1e-15);
        assert!((law.pmf(9) - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn survival_is_consistent_with_pmf() {
        for law in [
            IndexLaw::geometric(3.0).unwrap(),
            IndexLaw::shifted_poisson(4.0).unwrap(),
        ] {
            for n in [0u64, 1, 3, 10] {
                let direct: f64 = 1.0 - (1..=n).map(|k| law.pmf(k)).sum::<f64>();
                assert!((law.survival(n) - direct).abs() < 1e-12, "{law:?} n={n}");
            }
        }
    }

    #[test]
    fn cutoff_is_smallest() {
        let law = IndexLaw::geometric(4.0).unwrap();
        let n = law.cutoff(1e-12);
        assert!(law.survival(n) < 1e-12);
        assert!(law.survival(n - 1) >= 1e-12);
    }

    #[test]
    fn sample_means() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for law in [
            IndexLaw::geometric(4.0).unwrap(),
            IndexLaw::shifted_poisson(4.0).unwrap(),
            IndexLaw::two_point(0.25).unwrap(),
            IndexLaw::explicit(vec![0.0, 0.5, 0.5]).unwrap(),
        ] {
            let n = 200_000;
            let mean = (0..n).map(|_| law.sample(&mut rng) as f64).sum::<f64>() / n as f64;
            assert!((mean - law.mean()).abs() < 0.05, "{law:?}: {mean}");
        }
    }
}
