//! Samplers for the summand laws.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::gmr::{GmrSpec, MlExponents};
use super::tail::TailFunction;
use crate::error::{Error, Result};

/// Relative bracket width at which tail inversion stops.
const INVERSION_REL_WIDTH: f64 = 1e-13;

/// Draws a symmetric variate with `P(|ξ| > x) = spec.tail(x)`.
///
/// `|ξ|` is obtained by inverting the (monotone) tail by bisection on its
/// logarithm; the bracket starts at `[0, 1]` and doubles until it encloses
/// the target.
pub fn sample_gmr_symmetric<R: Rng + ?Sized>(spec: &GmrSpec, rng: &mut R) -> f64 {
    let magnitude = if spec.is_bounded() {
        spec.ess_sup()
    } else {
        // u ∈ (0, 1]; solve rate(x) = -ln u.
        let u = 1.0 - rng.random::<f64>();
        invert_rate(spec, -u.ln())
    };
    if rng.random::<bool>() {
        magnitude
    } else {
        -magnitude
    }
}

fn invert_rate(spec: &GmrSpec, target: f64) -> f64 {
    if target <= 0.0 {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut expansions = 0;
    while spec.rate(hi) < target {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        assert!(
            expansions < 2048,
            "tail inversion bracket failed to enclose rate {target}"
        );
    }
    while hi - lo > INVERSION_REL_WIDTH * hi {
        let mid = 0.5 * (lo + hi);
        if spec.rate(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Summand laws used by the simulators.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SummandLaw {
    /// Symmetric law with absolute tail in G(m, r).
    Gmr(GmrSpec),
    Normal { sigma: f64 },
    /// Rademacher `±1`.
    TwoPointPm1,
}

impl SummandLaw {
    pub fn normal(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::domain(format!("normal summand needs sigma > 0, got {sigma}")));
        }
        Ok(SummandLaw::Normal { sigma })
    }

    pub fn sigma(&self) -> f64 {
        match self {
            SummandLaw::Gmr(spec) => spec.sigma(),
            SummandLaw::Normal { sigma } => *sigma,
            SummandLaw::TwoPointPm1 => 1.0,
        }
    }

    pub fn tail_function(&self) -> TailFunction {
        match self {
            SummandLaw::Gmr(spec) => TailFunction::gmr(*spec),
            SummandLaw::Normal { sigma } => {
                TailFunction::normal(*sigma).expect("validated sigma")
            }
            SummandLaw::TwoPointPm1 => {
                TailFunction::gmr(GmrSpec::bounded(1.0).expect("positive bound"))
            }
        }
    }

    /// `(M, L)` of the law's G(m, r) class (normal and bounded laws give `(2, 0)`).
    pub fn ml_exponents(&self) -> Result<MlExponents> {
        match self {
            SummandLaw::Gmr(spec) => spec.ml_exponents(),
            SummandLaw::Normal { .. } | SummandLaw::TwoPointPm1 => Ok(MlExponents::GAUSSIAN),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            SummandLaw::Gmr(spec) => sample_gmr_symmetric(spec, rng),
            SummandLaw::Normal { sigma } => sigma * rng.sample::<f64, _>(StandardNormal),
            SummandLaw::TwoPointPm1 => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    /// Draws `Σ_{i=1}^k ξ(i)`.
    ///
    /// Normal and `±1` summands use laws equal in distribution to the sum
    /// (a scaled normal, and a popcount over random bits) so long sums stay
    /// cheap; G(m, r) summands are drawn one by one.
    pub fn sample_sum<R: Rng + ?Sized>(&self, k: u64, rng: &mut R) -> f64 {
        match self {
            SummandLaw::Normal { sigma } => {
                sigma * (k as f64).sqrt() * rng.sample::<f64, _>(StandardNormal)
            }
            SummandLaw::TwoPointPm1 => {
                let mut ones = 0u64;
                let mut left = k;
                while left >= 64 {
                    ones += u64::from(rng.random::<u64>().count_ones());
                    left -= 64;
                }
                if left > 0 {
                    let mask = (1u64 << left) - 1;
                    ones += u64::from((rng.random::<u64>() & mask).count_ones());
                }
                2.0 * ones as f64 - k as f64
            }
            SummandLaw::Gmr(spec) => (0..k).map(|_| sample_gmr_symmetric(spec, rng)).sum(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::clopper_pearson;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn inversion_hits_the_requested_tail_level() {
        let spec = GmrSpec::new(1.5, 0.7, 0.8, 3.0).unwrap();
        for u in [0.9, 0.5, 1e-3, 1e-12] {
            let x = invert_rate(&spec, -f64::ln(u));
            assert!((spec.tail(x) - u).abs() <= 1e-10 * u.max(1e-3), "u = {u}");
        }
    }

    #[test]
    fn signs_are_balanced() {
        let spec = GmrSpec::with_defaults(2.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000u64;
        let positive = (0..n)
            .filter(|_| sample_gmr_symmetric(&spec, &mut rng) > 0.0)
            .count() as f64;
        let sd = (n as f64 * 0.25).sqrt();
        assert!((positive - 0.5 * n as f64).abs() < 3.0 * sd);
    }

    #[test]
    fn empirical_tail_at_one_percent_level() {
        let spec = GmrSpec::new(1.3, 0.5, 1.0, std::f64::consts::E).unwrap();
        // x with T(x) = 0.01, found independently by bisection on the tail.
        let (mut lo, mut hi) = (0.0, 100.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if spec.tail(mid) > 0.01 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x = 0.5 * (lo + hi);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000u64;
        let hits = (0..n)
            .filter(|_| sample_gmr_symmetric(&spec, &mut rng).abs() > x)
            .count() as u64;
        assert!(clopper_pearson(hits, n, 0.99).contains(0.01), "hits = {hits}");
    }

    #[test]
    fn sum_shortcuts_have_the_right_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for law in [SummandLaw::TwoPointPm1, SummandLaw::normal(2.0).unwrap()] {
            for k in [1u64, 5, 64, 130] {
                let n = 100_000;
                let var = (0..n)
                    .map(|_| law.sample_sum(k, &mut rng).powi(2))
                    .sum::<f64>()
                    / n as f64;
                let expected = k as f64 * law.sigma().powi(2);
                assert!((var / expected - 1.0).abs() < 0.03, "{law:?} k={k}: {var}");
            }
        }
    }

    #[test]
    fn rademacher_sum_has_right_parity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let s = SummandLaw::TwoPointPm1.sample_sum(7, &mut rng);
            assert!(s.abs() <= 7.0 && (s as i64).rem_euclid(2) == 1);
        }
    }
}
