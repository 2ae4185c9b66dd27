use std::io::Read;
use std::path::Path;

use serde::Serialize;

use super::gmr::GmrSpec;
use crate::error::{Error, Result};
use crate::numeric::{integrate_to_infinity, special, QuadOptions};

/// A tabulated tail: a right-continuous step function through `(x, T(x))`
/// pairs with strictly increasing `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalGrid {
    xs: Vec<f64>,
    ts: Vec<f64>,
}

impl EmpiricalGrid {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Input("empirical tail needs at least one point".into()));
        }
        let (xs, ts): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
        if xs.iter().chain(ts.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Input("empirical tail contains non-finite values".into()));
        }
        if xs[0] < 0.0 {
            return Err(Error::Input(format!("tail grid starts at negative x = {}", xs[0])));
        }
        if let Some(w) = xs.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::Input(format!(
                "x values must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if ts.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::Input("tail values must lie in [0, 1]".into()));
        }
        if let Some(w) = ts.windows(2).find(|w| w[1] > w[0]) {
            return Err(Error::Input(format!(
                "tail values must be non-increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if xs[0] == 0.0 && ts[0] != 1.0 {
            return Err(Error::Input("tail must equal 1 at x = 0".into()));
        }
        if *ts.last().expect("non-empty") != 0.0 {
            return Err(Error::Input(
                "tail must reach 0 within the represented range".into(),
            ));
        }
        Ok(Self { xs, ts })
    }

    /// Reads a two-column `x,T` CSV (an optional header row is skipped).
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut points = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Input(e.to_string()))?;
            if record.len() != 2 {
                return Err(Error::Input(format!(
                    "row {}: expected 2 columns, found {}",
                    line + 1,
                    record.len()
                )));
            }
            let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
            match parsed {
                (Ok(x), Ok(t)) => points.push((x, t)),
                _ if line == 0 => continue,
                _ => {
                    return Err(Error::Input(format!(
                        "row {}: cannot parse {:?}",
                        line + 1,
                        record
                    )))
                }
            }
        }
        Self::new(points)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::Input(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(file)
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ts.iter().copied())
    }

    fn eval(&self, x: f64) -> f64 {
        // Index of the last grid point <= x.
        match self.xs.partition_point(|&g| g <= x) {
            0 => 1.0,
            i => self.ts[i - 1],
        }
    }

    /// Jump sizes `P(|ξ| = x_i)` at each grid point.
    fn masses(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().enumerate().map(move |(i, &x)| {
            let before = if i == 0 { 1.0 } else { self.ts[i - 1] };
            (x, before - self.ts[i])
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailRepr {
    Gmr(GmrSpec),
    /// Absolute tail of `N(0, σ²)`.
    Normal { sigma: f64 },
    Empirical(EmpiricalGrid),
}

/// Absolute tail `T(x) = P(|ξ| > x)` of a centered summand: `T(0) = 1`,
/// non-increasing, right-continuous, with finite second moment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailFunction {
    repr: TailRepr,
    second_moment: f64,
}

impl TailFunction {
    pub fn gmr(spec: GmrSpec) -> Self {
        Self {
            second_moment: spec.sigma() * spec.sigma(),
            repr: TailRepr::Gmr(spec),
        }
    }

    pub fn normal(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::domain(format!("normal tail needs sigma > 0, got {sigma}")));
        }
        Ok(Self {
            repr: TailRepr::Normal { sigma },
            second_moment: sigma * sigma,
        })
    }

    pub fn empirical(grid: EmpiricalGrid) -> Self {
        let second_moment = grid.masses().map(|(x, p)| x * x * p).sum();
        Self {
            repr: TailRepr::Empirical(grid),
            second_moment,
        }
    }

    pub fn repr(&self) -> &TailRepr {
        &self.repr
    }

    /// `E ξ²`, i.e. `-∫₀^∞ y² dT(y)`.
    pub fn second_moment(&self) -> f64 {
        self.second_moment
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        match &self.repr {
            TailRepr::Gmr(spec) => spec.tail(x),
            TailRepr::Normal { sigma } => 2.0 * special::normal_tail(x / sigma),
            TailRepr::Empirical(grid) => grid.eval(x),
        }
    }

    /// `log T(x)`, finite far beyond the point where `T` underflows.
    pub fn ln_eval(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        match &self.repr {
            TailRepr::Gmr(spec) => spec.log_tail(x),
            TailRepr::Normal { sigma } => std::f64::consts::LN_2 + special::ln_normal_tail(x / sigma),
            TailRepr::Empirical(grid) => grid.eval(x).ln(),
        }
    }

    /// Locations where the tail jumps, for step-function tails; `None` for
    /// continuous tails.
    pub fn atoms(&self) -> Option<Vec<f64>> {
        match &self.repr {
            TailRepr::Gmr(spec) if spec.is_bounded() => Some(vec![spec.ess_sup()]),
            TailRepr::Empirical(grid) => Some(
                grid.masses()
                    .filter(|&(_, p)| p > 0.0)
                    .map(|(x, _)| x)
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Right end of the support of `|ξ|` (`+∞` if unbounded).
    pub fn support_end(&self) -> f64 {
        match &self.repr {
            TailRepr::Gmr(spec) => spec.ess_sup(),
            TailRepr::Normal { .. } => f64::INFINITY,
            TailRepr::Empirical(grid) => *grid.xs.last().expect("non-empty"),
        }
    }

    /// Natural length scale used to size quadrature panels.
    pub(crate) fn scale(&self) -> f64 {
        self.second_moment.sqrt().max(1e-6)
    }

    /// Truncated second moment `E[ξ² 1{|ξ| > z}] = -∫_z^∞ y² dT(y)`.
    ///
    /// Continuous tails use `z² T(z) + 2 ∫_z^∞ y T(y) dy`; step tails sum
    /// their jump masses exactly.
    pub fn second_moment_tail(&self, z: f64) -> Result<f64> {
        let z = z.max(0.0);
        match &self.repr {
            TailRepr::Empirical(grid) => Ok(grid
                .masses()
                .filter(|&(x, _)| x > z)
                .map(|(x, p)| x * x * p)
                .sum()),
            TailRepr::Gmr(spec) if spec.is_bounded() => {
                let s = spec.ess_sup();
                Ok(if z < s { s * s } else { 0.0 })
            }
            TailRepr::Normal { sigma } => {
                // E[ξ²; |ξ| > z] = 2σ²(uφ(u) + Ψ(u)), u = z/σ.
                let u = z / sigma;
                Ok(2.0 * sigma * sigma * (u * special::normal_pdf(u) + special::normal_tail(u)))
            }
            _ => {
                if z == 0.0 {
                    return Ok(self.second_moment);
                }
                let head = z * z * self.eval(z);
                let opts = QuadOptions {
                    abs_tol: 1e-300,
                    rel_tol: 1e-11,
                    ..QuadOptions::default()
                };
                let panel = self.scale().min(z).max(1e-3 * self.scale());
                let integral =
                    integrate_to_infinity(|y| 2.0 * y * self.eval(y), z, panel, opts).map_err(
                        |e| {
                            Error::numerical(
                                "second_moment_tail",
                                format!("z = {z}: {e}"),
                            )
                        },
                    )?;
                Ok((head + integral.value).max(0.0))
            }
        }
    }
}

/// Free-function form of [`TailFunction::second_moment_tail`].
pub fn second_moment_tail(tail: &TailFunction, z: f64) -> Result<f64> {
    tail.second_moment_tail(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::special::normal_pdf;
    use proptest::prelude::*;

    #[test]
    fn normal_full_second_moment() {
        let t = TailFunction::normal(1.0).unwrap();
        assert!((t.second_moment_tail(0.0).unwrap() - 1.0).abs() < 1e-6);
        assert!((t.second_moment_tail(1e-9).unwrap() - 1.0).abs() < 1e-6);
    }

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let inner: f64 = (1..n)
            .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
            .sum();
        (f(a) + f(b) + inner) * h / 3.0
    }

    #[test]
    fn normal_truncated_second_moment_matches_density_integral() {
        // E[ξ² 1{|ξ|>z}] = ∫_z^∞ y² · 2φ(y/σ)/σ dy for ξ ~ N(0, σ²).
        for sigma in [1.0, 2.5] {
            let t = TailFunction::normal(sigma).unwrap();
            for z in [0.5, 1.0, 2.0, 4.0, 8.0] {
                let expected = simpson(
                    |y| y * y * 2.0 * normal_pdf(y / sigma) / sigma,
                    z,
                    z + 40.0 * sigma,
                    20_000,
                );
                let got = t.second_moment_tail(z).unwrap();
                assert!(
                    (got - expected).abs() <= 1e-9 * expected,
                    "sigma = {sigma}, z = {z}: {got} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn gmr_truncated_moment_matches_by_parts_oracle() {
        let spec = GmrSpec::new(1.5, 0.5, 0.7, 3.0).unwrap();
        let t = TailFunction::gmr(spec);
        for z in [0.0, 0.3, 1.0, 3.0] {
            let expected = z * z * spec.tail(z) + simpson(|y| 2.0 * y * spec.tail(y), z, 80.0, 200_000);
            let got = t.second_moment_tail(z).unwrap();
            assert!((got - expected).abs() <= 1e-8 * expected, "z = {z}: {got} vs {expected}");
        }
    }

    #[test]
    fn vanishes_far_out() {
        let t = TailFunction::normal(1.0).unwrap();
        assert!(t.second_moment_tail(60.0).unwrap() < 1e-300);
        let g = TailFunction::gmr(GmrSpec::with_defaults(1.0, 0.0).unwrap());
        assert!(g.second_moment_tail(800.0).unwrap() < 1e-300);
    }

    #[test]
    fn step_tail_uses_exact_masses() {
        // |ξ| ∈ {1, 2} with probabilities 0.75, 0.25.
        let grid = EmpiricalGrid::new(vec![(1.0, 0.25), (2.0, 0.0)]).unwrap();
        let t = TailFunction::empirical(grid);
        assert_eq!(t.eval(0.5), 1.0);
        assert_eq!(t.eval(1.0), 0.25);
        assert_eq!(t.eval(1.99), 0.25);
        assert_eq!(t.eval(2.0), 0.0);
        assert!((t.second_moment() - 1.75).abs() < 1e-15);
        assert!((t.second_moment_tail(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((t.second_moment_tail(0.99).unwrap() - 1.75).abs() < 1e-15);
        assert_eq!(t.second_moment_tail(2.0).unwrap(), 0.0);
    }

    #[test]
    fn bounded_tail_moment() {
        let t = TailFunction::gmr(GmrSpec::bounded(1.0).unwrap());
        assert_eq!(t.second_moment_tail(0.0).unwrap(), 1.0);
        assert_eq!(t.second_moment_tail(0.999).unwrap(), 1.0);
        assert_eq!(t.second_moment_tail(1.0).unwrap(), 0.0);
    }

    #[test]
    fn csv_loading() {
        let text = "x,T\n0,1\n0.5,0.5\n1.5,0\n";
        let grid = EmpiricalGrid::from_csv_reader(text.as_bytes()).unwrap();
        assert_eq!(grid.points().count(), 3);
        let bad = "x,T\n0,1\n0.5,0.5\n0.5,0\n";
        assert!(EmpiricalGrid::from_csv_reader(bad.as_bytes()).is_err());
        let not_zero = "0,1\n1,0.5\n";
        assert!(EmpiricalGrid::from_csv_reader(not_zero.as_bytes()).is_err());
        let increasing = "0,1\n1,0.2\n2,0.4\n3,0\n";
        assert!(EmpiricalGrid::from_csv_reader(increasing.as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn truncated_moment_is_non_increasing(
            m in 0.5f64..4.0,
            c1 in 0.3f64..3.0,
            mut zs in proptest::collection::vec(0.0f64..6.0, 2..8),
        ) {
            let t = TailFunction::gmr(GmrSpec::new(m, 0.5, c1, std::f64::consts::E).unwrap());
            zs.sort_by(f64::total_cmp);
            let vals: Vec<f64> = zs.iter().map(|&z| t.second_moment_tail(z).unwrap()).collect();
            for w in vals.windows(2) {
                prop_assert!(w[1] <= w[0] * (1.0 + 1e-9) + 1e-300);
            }
            prop_assert!(vals[0] <= t.second_moment() * (1.0 + 1e-9));
        }
    }
}
