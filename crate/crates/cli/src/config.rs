//! On-disk experiment configuration (TOML).
//!
//! Every section is optional and falls back to its default. Command-line
//! flags override file values; the output directory falls back to
//! `RANDSUM_OUT_DIR` and then to `randsum-out`.

use std::path::{Path, PathBuf};

use randsum_core::lower_bounds::OverlayConstants;
use randsum_core::mc_verifier::{FeasibilityGate, StoppingRule, StoppingTimeSpec, DEFAULT_CAP, DEFAULT_MOMENT_P_GRID};
use randsum_core::tail_core::{GmrSpec, IndexLaw, SummandLaw};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const DEFAULT_OUT_DIR: &str = "randsum-out";

/// Largest number of grid points accepted.
const MAX_GRID_POINTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub summand: SummandConfig,
    #[serde(default)]
    pub index: IndexConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub bound: BoundConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub exponents: ExponentsConfig,
    #[serde(default)]
    pub lower: LowerConfig,
}

fn default_seed() -> u64 {
    1
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: default_seed(),
            out: None,
            summand: SummandConfig::default(),
            index: IndexConfig::default(),
            grid: GridConfig::default(),
            bound: BoundConfig::default(),
            simulate: SimulateConfig::default(),
            verify: VerifyConfig::default(),
            exponents: ExponentsConfig::default(),
            lower: LowerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SummandConfig {
    Normal {
        #[serde(default = "one")]
        sigma: f64,
    },
    /// `±1` with equal probability.
    Rademacher,
    /// Symmetric law with tail `exp(−c1 x^m log^r(c2 + x))`; `m = inf` means
    /// `±1`-bounded.
    Gmr {
        m: f64,
        r: f64,
        #[serde(default = "one")]
        c1: f64,
        #[serde(default = "euler")]
        c2: f64,
    },
    /// `±ess_sup` with equal probability.
    Bounded { ess_sup: f64 },
}

fn one() -> f64 {
    1.0
}

fn euler() -> f64 {
    std::f64::consts::E
}

impl Default for SummandConfig {
    fn default() -> Self {
        SummandConfig::Normal { sigma: 1.0 }
    }
}

impl SummandConfig {
    pub fn law(&self) -> Result<SummandLaw, CliError> {
        let field = |e| CliError::field("summand", e);
        Ok(match *self {
            SummandConfig::Normal { sigma } => SummandLaw::normal(sigma).map_err(field)?,
            SummandConfig::Rademacher => SummandLaw::TwoPointPm1,
            SummandConfig::Gmr { m, r, c1, c2 } => SummandLaw::Gmr(GmrSpec::new(m, r, c1, c2).map_err(field)?),
            SummandConfig::Bounded { ess_sup } => SummandLaw::Gmr(GmrSpec::bounded(ess_sup).map_err(field)?),
        })
    }

    /// The G(m, r) spec behind the summand, if it has one.
    pub fn gmr(&self) -> Result<GmrSpec, CliError> {
        match self.law()? {
            SummandLaw::Gmr(spec) => Ok(spec),
            _ => Err(CliError::Config(
                "summand: this command needs kind = \"gmr\" or \"bounded\"".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IndexConfig {
    Geometric { mean: f64 },
    ShiftedPoisson { mean: f64 },
    Deterministic { n: u64 },
    TwoPoint { alpha: f64 },
    /// `probs[k] = P(η = k + 1)`.
    Explicit { probs: Vec<f64> },
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig::Geometric { mean: 4.0 }
    }
}

impl IndexConfig {
    pub fn law(&self) -> Result<IndexLaw, CliError> {
        let field = |e| CliError::field("index", e);
        match self {
            IndexConfig::Geometric { mean } => IndexLaw::geometric(*mean),
            IndexConfig::ShiftedPoisson { mean } => IndexLaw::shifted_poisson(*mean),
            IndexConfig::Deterministic { n } => IndexLaw::deterministic(*n),
            IndexConfig::TwoPoint { alpha } => IndexLaw::two_point(*alpha),
            IndexConfig::Explicit { probs } => IndexLaw::explicit(probs.clone()),
        }
        .map_err(field)
    }
}

/// `x = start, start + step, …, stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            start: 0.0,
            stop: 6.0,
            step: 0.25,
        }
    }
}

impl GridConfig {
    /// Parses `"start:stop:step"`.
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = spec.split(':').collect();
        let bad = || CliError::Config(format!("--grid: expected \"start:stop:step\", got {spec:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        let grid = Self {
            start: num(parts[0])?,
            stop: num(parts[1])?,
            step: num(parts[2])?,
        };
        grid.points()?;
        Ok(grid)
    }

    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        let Self { start, stop, step } = *self;
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err(CliError::Config("grid: start, stop and step must be finite".into()));
        }
        if !(step > 0.0) || stop < start {
            return Err(CliError::Config(format!(
                "grid: need step > 0 and stop >= start, got {start}:{stop}:{step}"
            )));
        }
        let count = ((stop - start) / step + 1e-9).floor();
        if count >= MAX_GRID_POINTS as f64 {
            return Err(CliError::Config(format!("grid: more than {MAX_GRID_POINTS} points")));
        }
        Ok((0..=count as usize).map(|i| start + step * i as f64).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundConfig {
    /// Index mass left out of the bound series.
    pub eps_tail: f64,
}

impl Default for BoundConfig {
    fn default() -> Self {
        Self { eps_tail: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulateMode {
    /// Two-sided tail of the normalized compound sum.
    Tail,
    /// `|S|_p` against the moment inequality.
    Moments,
    /// Moments under a path-dependent stopping rule.
    Stopping,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GatePolicy {
    Off,
    Strict,
    Trim,
}

impl GatePolicy {
    pub fn gate(self, min_hits: u64) -> FeasibilityGate {
        match self {
            GatePolicy::Off => FeasibilityGate::Off,
            GatePolicy::Strict => FeasibilityGate::Strict { min_hits },
            GatePolicy::Trim => FeasibilityGate::Trim { min_hits },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StoppingConfig {
    /// First `n` with `|Σ ξ| ≥ level`.
    FirstPassage { level: f64 },
    /// First passage, stopped at `window` at the latest.
    FixedWindowMax { window: u64, level: f64 },
    /// `η` drawn from the `[index]` law independently of the summands.
    Independent,
}

impl Default for StoppingConfig {
    fn default() -> Self {
        StoppingConfig::FirstPassage { level: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub mode: SimulateMode,
    pub paths: u64,
    pub level: f64,
    pub gate: GatePolicy,
    pub min_hits: u64,
    /// Moment orders for the `moments` and `stopping` modes.
    pub p_grid: Vec<f64>,
    /// `C_B` in `B(p) = C_B p / log p`.
    pub c_b: f64,
    pub bootstrap: usize,
    pub stopping: StoppingConfig,
    pub stopping_cap: u64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            mode: SimulateMode::Tail,
            paths: 1_000_000,
            level: 0.99,
            gate: GatePolicy::Off,
            min_hits: 100,
            p_grid: DEFAULT_MOMENT_P_GRID.to_vec(),
            c_b: 1.0,
            bootstrap: 200,
            stopping: StoppingConfig::default(),
            stopping_cap: DEFAULT_CAP,
        }
    }
}

impl SimulateConfig {
    pub fn stopping_spec(&self, index: &IndexConfig) -> Result<StoppingTimeSpec, CliError> {
        let rule = match self.stopping {
            StoppingConfig::FirstPassage { level } => StoppingRule::FirstPassage { level },
            StoppingConfig::FixedWindowMax { window, level } => StoppingRule::FixedWindowMax { window, level },
            StoppingConfig::Independent => StoppingRule::Independent { law: index.law()? },
        };
        StoppingTimeSpec::with_cap(rule, self.stopping_cap).map_err(|e| CliError::field("simulate.stopping", e))
    }
}

/// Curve the simulated tail is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReferenceConfig {
    /// The series bound, optionally multiplied by `scale`.
    Theorem {
        #[serde(default = "one")]
        scale: f64,
    },
    /// `min(1, scale·exp(−rate·x^{…}(log x)^{…}))` with the exponents of the
    /// summand and index laws.
    ClosedForm { rate: f64, scale: f64 },
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        ReferenceConfig::Theorem { scale: 1.0 }
    }
}

/// `scale·exp(−rate·…)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConstants {
    pub rate: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub paths: u64,
    pub level: f64,
    /// Points with fewer hits are reported as skipped (infeasible).
    pub min_hits: u64,
    pub reference: ReferenceConfig,
    /// Optional lower overlay, reported next to the verdicts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<CurveConstants>,
    /// Grid of the simulation run; must match `[grid]` when given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_grid: Option<GridConfig>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            paths: 200_000,
            level: 0.99,
            min_hits: 10,
            reference: ReferenceConfig::default(),
            lower: None,
            mc_grid: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentRow {
    pub m: f64,
    pub r: f64,
    /// Index tail exponents; both or neither.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExponentsConfig {
    pub rows: Vec<ExponentRow>,
}

impl Default for ExponentsConfig {
    fn default() -> Self {
        let row = |m, r, ab: Option<(f64, f64)>| ExponentRow {
            m,
            r,
            a: ab.map(|p| p.0),
            b: ab.map(|p| p.1),
        };
        Self {
            rows: vec![
                row(0.5, 1.0, None),
                row(1.0, -1.0, None),
                row(1.0, 0.0, None),
                row(1.5, -1.0, None),
                row(2.0, 0.0, None),
                row(3.0, 1.0, None),
                row(f64::INFINITY, 0.0, None),
                row(1.5, 1.0, None),
                row(2.0, 0.0, Some((2.0, 0.0))),
                row(f64::INFINITY, 0.0, Some((1.0, 0.0))),
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerKind {
    /// Exact tail of the two-point index construction.
    TwoPoint,
    /// Simulated geometric compound tail with overlay curves.
    Geometric,
    /// Poisson overlay curves.
    Poisson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LowerConfig {
    pub kind: LowerKind,
    pub paths: u64,
    pub level: f64,
    pub gate: GatePolicy,
    pub min_hits: u64,
    /// Smallest `x` in the slope regression.
    pub slope_from: f64,
    pub lower_curve: CurveConstants,
    pub upper_curve: CurveConstants,
}

impl Default for LowerConfig {
    fn default() -> Self {
        let unit = CurveConstants { rate: 1.0, scale: 1.0 };
        Self {
            kind: LowerKind::TwoPoint,
            paths: 1_000_000,
            level: 0.99,
            gate: GatePolicy::Trim,
            min_hits: 100,
            slope_from: 2.0,
            lower_curve: unit,
            upper_curve: unit,
        }
    }
}

impl LowerConfig {
    pub fn constants(&self) -> OverlayConstants {
        OverlayConstants {
            lower_scale: self.lower_curve.scale,
            lower_rate: self.lower_curve.rate,
            upper_scale: self.upper_curve.scale,
            upper_rate: self.upper_curve.rate,
        }
    }
}

/// Command-line overrides, applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub grid: Option<GridConfig>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(format!("cannot serialize config: {e}")))
    }

    /// Applies flag overrides, then `env_out` and the default for the
    /// output directory.
    pub fn resolve(mut self, overrides: &Overrides, env_out: Option<PathBuf>) -> Self {
        if let Some(seed) = overrides.seed {
            self.seed = seed;
        }
        if let Some(grid) = overrides.grid {
            self.grid = grid;
        }
        self.out = overrides
            .out
            .clone()
            .or(self.out)
            .or(env_out)
            .or_else(|| Some(PathBuf::from(DEFAULT_OUT_DIR)));
        self
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }

    /// SHA-256 of the TOML form, leaving out the output directory.
    pub fn hash(&self) -> Result<String, CliError> {
        let content = Self {
            out: None,
            ..self.clone()
        };
        Ok(hex::encode(Sha256::digest(content.to_toml()?.as_bytes())))
    }
}
