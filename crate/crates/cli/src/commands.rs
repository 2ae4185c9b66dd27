//! One runner per subcommand. Each evaluates the core routines, writes the
//! CSV and JSON pair and returns a short summary.

use randsum_core::bound_engine::{
    bound_curve, closed_form_geometric, closed_form_poisson, stopping_exponents, BoundCurve, CumulantModel,
    QEvaluator,
};
use randsum_core::lower_bounds::{
    exact_two_point_tail, geometric_lower_bound_mc, poisson_lower_overlay, LowerBoundOptions,
};
use randsum_core::mc_verifier::{
    empirical_moments, simulate_tail, stopping_time_experiment, CompoundSpec, FeasibilityGate, MomentOptions,
    MomentTable, TailOptions,
};
use randsum_core::tail_core::{ml_exponents, IndexLaw, MlExponents, SummandLaw};
use serde::Serialize;

use crate::config::{
    CurveConstants, ExperimentConfig, IndexConfig, LowerKind, ReferenceConfig, SimulateMode,
};
use crate::error::CliError;
use crate::report::{csv_body, write_outputs, Written};

/// Marker written in place of a number for uncovered exponent cases.
pub const DOMAIN_ERROR: &str = "domain-error";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Bound,
    Simulate,
    Verify,
    Exponents,
    Lower,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Bound => "bound",
            Subcommand::Simulate => "simulate",
            Subcommand::Verify => "verify",
            Subcommand::Exponents => "exponents",
            Subcommand::Lower => "lower",
        }
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub written: Written,
    pub summary: String,
    /// Set when a verification found a violation.
    pub failed: bool,
}

pub fn run(cmd: Subcommand, config: &ExperimentConfig) -> Result<Outcome, CliError> {
    match cmd {
        Subcommand::Bound => run_bound(config),
        Subcommand::Simulate => run_simulate(config),
        Subcommand::Verify => run_verify(config),
        Subcommand::Exponents => run_exponents(config),
        Subcommand::Lower => run_lower(config),
    }
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn ok(written: Written, summary: String) -> Outcome {
    Outcome {
        written,
        summary,
        failed: false,
    }
}

fn compute_bound(config: &ExperimentConfig, summand: &SummandLaw, index: &IndexLaw, xs: &[f64]) -> Result<BoundCurve, CliError> {
    let tail = summand.tail_function();
    let model = CumulantModel::for_summand(summand);
    let q = QEvaluator::new(&tail, &model);
    Ok(bound_curve(&q, index, summand.sigma(), xs, config.bound.eps_tail)?)
}

pub fn run_bound(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let summand = config.summand.law()?;
    let index = config.index.law()?;
    let xs = config.grid.points()?;
    let curve = compute_bound(config, &summand, &index, &xs)?;
    let mut body = Vec::new();
    curve.write_csv(&mut body)?;
    let written = write_outputs("bound", config, &body, &curve)?;
    let summary = format!(
        "bound: {} points, value at x = {} is {:e}",
        curve.len(),
        xs[xs.len() - 1],
        curve.values[curve.len() - 1]
    );
    Ok(ok(written, summary))
}

#[derive(Debug, Serialize)]
struct StoppingResult<'a> {
    report: &'a randsum_core::mc_verifier::StoppingReport,
}

pub fn run_simulate(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let sim = &config.simulate;
    let summand = config.summand.law()?;
    let moment_options = MomentOptions {
        c_b: sim.c_b,
        bootstrap_replicates: sim.bootstrap,
        level: sim.level,
    };
    match sim.mode {
        SimulateMode::Tail => {
            let spec = CompoundSpec::new(summand, config.index.law()?);
            let xs = config.grid.points()?;
            let tail = simulate_tail(
                &spec,
                &xs,
                sim.paths,
                config.seed,
                TailOptions {
                    level: sim.level,
                    gate: sim.gate.gate(sim.min_hits),
                },
            )?;
            let mut body = Vec::new();
            tail.write_csv(&mut body)?;
            let written = write_outputs("simulate", config, &body, &tail)?;
            let summary = format!("simulate: {} points from {} paths", tail.len(), tail.n);
            Ok(ok(written, summary))
        }
        SimulateMode::Moments => {
            let spec = CompoundSpec::new(summand, config.index.law()?);
            let table = empirical_moments(&spec, &sim.p_grid, sim.paths, config.seed, moment_options)?;
            let body = moment_csv(&table, None)?;
            let written = write_outputs("simulate", config, &body, &table)?;
            let violations = table.rows.iter().filter(|r| r.s_norm > r.rhs).count();
            let summary = format!(
                "simulate: {} moment orders, {violations} with |S|_p above the moment bound",
                table.rows.len()
            );
            Ok(ok(written, summary))
        }
        SimulateMode::Stopping => {
            let spec = sim.stopping_spec(&config.index)?;
            let report = stopping_time_experiment(&spec, &summand, &sim.p_grid, sim.paths, config.seed, moment_options)?;
            let body = moment_csv(&report.moments, Some(&report.theorem_curve))?;
            let written = write_outputs("simulate", config, &body, &StoppingResult { report: &report })?;
            let summary = format!(
                "simulate: fitted index tail a = {:.3}, b = {:.3}; q = {:.4}; growth slope {:.3} vs 1/q = {:.3}",
                report.fit.a,
                report.fit.b,
                report.exponents.q,
                report.growth_slope,
                1.0 / report.exponents.q
            );
            Ok(ok(written, summary))
        }
    }
}

fn moment_csv(table: &MomentTable, curve: Option<&[f64]>) -> Result<Vec<u8>, CliError> {
    let mut header = vec!["p", "s_norm", "ci_low", "ci_high", "se", "eta_norm", "xi_norm", "b", "rhs"];
    if curve.is_some() {
        header.push("theorem_curve");
    }
    let rows = table.rows.iter().enumerate().map(|(i, r)| {
        let mut row = vec![
            format!("{}", r.p),
            num(r.s_norm),
            num(r.ci_low),
            num(r.ci_high),
            num(r.se),
            num(r.eta_norm),
            num(r.xi_norm),
            num(r.b),
            num(r.rhs),
        ];
        if let Some(c) = curve {
            row.push(num(c[i]));
        }
        row
    });
    csv_body(&header, rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PointVerdict {
    Pass,
    Fail,
    Skipped,
}

impl PointVerdict {
    fn label(self) -> &'static str {
        match self {
            PointVerdict::Pass => "PASS",
            PointVerdict::Fail => "FAIL",
            PointVerdict::Skipped => "SKIPPED",
        }
    }
}

#[derive(Debug, Serialize)]
struct VerifyPoint {
    x: f64,
    reference: f64,
    estimate: f64,
    ci_low: f64,
    ci_high: f64,
    hits: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    lower: Option<f64>,
    verdict: PointVerdict,
}

#[derive(Debug, Serialize)]
struct VerifyCounts {
    pass: usize,
    fail: usize,
    skipped_infeasible: usize,
}

#[derive(Debug, Serialize)]
struct VerifyResult {
    verdict: &'static str,
    counts: VerifyCounts,
    paths: u64,
    level: f64,
    spec_hash: String,
    points: Vec<VerifyPoint>,
}

/// `scale·exp(−rate·…)` with the exponents of the configured laws.
fn closed_form_curve(
    config: &ExperimentConfig,
    summand: &SummandLaw,
    constants: CurveConstants,
    xs: &[f64],
    what: &str,
) -> Result<Vec<f64>, CliError> {
    let ml: MlExponents = summand.ml_exponents().map_err(|e| CliError::field("summand", e))?;
    let f: fn(MlExponents, f64, f64, f64) -> f64 = match config.index {
        IndexConfig::Geometric { .. } => closed_form_geometric,
        IndexConfig::ShiftedPoisson { .. } => closed_form_poisson,
        _ => {
            return Err(CliError::Config(format!(
                "{what}: closed-form curves need a geometric or shifted_poisson index"
            )))
        }
    };
    xs.iter()
        .map(|&x| {
            let v = f(ml, constants.rate, constants.scale, x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(CliError::Config(format!("{what}: closed form undefined at x = {x}; use a grid with x > 1")))
            }
        })
        .collect()
}

pub fn run_verify(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let v = &config.verify;
    if let Some(mc_grid) = v.mc_grid {
        if mc_grid != config.grid {
            return Err(CliError::Config(format!(
                "verify.mc_grid {}:{}:{} does not match grid {}:{}:{}",
                mc_grid.start, mc_grid.stop, mc_grid.step, config.grid.start, config.grid.stop, config.grid.step
            )));
        }
    }
    let summand = config.summand.law()?;
    let index = config.index.law()?;
    let xs = config.grid.points()?;
    let reference = match v.reference {
        ReferenceConfig::Theorem { scale } => {
            if !(scale.is_finite() && scale > 0.0) {
                return Err(CliError::Config(format!("verify.reference: scale must be > 0, got {scale}")));
            }
            let curve = compute_bound(config, &summand, &index, &xs)?;
            curve.values.iter().map(|b| (scale * b).min(1.0)).collect()
        }
        ReferenceConfig::ClosedForm { rate, scale } => {
            closed_form_curve(config, &summand, CurveConstants { rate, scale }, &xs, "verify.reference")?
        }
    };
    let lower = v
        .lower
        .map(|k| closed_form_curve(config, &summand, k, &xs, "verify.lower"))
        .transpose()?;
    let spec = CompoundSpec::new(summand, index);
    let tail = simulate_tail(
        &spec,
        &xs,
        v.paths,
        config.seed,
        TailOptions {
            level: v.level,
            gate: FeasibilityGate::Off,
        },
    )?;

    let points: Vec<VerifyPoint> = (0..xs.len())
        .map(|i| {
            let verdict = if tail.hits[i] < v.min_hits {
                PointVerdict::Skipped
            } else if tail.ci_high[i] <= reference[i] {
                PointVerdict::Pass
            } else {
                PointVerdict::Fail
            };
            VerifyPoint {
                x: xs[i],
                reference: reference[i],
                estimate: tail.estimate[i],
                ci_low: tail.ci_low[i],
                ci_high: tail.ci_high[i],
                hits: tail.hits[i],
                lower: lower.as_ref().map(|l| l[i]),
                verdict,
            }
        })
        .collect();
    let count = |want| points.iter().filter(|p| p.verdict == want).count();
    let counts = VerifyCounts {
        pass: count(PointVerdict::Pass),
        fail: count(PointVerdict::Fail),
        skipped_infeasible: count(PointVerdict::Skipped),
    };
    let verdict = if counts.fail > 0 {
        "FAIL"
    } else if counts.pass == 0 {
        "SKIPPED"
    } else {
        "PASS"
    };

    let mut header = vec!["x", "reference", "estimate", "ci_low", "ci_high", "hits"];
    if lower.is_some() {
        header.push("lower");
    }
    header.push("verdict");
    let body = csv_body(
        &header,
        points.iter().map(|p| {
            let mut row = vec![
                format!("{}", p.x),
                num(p.reference),
                num(p.estimate),
                num(p.ci_low),
                num(p.ci_high),
                p.hits.to_string(),
            ];
            if let Some(l) = p.lower {
                row.push(num(l));
            }
            row.push(p.verdict.label().to_string());
            row
        }),
    )?;
    let summary = format!(
        "verify: {verdict} (pass {}, fail {}, skipped-infeasible {})",
        counts.pass, counts.fail, counts.skipped_infeasible
    );
    let failed = counts.fail > 0;
    let result = VerifyResult {
        verdict,
        counts,
        paths: tail.n,
        level: tail.level,
        spec_hash: tail.spec_hash.clone(),
        points,
    };
    let written = write_outputs("verify", config, &body, &result)?;
    Ok(Outcome {
        written,
        summary,
        failed,
    })
}

#[derive(Debug, Serialize)]
struct ExponentResult {
    m: f64,
    r: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
    /// `(M, L)` or the domain error.
    ml: Result<MlExponents, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stopping: Option<Result<(f64, f64), String>>,
}

pub fn run_exponents(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut results = Vec::new();
    for (k, row) in config.exponents.rows.iter().enumerate() {
        let stopping = match (row.a, row.b) {
            (Some(a), Some(b)) => Some(
                stopping_exponents(a, b, row.m, row.r)
                    .map(|s| (s.q, s.w))
                    .map_err(|e| e.to_string()),
            ),
            (None, None) => None,
            _ => {
                return Err(CliError::Config(format!(
                    "exponents.rows[{k}]: give both a and b or neither"
                )))
            }
        };
        results.push(ExponentResult {
            m: row.m,
            r: row.r,
            a: row.a,
            b: row.b,
            ml: ml_exponents(row.m, row.r).map_err(|e| e.to_string()),
            stopping,
        });
    }
    let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    let body = csv_body(
        &["m", "r", "a", "b", "M", "L", "q", "w"],
        results.iter().map(|e| {
            let (big_m, big_l) = match &e.ml {
                Ok(ml) => (format!("{}", ml.power), format!("{}", ml.log_power)),
                Err(_) => (DOMAIN_ERROR.to_string(), DOMAIN_ERROR.to_string()),
            };
            let (q, w) = match &e.stopping {
                None => (String::new(), String::new()),
                Some(Ok((q, w))) => (format!("{q}"), format!("{w}")),
                Some(Err(_)) => (DOMAIN_ERROR.to_string(), DOMAIN_ERROR.to_string()),
            };
            vec![format!("{}", e.m), format!("{}", e.r), opt(e.a), opt(e.b), big_m, big_l, q, w]
        }),
    )?;
    let errors = results
        .iter()
        .filter(|e| e.ml.is_err() || matches!(e.stopping, Some(Err(_))))
        .count();
    let written = write_outputs("exponents", config, &body, &results)?;
    let summary = format!("exponents: {} rows, {errors} with domain errors", results.len());
    Ok(ok(written, summary))
}

pub fn run_lower(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let lc = &config.lower;
    let xs = config.grid.points()?;
    match lc.kind {
        LowerKind::TwoPoint => {
            let rows = xs
                .iter()
                .map(|&x| exact_two_point_tail(x).map_err(|e| CliError::field("grid", e)))
                .collect::<Result<Vec<_>, _>>()?;
            let body = csv_body(
                &["x", "exact", "single_term", "floor", "x2_exact"],
                rows.iter().map(|t| {
                    vec![
                        format!("{}", t.x),
                        num(t.exact),
                        num(t.single_term),
                        num(t.floor),
                        num(t.x * t.x * t.exact),
                    ]
                }),
            )?;
            let below = rows.iter().filter(|t| t.exact < t.floor).count();
            let written = write_outputs("lower", config, &body, &rows)?;
            Ok(ok(written, format!("lower: {} points, {below} below the floor", rows.len())))
        }
        LowerKind::Geometric => {
            let spec = config.summand.gmr()?;
            let a = match config.index {
                IndexConfig::Geometric { mean } => mean,
                _ => return Err(CliError::Config("index: lower kind \"geometric\" needs a geometric index".into())),
            };
            let mc = geometric_lower_bound_mc(
                &spec,
                a,
                &xs,
                lc.paths,
                config.seed,
                LowerBoundOptions {
                    constants: lc.constants(),
                    level: lc.level,
                    gate: lc.gate.gate(lc.min_hits),
                    slope_from: lc.slope_from,
                },
            )?;
            let t = &mc.tail;
            let body = csv_body(
                &["x", "estimate", "ci_low", "ci_high", "hits", "lower", "upper"],
                (0..t.len()).map(|i| {
                    vec![
                        format!("{}", t.x[i]),
                        num(t.estimate[i]),
                        num(t.ci_low[i]),
                        num(t.ci_high[i]),
                        t.hits[i].to_string(),
                        num(mc.lower[i]),
                        num(mc.upper[i]),
                    ]
                }),
            )?;
            let written = write_outputs("lower", config, &body, &mc)?;
            let target = mc.exponents.random_sum_power();
            let summary = match mc.slope {
                Some(s) => format!("lower: {} points, slope {s:.3} vs 2M/(M+2) = {target:.3}", t.len()),
                None => format!("lower: {} points, too few for a slope", t.len()),
            };
            Ok(ok(written, summary))
        }
        LowerKind::Poisson => {
            let spec = config.summand.gmr()?;
            let rows = poisson_lower_overlay(&spec, &xs, lc.constants())?;
            let body = csv_body(
                &["x", "lower", "upper"],
                rows.iter().map(|r| vec![format!("{}", r.x), num(r.lower), num(r.upper)]),
            )?;
            let written = write_outputs("lower", config, &body, &rows)?;
            Ok(ok(written, format!("lower: {} overlay points", rows.len())))
        }
    }
}
