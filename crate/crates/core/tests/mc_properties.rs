use randsum_core::bound_engine::{bound_curve, CumulantModel, QEvaluator, DEFAULT_EPS_TAIL};
use randsum_core::mc_verifier::{batch_rng, simulate_tail, CompoundSpec, TailOptions};
use randsum_core::tail_core::{GmrSpec, IndexLaw, SummandLaw};

/// Hits needed before a point's upper CI end is held to the bound.
const MIN_HITS: u64 = 10;

fn specs() -> Vec<CompoundSpec> {
    vec![
        CompoundSpec::new(SummandLaw::normal(1.0).unwrap(), IndexLaw::geometric(4.0).unwrap()),
        CompoundSpec::new(SummandLaw::TwoPointPm1, IndexLaw::shifted_poisson(3.0).unwrap()),
        CompoundSpec::new(
            SummandLaw::Gmr(GmrSpec::with_defaults(1.0, 0.0).unwrap()),
            IndexLaw::deterministic(4).unwrap(),
        ),
        CompoundSpec::new(
            SummandLaw::Gmr(GmrSpec::with_defaults(2.0, 1.0).unwrap()),
            IndexLaw::explicit(vec![0.0, 0.5, 0.0, 0.0, 0.0, 0.5]).unwrap(),
        ),
    ]
}

#[test]
#[allow(clippy::needless_range_loop)]
fn empirical_tails_sit_below_the_bound_and_the_chebyshev_floor() {
    let xs: Vec<f64> = (0..=12).map(|i| 0.5 * i as f64).collect();
    let opts = TailOptions {
        level: 0.999,
        ..TailOptions::default()
    };
    for (k, spec) in specs().into_iter().enumerate() {
        let tail = spec.summand.tail_function();
        let model = CumulantModel::for_summand(&spec.summand);
        let q = QEvaluator::new(&tail, &model);
        let bound = bound_curve(&q, &spec.index, spec.summand.sigma(), &xs, DEFAULT_EPS_TAIL).unwrap();
        let mc = simulate_tail(&spec, &xs, 200_000, 40 + k as u64, opts).unwrap();
        for i in 0..xs.len() {
            // No point may show a significant violation; points with enough
            // hits must also clear the bound with their upper end.
            assert!(mc.ci_low[i] <= bound.values[i], "spec {k}, x = {}: CI lower above bound", xs[i]);
            if mc.hits[i] >= MIN_HITS {
                assert!(
                    mc.ci_high[i] <= bound.values[i],
                    "spec {k}, x = {}: CI upper {} above bound {}",
                    xs[i],
                    mc.ci_high[i],
                    bound.values[i]
                );
            }
            let floor = if xs[i] > 0.0 { (1.0 / (xs[i] * xs[i])).min(1.0) } else { 1.0 };
            assert!(mc.ci_low[i] <= floor, "spec {k}, x = {}", xs[i]);
        }
    }
}

#[test]
fn normalized_sums_have_unit_variance() {
    let n = 400_000;
    for (k, spec) in specs().into_iter().enumerate() {
        let mut rng = batch_rng(90 + k as u64, 0);
        let (mut s2, mut s4) = (0.0, 0.0);
        for _ in 0..n {
            let s = spec.sample(&mut rng);
            s2 += s * s;
            s4 += s.powi(4);
        }
        let nf = n as f64;
        let var = s2 / nf;
        let se = ((s4 / nf - var * var) / nf).sqrt();
        assert!((var - 1.0).abs() <= 4.0 * se, "spec {k}: {var} ± {se}");
    }
}

#[test]
fn simulation_is_reproducible_per_seed() {
    let spec = &specs()[1];
    let xs = [0.5, 1.0, 2.0];
    let run = |seed| simulate_tail(spec, &xs, 150_000, seed, TailOptions::default()).unwrap();
    assert_eq!(run(5), run(5));
    assert_ne!(run(5).hits, run(6).hits);
}
