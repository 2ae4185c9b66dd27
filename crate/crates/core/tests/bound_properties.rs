use std::sync::OnceLock;

use proptest::prelude::*;
use randsum_core::bound_engine::{
    q_operator, random_sum_bound, w_operator, CumulantModel, QEvaluator, DEFAULT_EPS_TAIL,
};
use randsum_core::lower_bounds::exact_two_point_tail;
use randsum_core::numeric::normal_tail;
use randsum_core::tail_core::{GmrSpec, IndexLaw, SummandLaw, TailFunction};

struct Case {
    tail: TailFunction,
    model: CumulantModel,
    sigma: f64,
}

fn case(law: SummandLaw) -> Case {
    Case {
        tail: law.tail_function(),
        model: CumulantModel::for_summand(&law),
        sigma: law.sigma(),
    }
}

/// Normal, Rademacher, Laplace-type and sub-Gaussian-type summands.
fn cases() -> &'static [Case] {
    static CASES: OnceLock<Vec<Case>> = OnceLock::new();
    CASES.get_or_init(|| {
        vec![
            case(SummandLaw::normal(1.7).unwrap()),
            case(SummandLaw::TwoPointPm1),
            case(SummandLaw::Gmr(GmrSpec::with_defaults(1.0, 0.0).unwrap())),
            case(SummandLaw::Gmr(GmrSpec::with_defaults(2.0, 0.0).unwrap())),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn q_never_exceeds_its_branches(k in 0usize..4, x in 0.01f64..15.0) {
        let c = &cases()[k];
        let q = q_operator(&c.tail, &c.model, x).unwrap();
        let w = w_operator(&c.tail, x).unwrap();
        let chernoff = (-c.model.chi_star(x).value).exp();
        prop_assert!(q.value <= w, "Q {} > W {w} at x = {x}", q.value);
        prop_assert!(q.value <= chernoff, "Q {} > exp(-chi*) {chernoff} at x = {x}", q.value);
        prop_assert!(q.value <= (c.sigma * c.sigma / (x * x)).min(1.0));
        prop_assert!(q.value >= 0.0);
    }

    #[test]
    fn q_is_non_increasing(k in 0usize..4, x in 0.01f64..12.0, dx in 0.001f64..3.0) {
        let c = &cases()[k];
        let lo = q_operator(&c.tail, &c.model, x).unwrap().value;
        let hi = q_operator(&c.tail, &c.model, x + dx).unwrap().value;
        prop_assert!(hi <= lo * (1.0 + 1e-9), "Q({}) = {hi} > Q({x}) = {lo}", x + dx);
    }
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

#[test]
fn gaussian_chernoff_branch_and_deterministic_index_dominate_the_exact_tail() {
    let tail = TailFunction::normal(1.0).unwrap();
    let model = CumulantModel::normal(1.0);
    let q = QEvaluator::new(&tail, &model);
    for x in grid(0.0, 6.0, 0.25) {
        let chernoff = q.eval(x).unwrap().chernoff;
        let want = (-0.5 * x * x).exp();
        assert!((chernoff - want).abs() <= 1e-9 * want, "x = {x}: {chernoff} vs {want}");
        for n in [2, 4, 8, 32] {
            let law = IndexLaw::deterministic(n).unwrap();
            let b = random_sum_bound(&q, &law, 1.0, x, DEFAULT_EPS_TAIL).unwrap();
            // S is exactly standard normal, so the two-sided tail is Ψ(x).
            assert!(b.value >= normal_tail(x), "n = {n}, x = {x}: {} < {}", b.value, normal_tail(x));
        }
    }
}

#[test]
fn geometric_bounds_are_monotone_and_the_sup_over_a_is_finite() {
    for c in &cases()[..3] {
        let q = QEvaluator::new(&c.tail, &c.model);
        let xs = grid(0.0, 8.0, 0.25);
        let mut sup = vec![0.0f64; xs.len()];
        for a in [2.0, 4.0, 8.0, 16.0] {
            let law = IndexLaw::geometric(a).unwrap();
            let values: Vec<f64> = xs
                .iter()
                .map(|&x| random_sum_bound(&q, &law, c.sigma, x, DEFAULT_EPS_TAIL).unwrap().value)
                .collect();
            for (i, w) in values.windows(2).enumerate() {
                assert!(w[1] <= w[0] * (1.0 + 1e-9), "A = {a}: increase at x = {}", xs[i + 1]);
            }
            for (s, v) in sup.iter_mut().zip(&values) {
                *s = s.max(*v);
            }
        }
        for (x, s) in xs.iter().zip(&sup) {
            assert!(s.is_finite() && *s <= 1.0);
            if *x > 1.0 {
                assert!(*s <= 1.0 / (x * x) + 1e-15);
            }
        }
    }
}

#[test]
fn normal_legendre_transform_and_its_gradient() {
    let model = CumulantModel::normal(1.0);
    let h = 1e-4;
    for x in grid(0.0, 10.0, 0.5) {
        let c = model.chi_star(x);
        assert!((c.value - 0.5 * x * x).abs() <= 1e-6, "x = {x}: {}", c.value);
        if x > 0.0 {
            let grad = (model.chi_star(x + h).value - model.chi_star(x - h).value) / (2.0 * h);
            assert!((grad - c.lambda).abs() <= 1e-3, "x = {x}: gradient {grad} vs lambda {}", c.lambda);
        }
    }
}

#[test]
fn legendre_gradient_for_numeric_cumulants() {
    let law = SummandLaw::Gmr(GmrSpec::with_defaults(2.0, 0.0).unwrap());
    let model = CumulantModel::for_summand(&law);
    let h = 1e-4;
    for x in [0.5, 1.0, 2.0, 4.0] {
        let c = model.chi_star(x);
        let grad = (model.chi_star(x + h).value - model.chi_star(x - h).value) / (2.0 * h);
        assert!((grad - c.lambda).abs() <= 1e-3 * c.lambda.max(1.0), "x = {x}: {grad} vs {}", c.lambda);
    }
}

#[test]
fn two_point_exact_tail_sits_below_the_series_bound() {
    let tail = TailFunction::normal(1.0).unwrap();
    let model = CumulantModel::normal(1.0);
    let q = QEvaluator::new(&tail, &model);
    for x in grid(3.0, 20.0, 0.5) {
        let exact = exact_two_point_tail(x).unwrap().exact;
        let law = IndexLaw::two_point(1.0 / (x * x).floor()).unwrap();
        let b = random_sum_bound(&q, &law, 1.0, x, DEFAULT_EPS_TAIL).unwrap();
        assert!(exact <= b.value, "x = {x}: exact {exact} > bound {}", b.value);
    }
}
