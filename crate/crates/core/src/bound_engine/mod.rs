//! Upper bounds: the operators `W`, `χ*`, `Q`, the random-sum series, closed
//! forms and stopping-time exponents.

mod closed_form;
mod cumulant;
mod operators;
mod random_sum;
mod stopping;

pub(crate) use closed_form::closed_form_with;
pub use closed_form::{closed_form_geometric, closed_form_poisson, dominant_index, dominant_index_with};
pub use cumulant::{ChiStar, ChiValue, CumulantModel, CumulantSource};
pub use operators::{q_operator, w_operator, Branch, QEvaluator, QValue};
pub use random_sum::{bound_curve, random_sum_bound, BoundCurve, RandomSumBound, DEFAULT_EPS_TAIL};
pub use stopping::{moment_growth_comparison, stopping_exponents, MomentGrowthRow, StoppingExponents};
