//! Monte Carlo engine: compound-sum tails, moments, and stopped sums.

mod compound;
mod moments;
mod stopping;
mod tail;

pub use compound::{batch_rng, CompoundSpec, BATCH_SIZE, RNG_NAME};
pub use moments::{
    empirical_moments, index_central_moments, MomentOptions, MomentRow, MomentTable,
    DEFAULT_MOMENT_P_GRID,
};
pub use stopping::{
    fit_index_tail, sample_stopping_times, stopping_time_experiment, IndexTailFit, StoppingReport,
    StoppingRule, StoppingTimeSpec, DEFAULT_CAP,
};
pub use tail::{
    simulate_normed_sum_tail, simulate_tail, EmpiricalTail, FeasibilityGate, TailOptions, DEFAULT_MIN_HITS, MIN_PATHS,
};

pub(crate) use stopping::slope;
