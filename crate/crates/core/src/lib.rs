//! Non-asymptotic exponential bounds for tails of normed random sums
//! `S = Σ_{i≤η} ξ(i) / (σ√A)` with a random number of summands, together
//! with the exact and Monte Carlo oracles used to check them.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bound_engine;
pub mod error;
pub mod lower_bounds;
pub mod mc_verifier;
pub mod numeric;
pub mod tail_core;

pub use error::{Error, Result};
