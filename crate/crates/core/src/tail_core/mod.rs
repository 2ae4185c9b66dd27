//! Tail functions, the G(m, r) family, index laws and samplers.

mod gmr;
mod index;
mod orlicz;
mod sampling;
mod tail;

pub use gmr::{gmr_tail, ml_exponents, GmrSpec, MlExponents};
pub use index::IndexLaw;
pub use orlicz::{orlicz_norm_estimate, DEFAULT_P_GRID};
pub use sampling::{sample_gmr_symmetric, SummandLaw};
pub use tail::{second_moment_tail, EmpiricalGrid, TailFunction, TailRepr};
