//! Numerical building blocks: quadrature, 1-D optimization, special
//! functions and exact binomial intervals.

pub mod binomial;
pub mod optimize;
pub mod quad;
pub mod special;

pub use binomial::{clopper_pearson, Interval};
pub use optimize::{bracket_min, golden_section_min, GoldenOptions, Minimum};
pub use quad::{integrate, integrate_to_infinity, Integral, QuadOptions};
pub use special::{ln_normal_tail, normal_pdf, normal_tail};
