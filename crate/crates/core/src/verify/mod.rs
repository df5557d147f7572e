//! Independent oracles and checks: direct line integrals over the knot,
//! the ring closed form, finite-difference curls, loop holonomy and the
//! Gauss linking integral.

mod curl;
mod holonomy;
mod oracles;
pub mod suite;

pub use curl::fd_curl;
pub use holonomy::{gauss_linking, gauss_linking_value, holonomy, Evaluator, HolonomyReport, LoopPath};
pub use oracles::{hertz_oracle, unknot_closed_form, vector_potential_oracle};
