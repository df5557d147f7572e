//! Flat connections around torus knots.
//!
//! A uniform line of dipoles along a `(p, q)` torus knot produces a
//! vector potential that is curl-free away from the knot and whose loop
//! integrals are quantised by the linking number. The potential is written
//! as the curl of a Hertz vector expanded in toroidal harmonics.

pub mod error;
pub mod field;
pub mod geometry;
pub mod harmonics;
pub mod knot_source;
pub mod quadrature;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type CartesianPoint64 = geometry::CartesianPoint<f64>;
pub type ToroidalPoint64 = geometry::ToroidalPoint<f64>;
pub type KnotSpec64 = knot_source::KnotSpec<f64>;
pub type CoefficientTable64 = knot_source::HarmonicCoefficientTable<f64>;
pub type HarmonicTable64 = harmonics::HarmonicTable<f64>;
pub type FlatConnection64 = field::FlatConnection<f64>;
pub type LoopPath64 = verify::LoopPath<f64>;
pub type HolonomyReport64 = verify::HolonomyReport<f64>;

#[cfg(feature = "quad")]
pub use f128::f128 as Quad;
#[cfg(feature = "quad")]
pub type KnotSpecQuad = knot_source::KnotSpec<f128::f128>;
#[cfg(feature = "quad")]
pub type CoefficientTableQuad = knot_source::HarmonicCoefficientTable<f128::f128>;
