//! Exponential sums on curves over finite fields, their L-functions and
//! Newton polygons, and a Dwork-style p-adic cross-check.

pub mod curve;
pub mod dwork;
pub mod cyc;
pub mod ff;
pub mod lfun;
pub mod localseries;
pub mod polygon;
pub mod scalar;

/// Exact rationals used for slopes, valuations and polygon coordinates.
pub type Rational = num_rational::BigRational;
/// Elements of Q(ζ_p) with rational coefficients.
pub type CycRat = cyc::Cyclotomic<Rational>;

pub use polygon::NewtonPolygon;
