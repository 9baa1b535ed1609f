//! Polynomial bilevel programs: exact polynomial arithmetic, semi-algebraic specifications,
//! compilers from target functions to bilevel programs, a subset-sum-interval hardness
//! reduction, and two independent value-function evaluators.
//!
//! The polynomial core is generic over [`Scalar`]; the aliases below fix the common choices.

pub mod encoder;
pub mod error;
pub mod extended;
pub mod hardness;
pub mod poly;
pub mod scalar;
pub mod semialg;
pub mod valuefn;

pub use error::{Error, Result};
pub use extended::Extended;
pub use poly::{Monomial, MonomialBasis, Polynomial};
pub use scalar::{Rational, Scalar};

/// Exact polynomial, the currency of every construction.
pub type RatPoly = Polynomial<Rational>;
/// Floating polynomial used on the grid-search path.
pub type FloatPoly = Polynomial<f64>;
pub type Float32Poly = Polynomial<f32>;
pub type ExtRational = Extended<Rational>;
pub type ExtF64 = Extended<f64>;
