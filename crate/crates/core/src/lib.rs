//! Differential logical relations for a simply typed calculus over the reals.

pub mod eqtheory;
pub mod interval;
pub mod quantale;
pub mod relations;
pub mod scalar;
pub mod semantics;
pub mod syntax;

use num_rational::BigRational;

pub use quantale::{ExtNonNegReal, FiniteQuantale, Lawvere, QRel, Quantale};
pub use scalar::Scalar;

/// Double-precision distances.
pub type Distance = ExtNonNegReal<f64>;
/// Exact rational distances.
pub type ExactDistance = ExtNonNegReal<BigRational>;
