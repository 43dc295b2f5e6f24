//! Two-variable mixture models: EM fitting, exact nonnegative rank 3
//! certification and topological boundary classification.
//!
//! Matrices are generic over a [`Scalar`] backend: exact [`Rational`]
//! arithmetic for decidable sign tests and `f64` for numerical iteration.

pub mod boundary;
pub mod em;
pub mod error;
pub mod exactla;
pub mod families;
pub mod harness;
pub mod par;
pub mod poly;
pub mod rank3cert;
pub mod scalar;

pub use error::{Error, Result};
pub use exactla::Matrix;
pub use scalar::{Backend, Rational, Scalar};
