//! Exact computer algebra for R(p,q)-deformed super operator algebras.
//!
//! Operators are realized as graded shift operators on Fock-type bases with
//! index-dependent coefficient functions, so algebra relations hold (or
//! fail) exactly and for all basis indices at once. A truncated-matrix
//! evaluation at a rational sample point serves as an independent
//! cross-check oracle.

pub mod backend;
pub mod brackets;
pub mod catalog;
pub mod halfint;
pub mod harness;
pub mod laurent;
pub mod generators;
pub mod rng;
pub mod sampling;
pub mod scalar;
pub mod shiftalg;

pub use backend::{DeformationSpec, RForm, SamplePoint, SeriesTable};
pub use halfint::HalfInt;
pub use laurent::{Gen, LaurentPoly};
pub use scalar::Scalar;
