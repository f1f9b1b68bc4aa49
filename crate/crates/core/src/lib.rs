//! Exact computer-algebra kernel for formal pseudo-differential operators
//! in n variables over truncated iterated Laurent series.
//!
//! The crate is organized bottom-up:
//!
//! - [`rational`], [`bound`]: exact coefficients and window-edge arithmetic
//! - [`series`]: truncated multivariate Laurent/Taylor series with
//!   auxiliary nilpotent parameters (dual numbers, formal flow times)
//! - [`psdo`]: the operator algebra (Leibniz product, order and highest
//!   term, +/- split, residue and pairing, inverses, roots, symbols)
//! - [`dressing`]: constructive conjugacy of commuting tuples to the
//!   coordinate derivations, and the one-variable residue criterion
//! - [`hierarchy`]: the generalized KP flows, conserved quantities,
//!   Zakharov-Shabat and Sato-Wilson consistency checks
//! - [`poisson`]: functionals, gradients, Lie-Poisson and R-matrix brackets
//! - [`expr`]: the operator expression language and canonical printer
//! - [`report`]: machine-readable reports for the `psdo` CLI
//! - [`sample`]: seeded random generators shared by the self-check suite
//! - [`selfcheck`]: the property suite behind `psdo check`

pub mod bound;
pub mod dressing;
pub mod error;
pub mod expr;
pub mod hierarchy;
pub mod poisson;
pub mod psdo;
pub mod rational;
pub mod report;
pub mod sample;
pub mod selfcheck;
pub mod series;

pub use error::{Error, Result};
