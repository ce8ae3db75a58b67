//! Positively homogeneous optimization.
//!
//! Models problems of the form
//!
//! ```text
//! min  cᵀx + dᵀΨ(x)
//! s.t. A x + B Ψ(x) = b,   H x + K Ψ(x) ≥ p
//! ```
//!
//! where `Ψ` stacks p-norm atoms (`p ∈ (0, ∞]`) over a partition of the variables,
//! builds their closed-form duals, evaluates the Lagrangian dual function exactly,
//! reformulates several standard problem classes into this form, and checks the
//! duality relations numerically on small instances.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dual;
pub mod error;
pub mod format;
pub mod model;
pub mod ph;
pub mod sampling;
pub mod solvers;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
pub use model::{
    Block, DualProblem, Exponent, ExtendedValue, PHOProblem, PhKind, ScalarPH, ValidationReport,
    VectorPH, Violation, validate_problem,
};
