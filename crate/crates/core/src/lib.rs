//! Analytical evaluation and constrained Hooke-Jeeves optimization of
//! inverter-fed squirrel-cage induction motors for traction drives.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod constants;
pub mod constraints;
pub mod error;
pub mod geometry;
pub mod optimizer;
pub mod performance;
pub mod reference;
pub mod spec;
pub mod study;

pub use error::{EvimError, Result, Stage};
