//! Rydberg-dressed atom and trapped-ion interactions: Rydberg structure,
//! Born–Oppenheimer curves, dressed potentials and entangling-gate dynamics.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected; index loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bo;
pub mod dressed;
pub mod error;
pub mod gate;
pub mod micromotion;
pub mod physics_core;
pub mod quad;
pub mod rydberg;

pub use error::{Error, Result};
