//! Born–Oppenheimer matrices, adiabatic curves and perturbative C₄.

pub mod curves;
pub mod matrix;

pub use curves::{
    alpha_from_c4, c4_from_alpha, c4_second_order, diagonalize_curves, log_grid, Ambiguity,
    PotentialCurves, TrapSnapshot, AMBIGUITY_TOL,
};
pub use matrix::{
    build_interaction, spectrum_along, trap_field_along, BOMatrix, BoOperators, FieldConfig,
    RfPhase, TrapAxis,
};
