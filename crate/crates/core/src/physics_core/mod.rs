//! Constants, species, Paul-trap fields, Mathieu exponents and scaled units.

pub mod constants;
pub mod mathieu;
pub mod species;
pub mod trap;
pub mod units;

pub use constants::*;
pub use species::{reduced_mass, Defect, QuantumDefectTable, Species};
pub use trap::{
    averaged_coeffs, averaged_field_partials, char_lengths, coulomb_field_norm_sq,
    coulomb_field_partials, field_norm_partials, field_norm_sq, ion_field, rf_crossover, rf_field,
    static_field, CharLengths, Partials, TrapParams, Vec3,
};
pub use units::ScaledUnits;
