//! CODATA 2018 constants and isotope masses, SI units throughout.

use std::f64::consts::PI;

pub const TWO_PI: f64 = 2.0 * PI;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const H_PLANCK: f64 = 6.626_070_15e-34;
pub const E_CHARGE: f64 = 1.602_176_634e-19;
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Coulomb constant 1/(4πε₀).
pub const K_COULOMB: f64 = 8.987_551_792_3e9;
pub const C_LIGHT: f64 = 299_792_458.0;
pub const M_ELECTRON: f64 = 9.109_383_701_5e-31;
pub const AMU: f64 = 1.660_539_066_60e-27;
pub const BOHR: f64 = 5.291_772_109_03e-11;
pub const HARTREE: f64 = 4.359_744_722_207_1e-18;
pub const ALPHA_FS: f64 = 7.297_352_569_3e-3;

/// Atomic unit of polarizability, 4πε₀a₀³ in C·m²/V.
pub const AU_POLARIZABILITY: f64 = 1.648_777_274_36e-41;
/// Atomic unit of electric field, E_h/(e a₀) in V/m.
pub const AU_FIELD: f64 = 5.142_206_747_63e11;

/// Neutral-atom masses in u.
pub const MASS_H1_U: f64 = 1.007_825_032_23;
pub const MASS_LI6_U: f64 = 6.015_122_887_4;
pub const MASS_LI7_U: f64 = 7.016_003_436_6;
pub const MASS_YB171_U: f64 = 170.936_325_8;

/// Static dipole polarizability of Li 2S₁/₂ in atomic units.
pub const ALPHA_LI_GROUND_AU: f64 = 164.11;

/// ω = 2π f.
pub fn angular(freq_hz: f64) -> f64 {
    TWO_PI * freq_hz
}

pub fn joule_to_hz(e: f64) -> f64 {
    e / H_PLANCK
}

pub fn hz_to_joule(f: f64) -> f64 {
    f * H_PLANCK
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_constants_are_consistent() {
        let k = 1.0 / (4.0 * PI * EPSILON_0);
        assert!((k / K_COULOMB - 1.0).abs() < 1e-10);
        assert!((H_PLANCK / TWO_PI / HBAR - 1.0).abs() < 1e-9);
        // published values are rounded independently; residuals sit near 1e-9
        let a0 = HBAR * HBAR / (M_ELECTRON * K_COULOMB * E_CHARGE * E_CHARGE);
        assert!((a0 / BOHR - 1.0).abs() < 5e-9);
        let eh = K_COULOMB * E_CHARGE * E_CHARGE / BOHR;
        assert!((eh / HARTREE - 1.0).abs() < 5e-9);
        let au_pol = 4.0 * PI * EPSILON_0 * BOHR.powi(3);
        assert!((au_pol / AU_POLARIZABILITY - 1.0).abs() < 1e-9);
        assert!((HARTREE / (E_CHARGE * BOHR) / AU_FIELD - 1.0).abs() < 1e-9);
    }
}
