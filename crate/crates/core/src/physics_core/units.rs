//! Dimensionless units for the transverse micromotion problem.
//!
//! Energies in ħΩ_rf, lengths in ℓ = √(ħ/(μ_ai ω̄)) with ω̄ = √(ω_a ω_i), time τ = Ω_rf t.

use super::constants::*;
use super::species::{reduced_mass, Species};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledUnits {
    pub length_unit: f64,
    pub omega_bar: f64,
    pub energy_unit: f64,
    pub omega_rf: f64,
    /// Atom–ion reduced mass μ_ai.
    pub mu: f64,
    /// E* = ħ⁴/(2 α_↑ μ² e² k_C²).
    pub e_star: f64,
    /// Ground-state polarizability α_↑ in SI.
    pub alpha_ground: f64,
}

impl ScaledUnits {
    pub fn new(
        atom: &Species,
        ion: &Species,
        omega_a: f64,
        omega_i: f64,
        omega_rf: f64,
        alpha_ground: f64,
    ) -> Result<Self> {
        if !(omega_a > 0.0 && omega_i > 0.0 && omega_rf > 0.0 && alpha_ground > 0.0) {
            return Err(Error::InvalidParameter(
                "scaled units need positive ω_a, ω_i, Ω_rf and α_↑".into(),
            ));
        }
        let mu = reduced_mass(atom, ion);
        let omega_bar = (omega_a * omega_i).sqrt();
        let length_unit = (HBAR / (mu * omega_bar)).sqrt();
        let ek = E_CHARGE * K_COULOMB;
        let e_star = HBAR.powi(4) / (2.0 * alpha_ground * mu * mu * ek * ek);
        Ok(Self {
            length_unit,
            omega_bar,
            energy_unit: HBAR * omega_rf,
            omega_rf,
            mu,
            e_star,
            alpha_ground,
        })
    }

    pub fn to_si_length(&self, x: f64) -> f64 {
        x * self.length_unit
    }
    pub fn from_si_length(&self, x: f64) -> f64 {
        x / self.length_unit
    }
    pub fn to_si_energy(&self, e: f64) -> f64 {
        e * self.energy_unit
    }
    pub fn from_si_energy(&self, e: f64) -> f64 {
        e / self.energy_unit
    }
    pub fn to_si_time(&self, tau: f64) -> f64 {
        tau / self.omega_rf
    }
    pub fn from_si_time(&self, t: f64) -> f64 {
        t * self.omega_rf
    }

    /// Field unit ℰ = e k_C/ℓ², so that f = ℰ² f̄.
    pub fn field_unit(&self) -> f64 {
        E_CHARGE * K_COULOMB / (self.length_unit * self.length_unit)
    }

    /// β₁…β₅ for an ion of mass `m_i` with static frequency ω_i.
    pub fn betas(&self, ion: &Species, omega_i_static: f64) -> [f64; 5] {
        let m = ion.mass;
        let l3 = self.length_unit.powi(3);
        let l6 = l3 * l3;
        let ek2 = (E_CHARGE * E_CHARGE * K_COULOMB).powi(2);
        let w2 = omega_i_static * omega_i_static;
        let r2 = self.omega_rf * self.omega_rf;
        [
            m * m * w2 * w2 * l6 / ek2,
            m * m * r2 * r2 * l6 / ek2,
            m * m * w2 * r2 * l6 / ek2,
            m * w2 * l3 / (K_COULOMB * E_CHARGE * E_CHARGE),
            m * r2 * l3 / (K_COULOMB * E_CHARGE * E_CHARGE),
        ]
    }

    /// (ξ̄₁, ξ̄₂, ξ̄₃) for dressing Ω, detuning Δ₀ and Rydberg polarizability α_R.
    pub fn xis(&self, omega: f64, delta0: f64, alpha_rydberg: f64) -> [f64; 3] {
        let e = self.field_unit();
        [
            omega / self.omega_rf,
            delta0 / omega,
            alpha_rydberg * e * e / (2.0 * HBAR * omega),
        ]
    }

    /// ξ̄₃ through γ/4 · (ħω̄)²/(ħΩ E*).
    pub fn xi3_via_e_star(&self, omega: f64, alpha_rydberg: f64) -> f64 {
        let gamma = alpha_rydberg / self.alpha_ground;
        let hw = HBAR * self.omega_bar;
        0.25 * gamma * hw * hw / (HBAR * omega * self.e_star)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn units() -> ScaledUnits {
        ScaledUnits::new(
            &Species::lithium7(),
            &Species::ytterbium171_ion(),
            angular(200e3),
            angular(247.5e3),
            angular(2.5e6),
            ALPHA_LI_GROUND_AU * AU_POLARIZABILITY,
        )
        .unwrap()
    }

    #[test]
    fn round_trips() {
        let u = units();
        for x in [1e-9, 3.3e-7, 2e-6] {
            assert!((u.to_si_length(u.from_si_length(x)) / x - 1.0).abs() < 1e-12);
            assert!((u.to_si_time(u.from_si_time(x)) / x - 1.0).abs() < 1e-12);
        }
        let e = 1.3e-29;
        assert!((u.to_si_energy(u.from_si_energy(e)) / e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn xi3_two_routes_agree() {
        let u = units();
        let alpha_r = 5.8e10 * AU_POLARIZABILITY;
        let omega = angular(13.1e6);
        let direct = u.xis(omega, angular(0.8e9), alpha_r)[2];
        let via = u.xi3_via_e_star(omega, alpha_r);
        assert!((direct / via - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_positive() {
        let li = Species::lithium7();
        let yb = Species::ytterbium171_ion();
        assert!(ScaledUnits::new(&li, &yb, 0.0, 1.0, 1.0, 1.0).is_err());
    }
}
