use super::angular::{angular_element, Tensor};
use super::cache::WavefunctionStore;
use super::numerov::radial_moment;
use super::state::{BasisSpec, RydbergState};
use crate::error::{Error, Result};
use crate::physics_core::{AU_POLARIZABILITY, BOHR, E_CHARGE};

/// z-dipole matrix element ⟨a|z|b⟩ in units of a₀ (same m_j required for non-zero value).
pub fn z_element(store: &WavefunctionStore, a: &RydbergState, b: &RydbergState) -> Result<f64> {
    let ang = angular_element((a.l, a.j2, a.mj2), (b.l, b.j2, b.mj2), Tensor::Dipole(0));
    if ang == 0.0 {
        return Ok(0.0);
    }
    let wa = store.get(a.n, a.l, a.j2)?;
    let wb = store.get(b.n, b.l, b.j2)?;
    Ok(ang * radial_moment(&wa, &wb, 1)?)
}

/// Static polarizability α = 2 Σ_k |⟨k|e z|s⟩|²/(E_k − E_s), C·m²/V.
pub fn polarizability(
    state: &RydbergState,
    store: &WavefunctionStore,
    basis: &BasisSpec,
) -> Result<f64> {
    let species = store.species();
    let spacing = 2.0 * species.rydberg_energy() / state.n_star.powi(3);
    let partners = basis.states(species, state.mj2)?;
    let mut alpha = 0.0;
    for k in partners
        .iter()
        .filter(|k| k.l + 1 == state.l || state.l + 1 == k.l)
    {
        let d = z_element(store, k, state)?;
        if d == 0.0 {
            continue;
        }
        let de = k.energy - state.energy;
        if de.abs() < 1e-6 * spacing {
            return Err(Error::DegenerateDenominator(state.label(), k.label()));
        }
        let dip = E_CHARGE * BOHR * d;
        alpha += 2.0 * dip * dip / de;
    }
    Ok(alpha)
}

pub fn polarizability_au(
    state: &RydbergState,
    store: &WavefunctionStore,
    basis: &BasisSpec,
) -> Result<f64> {
    Ok(polarizability(state, store, basis)? / AU_POLARIZABILITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics_core::Species;
    use crate::rydberg::StepSpec;

    #[test]
    fn li_30s_positive_and_converged() {
        let li = Species::lithium6();
        let store = WavefunctionStore::new(li.clone(), StepSpec::default());
        let s = RydbergState::s_half(&li, 30).unwrap();
        let narrow = polarizability_au(&s, &store, &BasisSpec::new(27, 33, 2).unwrap()).unwrap();
        let wide = polarizability_au(&s, &store, &BasisSpec::new(25, 35, 2).unwrap()).unwrap();
        assert!(narrow > 0.0);
        assert!((narrow / wide - 1.0).abs() < 0.01);
    }
}
