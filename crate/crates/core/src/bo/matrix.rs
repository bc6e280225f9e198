//! Born–Oppenheimer Hamiltonian of the Rydberg electron in the ion field.
//!
//! The quantization axis points from the ion to the atom core, so the charge–dipole and
//! quadrupole terms conserve m_j and each m_j block is diagonalized separately. In atomic
//! units (R in a₀) the interaction reads
//!   H' = z/R² − λ r² C²₀/R³ + (α²μ/R²)(E_a − E_b)⟨r₋₁s₊₁ − r₊₁s₋₁⟩,   λ = (m_c − m_e)/M,
//! where the r² C²₀ piece collects the scalar r²/2 and the (r·R̂)² quadrupole term.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::physics_core::{
    rf_field, static_field, Species, TrapParams, ALPHA_FS, AU_FIELD, BOHR, HARTREE, M_ELECTRON,
};
use crate::rydberg::{
    angular_element, angular_spin_element, c_tensor_direction, radial_moment, BasisSpec,
    RydbergState, Tensor, WavefunctionStore,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RfPhase {
    MaxPlus,
    Zero,
    MaxMinus,
}

impl RfPhase {
    pub fn cos(&self) -> f64 {
        match self {
            RfPhase::MaxPlus => 1.0,
            RfPhase::Zero => 0.0,
            RfPhase::MaxMinus => -1.0,
        }
    }
}

/// Trap axis along which the atom sits relative to the ion at the trap centre.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrapAxis {
    /// Transverse (rf) direction.
    X,
    /// Axial (static) direction.
    Z,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldConfig {
    None,
    Trap {
        trap: TrapParams,
        ion: Species,
        axis: TrapAxis,
        phase: RfPhase,
    },
}

#[derive(Debug, Clone)]
pub struct BOMatrix {
    pub basis: Arc<Vec<RydbergState>>,
    pub r: f64,
    pub field_config: FieldConfig,
    /// Energies in J.
    pub matrix: DMatrix<f64>,
}

/// Operator matrices of one m_j block, assembled once and reused for every R.
pub struct BoOperators {
    pub basis: Arc<Vec<RydbergState>>,
    pub spec: BasisSpec,
    pub species: Species,
    /// ⟨a|r C¹₀|b⟩ in a₀.
    pub z: DMatrix<f64>,
    /// ⟨a|r² C²₀|b⟩ in a₀².
    pub quad: DMatrix<f64>,
    /// (E_a − E_b)/E_h ⟨a|r₋₁s₊₁ − r₊₁s₋₁|b⟩ in a₀.
    pub spin_orbit: DMatrix<f64>,
    pub energies: Vec<f64>,
}

fn mass_factor(species: &Species) -> f64 {
    (species.core_mass() - M_ELECTRON) / species.mass
}

impl BoOperators {
    pub fn new(store: &WavefunctionStore, spec: &BasisSpec, mj2: i32) -> Result<Self> {
        let species = store.species().clone();
        let basis = spec.states(&species, mj2)?;
        if basis.is_empty() {
            return Err(Error::InvalidParameter("empty basis".into()));
        }
        let n = basis.len();
        let mut z = DMatrix::zeros(n, n);
        let mut quad = DMatrix::zeros(n, n);
        let mut so = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in a..n {
                let (sa, sb) = (&basis[a], &basis[b]);
                let (ka, kb) = ((sa.l, sa.j2, sa.mj2), (sb.l, sb.j2, sb.mj2));
                let dl = (sa.l as i64 - sb.l as i64).abs();
                if dl == 1 {
                    let ang = angular_element(ka, kb, Tensor::Dipole(0));
                    let so_ang = if spec.include_spin_orbit {
                        angular_spin_element(ka, kb, -1) - angular_spin_element(ka, kb, 1)
                    } else {
                        0.0
                    };
                    if ang != 0.0 || so_ang != 0.0 {
                        let r1 = radial_moment(
                            &*store.get(sa.n, sa.l, sa.j2)?,
                            &*store.get(sb.n, sb.l, sb.j2)?,
                            1,
                        )?;
                        z[(a, b)] = ang * r1;
                        z[(b, a)] = ang * r1;
                        let de = (sa.energy - sb.energy) / HARTREE;
                        so[(a, b)] = de * so_ang * r1;
                        // antisymmetric operator times antisymmetric energy difference
                        so[(b, a)] = de * so_ang * r1;
                    }
                } else if dl == 0 || dl == 2 {
                    let ang = angular_element(ka, kb, Tensor::Quadrupole(0));
                    if ang != 0.0 {
                        let r2 = radial_moment(
                            &*store.get(sa.n, sa.l, sa.j2)?,
                            &*store.get(sb.n, sb.l, sb.j2)?,
                            2,
                        )?;
                        quad[(a, b)] = ang * r2;
                        quad[(b, a)] = ang * r2;
                    }
                }
            }
        }
        let energies = basis.iter().map(|s| s.energy).collect();
        Ok(Self {
            basis: Arc::new(basis),
            spec: *spec,
            species,
            z,
            quad,
            spin_orbit: so,
            energies,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, n: u32, l: u32, j2: u32) -> Option<usize> {
        self.basis
            .iter()
            .position(|s| s.n == n && s.l == l && s.j2 == j2)
    }

    /// Charge–dipole part in J at separation `r` (m).
    pub fn dipole_term(&self, r: f64) -> DMatrix<f64> {
        let ra = r / BOHR;
        &self.z * (HARTREE / (ra * ra))
    }

    /// Scalar-plus-quadrupole r² part in J.
    pub fn quadrupole_term(&self, r: f64) -> DMatrix<f64> {
        let ra = r / BOHR;
        &self.quad * (-mass_factor(&self.species) * HARTREE / ra.powi(3))
    }

    /// Ion-induced spin-orbit part in J.
    pub fn spin_orbit_term(&self, r: f64) -> DMatrix<f64> {
        let ra = r / BOHR;
        let mu = self.species.reduced_mass_ratio();
        &self.spin_orbit * (ALPHA_FS * ALPHA_FS * mu * HARTREE / (ra * ra))
    }

    pub fn build_interaction(&self, r: f64) -> Result<BOMatrix> {
        if !(r > 0.0) {
            return Err(Error::InvalidParameter(
                "separation R must be positive".into(),
            ));
        }
        let mut m = self.dipole_term(r) + self.quadrupole_term(r) + self.spin_orbit_term(r);
        for (i, e) in self.energies.iter().enumerate() {
            m[(i, i)] += e;
        }
        Ok(BOMatrix {
            basis: self.basis.clone(),
            r,
            field_config: FieldConfig::None,
            matrix: m,
        })
    }

    /// Adds the quasi-static trap field at the atom (on the chosen trap axis) as a uniform field
    /// along the quantization axis.
    pub fn add_trap_snapshot(
        &self,
        mut matrix: BOMatrix,
        trap: &TrapParams,
        ion: &Species,
        axis: TrapAxis,
        phase: RfPhase,
    ) -> Result<BOMatrix> {
        if matrix.field_config != FieldConfig::None {
            return Err(Error::InvalidParameter(
                "matrix already carries a trap snapshot".into(),
            ));
        }
        let e_along = trap_field_along(matrix.r, trap, ion, axis, phase);
        matrix.matrix += &self.z * (HARTREE * e_along / AU_FIELD);
        matrix.field_config = FieldConfig::Trap {
            trap: *trap,
            ion: ion.clone(),
            axis,
            phase,
        };
        Ok(matrix)
    }
}

/// Trap field component along the ion→atom direction at distance `r` on `axis`, V/m.
pub fn trap_field_along(
    r: f64,
    trap: &TrapParams,
    ion: &Species,
    axis: TrapAxis,
    phase: RfPhase,
) -> f64 {
    let pos = match axis {
        TrapAxis::X => [r, 0.0, 0.0],
        TrapAxis::Z => [0.0, 0.0, r],
    };
    let es = static_field(pos, trap, ion);
    // t chosen so that cos(Ω t) takes the requested value
    let t = phase.cos().acos() / trap.omega_rf;
    let erf = rf_field(pos, t, trap, ion);
    let k = match axis {
        TrapAxis::X => 0,
        TrapAxis::Z => 2,
    };
    es[k] + erf[k]
}

pub fn build_interaction(r: f64, ops: &BoOperators) -> Result<BOMatrix> {
    ops.build_interaction(r)
}

/// Eigenvalues (J, ascending) of the charge–dipole plus quadrupole interaction with the
/// separation along n̂ = (sin θ, 0, cos θ), in a basis holding every m_j. Spin-orbit is omitted.
/// Used to check rotational invariance of the field-free spectrum.
pub fn spectrum_along(
    store: &WavefunctionStore,
    spec: &BasisSpec,
    r: f64,
    theta: f64,
) -> Result<Vec<f64>> {
    let species = store.species();
    let mut basis = Vec::new();
    let max_j2 = 2 * spec.l_max + 1;
    for mj2 in (-(max_j2 as i32)..=max_j2 as i32).step_by(2) {
        basis.extend(spec.states(species, mj2)?);
    }
    let n = basis.len();
    let ra = r / BOHR;
    let lam = mass_factor(species);
    let mut m = DMatrix::<f64>::zeros(n, n);
    for a in 0..n {
        m[(a, a)] += basis[a].energy / HARTREE;
        for b in 0..n {
            let (sa, sb) = (&basis[a], &basis[b]);
            let (ka, kb) = ((sa.l, sa.j2, sa.mj2), (sb.l, sb.j2, sb.mj2));
            let dl = (sa.l as i64 - sb.l as i64).abs();
            let q = ((sa.mj2 - sb.mj2) / 2) as i64;
            if dl == 1 && q.abs() <= 1 {
                // r·n̂ = r Σ_q (−1)^q C¹_q(r̂) C¹_{−q}(n̂)
                let ang = angular_element(ka, kb, Tensor::Dipole(q as i32));
                if ang != 0.0 {
                    let phase = if q % 2 == 0 { 1.0 } else { -1.0 };
                    let r1 = radial_moment(
                        &*store.get(sa.n, sa.l, sa.j2)?,
                        &*store.get(sb.n, sb.l, sb.j2)?,
                        1,
                    )?;
                    m[(a, b)] += phase * c_tensor_direction(1, -q, theta) * ang * r1 / (ra * ra);
                }
            } else if (dl == 0 || dl == 2) && q.abs() <= 2 {
                let ang = angular_element(ka, kb, Tensor::Quadrupole(q as i32));
                if ang != 0.0 {
                    let phase = if q % 2 == 0 { 1.0 } else { -1.0 };
                    let r2 = radial_moment(
                        &*store.get(sa.n, sa.l, sa.j2)?,
                        &*store.get(sb.n, sb.l, sb.j2)?,
                        2,
                    )?;
                    m[(a, b)] -=
                        lam * phase * c_tensor_direction(2, -q, theta) * ang * r2 / ra.powi(3);
                }
            }
        }
    }
    let mut ev: Vec<f64> = m
        .symmetric_eigenvalues()
        .iter()
        .map(|e| e * HARTREE)
        .collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(ev)
}
