//! Rydberg dressing: three-level ground shift, the dressed atom–ion potential,
//! its trap-modified form Ṽ, third-order Taylor coefficients and drive matching.

use nalgebra::{Matrix3, SymmetricEigen};

use crate::bo::alpha_from_c4;
use crate::error::{Error, Result};
use crate::physics_core::{
    averaged_field_partials, coulomb_field_norm_sq, coulomb_field_partials, field_norm_partials,
    field_norm_sq, reduced_mass, Partials, Species, TrapParams, E_CHARGE, HBAR, K_COULOMB,
};
use crate::rydberg::RydbergState;

/// Smallest accepted |Δ₀/Ω| unless a caller overrides it.
pub const DEFAULT_DETUNING_RATIO: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct DressingParams {
    /// Effective Rydberg Rabi frequency, rad/s.
    pub omega: f64,
    /// Rydberg detuning, rad/s; blue is positive.
    pub delta0: f64,
    /// Dipole-trap leg, rad/s.
    pub omega_d: f64,
    pub delta_d: f64,
    pub target: RydbergState,
}

impl DressingParams {
    /// Dressing laser only; the dipole leg is switched off (Ω_d = 0, Δ_d = −Δ₀).
    pub fn new(omega: f64, delta0: f64, target: RydbergState) -> Self {
        Self {
            omega,
            delta0,
            omega_d: 0.0,
            delta_d: -delta0.abs(),
            target,
        }
    }

    pub fn with_dipole_leg(mut self, omega_d: f64, delta_d: f64) -> Self {
        self.omega_d = omega_d;
        self.delta_d = delta_d;
        self
    }

    pub fn validate(&self, min_ratio: f64) -> Result<()> {
        if !(self.omega.is_finite() && self.delta0.is_finite() && self.omega >= 0.0) {
            return Err(Error::InvalidParameter(
                "dressing needs finite Ω ≥ 0 and Δ₀".into(),
            ));
        }
        if self.delta0.abs() < min_ratio * self.omega {
            return Err(Error::InvalidParameter(format!(
                "|Δ₀/Ω| = {:.3} below the guard {min_ratio}",
                self.delta0.abs() / self.omega
            )));
        }
        Ok(())
    }

    /// Blue detuning is required for the adiabatic-potential path.
    pub fn validate_blue(&self, min_ratio: f64) -> Result<()> {
        self.validate(min_ratio)?;
        if self.delta0 <= 0.0 {
            return Err(Error::InvalidParameter(
                "dressed potential needs Δ₀ > 0".into(),
            ));
        }
        Ok(())
    }
}

/// V(R) = −A R_w⁴/(R⁴ + R_w⁴).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticPotential {
    pub a: f64,
    pub r_w: f64,
    pub c4: f64,
}

impl AdiabaticPotential {
    pub fn new(params: &DressingParams, c4: f64) -> Result<Self> {
        params.validate_blue(DEFAULT_DETUNING_RATIO)?;
        if !(c4 > 0.0) {
            return Err(Error::InvalidParameter("C₄ must be positive".into()));
        }
        Ok(Self {
            a: HBAR * params.omega * params.omega / params.delta0,
            r_w: (c4 / (HBAR * params.delta0)).powf(0.25),
            c4,
        })
    }

    pub fn alpha_rydberg(&self) -> f64 {
        alpha_from_c4(self.c4)
    }
}

pub fn v_dressed(r: f64, pot: &AdiabaticPotential) -> f64 {
    let w4 = pot.r_w.powi(4);
    -pot.a * w4 / (r.powi(4) + w4)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceProfile {
    /// dV/dR, N.
    pub force: f64,
    /// d²V/dR², N/m.
    pub curvature: f64,
}

pub fn force_profile(d: f64, pot: &AdiabaticPotential) -> Result<ForceProfile> {
    if !(d > 0.0) {
        return Err(Error::InvalidParameter("force profile needs d > 0".into()));
    }
    let w4 = pot.r_w.powi(4);
    let d4 = d.powi(4);
    let den = d4 + w4;
    let force = 4.0 * pot.a * w4 * d.powi(3) / (den * den);
    let curvature = 4.0 * pot.a * w4 * d * d * (3.0 * w4 - 5.0 * d4) / den.powi(3);
    Ok(ForceProfile { force, curvature })
}

/// Separation of maximal force, d* = (3/5)^{1/4} R_w.
pub fn optimal_separation(pot: &AdiabaticPotential) -> f64 {
    0.6f64.powf(0.25) * pot.r_w
}

/// R* = (2 μ_ai C₄^g/ħ²)^{1/2}, the ground-state atom–ion length scale.
pub fn ground_length_scale(atom: &Species, ion: &Species, alpha_ground: f64) -> f64 {
    let c4g = 0.5 * alpha_ground * (E_CHARGE * K_COULOMB).powi(2);
    (2.0 * reduced_mass(atom, ion) * c4g / (HBAR * HBAR)).sqrt()
}

/// Eigenvalues (rad/s, ascending) with their |g⟩ weights for the 3×3 model.
fn spectrum3(params: &DressingParams, stark: f64) -> [(f64, f64); 3] {
    let m = Matrix3::new(
        0.0,
        params.omega_d,
        params.omega,
        params.omega_d,
        -params.delta_d,
        0.0,
        params.omega,
        0.0,
        -params.delta0 - stark,
    );
    let eig = SymmetricEigen::new(m);
    let mut out = [(0.0, 0.0); 3];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Adiabatic branch connected to |g⟩: the couplings only produce avoided crossings,
/// so the branch keeps the energy rank it has far from the ion.
fn g_branch(params: &DressingParams, stark: f64) -> ((f64, f64), (f64, f64)) {
    let far = spectrum3(params, 0.0);
    let rank = (0..3)
        .max_by(|&a, &b| far[a].1.total_cmp(&far[b].1))
        .unwrap_or(0);
    (spectrum3(params, stark)[rank], far[rank])
}

/// Exact g-branch eigenvalue of the three-level model relative to its R → ∞ value,
/// which removes the dipole-trap shift and the flat light shift together.
pub fn three_level_ground(r: f64, params: &DressingParams, c4: f64, r_star: f64) -> Result<f64> {
    if !(r > r_star) {
        return Err(Error::InvalidParameter(format!(
            "R = {r:.3e} m is inside the ground-state length scale R* = {r_star:.3e} m"
        )));
    }
    let ((e_r, w), (e_inf, _)) = g_branch(params, c4 / (HBAR * r.powi(4)));
    if w < 0.5 {
        return Err(Error::LevelCrossing { r, weight: w });
    }
    Ok(HBAR * (e_r - e_inf))
}

/// |g⟩ weight of the g branch at R.
pub fn ground_character(r: f64, params: &DressingParams, c4: f64) -> f64 {
    g_branch(params, c4 / (HBAR * r.powi(4))).0 .1
}

/// Which electric fields enter Ṽ.
#[derive(Debug, Clone, Copy)]
pub enum FieldModel<'a> {
    /// Ion Coulomb field only.
    Coulomb,
    /// Ion plus Paul-trap fields on the transverse axis.
    Trap {
        trap: &'a TrapParams,
        ion: &'a Species,
    },
}

/// Ṽ = ħΩ²/(Δ₀ + α_R |E|²/2ħ) with ion at x_i and atom at d + x_a.
/// Unshifted: Ṽ → A far from the ion.
pub fn v_tilde(
    x_i: f64,
    x_a: f64,
    t: f64,
    d: f64,
    params: &DressingParams,
    pot: &AdiabaticPotential,
    field: FieldModel,
) -> Result<f64> {
    let f = match field {
        FieldModel::Coulomb => coulomb_field_norm_sq(x_a, x_i, d)?,
        FieldModel::Trap { trap, ion } => field_norm_sq(x_a, x_i, t, d, trap, ion)?,
    };
    let (xi1, xi2, xi3) = xis_si(params, pot);
    Ok(xi1 / (xi2 + xi3 * f))
}

/// SI ξ₁ = ħΩ², ξ₂ = Δ₀, ξ₃ = α_R/2ħ.
pub(crate) fn xis_si(params: &DressingParams, pot: &AdiabaticPotential) -> (f64, f64, f64) {
    (
        HBAR * params.omega * params.omega,
        params.delta0,
        pot.alpha_rydberg() / (2.0 * HBAR),
    )
}

/// Truncated bivariate Taylor polynomial Σ c[j][k] x_iʲ x_aᵏ, j + k ≤ 3.
type Jet = [[f64; 4]; 4];

fn jet_mul(a: &Jet, b: &Jet) -> Jet {
    let mut out = [[0.0; 4]; 4];
    for j1 in 0..4 {
        for k1 in 0..(4 - j1) {
            if a[j1][k1] == 0.0 {
                continue;
            }
            for j2 in 0..(4 - j1) {
                for k2 in 0..(4 - j1 - j2).min(4 - k1) {
                    if j1 + j2 + k1 + k2 <= 3 {
                        out[j1 + j2][k1 + k2] += a[j1][k1] * b[j2][k2];
                    }
                }
            }
        }
    }
    out
}

const FACT: [f64; 4] = [1.0, 1.0, 2.0, 6.0];

/// ξ₁/g with g = ξ₂ + ξ₃ f, composed order by order: 1/g = g₀⁻¹ Σ (−δ/g₀)ᵐ.
fn compose(p: &Partials, xi1: f64, xi2: f64, xi3: f64) -> Jet {
    let g0 = xi2 + xi3 * p[0][0];
    let mut u: Jet = [[0.0; 4]; 4];
    for j in 0..4 {
        for k in 0..(4 - j) {
            if j + k > 0 {
                u[j][k] = -xi3 * p[j][k] / (FACT[j] * FACT[k] * g0);
            }
        }
    }
    let mut total: Jet = [[0.0; 4]; 4];
    let mut power: Jet = [[0.0; 4]; 4];
    power[0][0] = 1.0;
    for _ in 0..4 {
        for j in 0..4 {
            for k in 0..(4 - j) {
                total[j][k] += power[j][k];
            }
        }
        power = jet_mul(&power, &u);
    }
    for row in total.iter_mut() {
        for v in row.iter_mut() {
            *v *= xi1 / g0;
        }
    }
    total
}

/// Taylor expansion of Ṽ about (x_i, x_a) = (0, 0) to third order.
/// `coeff[j][k]` multiplies x_iʲ x_aᵏ, so it equals ∂_iʲ∂_aᵏ Ṽ/(j! k!).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorCoeffs {
    pub coeff: [[f64; 4]; 4],
    pub t: f64,
    pub d: f64,
}

impl TaylorCoeffs {
    pub fn value(&self) -> f64 {
        self.coeff[0][0]
    }

    pub fn derivative(&self, j: usize, k: usize) -> f64 {
        if j + k > 3 {
            return 0.0;
        }
        self.coeff[j][k] * FACT[j] * FACT[k]
    }

    pub fn eval(&self, x_i: f64, x_a: f64) -> f64 {
        let mut s = 0.0;
        for j in 0..4 {
            for k in 0..(4 - j) {
                s += self.coeff[j][k] * x_i.powi(j as i32) * x_a.powi(k as i32);
            }
        }
        s
    }
}

pub fn taylor3(
    d: f64,
    t: f64,
    params: &DressingParams,
    pot: &AdiabaticPotential,
    field: FieldModel,
) -> Result<TaylorCoeffs> {
    let p = match field {
        FieldModel::Coulomb => coulomb_field_partials(0.0, 0.0, d)?,
        FieldModel::Trap { trap, ion } => field_norm_partials(0.0, 0.0, t, d, trap, ion)?,
    };
    let (xi1, xi2, xi3) = xis_si(params, pot);
    Ok(TaylorCoeffs {
        coeff: compose(&p, xi1, xi2, xi3),
        t,
        d,
    })
}

/// Expansion of ξ₁/(ξ₂ + ξ₃⟨f⟩): the field norm is averaged over one rf period
/// before the dressing denominator is applied.
pub fn taylor3_averaged(
    d: f64,
    params: &DressingParams,
    pot: &AdiabaticPotential,
    field: FieldModel,
) -> Result<TaylorCoeffs> {
    let p = match field {
        FieldModel::Coulomb => coulomb_field_partials(0.0, 0.0, d)?,
        FieldModel::Trap { trap, ion } => averaged_field_partials(0.0, 0.0, d, trap, ion)?,
    };
    let (xi1, xi2, xi3) = xis_si(params, pot);
    Ok(TaylorCoeffs {
        coeff: compose(&p, xi1, xi2, xi3),
        t: f64::NAN,
        d,
    })
}

/// Oscillator length ℓ = √(ħ/(2mω)).
pub fn oscillator_length(ion: &Species, omega_i: f64) -> f64 {
    (HBAR / (2.0 * ion.mass * omega_i)).sqrt()
}

/// Drive strength ηΩ_{S−M} (rad/s) for which the ion drive ηħΩ_{S−M}(â + â†) cancels the
/// linear ion term ⟨∂Ṽ/∂x_i⟩ ℓ_i (â + â†)/2 carried by the (1 + cos)/2-modulated potential
/// when both spins are up.
pub fn match_drive(
    d: f64,
    params: &DressingParams,
    pot: &AdiabaticPotential,
    field: FieldModel,
    ion: &Species,
    omega_i: f64,
) -> Result<f64> {
    let tc = taylor3_averaged(d, params, pot, field)?;
    Ok(-tc.derivative(1, 0) * oscillator_length(ion, omega_i) / (2.0 * HBAR))
}

/// Inverse Rydberg admixture (Δ₀/Ω)².
pub fn lifetime_enhancement(params: &DressingParams) -> Result<f64> {
    if !(params.delta0.abs() > params.omega) {
        return Err(Error::InvalidParameter(
            "lifetime enhancement needs |Δ₀| > Ω".into(),
        ));
    }
    Ok((params.delta0 / params.omega).powi(2))
}
