//! Linear Paul trap fields and the transverse-axis field norm seen by the atom.

use super::constants::*;
use super::mathieu;
use super::species::Species;
use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapParams {
    /// Frequency of the static (axial) confinement, rad/s.
    pub omega_i: f64,
    pub omega_rf: f64,
    pub q: f64,
    pub a: f64,
}

impl TrapParams {
    /// Static frequency plus rf drive; a = −2ω_i²/Ω_rf².
    pub fn new(omega_i: f64, omega_rf: f64, q: f64) -> Result<Self> {
        if !(omega_i >= 0.0) {
            return Err(Error::InvalidParameter(
                "omega_i must be non-negative".into(),
            ));
        }
        let a = if omega_rf > 0.0 {
            -2.0 * omega_i * omega_i / (omega_rf * omega_rf)
        } else {
            0.0
        };
        let t = Self {
            omega_i,
            omega_rf,
            q,
            a,
        };
        t.validate()?;
        Ok(t)
    }

    /// Pure rf trap (a = 0, no static field).
    pub fn rf_only(omega_rf: f64, q: f64) -> Result<Self> {
        Self::new(0.0, omega_rf, q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_rf > 0.0) {
            return Err(Error::InvalidParameter("Omega_rf must be positive".into()));
        }
        if !(self.q.abs() < 0.9) {
            return Err(Error::InvalidParameter(format!(
                "|q| = {} must be below 0.9",
                self.q.abs()
            )));
        }
        // lowest stability region of the transverse Mathieu problem
        mathieu::characteristic_exponent(self.a, self.q)?;
        Ok(())
    }

    /// Transverse secular frequency βΩ_rf/2.
    pub fn secular_frequency(&self) -> Result<f64> {
        Ok(0.5 * self.omega_rf * mathieu::characteristic_exponent(self.a, self.q)?)
    }

    /// Lowest-order (Ω_rf/2)√(a + q²/2).
    pub fn secular_frequency_lowest_order(&self) -> f64 {
        0.5 * self.omega_rf * mathieu::beta_lowest_order(self.a, self.q)
    }

    /// Basis frequency Ω_rf q/2^{3/2} used for the rf-only ion.
    pub fn pseudo_frequency(&self) -> f64 {
        self.omega_rf * self.q / 2f64.powf(1.5)
    }

    /// ω_i² + Ω_rf² q cos(Ω_rf t): the x-axis field per unit displacement, times 2e/m.
    fn transverse_curvature(&self, t: f64) -> f64 {
        self.omega_i * self.omega_i
            + self.omega_rf * self.omega_rf * self.q * (self.omega_rf * t).cos()
    }
}

pub fn static_field(r: Vec3, trap: &TrapParams, ion: &Species) -> Vec3 {
    let c = ion.mass * trap.omega_i * trap.omega_i / E_CHARGE;
    [0.5 * c * r[0], 0.5 * c * r[1], -c * r[2]]
}

pub fn rf_field(r: Vec3, t: f64, trap: &TrapParams, ion: &Species) -> Vec3 {
    let c = ion.mass * trap.omega_rf * trap.omega_rf * trap.q / (2.0 * E_CHARGE)
        * (trap.omega_rf * t).cos();
    [c * r[0], -c * r[1], 0.0]
}

/// Coulomb field at `r` of a unit charge sitting at `source`.
pub fn ion_field(r: Vec3, source: Vec3) -> Result<Vec3> {
    let d = [r[0] - source[0], r[1] - source[1], r[2] - source[2]];
    let n2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    if n2 == 0.0 {
        return Err(Error::Singular(
            "field evaluated at the ion position".into(),
        ));
    }
    let c = K_COULOMB * E_CHARGE / (n2 * n2.sqrt());
    Ok([c * d[0], c * d[1], c * d[2]])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharLengths {
    pub ell_z: f64,
    pub ell_perp: f64,
}

pub fn char_lengths(trap: &TrapParams, ion: &Species) -> Result<CharLengths> {
    if !(trap.omega_i > 0.0) {
        return Err(Error::InvalidParameter(
            "char_lengths needs omega_i > 0".into(),
        ));
    }
    let ell_z = (K_COULOMB * E_CHARGE * E_CHARGE / (ion.mass * trap.omega_i * trap.omega_i)).cbrt();
    Ok(CharLengths {
        ell_z,
        ell_perp: 2f64.powf(2.0 / 3.0) * ell_z,
    })
}

/// Distance along x where the peak rf field equals the ion's Coulomb field.
pub fn rf_crossover(trap: &TrapParams, ion: &Species) -> f64 {
    (2.0 * K_COULOMB * E_CHARGE * E_CHARGE
        / (ion.mass * trap.omega_rf * trap.omega_rf * trap.q.abs()))
    .cbrt()
}

/// |E|² on the transverse axis is K1 u² + C s⁻⁴ + K2 u s⁻²,
/// u = x_a + d (atom position), s = x_a − x_i + d (atom–ion separation).
#[derive(Debug, Clone, Copy)]
struct FieldCoeffs {
    k1: f64,
    k2: f64,
    c: f64,
}

fn coeffs(t: f64, trap: &TrapParams, ion: &Species) -> FieldCoeffs {
    let w = trap.transverse_curvature(t);
    FieldCoeffs {
        k1: ion.mass * ion.mass * w * w / (4.0 * E_CHARGE * E_CHARGE),
        k2: ion.mass * K_COULOMB * w,
        c: E_CHARGE * E_CHARGE * K_COULOMB * K_COULOMB,
    }
}

/// Rf-period averages of (K1, K2); C is constant.
pub fn averaged_coeffs(trap: &TrapParams, ion: &Species) -> (f64, f64, f64) {
    let m = ion.mass;
    let w0 = trap.omega_i * trap.omega_i;
    let w1 = trap.omega_rf * trap.omega_rf * trap.q;
    let k1 = m * m * (w0 * w0 + 0.5 * w1 * w1) / (4.0 * E_CHARGE * E_CHARGE);
    let k2 = m * K_COULOMB * w0;
    (k1, k2, E_CHARGE * E_CHARGE * K_COULOMB * K_COULOMB)
}

fn separation(x_a: f64, x_i: f64, d: f64) -> Result<(f64, f64)> {
    let s = x_a - x_i + d;
    if s == 0.0 {
        return Err(Error::Singular(
            "atom and ion coincide (x_a − x_i + d = 0)".into(),
        ));
    }
    Ok((x_a + d, s))
}

pub fn field_norm_sq(
    x_a: f64,
    x_i: f64,
    t: f64,
    d: f64,
    trap: &TrapParams,
    ion: &Species,
) -> Result<f64> {
    let (u, s) = separation(x_a, x_i, d)?;
    let k = coeffs(t, trap, ion);
    let s2 = s * s;
    Ok(k.k1 * u * u + k.c / (s2 * s2) + k.k2 * u / s2)
}

/// ∂_i^j ∂_a^k f for j + k ≤ 3, indexed `[j][k]`; entries with j + k > 3 are zero.
pub type Partials = [[f64; 4]; 4];

/// D^n s^p = p(p−1)…(p−n+1) s^{p−n}.
fn power_derivative(s: f64, p: i32, n: usize) -> f64 {
    let mut c = 1.0;
    for m in 0..n as i32 {
        c *= (p - m) as f64;
    }
    c * s.powi(p - n as i32)
}

pub fn field_norm_partials(
    x_a: f64,
    x_i: f64,
    t: f64,
    d: f64,
    trap: &TrapParams,
    ion: &Species,
) -> Result<Partials> {
    let (u, s) = separation(x_a, x_i, d)?;
    let k = coeffs(t, trap, ion);
    Ok(partials_from(u, s, k.k1, k.k2, k.c))
}

/// Same table with K1, K2 replaced by their rf-period averages.
pub fn averaged_field_partials(
    x_a: f64,
    x_i: f64,
    d: f64,
    trap: &TrapParams,
    ion: &Species,
) -> Result<Partials> {
    let (u, s) = separation(x_a, x_i, d)?;
    let (k1, k2, c) = averaged_coeffs(trap, ion);
    Ok(partials_from(u, s, k1, k2, c))
}

/// Ion Coulomb field only (trap off): f = C s⁻⁴.
pub fn coulomb_field_norm_sq(x_a: f64, x_i: f64, d: f64) -> Result<f64> {
    let (_, s) = separation(x_a, x_i, d)?;
    Ok(E_CHARGE * E_CHARGE * K_COULOMB * K_COULOMB / s.powi(4))
}

pub fn coulomb_field_partials(x_a: f64, x_i: f64, d: f64) -> Result<Partials> {
    let (u, s) = separation(x_a, x_i, d)?;
    Ok(partials_from(
        u,
        s,
        0.0,
        0.0,
        E_CHARGE * E_CHARGE * K_COULOMB * K_COULOMB,
    ))
}

fn partials_from(u: f64, s: f64, k1: f64, k2: f64, c: f64) -> Partials {
    let mut out = [[0.0; 4]; 4];
    let u2_derivs = [u * u, 2.0 * u, 2.0, 0.0];
    for j in 0..4 {
        for kk in 0..(4 - j) {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let n = j + kk;
            let mut v = c * sign * power_derivative(s, -4, n);
            let mut cross = u * power_derivative(s, -2, n);
            if kk > 0 {
                cross += kk as f64 * power_derivative(s, -2, n - 1);
            }
            v += k2 * sign * cross;
            if j == 0 {
                v += k1 * u2_derivs[kk];
            }
            out[j][kk] = v;
        }
    }
    out
}
