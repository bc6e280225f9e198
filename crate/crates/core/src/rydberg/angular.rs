//! Angular-momentum algebra on doubled quantum numbers (2j, 2m) so half-integers stay exact.

use std::sync::OnceLock;

fn factorials() -> &'static [f64; 171] {
    static TABLE: OnceLock<[f64; 171]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [1.0; 171];
        for i in 1..171 {
            t[i] = t[i - 1] * i as f64;
        }
        t
    })
}

fn fact(n: i64) -> f64 {
    factorials()[n as usize]
}

/// Wigner 3j symbol (j1 j2 j3; m1 m2 m3) with all arguments doubled. Racah formula.
pub fn wigner_3j(j1: i64, j2: i64, j3: i64, m1: i64, m2: i64, m3: i64) -> f64 {
    if m1 + m2 + m3 != 0 {
        return 0.0;
    }
    if m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3 {
        return 0.0;
    }
    if (j1 + m1) % 2 != 0 || (j2 + m2) % 2 != 0 || (j3 + m3) % 2 != 0 {
        return 0.0;
    }
    if j3 > j1 + j2 || j3 < (j1 - j2).abs() || (j1 + j2 + j3) % 2 != 0 {
        return 0.0;
    }
    // convert to ordinary integers where all combinations below are integral
    let a = (j1 + j2 - j3) / 2;
    let b = (j1 - j2 + j3) / 2;
    let c = (-j1 + j2 + j3) / 2;
    let tri = fact(a) * fact(b) * fact(c) / fact((j1 + j2 + j3) / 2 + 1);
    let pre = (tri
        * fact((j1 + m1) / 2)
        * fact((j1 - m1) / 2)
        * fact((j2 + m2) / 2)
        * fact((j2 - m2) / 2)
        * fact((j3 + m3) / 2)
        * fact((j3 - m3) / 2))
    .sqrt();
    let t_min = 0.max((j2 - j3 - m1) / 2).max((j1 - j3 + m2) / 2);
    let t_max = a.min((j1 - m1) / 2).min((j2 + m2) / 2);
    let mut sum = 0.0;
    for t in t_min..=t_max {
        let den = fact(t)
            * fact((j3 - j2 + m1) / 2 + t)
            * fact((j3 - j1 - m2) / 2 + t)
            * fact(a - t)
            * fact((j1 - m1) / 2 - t)
            * fact((j2 + m2) / 2 - t);
        let s = if t % 2 == 0 { 1.0 } else { -1.0 };
        sum += s / den;
    }
    let phase = if ((j1 - j2 - m3) / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    phase * pre * sum
}

/// ⟨j1 m1; j2 m2 | J M⟩, doubled arguments.
pub fn clebsch_gordan(j1: i64, m1: i64, j2: i64, m2: i64, j: i64, m: i64) -> f64 {
    let phase = if ((j1 - j2 + m) / 2).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    };
    phase * ((j + 1) as f64).sqrt() * wigner_3j(j1, j2, j, m1, m2, -m)
}

/// ⟨l m | C^k_q | l' m'⟩ of the normalized spherical harmonic, ordinary integers.
pub fn c_tensor_orbital(l: i64, m: i64, k: i64, q: i64, lp: i64, mp: i64) -> f64 {
    let phase = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    phase
        * (((2 * l + 1) * (2 * lp + 1)) as f64).sqrt()
        * wigner_3j(2 * l, 2 * k, 2 * lp, 0, 0, 0)
        * wigner_3j(2 * l, 2 * k, 2 * lp, -2 * m, 2 * q, 2 * mp)
}

/// Spherical-tensor operator acting on the orbital part: C¹_q or C²_q.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tensor {
    Dipole(i32),
    Quadrupole(i32),
}

impl Tensor {
    pub fn rank(&self) -> i64 {
        match self {
            Tensor::Dipole(_) => 1,
            Tensor::Quadrupole(_) => 2,
        }
    }
    pub fn component(&self) -> i64 {
        match *self {
            Tensor::Dipole(q) | Tensor::Quadrupole(q) => q as i64,
        }
    }
    pub fn adjoint(&self) -> Tensor {
        match *self {
            Tensor::Dipole(q) => Tensor::Dipole(-q),
            Tensor::Quadrupole(q) => Tensor::Quadrupole(-q),
        }
    }
}

/// Angular quantum numbers (l, 2j, 2m_j).
pub type AngularState = (u32, u32, i32);

/// ⟨l j m_j | C^k_q | l' j' m_j'⟩ for spin-½ coupled states, via the uncoupled basis.
pub fn angular_element(bra: AngularState, ket: AngularState, tensor: Tensor) -> f64 {
    let (l, j2, mj2) = (bra.0 as i64, bra.1 as i64, bra.2 as i64);
    let (lp, jp2, mjp2) = (ket.0 as i64, ket.1 as i64, ket.2 as i64);
    let k = tensor.rank();
    let q = tensor.component();
    if q.abs() > k || mj2 != mjp2 + 2 * q {
        return 0.0;
    }
    if (l + lp + k) % 2 != 0 || k > l + lp || k < (l - lp).abs() {
        return 0.0;
    }
    let mut total = 0.0;
    for ms2 in [-1i64, 1] {
        let ml2 = mj2 - ms2;
        let mlp2 = mjp2 - ms2;
        if ml2.abs() > 2 * l || mlp2.abs() > 2 * lp {
            continue;
        }
        let cg_bra = clebsch_gordan(2 * l, ml2, 1, ms2, j2, mj2);
        let cg_ket = clebsch_gordan(2 * lp, mlp2, 1, ms2, jp2, mjp2);
        if cg_bra == 0.0 || cg_ket == 0.0 {
            continue;
        }
        total += cg_bra * cg_ket * c_tensor_orbital(l, ml2 / 2, k, q, lp, mlp2 / 2);
    }
    total
}

/// ⟨m_s| s_q |m_s'⟩ for the spherical spin components s_{+1}, s_0, s_{−1} (ħ = 1), doubled m.
pub fn spin_spherical(ms2: i64, q: i64, msp2: i64) -> f64 {
    match (q, ms2, msp2) {
        (0, a, b) if a == b => 0.5 * a as f64,
        (1, 1, -1) => -std::f64::consts::FRAC_1_SQRT_2,
        (-1, -1, 1) => std::f64::consts::FRAC_1_SQRT_2,
        _ => 0.0,
    }
}

/// ⟨l j m_j | C¹_q s_{−q} | l' j' m_j'⟩: orbital rank-1 component times the opposite spin component.
pub fn angular_spin_element(bra: AngularState, ket: AngularState, q: i32) -> f64 {
    let (l, j2, mj2) = (bra.0 as i64, bra.1 as i64, bra.2 as i64);
    let (lp, jp2, mjp2) = (ket.0 as i64, ket.1 as i64, ket.2 as i64);
    let q = q as i64;
    if mj2 != mjp2 || (l + lp + 1) % 2 != 0 || (l - lp).abs() != 1 {
        return 0.0;
    }
    let mut total = 0.0;
    for ms2 in [-1i64, 1] {
        for msp2 in [-1i64, 1] {
            let s = spin_spherical(ms2, -q, msp2);
            if s == 0.0 {
                continue;
            }
            let ml2 = mj2 - ms2;
            let mlp2 = mjp2 - msp2;
            if ml2.abs() > 2 * l || mlp2.abs() > 2 * lp {
                continue;
            }
            let cg = clebsch_gordan(2 * l, ml2, 1, ms2, j2, mj2)
                * clebsch_gordan(2 * lp, mlp2, 1, msp2, jp2, mjp2);
            total += cg * s * c_tensor_orbital(l, ml2 / 2, 1, q, lp, mlp2 / 2);
        }
    }
    total
}

/// C^k_q(θ, φ = 0) for k ≤ 2; directions in the xz-plane keep every element real.
pub fn c_tensor_direction(k: i64, q: i64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    match (k, q) {
        (0, 0) => 1.0,
        (1, 0) => c,
        (1, 1) => -s / std::f64::consts::SQRT_2,
        (1, -1) => s / std::f64::consts::SQRT_2,
        (2, 0) => 0.5 * (3.0 * c * c - 1.0),
        (2, 1) => -(1.5f64).sqrt() * s * c,
        (2, -1) => (1.5f64).sqrt() * s * c,
        (2, 2) | (2, -2) => (0.375f64).sqrt() * s * s,
        _ => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_3j_values() {
        // (1 1 0; 0 0 0) = −1/√3
        assert!((wigner_3j(2, 2, 0, 0, 0, 0) + 1.0 / 3f64.sqrt()).abs() < 1e-14);
        // (1/2 1/2 1; 1/2 −1/2 0) = 1/√6
        assert!((wigner_3j(1, 1, 2, 1, -1, 0) - 1.0 / 6f64.sqrt()).abs() < 1e-14);
        // (2 2 2; 0 0 0) = −√(2/35)
        assert!((wigner_3j(4, 4, 4, 0, 0, 0) + (2.0f64 / 35.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn cg_orthonormality() {
        // Σ_{m1,m2} ⟨j1 m1 j2 m2|J M⟩⟨j1 m1 j2 m2|J' M⟩ = δ_JJ'
        let (j1, j2) = (6i64, 1i64);
        for jj in [5i64, 7] {
            for jp in [5i64, 7] {
                let mut s = 0.0;
                for m1 in (-j1..=j1).step_by(2) {
                    let m2 = 1 - m1;
                    if m2.abs() <= j2 {
                        s += clebsch_gordan(j1, m1, j2, m2, jj, 1)
                            * clebsch_gordan(j1, m1, j2, m2, jp, 1);
                    }
                }
                let expect = if jj == jp { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn s_to_p_dipole() {
        // |⟨S½ ½|C¹₀|P j ½⟩|² summed over j is 1/3
        let s: f64 = [1u32, 3]
            .iter()
            .map(|&j2| angular_element((0, 1, 1), (1, j2, 1), Tensor::Dipole(0)).powi(2))
            .sum();
        assert!((s - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn spin_orbit_operator_is_antisymmetric() {
        // r₋₁s₊₁ − r₊₁s₋₁ is anti-Hermitian, so its real elements are antisymmetric
        let states: [AngularState; 4] = [(0, 1, 1), (1, 1, 1), (1, 3, 1), (2, 3, 1)];
        for a in states {
            for b in states {
                let o = |x: AngularState, y: AngularState| {
                    angular_spin_element(x, y, -1) - angular_spin_element(x, y, 1)
                };
                assert!((o(a, b) + o(b, a)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn direction_tensor_addition_theorem() {
        // Σ_q |C^k_q(n̂)|² = 1
        for k in 1..=2 {
            let s: f64 = (-k..=k)
                .map(|q| c_tensor_direction(k, q, 0.7).powi(2))
                .sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn selection_rules() {
        assert_eq!(
            angular_element((0, 1, 1), (2, 3, 1), Tensor::Dipole(0)),
            0.0
        );
        assert_eq!(
            angular_element((0, 1, 1), (1, 1, 1), Tensor::Quadrupole(0)),
            0.0
        );
        assert_eq!(
            angular_element((1, 1, 1), (1, 3, 3), Tensor::Dipole(0)),
            0.0
        );
    }
}
