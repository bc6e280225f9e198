use crate::error::{Error, Result};
use crate::physics_core::Species;

/// Energy of a quantum-defect level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub energy: f64,
    pub n_star: f64,
    /// True when the species table had no entry and δ = 0 was used.
    pub fallback: bool,
}

fn check_quantum_numbers(n: u32, l: u32, j2: u32) -> Result<()> {
    if n == 0 || l >= n {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= l < n, got n={n} l={l}"
        )));
    }
    if (j2 as i64 - 2 * l as i64).abs() != 1 {
        return Err(Error::InvalidParameter(format!(
            "|j - l| must be 1/2 (l={l}, 2j={j2})"
        )));
    }
    Ok(())
}

/// E = −hcR_M/(n − δ)².
pub fn defect_energy(species: &Species, n: u32, l: u32, j2: u32) -> Result<Level> {
    check_quantum_numbers(n, l, j2)?;
    let d = species.defect(n, l, j2);
    let n_star = n as f64 - d.value;
    if !(n_star > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "effective quantum number {n_star} is not positive"
        )));
    }
    Ok(Level {
        energy: -species.rydberg_energy() / (n_star * n_star),
        n_star,
        fallback: d.fallback,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RydbergState {
    pub n: u32,
    pub l: u32,
    /// 2j.
    pub j2: u32,
    /// 2m_j.
    pub mj2: i32,
    pub energy: f64,
    pub n_star: f64,
}

impl RydbergState {
    pub fn new(species: &Species, n: u32, l: u32, j2: u32, mj2: i32) -> Result<Self> {
        check_quantum_numbers(n, l, j2)?;
        if mj2.unsigned_abs() > j2 || mj2.rem_euclid(2) != 1 {
            return Err(Error::InvalidParameter(format!(
                "invalid 2m_j = {mj2} for 2j = {j2}"
            )));
        }
        let lv = defect_energy(species, n, l, j2)?;
        Ok(Self {
            n,
            l,
            j2,
            mj2,
            energy: lv.energy,
            n_star: lv.n_star,
        })
    }

    /// nS₁/₂ with m_j = +1/2.
    pub fn s_half(species: &Species, n: u32) -> Result<Self> {
        Self::new(species, n, 0, 1, 1)
    }

    pub fn j(&self) -> f64 {
        self.j2 as f64 / 2.0
    }

    pub fn mj(&self) -> f64 {
        self.mj2 as f64 / 2.0
    }

    pub fn label(&self) -> String {
        const L: [&str; 7] = ["S", "P", "D", "F", "G", "H", "I"];
        let l = if (self.l as usize) < L.len() {
            L[self.l as usize].to_string()
        } else {
            format!("l{}", self.l)
        };
        format!("{}{}{}/2,mj={}/2", self.n, l, self.j2, self.mj2)
    }

    /// Same (n, l, j) ignoring m_j.
    pub fn same_level(&self, other: &Self) -> bool {
        self.n == other.n && self.l == other.l && self.j2 == other.j2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisSpec {
    pub n_min: u32,
    pub n_max: u32,
    pub l_max: u32,
    /// Adds the ion-induced spin-orbit term to BO matrices.
    pub include_spin_orbit: bool,
}

impl BasisSpec {
    pub fn new(n_min: u32, n_max: u32, l_max: u32) -> Result<Self> {
        let b = Self {
            n_min,
            n_max,
            l_max,
            include_spin_orbit: true,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(Error::InvalidParameter(
                "basis needs 1 <= n_min <= n_max".into(),
            ));
        }
        if self.l_max >= self.n_max {
            return Err(Error::InvalidParameter("basis needs l_max < n_max".into()));
        }
        Ok(())
    }

    /// All |n l j m_j⟩ with the given 2m_j, ordered by (n, l, j).
    pub fn states(&self, species: &Species, mj2: i32) -> Result<Vec<RydbergState>> {
        self.validate()?;
        let mut out = Vec::new();
        for n in self.n_min..=self.n_max {
            for l in 0..n.min(self.l_max + 1) {
                for j2 in [2 * l as i64 - 1, 2 * l as i64 + 1] {
                    if j2 < 1 || (mj2.unsigned_abs() as i64) > j2 {
                        continue;
                    }
                    out.push(RydbergState::new(species, n, l, j2 as u32, mj2)?);
                }
            }
        }
        Ok(out)
    }

    /// Levels (n, l, j) without m_j multiplicity.
    pub fn levels(&self) -> Vec<(u32, u32, u32)> {
        let mut out = Vec::new();
        for n in self.n_min..=self.n_max {
            for l in 0..n.min(self.l_max + 1) {
                if l > 0 {
                    out.push((n, l, 2 * l - 1));
                }
                out.push((n, l, 2 * l + 1));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics_core::{E_CHARGE, H_PLANCK};

    #[test]
    fn li_30s_30p() {
        let li = Species::lithium6();
        let s = defect_energy(&li, 30, 0, 1).unwrap().energy / H_PLANCK / 1e9;
        let p = defect_energy(&li, 30, 1, 1).unwrap().energy / H_PLANCK / 1e9;
        assert!((s + 3754.4).abs() < 0.5, "{s}");
        assert!((p + 3666.7).abs() < 0.5, "{p}");
    }

    #[test]
    fn hydrogen_ground_state() {
        let e = defect_energy(&Species::hydrogenic_static_core(), 1, 0, 1).unwrap();
        assert!((e.energy / E_CHARGE + 13.6057).abs() < 1e-4);
        assert!(e.fallback);
    }

    #[test]
    fn invalid_states_rejected() {
        let li = Species::lithium6();
        assert!(RydbergState::new(&li, 3, 3, 7, 1).is_err());
        assert!(RydbergState::new(&li, 3, 1, 5, 1).is_err());
        assert!(RydbergState::new(&li, 3, 1, 3, 5).is_err());
        assert!(RydbergState::new(&li, 3, 1, 3, 2).is_err());
    }

    #[test]
    fn basis_size_mj_half() {
        let b = BasisSpec::new(25, 35, 34).unwrap();
        assert_eq!(b.states(&Species::lithium6(), 1).unwrap().len(), 649);
        assert!(BasisSpec::new(30, 29, 3).is_err());
        assert!(BasisSpec::new(25, 30, 30).is_err());
    }
}
