use super::constants::*;
use crate::error::{Error, Result};

const LI_DEFECTS: &str = include_str!("../../data/li_defects.csv");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefectEntry {
    pub l: u32,
    /// Twice the total angular momentum.
    pub j2: u32,
    pub delta0: f64,
    pub delta2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumDefectTable {
    pub species: String,
    pub entries: Vec<DefectEntry>,
    pub note: String,
}

/// A quantum-defect lookup result. `fallback` marks a missing (l, j) entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Defect {
    pub value: f64,
    pub fallback: bool,
}

impl QuantumDefectTable {
    pub fn lithium() -> Self {
        Self::parse(LI_DEFECTS)
            .expect("bundled defect table parses")
            .remove(0)
    }

    /// Parse records `species, l, j, delta0[, delta2][, comment]`; `#` starts a comment line.
    /// Returns one table per species in order of first appearance.
    pub fn parse(text: &str) -> Result<Vec<Self>> {
        let mut tables: Vec<QuantumDefectTable> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |what: &str| {
                Error::InvalidParameter(format!("defect table line {}: {what}", lineno + 1))
            };
            let fields: Vec<&str> = line.splitn(6, ',').map(str::trim).collect();
            if fields.len() < 4 {
                return Err(bad("expected at least species, l, j, delta0"));
            }
            let species = fields[0].to_string();
            let l: u32 = fields[1].parse().map_err(|_| bad("l is not an integer"))?;
            let j2 = parse_half_integer(fields[2]).ok_or_else(|| bad("j is not a half-integer"))?;
            if (j2 as i64 - 2 * l as i64).abs() != 1 {
                return Err(bad("|j - l| must be 1/2"));
            }
            let delta0: f64 = fields[3]
                .parse()
                .map_err(|_| bad("delta0 is not a number"))?;
            let delta2 = fields
                .get(4)
                .and_then(|s| s.parse::<f64>().ok())
                .unwrap_or(0.0);
            if delta0 < 0.0 {
                return Err(bad("quantum defects must be non-negative"));
            }
            let entry = DefectEntry {
                l,
                j2,
                delta0,
                delta2,
            };
            match tables.iter_mut().find(|t| t.species == species) {
                Some(t) => t.entries.push(entry),
                None => tables.push(QuantumDefectTable {
                    species,
                    entries: vec![entry],
                    note: String::new(),
                }),
            }
        }
        for t in &mut tables {
            t.note = format!("{} entries parsed from defect table", t.entries.len());
        }
        Ok(tables)
    }

    /// Rydberg-Ritz defect; unknown (l, j) falls back to the hydrogenic value 0.
    pub fn defect(&self, n: u32, l: u32, j2: u32) -> Defect {
        match self.entries.iter().find(|e| e.l == l && e.j2 == j2) {
            Some(e) => {
                let ns = n as f64 - e.delta0;
                let value = (e.delta0 + e.delta2 / (ns * ns)).max(0.0);
                Defect {
                    value,
                    fallback: false,
                }
            }
            None => Defect {
                value: 0.0,
                fallback: true,
            },
        }
    }
}

fn parse_half_integer(s: &str) -> Option<u32> {
    if let Some((num, den)) = s.split_once('/') {
        let num: u32 = num.trim().parse().ok()?;
        (den.trim() == "2").then_some(num)
    } else {
        let v: f64 = s.parse().ok()?;
        let twice = 2.0 * v;
        (twice >= 0.0 && (twice - twice.round()).abs() < 1e-9).then(|| twice.round() as u32)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Species {
    pub name: String,
    /// Total mass in kg (for ions the electron deficit is already removed).
    pub mass: f64,
    /// Charge in units of e; 0 for atoms, 1 for singly charged ions.
    pub charge: i32,
    pub defects: Option<QuantumDefectTable>,
}

impl Species {
    pub fn new(
        name: &str,
        mass: f64,
        charge: i32,
        defects: Option<QuantumDefectTable>,
    ) -> Result<Self> {
        if !(mass > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{name}: mass must be positive"
            )));
        }
        if charge != 0 && charge != 1 {
            return Err(Error::InvalidParameter(format!(
                "{name}: charge must be 0 or +1"
            )));
        }
        Ok(Self {
            name: name.to_string(),
            mass,
            charge,
            defects,
        })
    }

    pub fn lithium6() -> Self {
        Self::new(
            "6Li",
            MASS_LI6_U * AMU,
            0,
            Some(QuantumDefectTable::lithium()),
        )
        .unwrap()
    }

    pub fn lithium7() -> Self {
        Self::new(
            "7Li",
            MASS_LI7_U * AMU,
            0,
            Some(QuantumDefectTable::lithium()),
        )
        .unwrap()
    }

    pub fn ytterbium171_ion() -> Self {
        Self::new("171Yb+", MASS_YB171_U * AMU - M_ELECTRON, 1, None).unwrap()
    }

    pub fn hydrogen() -> Self {
        Self::new("1H", MASS_H1_U * AMU, 0, None).unwrap()
    }

    /// Hydrogenic atom with an infinitely heavy core.
    pub fn hydrogenic_static_core() -> Self {
        Self::new("H(static core)", f64::MAX, 0, None).unwrap()
    }

    pub fn is_ion(&self) -> bool {
        self.charge != 0
    }

    /// Mass of the ionic core m_c = M − m_e.
    pub fn core_mass(&self) -> f64 {
        self.mass - M_ELECTRON
    }

    /// Electron–core reduced mass in units of m_e.
    pub fn reduced_mass_ratio(&self) -> f64 {
        if self.mass >= f64::MAX {
            return 1.0;
        }
        self.core_mass() / self.mass
    }

    /// hcR_M, the reduced-mass Rydberg energy in J.
    pub fn rydberg_energy(&self) -> f64 {
        0.5 * HARTREE * self.reduced_mass_ratio()
    }

    pub fn defect(&self, n: u32, l: u32, j2: u32) -> Defect {
        match &self.defects {
            Some(t) => t.defect(n, l, j2),
            None => Defect {
                value: 0.0,
                fallback: true,
            },
        }
    }
}

pub fn reduced_mass(a: &Species, b: &Species) -> f64 {
    a.mass * b.mass / (a.mass + b.mass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table_has_s_p_d() {
        let t = QuantumDefectTable::lithium();
        assert_eq!(t.species, "Li");
        assert_eq!(t.entries.len(), 5);
        assert!(t.entries.iter().all(|e| e.delta0 >= 0.0));
        let s = t.defect(30, 0, 1);
        assert!(!s.fallback && (s.value - 0.39954).abs() < 1e-4);
    }

    #[test]
    fn missing_entry_is_hydrogenic() {
        let t = QuantumDefectTable::lithium();
        let f = t.defect(30, 5, 11);
        assert!(f.fallback);
        assert_eq!(f.value, 0.0);
    }

    #[test]
    fn parse_accepts_decimal_j_and_comment_without_delta2() {
        let t = QuantumDefectTable::parse("Na, 0, 0.5, 1.347964, s states\n").unwrap();
        assert_eq!(t[0].entries[0].j2, 1);
        assert_eq!(t[0].entries[0].delta2, 0.0);
    }

    #[test]
    fn parse_rejects_bad_records() {
        assert!(QuantumDefectTable::parse("Li, 0, 3/2, 0.4\n").is_err());
        assert!(QuantumDefectTable::parse("Li, 0, 1/2, -0.1\n").is_err());
        assert!(QuantumDefectTable::parse("Li, 0\n").is_err());
    }

    #[test]
    fn species_validation() {
        assert!(Species::new("x", -1.0, 0, None).is_err());
        assert!(Species::new("x", 1.0, 2, None).is_err());
        let yb = Species::ytterbium171_ion();
        assert!(yb.is_ion());
        assert!((yb.mass / AMU - 170.93577).abs() < 1e-4);
    }

    #[test]
    fn reduced_mass_rydberg() {
        let li = Species::lithium6();
        let ratio = li.rydberg_energy() / (0.5 * HARTREE);
        assert!((1.0 - ratio - M_ELECTRON / li.mass).abs() < 1e-12);
        assert_eq!(Species::hydrogenic_static_core().reduced_mass_ratio(), 1.0);
    }
}
