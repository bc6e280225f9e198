//! In-memory plus optional on-disk store of radial wavefunctions.
//!
//! File layout (little-endian): 8-byte magic `RYDNUMV1`, u32 version, u32 n, u32 l, u32 2j,
//! f64 energy, f64 n*, f64 μ, f64 h, u64 first index, u64 length, f64 norm check,
//! then the grid and value arrays as f64.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use sha2::{Digest, Sha256};

use super::numerov::{count_nodes, numerov_radial, RadialWavefunction, StepSpec};
use crate::error::{Error, Result};
use crate::physics_core::Species;

const MAGIC: &[u8; 8] = b"RYDNUMV1";
const VERSION: u32 = 1;

type Key = (u32, u32, u32);

pub struct WavefunctionStore {
    species: Species,
    step: StepSpec,
    dir: Option<PathBuf>,
    mem: Mutex<HashMap<Key, Arc<RadialWavefunction>>>,
}

impl WavefunctionStore {
    /// Memory-only store.
    pub fn new(species: Species, step: StepSpec) -> Self {
        Self {
            species,
            step,
            dir: None,
            mem: Mutex::new(HashMap::new()),
        }
    }

    /// Store backed by files under `dir`.
    pub fn with_disk(species: Species, step: StepSpec, dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self {
            species,
            step,
            dir: Some(dir),
            mem: Mutex::new(HashMap::new()),
        })
    }

    pub fn species(&self) -> &Species {
        &self.species
    }

    pub fn step(&self) -> StepSpec {
        self.step
    }

    pub fn get(&self, n: u32, l: u32, j2: u32) -> Result<Arc<RadialWavefunction>> {
        let key = (n, l, j2);
        if let Some(w) = self.mem.lock().expect("cache lock").get(&key) {
            return Ok(w.clone());
        }
        let path = self
            .dir
            .as_ref()
            .map(|d| d.join(format!("{}.rnv", self.file_key(n, l, j2))));
        let loaded = match &path {
            Some(p) if p.exists() => read_file(p)
                .ok()
                .filter(|w| w.n == n && w.l == l && w.j2 == j2),
            _ => None,
        };
        let wf = match loaded {
            Some(w) => w,
            None => {
                let w = numerov_radial(&self.species, n, l, j2, &self.step)?;
                if let Some(p) = &path {
                    write_atomic(p, &w)?;
                }
                w
            }
        };
        let wf = Arc::new(wf);
        self.mem.lock().expect("cache lock").insert(key, wf.clone());
        Ok(wf)
    }

    fn file_key(&self, n: u32, l: u32, j2: u32) -> String {
        let mut h = Sha256::new();
        h.update(VERSION.to_le_bytes());
        h.update(self.species.name.as_bytes());
        h.update(self.species.mass.to_le_bytes());
        h.update(self.species.defect(n, l, j2).value.to_le_bytes());
        for v in [n, l, j2] {
            h.update(v.to_le_bytes());
        }
        h.update(self.step.h.to_le_bytes());
        h.finalize()
            .iter()
            .take(16)
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

fn encode(w: &RadialWavefunction) -> Vec<u8> {
    let mut out = Vec::with_capacity(80 + 16 * w.grid.len());
    out.extend_from_slice(MAGIC);
    for v in [VERSION, w.n, w.l, w.j2] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in [w.energy, w.n_star, w.mu, w.h] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&(w.first_index as u64).to_le_bytes());
    out.extend_from_slice(&(w.grid.len() as u64).to_le_bytes());
    out.extend_from_slice(&w.norm_check.to_le_bytes());
    for v in w.grid.iter().chain(&w.values) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let chunk = self
            .bytes
            .get(self.pos..self.pos + N)
            .ok_or_else(|| Error::Cache("truncated record".into()))?;
        self.pos += N;
        Ok(chunk.try_into().unwrap())
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

fn decode(bytes: &[u8]) -> Result<RadialWavefunction> {
    if bytes.len() < 8 || &bytes[..8] != MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let mut r = Reader { bytes, pos: 8 };
    if r.u32()? != VERSION {
        return Err(Error::Cache("unsupported version".into()));
    }
    let (n, l, j2) = (r.u32()?, r.u32()?, r.u32()?);
    let (energy, n_star, mu, h) = (r.f64()?, r.f64()?, r.f64()?, r.f64()?);
    let first_index = r.u64()? as usize;
    let len = r.u64()? as usize;
    let norm_check = r.f64()?;
    if bytes.len() != r.pos + 16 * len {
        return Err(Error::Cache("record length mismatch".into()));
    }
    let grid = (0..len).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    let values = (0..len).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    let nodes = count_nodes(&values);
    Ok(RadialWavefunction {
        n,
        l,
        j2,
        energy,
        n_star,
        mu,
        h,
        first_index,
        grid,
        values,
        norm_check,
        nodes,
    })
}

pub fn read_file(path: &Path) -> Result<RadialWavefunction> {
    decode(&fs::read(path)?)
}

/// Writes to a temporary sibling and renames, so readers never see partial files.
pub fn write_atomic(path: &Path, w: &RadialWavefunction) -> Result<()> {
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&encode(w))?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let store =
            WavefunctionStore::with_disk(Species::lithium6(), StepSpec::default(), dir.path())
                .unwrap();
        let a = store.get(12, 1, 3).unwrap();
        let fresh =
            WavefunctionStore::with_disk(Species::lithium6(), StepSpec::default(), dir.path())
                .unwrap();
        let b = fresh.get(12, 1, 3).unwrap();
        assert_eq!(*a, *b);
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn corrupt_file_is_rejected() {
        assert!(decode(b"NOTMAGIC0000").is_err());
    }
}
