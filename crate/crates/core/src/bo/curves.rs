//! Adiabatic curves by dense diagonalization and eigenvector-overlap following.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use super::matrix::{BoOperators, RfPhase, TrapAxis};
use crate::error::{Error, Result};
use crate::physics_core::{Species, TrapParams, E_CHARGE, H_PLANCK, K_COULOMB};
use crate::rydberg::{polarizability, BasisSpec, RydbergState, WavefunctionStore};

/// Two overlaps closer than this make an assignment ambiguous.
pub const AMBIGUITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ambiguity {
    pub r: f64,
    pub curve: usize,
}

#[derive(Debug, Clone)]
pub struct TrapSnapshot {
    pub trap: TrapParams,
    pub ion: Species,
    pub axis: TrapAxis,
    pub phase: RfPhase,
}

#[derive(Debug, Clone)]
pub struct PotentialCurves {
    /// Ascending separations, m.
    pub r_grid: Vec<f64>,
    /// `energies[c][i]` is curve c at `r_grid[i]`, J.
    pub energies: Vec<Vec<f64>>,
    /// Dominant basis state of each curve at the largest R.
    pub asymptotic_state: Vec<usize>,
    pub labels: Vec<String>,
    /// `links[i][c]`: eigenvalue index at `r_grid[i]` carried by curve c.
    pub links: Vec<Vec<usize>>,
    /// Smallest winning overlap between R[i+1] and R[i], per step.
    pub min_link_overlap: Vec<f64>,
    pub ambiguities: Vec<Ambiguity>,
}

impl PotentialCurves {
    pub fn curve_count(&self) -> usize {
        self.energies.len()
    }

    /// Curve whose large-R character is the given level.
    pub fn curve_of(&self, basis: &[RydbergState], n: u32, l: u32, j2: u32) -> Option<usize> {
        self.asymptotic_state
            .iter()
            .position(|&b| basis[b].n == n && basis[b].l == l && basis[b].j2 == j2)
    }

    /// Smallest |ε_c − ε_k| over all other curves at grid index i.
    pub fn gap_to_neighbours(&self, c: usize, i: usize) -> f64 {
        let e = self.energies[c][i];
        self.energies
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != c)
            .map(|(_, v)| (v[i] - e).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

fn eigensystem(
    ops: &BoOperators,
    r: f64,
    snapshot: Option<&TrapSnapshot>,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let mut m = ops.build_interaction(r)?;
    if let Some(s) = snapshot {
        m = ops.add_trap_snapshot(m, &s.trap, &s.ion, s.axis, s.phase)?;
    }
    // diagonalize in GHz about the mean diagonal to keep the eigensolver well scaled
    let n = m.matrix.nrows();
    let shift = m.matrix.diagonal().mean();
    let scale = 1.0 / (H_PLANCK * 1e9);
    let mut a = m.matrix;
    for i in 0..n {
        a[(i, i)] -= shift;
    }
    a *= scale;
    let eig = SymmetricEigen::new(a);
    let values = eig.eigenvalues.iter().map(|v| v / scale + shift).collect();
    Ok((values, eig.eigenvectors))
}

/// Greedy global assignment: repeatedly take the largest remaining |overlap|.
fn assign(prev: &DMatrix<f64>, cur: &DMatrix<f64>) -> (Vec<usize>, f64, Vec<usize>) {
    let n = prev.ncols();
    let o = prev.transpose() * cur;
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            pairs.push((o[(i, j)].abs(), i, j));
        }
    }
    pairs.sort_unstable_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut map = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    let mut min_win = f64::INFINITY;
    let mut left = n;
    for (v, i, j) in pairs {
        if left == 0 {
            break;
        }
        if map[i] == usize::MAX && !taken[j] {
            map[i] = j;
            taken[j] = true;
            min_win = min_win.min(v);
            left -= 1;
        }
    }
    let mut ambiguous = Vec::new();
    for i in 0..n {
        let mut best = 0.0f64;
        let mut second = 0.0f64;
        for j in 0..n {
            let v = o[(i, j)].abs();
            if v > best {
                second = best;
                best = v;
            } else if v > second {
                second = v;
            }
        }
        if best - second < AMBIGUITY_TOL {
            ambiguous.push(i);
        }
    }
    (map, min_win, ambiguous)
}

/// Diagonalizes at every R and links eigenvectors between neighbouring points.
/// With `strict`, an ambiguous assignment is an error; otherwise it is recorded.
pub fn diagonalize_curves(
    ops: &BoOperators,
    r_grid: &[f64],
    snapshot: Option<&TrapSnapshot>,
    strict: bool,
) -> Result<PotentialCurves> {
    if r_grid.is_empty() || r_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(
            "R grid must be non-empty and strictly ascending".into(),
        ));
    }
    let n = ops.dim();
    let m = r_grid.len();
    let mut energies = vec![vec![0.0; m]; n];
    let mut links = vec![vec![0usize; n]; m];
    let mut min_link_overlap = vec![1.0; m.saturating_sub(1)];
    let mut ambiguities = Vec::new();
    let mut prev: Option<DMatrix<f64>> = None;
    let mut asymptotic_state = vec![0usize; n];
    // chunked parallel map from the largest R inward bounds memory to a few eigenbases
    let order: Vec<usize> = (0..m).rev().collect();
    let chunk = rayon::current_num_threads().max(1) * 2;
    for block in order.chunks(chunk) {
        let solved: Vec<Result<(Vec<f64>, DMatrix<f64>)>> = block
            .par_iter()
            .map(|&i| eigensystem(ops, r_grid[i], snapshot))
            .collect();
        for (&i, res) in block.iter().zip(solved) {
            let (vals, vecs) = res?;
            let map: Vec<usize> = match &prev {
                None => {
                    for (c, slot) in asymptotic_state.iter_mut().enumerate() {
                        *slot = vecs.column(c).iamax();
                    }
                    (0..n).collect()
                }
                Some(p) => {
                    let (map, min_win, amb) = assign(p, &vecs);
                    min_link_overlap[i] = min_win;
                    for pi in amb {
                        let curve = links[i + 1].iter().position(|&e| e == pi).unwrap_or(pi);
                        if strict {
                            return Err(Error::Ambiguous {
                                r: r_grid[i],
                                curve,
                            });
                        }
                        ambiguities.push(Ambiguity {
                            r: r_grid[i],
                            curve,
                        });
                    }
                    // curve c followed eigen index links[i+1][c] at the previous R
                    (0..n).map(|c| map[links[i + 1][c]]).collect()
                }
            };
            for c in 0..n {
                links[i][c] = map[c];
                energies[c][i] = vals[map[c]];
            }
            prev = Some(vecs);
        }
    }
    let labels = asymptotic_state
        .iter()
        .map(|&b| ops.basis[b].label())
        .collect();
    Ok(PotentialCurves {
        r_grid: r_grid.to_vec(),
        energies,
        asymptotic_state,
        labels,
        links,
        min_link_overlap,
        ambiguities,
    })
}

/// Logarithmic grid of `count` points between `lo` and `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
        .collect()
}

/// C₄ = α e² k_C²/2 with α from the second-order sum over `basis`.
pub fn c4_second_order(
    state: &RydbergState,
    store: &WavefunctionStore,
    basis: &BasisSpec,
) -> Result<f64> {
    Ok(c4_from_alpha(polarizability(state, store, basis)?))
}

pub fn c4_from_alpha(alpha: f64) -> f64 {
    0.5 * alpha * E_CHARGE * E_CHARGE * K_COULOMB * K_COULOMB
}

pub fn alpha_from_c4(c4: f64) -> f64 {
    2.0 * c4 / (E_CHARGE * E_CHARGE * K_COULOMB * K_COULOMB)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rydberg::StepSpec;

    #[test]
    fn small_basis_curves_follow_states() {
        let store = WavefunctionStore::new(Species::lithium6(), StepSpec::default());
        let ops = BoOperators::new(&store, &BasisSpec::new(29, 31, 4).unwrap(), 1).unwrap();
        let grid = log_grid(1e-6, 4e-6, 12);
        let c = diagonalize_curves(&ops, &grid, None, false).unwrap();
        assert_eq!(c.curve_count(), ops.dim());
        let s = c.curve_of(&ops.basis, 30, 0, 1).unwrap();
        // the 30S curve bends down monotonically towards the ion
        assert!(c.energies[s].windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn rejects_unsorted_grid() {
        let store = WavefunctionStore::new(Species::lithium6(), StepSpec::default());
        let ops = BoOperators::new(&store, &BasisSpec::new(29, 30, 2).unwrap(), 1).unwrap();
        assert!(diagonalize_curves(&ops, &[2e-6, 1e-6], None, false).is_err());
    }
}
