//! Inward Numerov integration of the Coulomb radial equation at quantum-defect energies.
//!
//! Works on x = √r (scaled atomic units of the electron–core reduced mass) with
//! u(r) = x^{1/2} w(x), which turns the radial equation into
//! w'' = [(2l+½)(2l+3/2)/x² − 8 − 8E x²] w.
//! Lattice points sit at integer multiples of the step, so functions built with the
//! same step share points and overlap integrals need no interpolation.

use super::state::defect_energy;
use crate::error::{Error, Result};
use crate::physics_core::Species;
use crate::quad::simpson;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSpec {
    /// Step in √r, units a₀^{1/2}.
    pub h: f64,
}

impl Default for StepSpec {
    fn default() -> Self {
        Self { h: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialWavefunction {
    pub n: u32,
    pub l: u32,
    pub j2: u32,
    pub energy: f64,
    pub n_star: f64,
    /// Electron–core reduced mass in units of m_e.
    pub mu: f64,
    pub h: f64,
    /// Lattice index of the first point, x₀ = first_index·h.
    pub first_index: usize,
    /// Radii in a₀, ascending.
    pub grid: Vec<f64>,
    /// u(r) = r R(r) on `grid`.
    pub values: Vec<f64>,
    /// ∫u² dr after normalization.
    pub norm_check: f64,
    pub nodes: usize,
}

const OVERFLOW: f64 = 1e200;
const TAIL_CUT: f64 = 1e-8;

/// Number of sign changes, ignoring points below 1e-10 of the peak.
pub fn count_nodes(values: &[f64]) -> usize {
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut last = 0.0f64;
    let mut nodes = 0;
    for &v in values {
        if v.abs() <= 1e-10 * peak {
            continue;
        }
        if last != 0.0 && v.signum() != last.signum() {
            nodes += 1;
        }
        last = v;
    }
    nodes
}

pub fn numerov_radial(
    species: &Species,
    n: u32,
    l: u32,
    j2: u32,
    step: &StepSpec,
) -> Result<RadialWavefunction> {
    let level = defect_energy(species, n, l, j2)?;
    let h = step.h;
    let fail = |nodes: usize, reason: &str| Error::Numerov {
        n,
        l,
        j2,
        nodes,
        expected: (n - l - 1) as usize,
        reason: reason.to_string(),
    };
    if !(h > 0.0 && h < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "Numerov step {h} outside (0, 0.5)"
        )));
    }
    let ns = level.n_star;
    let e = -0.5 / (ns * ns);
    let nf = n as f64;
    let r_out = 2.0 * nf * (nf + 15.0);
    let lh = l as f64 + 0.5;
    let r_in = ns * (ns - (ns * ns - lh * lh).max(0.0).sqrt());
    let hydrogenic = species.defect(n, l, j2).value == 0.0;

    let k_out = (r_out.sqrt() / h).ceil() as usize;
    let cent = (2.0 * l as f64 + 0.5) * (2.0 * l as f64 + 1.5);
    let g = |k: usize| {
        let x = k as f64 * h;
        cent / (x * x) - 8.0 - 8.0 * e * x * x
    };
    let f = |k: usize| 1.0 - h * h * g(k) / 12.0;

    // values stored outermost first
    let mut w: Vec<f64> = Vec::with_capacity(k_out);
    w.push(1e-30);
    w.push(1e-30 * (1.0 + h * g(k_out).max(0.0).sqrt()));
    let mut k = k_out - 1;
    let mut peak = 0.0f64;
    loop {
        if k <= 1 {
            break;
        }
        let next_x = (k - 1) as f64 * h;
        if !hydrogenic && next_x * next_x < r_in {
            break;
        }
        let m = w.len();
        let wn = ((12.0 - 10.0 * f(k)) * w[m - 1] - f(k + 1) * w[m - 2]) / f(k - 1);
        if !wn.is_finite() {
            return Err(fail(0, "non-finite amplitude"));
        }
        let u_prev = w[m - 1].abs() * (k as f64 * h).sqrt();
        let u_next = wn.abs() * next_x.sqrt();
        if hydrogenic && next_x * next_x < r_in {
            // inside the centrifugal turning region: stop once the function has decayed
            // or when the irregular solution starts to grow or drags it through zero
            if u_next > u_prev || wn.signum() != w[m - 1].signum() {
                break;
            }
            w.push(wn);
            k -= 1;
            if u_next < TAIL_CUT * peak {
                break;
            }
            continue;
        }
        w.push(wn);
        peak = peak.max(u_next);
        k -= 1;
        if wn.abs() > OVERFLOW {
            for v in w.iter_mut() {
                *v /= OVERFLOW;
            }
            peak /= OVERFLOW;
        }
    }
    w.reverse();
    let first_index = k;
    let xs: Vec<f64> = (0..w.len()).map(|i| (first_index + i) as f64 * h).collect();
    let integrand: Vec<f64> = xs
        .iter()
        .zip(&w)
        .map(|(x, v)| 2.0 * x * x * v * v)
        .collect();
    let norm = simpson(&integrand, h);
    if !(norm.is_finite() && norm > 0.0) {
        return Err(fail(0, "normalization integral is not positive"));
    }
    let scale = 1.0 / norm.sqrt();
    let mu = species.reduced_mass_ratio();
    let grid: Vec<f64> = xs.iter().map(|x| x * x / mu).collect();
    let values: Vec<f64> = xs
        .iter()
        .zip(&w)
        .map(|(x, v)| mu.sqrt() * x.sqrt() * v * scale)
        .collect();
    let nodes = count_nodes(&values);
    if nodes != (n - l - 1) as usize {
        return Err(fail(nodes, "wrong node count"));
    }
    let mut wf = RadialWavefunction {
        n,
        l,
        j2,
        energy: level.energy,
        n_star: ns,
        mu,
        h,
        first_index,
        grid,
        values,
        norm_check: 0.0,
        nodes,
    };
    wf.norm_check = radial_moment(&wf, &wf, 0)?;
    if (wf.norm_check - 1.0).abs() > 1e-6 {
        return Err(fail(nodes, "normalization drifted"));
    }
    Ok(wf)
}

/// ∫ u₁ r^k u₂ dr in a₀^k over the shared lattice points.
pub fn radial_moment(w1: &RadialWavefunction, w2: &RadialWavefunction, k: i32) -> Result<f64> {
    if w1.h != w2.h || (w1.mu - w2.mu).abs() > 1e-15 * w1.mu {
        return Err(Error::GridMismatch(w1.h, w2.h));
    }
    let lo = w1.first_index.max(w2.first_index);
    let hi = (w1.first_index + w1.grid.len()).min(w2.first_index + w2.grid.len());
    if hi <= lo + 1 {
        return Ok(0.0);
    }
    let o1 = lo - w1.first_index;
    let o2 = lo - w2.first_index;
    let y: Vec<f64> = (0..hi - lo)
        .map(|i| {
            let r = w1.grid[o1 + i];
            w1.values[o1 + i] * w2.values[o2 + i] * r.powi(k) * 2.0 * r.sqrt()
        })
        .collect();
    Ok(simpson(&y, w1.h / w1.mu.sqrt()))
}

/// Relative change of ⟨r⟩ when the step is halved.
pub fn step_convergence(
    species: &Species,
    n: u32,
    l: u32,
    j2: u32,
    step: &StepSpec,
) -> Result<f64> {
    let a = numerov_radial(species, n, l, j2, step)?;
    let b = numerov_radial(species, n, l, j2, &StepSpec { h: 0.5 * step.h })?;
    let ra = radial_moment(&a, &a, 1)?;
    let rb = radial_moment(&b, &b, 1)?;
    Ok((ra - rb).abs() / rb.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h() -> Species {
        Species::hydrogenic_static_core()
    }

    #[test]
    fn hydrogen_1s_closed_form() {
        let wf = numerov_radial(&h(), 1, 0, 1, &StepSpec::default()).unwrap();
        let mut worst = 0.0f64;
        for (r, u) in wf.grid.iter().zip(&wf.values) {
            if (0.5..=10.0).contains(r) {
                let exact = 2.0 * r * (-r).exp();
                worst = worst.max((u.abs() - exact).abs() / exact);
            }
        }
        assert!(worst < 1e-4, "{worst}");
    }

    #[test]
    fn hydrogen_moments() {
        let wf = numerov_radial(&h(), 1, 0, 1, &StepSpec::default()).unwrap();
        assert!((radial_moment(&wf, &wf, 0).unwrap() - 1.0).abs() < 1e-6);
        assert!((radial_moment(&wf, &wf, 1).unwrap() - 1.5).abs() < 1e-3);
        assert!((radial_moment(&wf, &wf, 2).unwrap() - 3.0).abs() < 1e-3);
    }

    #[test]
    fn hydrogen_2p_expectation() {
        // ⟨r⟩ = [3n² − l(l+1)]/2 = 5 for 2P
        let wf = numerov_radial(&h(), 2, 1, 3, &StepSpec::default()).unwrap();
        assert!((radial_moment(&wf, &wf, 1).unwrap() - 5.0).abs() < 1e-3);
    }

    #[test]
    fn li_30s_norm_and_orthogonality() {
        let li = Species::lithium6();
        let a = numerov_radial(&li, 30, 0, 1, &StepSpec::default()).unwrap();
        let b = numerov_radial(&li, 31, 0, 1, &StepSpec::default()).unwrap();
        assert!((a.norm_check - 1.0).abs() < 1e-6);
        assert!(radial_moment(&a, &b, 0).unwrap().abs() < 1e-3);
    }

    #[test]
    fn node_counts_across_l() {
        let li = Species::lithium6();
        for l in [0, 1, 2, 3, 5, 12, 20, 29] {
            for j2 in [2 * l + 1, (2 * l).max(1) - 1] {
                if j2 == 0 {
                    continue;
                }
                let wf = numerov_radial(&li, 30, l, j2, &StepSpec::default()).unwrap();
                assert_eq!(wf.nodes, (29 - l) as usize);
            }
        }
    }

    #[test]
    fn mismatched_steps_are_rejected() {
        let a = numerov_radial(&h(), 2, 0, 1, &StepSpec { h: 0.01 }).unwrap();
        let b = numerov_radial(&h(), 2, 0, 1, &StepSpec { h: 0.02 }).unwrap();
        assert!(matches!(
            radial_moment(&a, &b, 1),
            Err(Error::GridMismatch(..))
        ));
    }

    #[test]
    fn default_step_is_converged() {
        let c = step_convergence(&Species::lithium6(), 30, 0, 1, &StepSpec::default()).unwrap();
        assert!(c < 1e-6, "{c}");
    }
}
