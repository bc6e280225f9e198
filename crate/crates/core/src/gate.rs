//! Fock-space dynamics of the dressed atom–ion phase gate.
//!
//! Spin index 0 is ↑ and 1 is ↓; a sector is `2·atom + ion`. Motional amplitudes are
//! stored atom-major: index `n_a·N_i + n_i`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::dressed::{
    match_drive, oscillator_length, taylor3, AdiabaticPotential, DressingParams, FieldModel,
    TaylorCoeffs,
};
use crate::error::{Error, Result};
use crate::physics_core::{angular, Species, HBAR};
use crate::rydberg::RydbergState;

/// Unitarity tolerance on each sector norm over a full evolution.
pub const NORM_TOL: f64 = 1e-8;
/// Fock states 0..=9 per mode.
pub const DEFAULT_CUTOFF: usize = 10;
/// Default bound on the population of the top two Fock layers.
pub const LEAKAGE_LIMIT: f64 = 1e-3;

const UP: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modulation {
    /// A(t) ∝ (1 + cos ω_v t)/2, the form used in the simulated Hamiltonian.
    Plus,
    /// A(t) ∝ (1 − cos ω_v t)/2.
    Minus,
}

impl Modulation {
    fn sign(self) -> f64 {
        match self {
            Modulation::Plus => 1.0,
            Modulation::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GateParams {
    pub omega_i: f64,
    pub omega_a: f64,
    pub delta: f64,
    /// ηΩ_{S−M}, rad/s.
    pub eta_omega_sm: f64,
    pub d: f64,
    /// Taylor expansion of the static dressed potential at d; the constant is V(d), which vanishes far away.
    pub potential: TaylorCoeffs,
    pub ell_i: f64,
    pub ell_a: f64,
    pub modulation: Modulation,
    pub cutoff_i: usize,
    pub cutoff_a: usize,
    pub steps_per_period: usize,
    /// Highest total order of the potential polynomial kept (1..=3).
    pub order: usize,
    pub leakage_limit: f64,
}

impl GateParams {
    /// Gate parameters from a dressed potential at separation d, with the drive matched to it.
    #[allow(clippy::too_many_arguments)]
    pub fn matched(
        dressing: &DressingParams,
        pot: &AdiabaticPotential,
        atom: &Species,
        ion: &Species,
        omega_i: f64,
        omega_a: f64,
        delta: f64,
        d: f64,
    ) -> Result<Self> {
        let mut potential = taylor3(d, 0.0, dressing, pot, FieldModel::Coulomb)?;
        potential.coeff[0][0] -= pot.a;
        let eta_omega_sm = match_drive(d, dressing, pot, FieldModel::Coulomb, ion, omega_i)?;
        let p = Self {
            omega_i,
            omega_a,
            delta,
            eta_omega_sm,
            d,
            potential,
            ell_i: oscillator_length(ion, omega_i),
            ell_a: oscillator_length(atom, omega_a),
            modulation: Modulation::Plus,
            cutoff_i: DEFAULT_CUTOFF,
            cutoff_a: DEFAULT_CUTOFF,
            steps_per_period: 200,
            order: 3,
            leakage_limit: LEAKAGE_LIMIT,
        };
        p.validate()?;
        Ok(p)
    }

    /// ⁷Li 30S at Ω = 2π·10.02 MHz, Δ₀ = 2π·0.4 GHz next to ¹⁷¹Yb⁺, ω_i = 2π·250 kHz,
    /// ω_a = 2π·205 kHz, δ = 2π·1.040 kHz, d = 0.88 R_w, drive matched.
    pub fn reference(c4: f64) -> Result<Self> {
        let atom = Species::lithium7();
        let dressing = DressingParams::new(
            angular(10.02e6),
            angular(0.4e9),
            RydbergState::s_half(&atom, 30)?,
        );
        let pot = AdiabaticPotential::new(&dressing, c4)?;
        Self::matched(
            &dressing,
            &pot,
            &atom,
            &Species::ytterbium171_ion(),
            angular(250e3),
            angular(205e3),
            angular(1.040e3),
            0.88 * pot.r_w,
        )
    }

    pub fn omega_v(&self) -> f64 {
        self.omega_i + self.delta
    }

    /// τ_g = 2π/|δ|.
    pub fn gate_time(&self) -> f64 {
        2.0 * PI / self.delta.abs()
    }

    /// Linear force magnitude |∂V/∂x_i| at d.
    pub fn force(&self) -> f64 {
        self.potential.derivative(1, 0).abs()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_i > 0.0 && self.omega_a > 0.0 && self.delta != 0.0) {
            return Err(Error::InvalidParameter(
                "gate needs ω_i, ω_a > 0 and δ ≠ 0".into(),
            ));
        }
        if (self.delta / self.omega_i).abs() >= 0.05 {
            return Err(Error::InvalidParameter("gate needs |δ/ω_i| < 0.05".into()));
        }
        let f = self.force();
        if f * self.ell_a >= HBAR * self.omega_a || f * self.ell_i >= HBAR * self.omega_i {
            return Err(Error::InvalidParameter(
                "force violates the Lamb–Dicke guard".into(),
            ));
        }
        if self.cutoff_i < 3
            || self.cutoff_a < 3
            || !(1..=3).contains(&self.order)
            || self.steps_per_period < 200
        {
            return Err(Error::InvalidParameter(
                "gate needs cutoffs ≥ 3, order 1..=3 and ≥ 200 steps per ω_v period".into(),
            ));
        }
        Ok(())
    }

    fn motional_dim(&self) -> usize {
        self.cutoff_a * self.cutoff_i
    }

    /// Potential polynomial with terms above `order` dropped.
    fn v3(&self, x_i: f64, x_a: f64) -> f64 {
        let mut s = 0.0;
        for j in 0..4 {
            for k in 0..(4 - j) {
                if j + k <= self.order {
                    s += self.potential.coeff[j][k] * x_i.powi(j as i32) * x_a.powi(k as i32);
                }
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositeState {
    pub cutoff_a: usize,
    pub cutoff_i: usize,
    /// Sector-major amplitudes: `[(2·atom + ion)·N_a·N_i + n_a·N_i + n_i]`.
    pub amps: Vec<Complex64>,
    pub time: f64,
}

impl CompositeState {
    pub fn zeros(cutoff_a: usize, cutoff_i: usize) -> Self {
        Self {
            cutoff_a,
            cutoff_i,
            amps: vec![Complex64::new(0.0, 0.0); 4 * cutoff_a * cutoff_i],
            time: 0.0,
        }
    }

    /// Product state (spin_a ⊗ spin_i) ⊗ |n_a, n_i⟩; spin vectors are (↑, ↓) amplitudes.
    pub fn product(
        spin_a: [Complex64; 2],
        spin_i: [Complex64; 2],
        n_a: usize,
        n_i: usize,
        cutoff_a: usize,
        cutoff_i: usize,
    ) -> Result<Self> {
        if n_a >= cutoff_a || n_i >= cutoff_i {
            return Err(Error::InvalidParameter(
                "initial Fock state outside the cutoff".into(),
            ));
        }
        let mut s = Self::zeros(cutoff_a, cutoff_i);
        for a in 0..2 {
            for i in 0..2 {
                let idx = s.index(2 * a + i, n_a, n_i);
                s.amps[idx] = spin_a[a] * spin_i[i];
            }
        }
        Ok(s)
    }

    fn block(&self) -> usize {
        self.cutoff_a * self.cutoff_i
    }

    pub fn index(&self, sector: usize, n_a: usize, n_i: usize) -> usize {
        sector * self.block() + n_a * self.cutoff_i + n_i
    }

    pub fn sector(&self, s: usize) -> &[Complex64] {
        &self.amps[s * self.block()..(s + 1) * self.block()]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn sector_population(&self, s: usize) -> f64 {
        self.sector(s).iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &CompositeState) -> Result<Complex64> {
        if self.cutoff_a != other.cutoff_a || self.cutoff_i != other.cutoff_i {
            return Err(Error::InvalidParameter("state shapes differ".into()));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// (⟨n_i⟩, ⟨n_a⟩).
    pub fn mean_phonons(&self) -> (f64, f64) {
        let (mut ni, mut na) = (0.0, 0.0);
        for s in 0..4 {
            for a in 0..self.cutoff_a {
                for i in 0..self.cutoff_i {
                    let p = self.amps[self.index(s, a, i)].norm_sqr();
                    ni += p * i as f64;
                    na += p * a as f64;
                }
            }
        }
        (ni, na)
    }

    /// Population in the top two Fock layers of either mode.
    pub fn leakage(&self) -> f64 {
        let mut l = 0.0;
        for s in 0..4 {
            for a in 0..self.cutoff_a {
                for i in 0..self.cutoff_i {
                    if a + 2 >= self.cutoff_a || i + 2 >= self.cutoff_i {
                        l += self.amps[self.index(s, a, i)].norm_sqr();
                    }
                }
            }
        }
        l
    }
}

/// Truncated a + a†.
fn position_matrix(n: usize) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(n, n);
    for k in 1..n {
        let v = (k as f64).sqrt();
        x[(k - 1, k)] = v;
        x[(k, k - 1)] = v;
    }
    x
}

/// Dense H(t) in J on the full space, for checks; the evolution never builds it.
pub fn build_hamiltonian(t: f64, p: &GateParams) -> DMatrix<f64> {
    let (na, ni) = (p.cutoff_a, p.cutoff_i);
    let m = na * ni;
    let kron = |a: &DMatrix<f64>, b: &DMatrix<f64>| a.kronecker(b);
    let xa = kron(&position_matrix(na), &DMatrix::identity(ni, ni)) * p.ell_a;
    let xi = kron(&DMatrix::identity(na, na), &position_matrix(ni)) * p.ell_i;
    let mut pows_i = vec![DMatrix::identity(m, m)];
    let mut pows_a = vec![DMatrix::identity(m, m)];
    for k in 1..4 {
        pows_i.push(&pows_i[k - 1] * &xi);
        pows_a.push(&pows_a[k - 1] * &xa);
    }
    let mut v3 = DMatrix::zeros(m, m);
    for j in 0..4 {
        for k in 0..(4 - j) {
            if j + k <= p.order {
                v3 += &pows_i[j] * &pows_a[k] * p.potential.coeff[j][k];
            }
        }
    }
    let mut h0 = DMatrix::zeros(m, m);
    for a in 0..na {
        for i in 0..ni {
            h0[(a * ni + i, a * ni + i)] = HBAR * (p.omega_a * a as f64 + p.omega_i * i as f64);
        }
    }
    let sm = p.modulation.sign();
    let c = 0.5 * (1.0 + sm * (p.omega_v() * t).cos());
    let drive = &xi * (sm * HBAR * p.eta_omega_sm * (p.omega_v() * t).cos() / p.ell_i);
    let mut h = DMatrix::zeros(4 * m, 4 * m);
    for a in 0..2 {
        for i in 0..2 {
            let s = 2 * a + i;
            let mut blk = h0.clone();
            if a == UP {
                blk += &v3 * c;
            }
            if i == UP {
                blk += &drive;
            }
            h.view_mut((s * m, s * m), (m, m)).copy_from(&blk);
        }
    }
    h
}

/// Precomputed pieces of the split-step propagator.
struct Stepper {
    ua: DMatrix<f64>,
    ui: DMatrix<f64>,
    xi_nodes: Vec<f64>,
    /// V⁽³⁾/ħ on the DVR grid, `[p·N_i + q]`.
    v_grid: Vec<f64>,
    fock_half: Vec<Complex64>,
    dt: f64,
}

impl Stepper {
    fn new(p: &GateParams, dt: f64) -> Self {
        let ea = SymmetricEigen::new(position_matrix(p.cutoff_a));
        let ei = SymmetricEigen::new(position_matrix(p.cutoff_i));
        let mut v_grid = Vec::with_capacity(p.motional_dim());
        for &xa in ea.eigenvalues.iter() {
            for &xi in ei.eigenvalues.iter() {
                v_grid.push(p.v3(p.ell_i * xi, p.ell_a * xa) / HBAR);
            }
        }
        let mut fock_half = Vec::with_capacity(p.motional_dim());
        for a in 0..p.cutoff_a {
            for i in 0..p.cutoff_i {
                let w = p.omega_a * a as f64 + p.omega_i * i as f64;
                fock_half.push(Complex64::from_polar(1.0, -0.5 * w * dt));
            }
        }
        Self {
            ua: ea.eigenvectors,
            ui: ei.eigenvectors,
            xi_nodes: ei.eigenvalues.iter().copied().collect(),
            v_grid,
            fock_half,
            dt,
        }
    }

    /// M ↦ Uaᵀ M Ui (forward) or Ua M Uiᵀ (backward) on an N_a × N_i block.
    fn transform(&self, m: &mut [Complex64], scratch: &mut [Complex64], forward: bool) {
        let (na, ni) = (self.ua.nrows(), self.ui.nrows());
        for a in 0..na {
            for i in 0..ni {
                let mut acc = Complex64::new(0.0, 0.0);
                for b in 0..na {
                    let u = if forward {
                        self.ua[(b, a)]
                    } else {
                        self.ua[(a, b)]
                    };
                    acc += m[b * ni + i] * u;
                }
                scratch[a * ni + i] = acc;
            }
        }
        for a in 0..na {
            for i in 0..ni {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..ni {
                    let u = if forward {
                        self.ui[(j, i)]
                    } else {
                        self.ui[(i, j)]
                    };
                    acc += scratch[a * ni + j] * u;
                }
                m[a * ni + i] = acc;
            }
        }
    }

    /// One Strang step of a single sector about the midpoint time `tm`.
    fn step(
        &self,
        m: &mut [Complex64],
        scratch: &mut [Complex64],
        p: &GateParams,
        atom_up: bool,
        ion_up: bool,
        tm: f64,
    ) {
        for (v, f) in m.iter_mut().zip(&self.fock_half) {
            *v *= f;
        }
        if atom_up || ion_up {
            let sm = p.modulation.sign();
            let cosv = (p.omega_v() * tm).cos();
            let c = 0.5 * (1.0 + sm * cosv);
            let drive = sm * p.eta_omega_sm * cosv;
            self.transform(m, scratch, true);
            let ni = self.ui.nrows();
            for (idx, v) in m.iter_mut().enumerate() {
                let mut phase = 0.0;
                if atom_up {
                    phase += c * self.v_grid[idx];
                }
                if ion_up {
                    phase += drive * self.xi_nodes[idx % ni];
                }
                *v *= Complex64::from_polar(1.0, -phase * self.dt);
            }
            self.transform(m, scratch, false);
        }
        for (v, f) in m.iter_mut().zip(&self.fock_half) {
            *v *= f;
        }
    }
}

/// Interaction-frame snapshot: exp(+i(H_trap + V(d)|↑⟩_a⟨↑|/2) t/ħ) applied to a lab-frame state.
pub fn to_interaction_frame(state: &CompositeState, p: &GateParams) -> CompositeState {
    let mut out = state.clone();
    let t = state.time;
    let v_half = 0.5 * p.potential.coeff[0][0] / HBAR;
    for s in 0..4 {
        let atom_up = s / 2 == UP;
        for a in 0..state.cutoff_a {
            for i in 0..state.cutoff_i {
                let mut w = p.omega_a * a as f64 + p.omega_i * i as f64;
                if atom_up {
                    w += v_half;
                }
                let idx = state.index(s, a, i);
                out.amps[idx] = state.amps[idx] * Complex64::from_polar(1.0, w * t);
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Evolution {
    /// Final state in the lab frame.
    pub state: CompositeState,
    /// Interaction-frame snapshots at the recorded times.
    pub snapshots: Vec<CompositeState>,
    pub max_leakage: f64,
}

/// Integrates iħ∂_tψ = H(t)ψ from `state.time` to `t_end` with Strang splitting:
/// H_trap phases in the Fock basis around a potential-and-drive phase in the
/// position eigenbasis, where both are diagonal. Sectors evolve in parallel.
pub fn evolve(
    state: &CompositeState,
    p: &GateParams,
    t_end: f64,
    record_every: Option<usize>,
) -> Result<Evolution> {
    if state.cutoff_a != p.cutoff_a || state.cutoff_i != p.cutoff_i {
        return Err(Error::InvalidParameter(
            "state cutoffs differ from gate parameters".into(),
        ));
    }
    let span = t_end - state.time;
    if !(span >= 0.0) {
        return Err(Error::InvalidParameter(
            "t_end before the state time".into(),
        ));
    }
    let periods = span * p.omega_v() / (2.0 * PI);
    let nsteps = ((periods * p.steps_per_period as f64).ceil() as usize).max(1);
    let dt = span / nsteps as f64;
    let stepper = Stepper::new(p, dt);
    let block = p.motional_dim();
    let t0 = state.time;
    let every = record_every.unwrap_or(0);

    let sectors: Vec<(Vec<Complex64>, Vec<Vec<Complex64>>)> = (0..4)
        .into_par_iter()
        .map(|s| {
            let mut m = state.sector(s).to_vec();
            let mut scratch = vec![Complex64::new(0.0, 0.0); block];
            let mut recs = Vec::new();
            if every > 0 {
                recs.push(m.clone());
            }
            let (atom_up, ion_up) = (s / 2 == UP, s % 2 == UP);
            for k in 0..nsteps {
                let tm = t0 + (k as f64 + 0.5) * dt;
                stepper.step(&mut m, &mut scratch, p, atom_up, ion_up, tm);
                if every > 0 && ((k + 1) % every == 0 || k + 1 == nsteps) {
                    recs.push(m.clone());
                }
            }
            (m, recs)
        })
        .collect();

    let mut out = state.clone();
    out.time = t_end;
    for (s, (m, _)) in sectors.iter().enumerate() {
        let before = state.sector_population(s);
        out.amps[s * block..(s + 1) * block].copy_from_slice(m);
        let drift = (out.sector_population(s) - before).abs();
        if drift > NORM_TOL {
            return Err(Error::NormDrift { drift });
        }
    }
    let mut snapshots = Vec::new();
    let mut max_leakage = out.leakage();
    if every > 0 {
        let count = sectors[0].1.len();
        for r in 0..count {
            let mut snap = state.clone();
            let k = if r + 1 == count { nsteps } else { r * every };
            snap.time = t0 + k as f64 * dt;
            for (s, (_, recs)) in sectors.iter().enumerate() {
                snap.amps[s * block..(s + 1) * block].copy_from_slice(&recs[r]);
            }
            max_leakage = max_leakage.max(snap.leakage());
            snapshots.push(to_interaction_frame(&snap, p));
        }
    }
    if max_leakage > p.leakage_limit {
        return Err(Error::CutoffTooSmall {
            leakage: max_leakage,
        });
    }
    Ok(Evolution {
        state: out,
        snapshots,
        max_leakage,
    })
}

/// exp(−iπσ_y/4) on (↑, ↓) amplitudes.
const PULSE: [[f64; 2]; 2] = [
    [FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
    [FRAC_1_SQRT_2, FRAC_1_SQRT_2],
];

/// Û = exp(−iπ(σ_y^a + σ_y^i)/4); motional factors untouched.
pub fn pi2_pulse(state: &CompositeState) -> CompositeState {
    let mut out = state.clone();
    let block = state.block();
    for m in 0..block {
        for a in 0..2 {
            for i in 0..2 {
                let mut acc = Complex64::new(0.0, 0.0);
                for b in 0..2 {
                    for j in 0..2 {
                        acc += state.amps[(2 * b + j) * block + m] * (PULSE[a][b] * PULSE[i][j]);
                    }
                }
                out.amps[(2 * a + i) * block + m] = acc;
            }
        }
    }
    out
}

/// Virtual-Z phases: multiplies ↑_a by e^{−iφ_a} and ↑_i by e^{−iφ_i}.
pub fn apply_virtual_z(state: &CompositeState, phi_a: f64, phi_i: f64) -> CompositeState {
    let mut out = state.clone();
    let block = state.block();
    for s in 0..4 {
        let ph = if s / 2 == UP { phi_a } else { 0.0 } + if s % 2 == UP { phi_i } else { 0.0 };
        let f = Complex64::from_polar(1.0, -ph);
        for v in &mut out.amps[s * block..(s + 1) * block] {
            *v *= f;
        }
    }
    out
}

/// |⟨goal|out⟩|².
pub fn fidelity(out: &CompositeState, goal: &CompositeState) -> Result<f64> {
    Ok(out.inner(goal)?.norm_sqr())
}

/// Tr(ρ_g ρ_out) for weighted pure-state ensembles.
pub fn ensemble_fidelity(
    out: &[(f64, CompositeState)],
    goal: &[(f64, CompositeState)],
) -> Result<f64> {
    let mut f = 0.0;
    for (wo, o) in out {
        for (wg, g) in goal {
            f += wo * wg * o.inner(g)?.norm_sqr();
        }
    }
    Ok(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Input {
    PlusPlus,
    PlusMinus,
    MinusPlus,
    MinusMinus,
}

impl Input {
    pub const ALL: [Input; 4] = [
        Input::PlusPlus,
        Input::PlusMinus,
        Input::MinusPlus,
        Input::MinusMinus,
    ];

    /// (atom sign, ion sign) of the ↓ amplitude.
    pub fn signs(self) -> (f64, f64) {
        match self {
            Input::PlusPlus => (1.0, 1.0),
            Input::PlusMinus => (1.0, -1.0),
            Input::MinusPlus => (-1.0, 1.0),
            Input::MinusMinus => (-1.0, -1.0),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Input::PlusPlus => "++",
            Input::PlusMinus => "+-",
            Input::MinusPlus => "-+",
            Input::MinusMinus => "--",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Input::ALL
            .into_iter()
            .find(|i| i.label() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown gate input {s:?}")))
    }

    /// Spin amplitude of sector s relative to the ++ amplitude 1/2.
    fn sector_factor(self, s: usize) -> f64 {
        let (sa, si) = self.signs();
        (if s / 2 == UP { 1.0 } else { sa }) * (if s % 2 == UP { 1.0 } else { si })
    }

    /// Candidate Bell goals as (label, amplitudes on ↑↑, ↑↓, ↓↑, ↓↓).
    pub fn goals(self) -> Vec<(&'static str, [Complex64; 4])> {
        let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let i = Complex64::new(0.0, FRAC_1_SQRT_2);
        let z = Complex64::new(0.0, 0.0);
        match self {
            Input::PlusPlus => vec![("(uu+i dd)/sqrt2", [r, z, z, i])],
            Input::MinusMinus => vec![("(uu-i dd)/sqrt2", [r, z, z, -i])],
            // the printed kets for the mixed inputs coincide; both phase choices are tried
            Input::PlusMinus | Input::MinusPlus => {
                vec![
                    ("(ud+i du)/sqrt2", [z, r, i, z]),
                    ("(ud-i du)/sqrt2", [z, r, -i, z]),
                ]
            }
        }
    }
}

/// Spin goal tensored with a motional Fock state.
pub fn goal_state(
    spin: [Complex64; 4],
    n_a: usize,
    n_i: usize,
    cutoff_a: usize,
    cutoff_i: usize,
) -> CompositeState {
    let mut g = CompositeState::zeros(cutoff_a, cutoff_i);
    for (s, amp) in spin.iter().enumerate() {
        let idx = g.index(s, n_a, n_i);
        g.amps[idx] = *amp;
    }
    g
}

/// Output state of `input` built from the ++ run by re-signing sectors.
fn resign(pp: &CompositeState, input: Input) -> CompositeState {
    let mut out = pp.clone();
    let block = pp.block();
    for s in 0..4 {
        let f = input.sector_factor(s);
        for v in &mut out.amps[s * block..(s + 1) * block] {
            *v *= f;
        }
    }
    out
}

/// F(φ_a, φ_i) against `goal` for an interaction-frame output.
fn compensated_fidelity(frame_out: &CompositeState, goal: &CompositeState, phi: (f64, f64)) -> f64 {
    let rotated = pi2_pulse(&apply_virtual_z(frame_out, phi.0, phi.1));
    rotated.inner(goal).map(|c| c.norm_sqr()).unwrap_or(0.0)
}

/// Single-qubit Z phases maximizing F for the given output: grid then pattern search.
pub fn calibrate_virtual_z(frame_out: &CompositeState, goal: &CompositeState) -> (f64, f64, f64) {
    // only the goal's motional component matters, so reduce to four amplitudes first
    let mut reduced = CompositeState::zeros(1, 1);
    let block = frame_out.block();
    let mut motional = None;
    for s in 0..4 {
        for m in 0..block {
            if goal.amps[s * block + m].norm_sqr() > 0.0 {
                motional = Some(m);
            }
        }
    }
    let m = motional.unwrap_or(0);
    for s in 0..4 {
        reduced.amps[s] = frame_out.amps[s * block + m];
    }
    let mut goal_r = CompositeState::zeros(1, 1);
    for s in 0..4 {
        goal_r.amps[s] = goal.amps[s * block + m];
    }
    let f = |a: f64, b: f64| compensated_fidelity(&reduced, &goal_r, (a, b));
    let n = 120;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for ia in 0..n {
        for ib in 0..n {
            let (a, b) = (
                2.0 * PI * ia as f64 / n as f64,
                2.0 * PI * ib as f64 / n as f64,
            );
            let v = f(a, b);
            if v > best.0 {
                best = (v, a, b);
            }
        }
    }
    let mut step = 2.0 * PI / n as f64;
    while step > 1e-10 {
        let mut improved = false;
        for (da, db) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let v = f(best.1 + da, best.2 + db);
            if v > best.0 {
                best = (v, best.1 + da, best.2 + db);
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (
        best.1.rem_euclid(2.0 * PI),
        best.2.rem_euclid(2.0 * PI),
        best.0,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    /// P_↑↑, P_↑↓, P_↓↑, P_↓↓ after the compensated π/2 pulse.
    pub populations: [f64; 4],
    pub n_ion: f64,
    pub n_atom: f64,
}

#[derive(Debug, Clone)]
pub struct InputResult {
    pub input: Input,
    pub goal: &'static str,
    pub fidelity_raw: f64,
    pub fidelity: f64,
    /// Σ_s |⟨n_a n_i|ψ_s⟩|² with the initial motional state: return of the motion.
    pub motional_return: f64,
    pub traces: Vec<TraceRow>,
}

#[derive(Debug, Clone)]
pub struct GateRun {
    pub compensation: (f64, f64),
    pub inputs: Vec<InputResult>,
    pub max_leakage: f64,
    /// Two-qubit phase (φ_↑↓ + φ_↓↑ − φ_↑↑ − φ_↓↓)/4 from the motional-ground amplitudes.
    pub phase: f64,
}

fn plus_plus(p: &GateParams, n_a: usize, n_i: usize) -> Result<CompositeState> {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    CompositeState::product([h, h], [h, h], n_a, n_i, p.cutoff_a, p.cutoff_i)
}

fn sector_phase(frame_out: &CompositeState, n_a: usize, n_i: usize) -> f64 {
    let ph = |s: usize| frame_out.amps[frame_out.index(s, n_a, n_i)].arg();
    (ph(1) + ph(2) - ph(0) - ph(3)) / 4.0
}

fn wrap(phi: f64) -> f64 {
    (phi + PI).rem_euclid(2.0 * PI) - PI
}

/// Gate on every product input from motional |n_a, n_i⟩, with virtual-Z phases
/// calibrated on ++ (or supplied).
pub fn run_all_inputs(
    p: &GateParams,
    n_a: usize,
    n_i: usize,
    record_every: Option<usize>,
    compensation: Option<(f64, f64)>,
) -> Result<GateRun> {
    p.validate()?;
    let init = plus_plus(p, n_a, n_i)?;
    let ev = evolve(&init, p, p.gate_time(), record_every)?;
    let frame = to_interaction_frame(&ev.state, p);
    let pp_goal = goal_state(
        Input::PlusPlus.goals()[0].1,
        n_a,
        n_i,
        p.cutoff_a,
        p.cutoff_i,
    );
    let comp = match compensation {
        Some(c) => c,
        None => {
            let (a, b, _) = calibrate_virtual_z(&frame, &pp_goal);
            (a, b)
        }
    };
    let mut inputs = Vec::new();
    for input in Input::ALL {
        let out = resign(&frame, input);
        let mut best: Option<(&'static str, f64, f64)> = None;
        for (label, spin) in input.goals() {
            let g = goal_state(spin, n_a, n_i, p.cutoff_a, p.cutoff_i);
            let raw = fidelity(&pi2_pulse(&out), &g)?;
            let comp_f = compensated_fidelity(&out, &g, comp);
            if best.is_none_or(|b| comp_f > b.2) {
                best = Some((label, raw, comp_f));
            }
        }
        let (goal, fidelity_raw, fid) = best.expect("every input has a goal");
        let motional_return = (0..4)
            .map(|s| out.amps[out.index(s, n_a, n_i)].norm_sqr())
            .sum::<f64>();
        let traces = ev
            .snapshots
            .iter()
            .map(|snap| {
                let rot = pi2_pulse(&apply_virtual_z(&resign(snap, input), comp.0, comp.1));
                let (n_ion, n_atom) = rot.mean_phonons();
                TraceRow {
                    t: snap.time,
                    populations: [0, 1, 2, 3].map(|s| rot.sector_population(s)),
                    n_ion,
                    n_atom,
                }
            })
            .collect();
        inputs.push(InputResult {
            input,
            goal,
            fidelity_raw,
            fidelity: fid,
            motional_return,
            traces,
        });
    }
    Ok(GateRun {
        compensation: comp,
        inputs,
        max_leakage: ev.max_leakage,
        phase: wrap(sector_phase(&frame, n_a, n_i)),
    })
}

pub fn run_gate(input: Input, p: &GateParams, record_every: Option<usize>) -> Result<InputResult> {
    let run = run_all_inputs(p, 0, 0, record_every, None)?;
    Ok(run
        .inputs
        .into_iter()
        .find(|r| r.input == input)
        .expect("all inputs are run"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalSpec {
    pub nbar_a: f64,
    pub nbar_i: f64,
    /// Largest Fock number kept per mode in the ensemble.
    pub n_max: usize,
}

#[derive(Debug, Clone)]
pub struct ThermalResult {
    /// Σ P_{n_i}P_{n_a} |⟨goal, n_a n_i| out_{n_a n_i}⟩|² divided by the truncated trace.
    pub fidelity: f64,
    /// The same sum without the division.
    pub fidelity_unnormalized: f64,
    /// Tr(ρ_g ρ_out) with both ensembles carrying the thermal weights.
    pub trace_overlap: f64,
    /// Σ P_{n_i}P_{n_a} of the truncated ensemble.
    pub trace: f64,
    /// (n_a, n_i, weight, member fidelity).
    pub members: Vec<(usize, usize, f64, f64)>,
}

pub fn thermal_weight(nbar: f64, n: usize) -> f64 {
    nbar.powi(n as i32) / (1.0 + nbar).powi(n as i32 + 1)
}

/// ++ input from a thermal motional mixture. Members are evolved independently and
/// share the compensation calibrated on the motional ground state.
pub fn run_thermal(spec: &ThermalSpec, p: &GateParams) -> Result<ThermalResult> {
    if spec.n_max + 3 > p.cutoff_a.min(p.cutoff_i) {
        return Err(Error::InvalidParameter(
            "thermal n_max must stay 3 below the phonon cutoff".into(),
        ));
    }
    let ground = run_all_inputs(p, 0, 0, None, None)?;
    let comp = ground.compensation;
    let goal_spin = Input::PlusPlus.goals()[0].1;
    let pairs: Vec<(usize, usize)> = (0..=spec.n_max)
        .flat_map(|a| (0..=spec.n_max).map(move |i| (a, i)))
        .collect();
    let outs: Vec<Result<(usize, usize, f64, CompositeState)>> = pairs
        .par_iter()
        .map(|&(a, i)| {
            let w = thermal_weight(spec.nbar_a, a) * thermal_weight(spec.nbar_i, i);
            let init = plus_plus(p, a, i)?;
            let ev = evolve(&init, p, p.gate_time(), None)?;
            let out = pi2_pulse(&apply_virtual_z(
                &to_interaction_frame(&ev.state, p),
                comp.0,
                comp.1,
            ));
            Ok((a, i, w, out))
        })
        .collect();
    let mut members = Vec::new();
    let mut out_ens = Vec::new();
    let mut goal_ens = Vec::new();
    let (mut fid, mut trace) = (0.0, 0.0);
    for r in outs {
        let (a, i, w, out) = r?;
        let g = goal_state(goal_spin, a, i, p.cutoff_a, p.cutoff_i);
        let f = fidelity(&out, &g)?;
        fid += w * f;
        trace += w;
        members.push((a, i, w, f));
        out_ens.push((w, out));
        goal_ens.push((w, g));
    }
    Ok(ThermalResult {
        fidelity: fid / trace,
        fidelity_unnormalized: fid,
        trace_overlap: ensemble_fidelity(&out_ens, &goal_ens)?,
        trace,
        members,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseReport {
    pub simulated: f64,
    /// Jτ_g/ħ with J = F₀²ℓ_i²/(32ħδ).
    pub analytic: f64,
}

pub fn spin_spin_phase(p: &GateParams) -> Result<PhaseReport> {
    let run = run_all_inputs(p, 0, 0, None, Some((0.0, 0.0)))?;
    let f0 = p.force();
    let j = f0 * f0 * p.ell_i * p.ell_i / (32.0 * HBAR * p.delta);
    Ok(PhaseReport {
        simulated: run.phase,
        analytic: j * p.gate_time() / HBAR,
    })
}

/// |V(d)|/(2ħω_v), the size of the term dropped by the rotating-wave treatment.
pub fn rwa_ratio(p: &GateParams) -> f64 {
    p.potential.coeff[0][0].abs() / (2.0 * HBAR * p.omega_v())
}
