//! Transverse gate with full rf micromotion: one 2D wavefunction per spin sector,
//! propagated by Fourier split-step in dimensionless units (lengths ℓ, time Ω_rf t, energies ħΩ_rf).
//!
//! Sectors are indexed `2·atom + ion` with 0 = ↑. Sectors with the atom down have a separable
//! Hamiltonian and a product initial state, so they are carried as an ion and an atom factor
//! on the same axes; the dense grid is used only where the potential couples the two.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::dressed::{
    oscillator_length, taylor3, xis_si, AdiabaticPotential, DressingParams, FieldModel,
    TaylorCoeffs,
};
use crate::error::{Error, Result};
use crate::gate::Modulation;
use crate::physics_core::{
    angular, field_norm_partials, ScaledUnits, Species, TrapParams, ALPHA_LI_GROUND_AU,
    AU_POLARIZABILITY, HBAR,
};
use crate::rydberg::RydbergState;

/// Probability allowed within two cells of any grid edge.
pub const EDGE_TOL: f64 = 1e-6;
/// Sector norm tolerance over a run.
pub const MM_NORM_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ramp {
    SinSquared,
    Linear,
}

impl Ramp {
    pub fn value(self, t: f64, t_ramp: f64) -> f64 {
        if t_ramp <= 0.0 || t >= t_ramp {
            return 1.0;
        }
        let x = (t / t_ramp).max(0.0);
        match self {
            Ramp::SinSquared => (0.5 * PI * x).sin().powi(2),
            Ramp::Linear => x,
        }
    }
}

/// Ion confinement used on the grid. Only `Rf` belongs to the gate; the others are test oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IonMotion {
    /// −(m Ω_rf² q/4) cos(Ω_rf t) x², from the same rf field that enters Ṽ.
    Rf,
    /// Static ½ m ω_i² x² at ω_i = Ω_rf q/2^{3/2}.
    Secular,
    /// No ion confinement.
    Free,
}

#[derive(Debug, Clone)]
pub struct MMParams {
    /// Pure rf trap (a = 0).
    pub trap: TrapParams,
    pub atom: Species,
    pub ion: Species,
    pub omega_a: f64,
    pub d: f64,
    pub dressing: DressingParams,
    pub potential: AdiabaticPotential,
    pub eta_omega_sm: f64,
    pub delta_perp: f64,
    pub ramp_time: f64,
    pub ramp: Ramp,
    /// Also ramp the ion drive (default: only the dressed potential is ramped).
    pub ramp_drive: bool,
    pub t_end: f64,
    pub modulation: Modulation,
    pub ion_motion: IonMotion,
}

impl MMParams {
    /// ⁷Li 30S dressed at Ω = 2π·13.1 MHz, Δ₀ = 2π·0.8 GHz next to ¹⁷¹Yb⁺ in a pure rf trap
    /// (Ω_rf = 2π·2.5 MHz, q = 0.282843), ω_a = 2π·200 kHz, d = 1 μm, 50 μs sin² ramp,
    /// ηΩ = 2π·1.06 kHz, δ⊥ = 2π·1.064 kHz, t_end = 2π/δ⊥.
    pub fn reference(c4: f64) -> Result<Self> {
        let atom = Species::lithium7();
        let dressing = DressingParams::new(
            angular(13.1e6),
            angular(0.8e9),
            RydbergState::s_half(&atom, 30)?,
        );
        let delta_perp = angular(1.064e3);
        Ok(Self {
            trap: TrapParams::rf_only(angular(2.5e6), 0.282843)?,
            atom,
            ion: Species::ytterbium171_ion(),
            omega_a: angular(200e3),
            d: 1e-6,
            potential: AdiabaticPotential::new(&dressing, c4)?,
            dressing,
            eta_omega_sm: angular(1.06e3),
            delta_perp,
            ramp_time: 50e-6,
            ramp: Ramp::SinSquared,
            ramp_drive: false,
            t_end: 2.0 * PI / delta_perp,
            modulation: Modulation::Plus,
            ion_motion: IonMotion::Rf,
        })
    }

    /// ω_i = Ω_rf q/2^{3/2}, the frequency defining ℓ_i and the initial Gaussian.
    pub fn omega_i(&self) -> f64 {
        self.trap.pseudo_frequency()
    }

    /// ω_v = Mathieu secular frequency + δ⊥.
    pub fn omega_v(&self) -> Result<f64> {
        Ok(self.trap.secular_frequency()? + self.delta_perp)
    }

    pub fn ell_i(&self) -> f64 {
        oscillator_length(&self.ion, self.omega_i())
    }

    pub fn ell_a(&self) -> f64 {
        oscillator_length(&self.atom, self.omega_a)
    }

    pub fn units(&self) -> Result<ScaledUnits> {
        ScaledUnits::new(
            &self.atom,
            &self.ion,
            self.omega_a,
            self.omega_i(),
            self.trap.omega_rf,
            ALPHA_LI_GROUND_AU * AU_POLARIZABILITY,
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.trap.validate()?;
        if self.trap.a != 0.0 {
            return Err(Error::InvalidParameter(
                "the micromotion run needs a = 0".into(),
            ));
        }
        if !(self.omega_a > 0.0 && self.d > 0.0 && self.t_end > 0.0 && self.delta_perp != 0.0) {
            return Err(Error::InvalidParameter(
                "micromotion needs ω_a, d, t_end > 0 and δ⊥ ≠ 0".into(),
            ));
        }
        if !(self.ramp_time >= 0.0 && self.ramp_time < 0.1 * self.t_end) {
            return Err(Error::InvalidParameter(
                "ramp time must be below 0.1·t_end".into(),
            ));
        }
        Ok(())
    }

    fn field(&self) -> FieldModel<'_> {
        FieldModel::Trap {
            trap: &self.trap,
            ion: &self.ion,
        }
    }

    /// Ṽ⁽³⁾ coefficients at time t (SI).
    pub fn taylor_at(&self, t: f64) -> Result<TaylorCoeffs> {
        taylor3(self.d, t, &self.dressing, &self.potential, self.field())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    /// Half-widths, m.
    pub extent_i: f64,
    pub extent_a: f64,
    pub n_i: usize,
    pub n_a: usize,
}

impl Grid2D {
    /// Square grid with half-widths 12ℓ_i × 12ℓ_a.
    pub fn for_params(p: &MMParams, n: usize) -> Self {
        Self {
            extent_i: 12.0 * p.ell_i(),
            extent_a: 12.0 * p.ell_a(),
            n_i: n,
            n_a: n,
        }
    }

    pub fn spacing_i(&self) -> f64 {
        2.0 * self.extent_i / self.n_i as f64
    }

    pub fn spacing_a(&self) -> f64 {
        2.0 * self.extent_a / self.n_a as f64
    }

    pub fn x_i(&self, k: usize) -> f64 {
        (k as f64 - (self.n_i / 2) as f64) * self.spacing_i()
    }

    pub fn x_a(&self, k: usize) -> f64 {
        (k as f64 - (self.n_a / 2) as f64) * self.spacing_a()
    }

    pub fn validate(&self, p: &MMParams) -> Result<()> {
        if !self.n_i.is_power_of_two()
            || !self.n_a.is_power_of_two()
            || self.n_i < 16
            || self.n_a < 16
        {
            return Err(Error::InvalidParameter(
                "grid sizes must be powers of two ≥ 16".into(),
            ));
        }
        for (ext, h, ell, axis) in [
            (self.extent_i, self.spacing_i(), p.ell_i(), "ion"),
            (self.extent_a, self.spacing_a(), p.ell_a(), "atom"),
        ] {
            if ext < 8.0 * ell {
                return Err(Error::InvalidParameter(format!(
                    "{axis} extent below 8 ground-state widths"
                )));
            }
            // σ_p = 1/(2ℓ) in wavenumber units
            if PI / h < 6.0 / (2.0 * ell) {
                return Err(Error::InvalidParameter(format!(
                    "{axis} grid too coarse for the initial momentum spread"
                )));
            }
        }
        Ok(())
    }
}

/// Motional state of one spin sector.
#[derive(Debug, Clone)]
pub enum SectorState {
    /// ψ(x_i) ⊗ φ(x_a).
    Product {
        ion: Vec<Complex64>,
        atom: Vec<Complex64>,
    },
    /// ψ(x_a, x_i), stored `[k_a·n_i + k_i]`.
    Dense(Vec<Complex64>),
}

#[derive(Debug, Clone)]
pub struct SectorWavefunction {
    pub sector: usize,
    pub grid: Grid2D,
    pub state: SectorState,
    pub time: f64,
}

impl SectorWavefunction {
    pub fn label(&self) -> &'static str {
        SECTOR_LABELS[self.sector]
    }

    /// Dense amplitudes, materializing a product state if needed.
    pub fn to_dense(&self) -> Vec<Complex64> {
        match &self.state {
            SectorState::Dense(v) => v.clone(),
            SectorState::Product { ion, atom } => atom
                .iter()
                .flat_map(|a| ion.iter().map(move |i| a * i))
                .collect(),
        }
    }

    fn weights(&self) -> (Vec<f64>, Vec<f64>) {
        let (ni, na) = (self.grid.n_i, self.grid.n_a);
        match &self.state {
            SectorState::Product { ion, atom } => (
                ion.iter().map(|c| c.norm_sqr()).collect(),
                atom.iter().map(|c| c.norm_sqr()).collect(),
            ),
            SectorState::Dense(v) => {
                let mut wi = vec![0.0; ni];
                let mut wa = vec![0.0; na];
                for a in 0..na {
                    for i in 0..ni {
                        let p = v[a * ni + i].norm_sqr();
                        wi[i] += p;
                        wa[a] += p;
                    }
                }
                (wi, wa)
            }
        }
    }

    pub fn norm(&self) -> f64 {
        let (wi, wa) = self.weights();
        match &self.state {
            SectorState::Product { .. } => wi.iter().sum::<f64>() * wa.iter().sum::<f64>(),
            SectorState::Dense(_) => wi.iter().sum(),
        }
    }

    /// (⟨x_i⟩, ⟨x_a⟩, ⟨x_i²⟩, ⟨x_a²⟩) in m, m².
    pub fn moments(&self) -> [f64; 4] {
        let (wi, wa) = self.weights();
        let (si, sa): (f64, f64) = (wi.iter().sum(), wa.iter().sum());
        let mut m = [0.0; 4];
        for (k, w) in wi.iter().enumerate() {
            let x = self.grid.x_i(k);
            m[0] += w * x / si;
            m[2] += w * x * x / si;
        }
        for (k, w) in wa.iter().enumerate() {
            let x = self.grid.x_a(k);
            m[1] += w * x / sa;
            m[3] += w * x * x / sa;
        }
        m
    }

    /// Probability within two cells of any edge.
    pub fn edge_probability(&self) -> f64 {
        let (wi, wa) = self.weights();
        let edge = |w: &[f64]| {
            let n = w.len();
            let tot: f64 = w.iter().sum();
            (w[..2].iter().sum::<f64>() + w[n - 2..].iter().sum::<f64>()) / tot
        };
        let (ei, ea) = (edge(&wi), edge(&wa));
        ei + ea - ei * ea
    }
}

pub const SECTOR_LABELS: [&str; 4] = ["uu", "ud", "du", "dd"];

/// Product ground-state Gaussians of widths ℓ_i and ℓ_a in every sector.
pub fn init_gaussian(grid: &Grid2D, p: &MMParams) -> Result<Vec<SectorWavefunction>> {
    init_displaced(grid, p, 0.0, 0.0)
}

/// Same Gaussians centred at (x_i0, x_a0), m.
pub fn init_displaced(
    grid: &Grid2D,
    p: &MMParams,
    x_i0: f64,
    x_a0: f64,
) -> Result<Vec<SectorWavefunction>> {
    grid.validate(p)?;
    let gauss = |n: usize, x: &dyn Fn(usize) -> f64, ell: f64, x0: f64| {
        let mut v: Vec<Complex64> = (0..n)
            .map(|k| Complex64::new((-(x(k) - x0).powi(2) / (4.0 * ell * ell)).exp(), 0.0))
            .collect();
        let s: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for c in v.iter_mut() {
            *c /= s;
        }
        v
    };
    let ion = gauss(grid.n_i, &|k| grid.x_i(k), p.ell_i(), x_i0);
    let atom = gauss(grid.n_a, &|k| grid.x_a(k), p.ell_a(), x_a0);
    Ok((0..4)
        .map(|s| {
            let state = if s / 2 == 0 {
                SectorState::Dense(
                    atom.iter()
                        .flat_map(|a| ion.iter().map(move |i| a * i))
                        .collect(),
                )
            } else {
                SectorState::Product {
                    ion: ion.clone(),
                    atom: atom.clone(),
                }
            };
            SectorWavefunction {
                sector: s,
                grid: *grid,
                state,
                time: 0.0,
            }
        })
        .collect())
}

/// Dimensionless coefficients shared by every sector.
#[derive(Debug, Clone)]
struct Scales {
    ell: f64,
    omega_rf: f64,
    kin_i: f64,
    kin_a: f64,
    /// U_rf = −g_rf cos τ x_i².
    g_rf: f64,
    /// static ion term g_sec x_i², for `IonMotion::Secular`
    g_sec: f64,
    motion: IonMotion,
    /// U_a = g_a x_a².
    g_a: f64,
    /// drive amplitude per unit x_i: (ηΩ/Ω_rf)(ℓ/ℓ_i).
    g_drive: f64,
    omega_v: f64,
    /// grid coordinates in ℓ
    xi: Vec<f64>,
    xa: Vec<f64>,
    ki: Vec<f64>,
    ka: Vec<f64>,
}

impl Scales {
    fn new(p: &MMParams, grid: &Grid2D) -> Result<Self> {
        let ell = p.units()?.length_unit;
        let om = p.trap.omega_rf;
        let freqs = |n: usize, h: f64| -> Vec<f64> {
            (0..n)
                .map(|k| {
                    let kk = if k < n / 2 {
                        k as f64
                    } else {
                        k as f64 - n as f64
                    };
                    2.0 * PI * kk / (n as f64 * h)
                })
                .collect()
        };
        let (hi, ha) = (grid.spacing_i() / ell, grid.spacing_a() / ell);
        Ok(Self {
            ell,
            omega_rf: om,
            kin_i: HBAR / (2.0 * p.ion.mass * ell * ell * om),
            kin_a: HBAR / (2.0 * p.atom.mass * ell * ell * om),
            g_rf: p.ion.mass * om * p.trap.q * ell * ell / (4.0 * HBAR),
            g_sec: 0.5 * p.ion.mass * p.omega_i().powi(2) * ell * ell / (HBAR * om),
            motion: p.ion_motion,
            g_a: 0.5 * p.atom.mass * p.omega_a * p.omega_a * ell * ell / (HBAR * om),
            g_drive: p.eta_omega_sm / om * ell / p.ell_i(),
            omega_v: p.omega_v()?,
            xi: (0..grid.n_i).map(|k| grid.x_i(k) / ell).collect(),
            xa: (0..grid.n_a).map(|k| grid.x_a(k) / ell).collect(),
            ki: freqs(grid.n_i, hi),
            ka: freqs(grid.n_a, ha),
        })
    }
}

/// Which pieces of the potential act in a sector.
#[derive(Debug, Clone, Copy)]
struct SectorTerms {
    dressed: bool,
    drive: bool,
}

fn terms(sector: usize) -> SectorTerms {
    SectorTerms {
        dressed: sector / 2 == 0,
        drive: sector.is_multiple_of(2),
    }
}

/// Time-dependent potential in ħΩ_rf units, split as ion part + atom part + cross part.
struct PotentialSlice {
    ion: Vec<f64>,
    atom: Vec<f64>,
    /// cross(x_i, x_a) = c11 x_i x_a + c12 x_i x_a² + c21 x_i² x_a
    c11: f64,
    c12: f64,
    c21: f64,
}

/// `rf` is cos(Ω_rf t) or its mean over the kick interval.
fn potential_slice(
    p: &MMParams,
    sc: &Scales,
    t: f64,
    rf: f64,
    st: SectorTerms,
    taylor: Option<&TaylorCoeffs>,
) -> PotentialSlice {
    let ramp = p.ramp.value(t, p.ramp_time);
    let sm = match p.modulation {
        Modulation::Plus => 1.0,
        Modulation::Minus => -1.0,
    };
    let cosv = (sc.omega_v * t).cos();
    let g_ion = match sc.motion {
        IonMotion::Rf => -sc.g_rf * rf,
        IonMotion::Secular => sc.g_sec,
        IonMotion::Free => 0.0,
    };
    let mut ion: Vec<f64> = sc.xi.iter().map(|x| g_ion * x * x).collect();
    let mut atom: Vec<f64> = sc.xa.iter().map(|x| sc.g_a * x * x).collect();
    if st.drive {
        let rd = if p.ramp_drive { ramp } else { 1.0 };
        let f = sm * rd * sc.g_drive * cosv;
        for (v, x) in ion.iter_mut().zip(&sc.xi) {
            *v += f * x;
        }
    }
    let (mut c11, mut c12, mut c21) = (0.0, 0.0, 0.0);
    if st.dressed {
        let tc = taylor.expect("dressed sectors need Taylor coefficients");
        let w = ramp * 0.5 * (1.0 + sm * cosv) / (HBAR * sc.omega_rf);
        let c = |j: usize, k: usize| tc.coeff[j][k] * sc.ell.powi((j + k) as i32) * w;
        for (v, x) in ion.iter_mut().zip(&sc.xi) {
            *v += c(0, 0) + c(1, 0) * x + c(2, 0) * x * x + c(3, 0) * x * x * x;
        }
        for (v, x) in atom.iter_mut().zip(&sc.xa) {
            *v += c(0, 1) * x + c(0, 2) * x * x + c(0, 3) * x * x * x;
        }
        c11 = c(1, 1);
        c12 = c(1, 2);
        c21 = c(2, 1);
    }
    PotentialSlice {
        ion,
        atom,
        c11,
        c12,
        c21,
    }
}

/// FFT plans and per-worker workspace.
struct Workspace {
    fi: Arc<dyn Fft<f64>>,
    fa: Arc<dyn Fft<f64>>,
    ii: Arc<dyn Fft<f64>>,
    ia: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    buf: Vec<Complex64>,
    k2: Vec<Complex64>,
}

impl Workspace {
    fn new(grid: &Grid2D) -> Self {
        let mut planner = FftPlanner::new();
        let fi = planner.plan_fft_forward(grid.n_i);
        let fa = planner.plan_fft_forward(grid.n_a);
        let ii = planner.plan_fft_inverse(grid.n_i);
        let ia = planner.plan_fft_inverse(grid.n_a);
        let len = [&fi, &fa, &ii, &ia]
            .iter()
            .map(|f| f.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        Self {
            fi,
            fa,
            ii,
            ia,
            scratch: vec![Complex64::new(0.0, 0.0); len],
            buf: vec![Complex64::new(0.0, 0.0); grid.n_i * grid.n_a],
            k2: Vec::new(),
        }
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const B: usize = 16;
    for r0 in (0..rows).step_by(B) {
        for c0 in (0..cols).step_by(B) {
            for r in r0..(r0 + B).min(rows) {
                for c in c0..(c0 + B).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

/// Kinetic propagator factors e^{−iκk²Δτ}/n for each axis.
fn kinetic_1d(k: &[f64], kin: f64, dtau: f64) -> Vec<Complex64> {
    let n = k.len() as f64;
    k.iter()
        .map(|kk| Complex64::from_polar(1.0 / n, -kin * kk * kk * dtau))
        .collect()
}

fn kinetic_dense(v: &mut [Complex64], ws: &mut Workspace, ki: &[Complex64], ka: &[Complex64]) {
    let (ni, na) = (ki.len(), ka.len());
    if ws.k2.len() != ni * na {
        // transposed layout [i·n_a + a]
        ws.k2 = ki
            .iter()
            .flat_map(|x| ka.iter().map(move |y| x * y))
            .collect();
    }
    ws.fi.process_with_scratch(v, &mut ws.scratch);
    transpose(v, &mut ws.buf, na, ni);
    ws.fa.process_with_scratch(&mut ws.buf, &mut ws.scratch);
    for (x, f) in ws.buf.iter_mut().zip(&ws.k2) {
        *x *= f;
    }
    ws.ia.process_with_scratch(&mut ws.buf, &mut ws.scratch);
    transpose(&ws.buf, v, ni, na);
    ws.ii.process_with_scratch(v, &mut ws.scratch);
}

fn kinetic_1d_apply(
    v: &mut [Complex64],
    fwd: &Arc<dyn Fft<f64>>,
    inv: &Arc<dyn Fft<f64>>,
    scratch: &mut [Complex64],
    k: &[Complex64],
) {
    fwd.process_with_scratch(v, scratch);
    for (x, f) in v.iter_mut().zip(k) {
        *x *= f;
    }
    inv.process_with_scratch(v, scratch);
}

fn potential_apply(state: &mut SectorState, pot: &PotentialSlice, sc: &Scales, dtau: f64) {
    let ei: Vec<Complex64> = pot
        .ion
        .iter()
        .map(|v| Complex64::from_polar(1.0, -v * dtau))
        .collect();
    let ea: Vec<Complex64> = pot
        .atom
        .iter()
        .map(|v| Complex64::from_polar(1.0, -v * dtau))
        .collect();
    match state {
        SectorState::Product { ion, atom } => {
            for (x, f) in ion.iter_mut().zip(&ei) {
                *x *= f;
            }
            for (x, f) in atom.iter_mut().zip(&ea) {
                *x *= f;
            }
        }
        SectorState::Dense(v) => {
            let ni = ei.len();
            let (x0, h) = (sc.xi[0], sc.xi[1] - sc.xi[0]);
            for (a, xa) in sc.xa.iter().enumerate() {
                // cross phase is quadratic along the row: advance it by constant second differences
                let alpha = pot.c11 * xa + pot.c12 * xa * xa;
                let beta = pot.c21 * xa;
                let phase = |x: f64| -(alpha * x + beta * x * x) * dtau;
                let mut z = ea[a] * Complex64::from_polar(1.0, phase(x0));
                let mut r = Complex64::from_polar(1.0, phase(x0 + h) - phase(x0));
                let s = Complex64::from_polar(1.0, -2.0 * beta * h * h * dtau);
                let row = &mut v[a * ni..(a + 1) * ni];
                for (k, (x, f)) in row.iter_mut().zip(&ei).enumerate() {
                    *x *= f * z;
                    z *= r;
                    r *= s;
                    if k % 32 == 31 {
                        z /= z.norm();
                        r /= r.norm();
                    }
                }
            }
        }
    }
}

/// Kinetic step in one sector (dense or product).
fn kinetic_apply(state: &mut SectorState, ws: &mut Workspace, ki: &[Complex64], ka: &[Complex64]) {
    match state {
        SectorState::Dense(v) => kinetic_dense(v, ws, ki, ka),
        SectorState::Product { ion, atom } => {
            let (fi, ii, fa, ia) = (ws.fi.clone(), ws.ii.clone(), ws.fa.clone(), ws.ia.clone());
            kinetic_1d_apply(ion, &fi, &ii, &mut ws.scratch, ki);
            kinetic_1d_apply(atom, &fa, &ia, &mut ws.scratch, ka);
        }
    }
}

/// Sector-specific view of the parameters: which terms act.
pub struct SplitStepper {
    params: MMParams,
    scales: Scales,
    terms: SectorTerms,
    dt: f64,
    ki: Vec<Complex64>,
    ka: Vec<Complex64>,
    ws: Workspace,
}

impl SplitStepper {
    pub fn new(params: &MMParams, grid: &Grid2D, sector: usize, dt: f64) -> Result<Self> {
        if dt == 0.0 || dt.abs() > 2.0 * PI / params.trap.omega_rf / 100.0 * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(
                "dt must not exceed T_rf/100".into(),
            ));
        }
        let scales = Scales::new(params, grid)?;
        let dtau = scales.omega_rf * dt;
        let ki = kinetic_1d(&scales.ki, scales.kin_i, dtau);
        let ka = kinetic_1d(&scales.ka, scales.kin_a, dtau);
        Ok(Self {
            params: params.clone(),
            scales,
            terms: terms(sector),
            dt,
            ki,
            ka,
            ws: Workspace::new(grid),
        })
    }

    /// Potential anchored at t; the rf quadrupole factor is averaged exactly over [a, b]
    /// (trapezoidal sampling of cos Ω_rf t would shift the secular frequency by O((Ω_rf dt)²)).
    fn slice(&self, t: f64, a: f64, b: f64) -> Result<PotentialSlice> {
        let om = self.scales.omega_rf;
        let rf = if b != a {
            ((om * b).sin() - (om * a).sin()) / (om * (b - a))
        } else {
            (om * t).cos()
        };
        let tc = if self.terms.dressed {
            Some(self.params.taylor_at(t)?)
        } else {
            None
        };
        Ok(potential_slice(
            &self.params,
            &self.scales,
            t,
            rf,
            self.terms,
            tc.as_ref(),
        ))
    }

    fn kick(&self, s: &mut SectorWavefunction, t: f64, a: f64, b: f64) -> Result<()> {
        let pot = self.slice(t, a, b)?;
        potential_apply(
            &mut s.state,
            &pot,
            &self.scales,
            self.scales.omega_rf * (b - a),
        );
        Ok(())
    }

    /// One symmetric step: half potential at t, kinetic, half potential at t + dt.
    pub fn step(&mut self, s: &mut SectorWavefunction) -> Result<()> {
        let (t, h) = (s.time, 0.5 * self.dt);
        self.kick(s, t, t, t + h)?;
        kinetic_apply(&mut s.state, &mut self.ws, &self.ki, &self.ka);
        self.kick(s, t + self.dt, t + h, t + self.dt)?;
        s.time = t + self.dt;
        Ok(())
    }

    /// `n` steps with the adjacent half potential kicks merged.
    pub fn run(&mut self, s: &mut SectorWavefunction, n: usize) -> Result<()> {
        if n == 0 {
            return Ok(());
        }
        let (t0, h) = (s.time, 0.5 * self.dt);
        self.kick(s, t0, t0, t0 + h)?;
        for k in 1..=n {
            kinetic_apply(&mut s.state, &mut self.ws, &self.ki, &self.ka);
            let t = t0 + k as f64 * self.dt;
            let b = if k == n { t } else { t + h };
            self.kick(s, t, t - h, b)?;
        }
        s.time = t0 + n as f64 * self.dt;
        Ok(())
    }

    /// ⟨H⟩ in J and effective phonon numbers (n_i, n_a) from ⟨p²⟩, ⟨x²⟩.
    pub fn energies(&mut self, s: &SectorWavefunction) -> Result<(f64, f64, f64)> {
        let sc = &self.scales;
        let pot = self.slice(s.time, s.time, s.time)?;
        let dense = s.to_dense();
        let (ni, na) = (s.grid.n_i, s.grid.n_a);
        let norm: f64 = dense.iter().map(|c| c.norm_sqr()).sum();
        let mut vexp = 0.0;
        let (mut x2i, mut x2a) = (0.0, 0.0);
        for a in 0..na {
            for i in 0..ni {
                let w = dense[a * ni + i].norm_sqr() / norm;
                let (xi, xa) = (sc.xi[i], sc.xa[a]);
                vexp += w
                    * (pot.ion[i]
                        + pot.atom[a]
                        + pot.c11 * xi * xa
                        + pot.c12 * xi * xa * xa
                        + pot.c21 * xi * xi * xa);
                x2i += w * xi * xi;
                x2a += w * xa * xa;
            }
        }
        let mut k = dense;
        self.ws
            .fi
            .process_with_scratch(&mut k, &mut self.ws.scratch);
        transpose(&k, &mut self.ws.buf, na, ni);
        self.ws
            .fa
            .process_with_scratch(&mut self.ws.buf, &mut self.ws.scratch);
        let knorm: f64 = self.ws.buf.iter().map(|c| c.norm_sqr()).sum();
        let (mut k2i, mut k2a) = (0.0, 0.0);
        for i in 0..ni {
            for a in 0..na {
                let w = self.ws.buf[i * na + a].norm_sqr() / knorm;
                k2i += w * sc.ki[i] * sc.ki[i];
                k2a += w * sc.ka[a] * sc.ka[a];
            }
        }
        let e_unit = HBAR * sc.omega_rf;
        let total = (sc.kin_i * k2i + sc.kin_a * k2a + vexp) * e_unit;
        let p = &self.params;
        let ell = sc.ell;
        let osc = |m: f64, w: f64, k2: f64, x2: f64| {
            let e = HBAR * HBAR * k2 / (2.0 * m * ell * ell) + 0.5 * m * w * w * x2 * ell * ell;
            e / (HBAR * w) - 0.5
        };
        Ok((
            total,
            osc(p.ion.mass, p.omega_i(), k2i, x2i),
            osc(p.atom.mass, p.omega_a, k2a, x2a),
        ))
    }
}

#[derive(Debug, Clone, Default)]
pub struct SectorTrace {
    pub t: Vec<f64>,
    pub x_i: Vec<f64>,
    pub x_a: Vec<f64>,
    pub n_i: Vec<f64>,
    pub n_a: Vec<f64>,
    pub energy: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct MMOptions {
    /// Steps per rf period (≥ 100).
    pub steps_per_rf: usize,
    /// Minimum number of regularly spaced samples.
    pub samples: usize,
    /// Windows (start, length) in s sampled at every step.
    pub zoom: Vec<(f64, f64)>,
}

impl Default for MMOptions {
    fn default() -> Self {
        Self {
            steps_per_rf: 128,
            samples: 1000,
            zoom: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MMResult {
    pub traces: Vec<SectorTrace>,
    pub final_states: Vec<SectorWavefunction>,
    /// |norm − 1| per sector at the end.
    pub norm_drift: [f64; 4],
    pub max_edge: [f64; 4],
}

fn run_sector(
    p: &MMParams,
    grid: &Grid2D,
    mut s: SectorWavefunction,
    opts: &MMOptions,
) -> Result<(SectorTrace, SectorWavefunction, f64, f64)> {
    let dt = 2.0 * PI / p.trap.omega_rf / opts.steps_per_rf as f64;
    let nsteps = (p.t_end / dt).ceil() as usize;
    let stride = (nsteps / opts.samples.max(1)).max(1);
    let mut stepper = SplitStepper::new(p, grid, s.sector, dt)?;
    let n0 = s.norm();
    let mut tr = SectorTrace::default();
    let mut max_edge = 0.0f64;
    let in_zoom = |k: usize| {
        let t = k as f64 * dt;
        opts.zoom.iter().any(|&(a, l)| t >= a && t <= a + l)
    };
    let record =
        |s: &SectorWavefunction, st: &mut SplitStepper, tr: &mut SectorTrace| -> Result<f64> {
            let m = s.moments();
            let (e, ni, na) = st.energies(s)?;
            tr.t.push(s.time);
            tr.x_i.push(m[0]);
            tr.x_a.push(m[1]);
            tr.n_i.push(ni);
            tr.n_a.push(na);
            tr.energy.push(e);
            Ok(s.edge_probability())
        };
    max_edge = max_edge.max(record(&s, &mut stepper, &mut tr)?);
    let mut k = 0;
    while k < nsteps {
        // advance to the next sample point
        let mut next = ((k / stride) + 1) * stride;
        if in_zoom(k + 1) {
            next = k + 1;
        } else {
            for &(a, _) in &opts.zoom {
                let kz = (a / dt).ceil() as usize;
                if kz > k && kz < next {
                    next = kz;
                }
            }
        }
        let next = next.min(nsteps);
        stepper.run(&mut s, next - k)?;
        k = next;
        let edge = record(&s, &mut stepper, &mut tr)?;
        max_edge = max_edge.max(edge);
        if edge > EDGE_TOL {
            return Err(Error::BoundaryLeak {
                sector: SECTOR_LABELS[s.sector].to_string(),
                prob: edge,
            });
        }
    }
    let drift = (s.norm() - n0).abs();
    if drift > MM_NORM_TOL {
        return Err(Error::NormDrift { drift });
    }
    Ok((tr, s, drift, max_edge))
}

/// Evolves the four sectors in parallel to `t_end` and records position traces.
pub fn run_micromotion_gate(p: &MMParams, grid: &Grid2D, opts: &MMOptions) -> Result<MMResult> {
    p.validate()?;
    if opts.steps_per_rf < 100 {
        return Err(Error::InvalidParameter(
            "at least 100 steps per rf period".into(),
        ));
    }
    let init = init_gaussian(grid, p)?;
    let out: Vec<Result<(SectorTrace, SectorWavefunction, f64, f64)>> = init
        .into_par_iter()
        .map(|s| run_sector(p, grid, s, opts))
        .collect();
    let mut traces = Vec::new();
    let mut finals = Vec::new();
    let mut norm_drift = [0.0; 4];
    let mut max_edge = [0.0; 4];
    for (k, r) in out.into_iter().enumerate() {
        let (t, s, d, e) = r?;
        traces.push(t);
        finals.push(s);
        norm_drift[k] = d;
        max_edge[k] = e;
    }
    Ok(MMResult {
        traces,
        final_states: finals,
        norm_drift,
        max_edge,
    })
}

/// Zoom windows one secular period wide at mid-gate and at the end.
pub fn gate_windows(p: &MMParams) -> Result<Vec<(f64, f64)>> {
    let period = 2.0 * PI / p.trap.secular_frequency()?;
    Ok(vec![
        (0.5 * p.t_end - period, 2.0 * period),
        (p.t_end - period, period),
    ])
}

/// Ion orbit figures per sector, in units of ℓ_i.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitSummary {
    /// max |⟨x_i⟩| over the run
    pub peak: [f64; 4],
    /// max |⟨x_i⟩| over the last secular period
    pub last: [f64; 4],
}

impl OrbitSummary {
    /// ↑↓ peak over ↑↑ peak.
    pub fn suppression(&self) -> f64 {
        self.peak[1] / self.peak[0]
    }

    /// Worst final/peak ratio over the opposite-spin sectors.
    pub fn return_ratio(&self) -> f64 {
        (self.last[1] / self.peak[1]).max(self.last[2] / self.peak[2])
    }
}

pub fn orbit_summary(res: &MMResult, p: &MMParams) -> Result<OrbitSummary> {
    let period = 2.0 * PI / p.trap.secular_frequency()?;
    let ell = p.ell_i();
    let mut out = OrbitSummary {
        peak: [0.0; 4],
        last: [0.0; 4],
    };
    for (s, tr) in res.traces.iter().enumerate() {
        let t_last = tr.t.last().copied().unwrap_or(0.0);
        for (t, x) in tr.t.iter().zip(&tr.x_i) {
            out.peak[s] = out.peak[s].max(x.abs() / ell);
            if *t >= t_last - period {
                out.last[s] = out.last[s].max(x.abs() / ell);
            }
        }
    }
    Ok(out)
}

/// Peak-to-peak of `x` over samples with t in [t0, t1], halved.
pub fn excursion(t: &[f64], x: &[f64], t0: f64, t1: f64) -> f64 {
    let vals: Vec<f64> = t
        .iter()
        .zip(x)
        .filter(|(tt, _)| **tt >= t0 && **tt <= t1)
        .map(|(_, v)| *v)
        .collect();
    if vals.is_empty() {
        return 0.0;
    }
    let (lo, hi) = vals
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(*v), b.max(*v))
        });
    0.5 * (hi - lo)
}

/// Moving average over one rf period: strips the micromotion ripple from a trace.
pub fn secular_part(t: &[f64], x: &[f64], period: f64) -> Vec<f64> {
    let n = t.len();
    let mut out = vec![0.0; n];
    let (mut lo, mut hi, mut sum) = (0usize, 0usize, 0.0);
    for k in 0..n {
        while hi < n && t[hi] <= t[k] + 0.5 * period {
            sum += x[hi];
            hi += 1;
        }
        while t[lo] < t[k] - 0.5 * period {
            sum -= x[lo];
            lo += 1;
        }
        out[k] = sum / (hi - lo) as f64;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorReport {
    /// max |x_i^full − x_i^(3)| / ℓ_i over the run.
    pub dev_i: f64,
    pub dev_a: f64,
    /// largest orbit excursion, in ℓ_i and ℓ_a
    pub amp_i: f64,
    pub amp_a: f64,
}

/// Which coupling the classical check integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassicalCoupling {
    Full,
    Taylor3,
}

/// (∂Ṽ/∂x_i, ∂Ṽ/∂x_a) at the given displacements.
fn coupling_gradient(
    p: &MMParams,
    x_i: f64,
    x_a: f64,
    t: f64,
    which: ClassicalCoupling,
) -> Result<(f64, f64)> {
    match which {
        ClassicalCoupling::Full => {
            let f = field_norm_partials(x_a, x_i, t, p.d, &p.trap, &p.ion)?;
            let (xi1, xi2, xi3) = xis_si(&p.dressing, &p.potential);
            let g = xi2 + xi3 * f[0][0];
            let dv = |df: f64| -xi1 * xi3 * df / (g * g);
            Ok((dv(f[1][0]), dv(f[0][1])))
        }
        ClassicalCoupling::Taylor3 => {
            let tc = p.taylor_at(t)?;
            let c = &tc.coeff;
            let mut gi = 0.0;
            let mut ga = 0.0;
            for j in 0..4 {
                for k in 0..(4 - j) {
                    if j > 0 {
                        gi += c[j][k] * j as f64 * x_i.powi(j as i32 - 1) * x_a.powi(k as i32);
                    }
                    if k > 0 {
                        ga += c[j][k] * k as f64 * x_i.powi(j as i32) * x_a.powi(k as i32 - 1);
                    }
                }
            }
            Ok((gi, ga))
        }
    }
}

/// Classical orbits of the ↑↑ and ↑↓ sectors from rest, RK4 with `steps_per_rf` steps per rf period.
pub fn classical_orbits(
    p: &MMParams,
    which: ClassicalCoupling,
    ion_drive: bool,
    steps_per_rf: usize,
) -> Result<Vec<(f64, f64, f64)>> {
    let dt = 2.0 * PI / p.trap.omega_rf / steps_per_rf as f64;
    let n = (p.t_end / dt).ceil() as usize;
    let omega_v = p.omega_v()?;
    let sm = match p.modulation {
        Modulation::Plus => 1.0,
        Modulation::Minus => -1.0,
    };
    let (mi, ma) = (p.ion.mass, p.atom.mass);
    let om = p.trap.omega_rf;
    let ell_i = p.ell_i();
    let accel = |t: f64, y: &[f64; 4]| -> Result<[f64; 4]> {
        let ramp = p.ramp.value(t, p.ramp_time);
        let c = 0.5 * (1.0 + sm * (omega_v * t).cos()) * ramp;
        let (gi, ga) = coupling_gradient(p, y[0], y[1], t, which)?;
        let trap_force = match p.ion_motion {
            // U_rf = −(m Ω² q/4) cos(Ωt) x²
            IonMotion::Rf => 0.5 * mi * om * om * p.trap.q * (om * t).cos() * y[0],
            IonMotion::Secular => -mi * p.omega_i().powi(2) * y[0],
            IonMotion::Free => 0.0,
        };
        let mut fi = trap_force - c * gi;
        if ion_drive {
            let rd = if p.ramp_drive { ramp } else { 1.0 };
            fi -= sm * rd * HBAR * p.eta_omega_sm * (omega_v * t).cos() / ell_i;
        }
        let fa = -ma * p.omega_a * p.omega_a * y[1] - c * ga;
        Ok([y[2], y[3], fi / mi, fa / ma])
    };
    let mut y = [0.0; 4];
    let mut out = Vec::with_capacity(n + 1);
    out.push((0.0, 0.0, 0.0));
    for k in 0..n {
        let t = k as f64 * dt;
        let k1 = accel(t, &y)?;
        let y2: [f64; 4] = std::array::from_fn(|m| y[m] + 0.5 * dt * k1[m]);
        let k2 = accel(t + 0.5 * dt, &y2)?;
        let y3: [f64; 4] = std::array::from_fn(|m| y[m] + 0.5 * dt * k2[m]);
        let k3 = accel(t + 0.5 * dt, &y3)?;
        let y4: [f64; 4] = std::array::from_fn(|m| y[m] + dt * k3[m]);
        let k4 = accel(t + dt, &y4)?;
        for m in 0..4 {
            y[m] += dt / 6.0 * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m]);
        }
        out.push((t + dt, y[0], y[1]));
    }
    Ok(out)
}

/// Largest orbit difference between two couplings over the atom-up sectors
/// (with and without the ion drive), from rest.
pub fn orbit_deviation(
    p: &MMParams,
    a: ClassicalCoupling,
    b: ClassicalCoupling,
    steps_per_rf: usize,
) -> Result<TaylorReport> {
    p.validate()?;
    let (ell_i, ell_a) = (p.ell_i(), p.ell_a());
    let mut rep = TaylorReport {
        dev_i: 0.0,
        dev_a: 0.0,
        amp_i: 0.0,
        amp_a: 0.0,
    };
    for drive in [false, true] {
        let oa = classical_orbits(p, a, drive, steps_per_rf)?;
        let ob = classical_orbits(p, b, drive, steps_per_rf)?;
        for (f, t) in oa.iter().zip(&ob) {
            rep.dev_i = rep.dev_i.max((f.1 - t.1).abs() / ell_i);
            rep.dev_a = rep.dev_a.max((f.2 - t.2).abs() / ell_a);
            rep.amp_i = rep.amp_i.max(f.1.abs() / ell_i);
            rep.amp_a = rep.amp_a.max(f.2.abs() / ell_a);
        }
    }
    Ok(rep)
}

/// Full Ṽ against its third-order expansion.
pub fn taylor_adequacy_check(p: &MMParams, steps_per_rf: usize) -> Result<TaylorReport> {
    orbit_deviation(
        p,
        ClassicalCoupling::Full,
        ClassicalCoupling::Taylor3,
        steps_per_rf,
    )
}
