//! Independent oracles shared by the property tests and the acceptance runner.
//! Nothing here calls the routine it checks except through its public result.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use rydion_core::bo::c4_second_order;
use rydion_core::dressed::{
    taylor3, v_tilde, AdiabaticPotential, DressingParams, FieldModel, TaylorCoeffs,
};
use rydion_core::gate::{
    build_hamiltonian, evolve, run_all_inputs, to_interaction_frame, CompositeState, GateParams,
    Modulation,
};
use rydion_core::micromotion::{
    init_gaussian, run_micromotion_gate, Grid2D, MMOptions, MMParams, MMResult, SplitStepper,
};
use rydion_core::physics_core::{
    angular, field_norm_partials, field_norm_sq, Species, TrapParams, HBAR,
};
use rydion_core::rydberg::{
    numerov_radial, polarizability_au, BasisSpec, RydbergState, StepSpec, WavefunctionStore,
};

/// Mathieu exponent from the RK4 monodromy matrix of x'' + (a − 2q cos 2τ)x = 0 over τ ∈ [0, π]:
/// cos(πβ) = tr M / 2.
pub fn floquet_beta(a: f64, q: f64) -> f64 {
    let n = 20_000;
    let h = PI / n as f64;
    let rhs = |t: f64, y: [f64; 2]| [y[1], -(a - 2.0 * q * (2.0 * t).cos()) * y[0]];
    let mut trace = 0.0;
    for (k, y0) in [[1.0, 0.0], [0.0, 1.0]].into_iter().enumerate() {
        let mut y = y0;
        for s in 0..n {
            let t = s as f64 * h;
            let k1 = rhs(t, y);
            let k2 = rhs(
                t + 0.5 * h,
                [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]],
            );
            let k3 = rhs(
                t + 0.5 * h,
                [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]],
            );
            let k4 = rhs(t + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
            for m in 0..2 {
                y[m] += h / 6.0 * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m]);
            }
        }
        trace += y[k];
    }
    (0.5 * trace).acos() / PI
}

/// Largest |u(r) − 2r e^{−r}| on the Numerov grid for hydrogen 1S with a static core.
pub fn hydrogen_1s_error() -> f64 {
    let w = numerov_radial(
        &Species::hydrogenic_static_core(),
        1,
        0,
        1,
        &StepSpec::default(),
    )
    .unwrap();
    w.grid
        .iter()
        .zip(&w.values)
        .map(|(r, u)| (u.abs() - 2.0 * r * (-r).exp()).abs())
        .fold(0.0, f64::max)
}

/// Least-squares slope of ln α(nS) against ln n* over n = 28..=32.
pub fn polarizability_exponent() -> f64 {
    let li = Species::lithium6();
    let store = WavefunctionStore::new(li.clone(), StepSpec::default());
    let pts: Vec<(f64, f64)> = (28..=32)
        .map(|n| {
            let s = RydbergState::s_half(&li, n).unwrap();
            let a =
                polarizability_au(&s, &store, &BasisSpec::new(n - 5, n + 5, 2).unwrap()).unwrap();
            (s.n_star.ln(), a.ln())
        })
        .collect();
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / m, sy / m);
    let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    num / den
}

/// Second-order C₄ of nS from the (25..35, l ≤ 2) sum.
pub fn internal_c4(species: &Species, n: u32) -> f64 {
    let store = WavefunctionStore::new(species.clone(), StepSpec::default());
    let s = RydbergState::s_half(species, n).unwrap();
    c4_second_order(&s, &store, &BasisSpec::new(25, 35, 2).unwrap()).unwrap()
}

fn binom(m: usize, r: usize) -> f64 {
    (0..r).fold(1.0, |c, k| c * (m - k) as f64 / (k + 1) as f64)
}

/// Central-difference ∂_xʲ∂_yᵏ g with steps (hx, hy), error O(h²).
fn central(g: &dyn Fn(f64, f64) -> f64, j: usize, k: usize, hx: f64, hy: f64) -> f64 {
    let mut s = 0.0;
    for r in 0..=j {
        for u in 0..=k {
            let x = (j as f64 / 2.0 - r as f64) * hx;
            let y = (k as f64 / 2.0 - u as f64) * hy;
            let sign = if (r + u) % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * binom(j, r) * binom(k, u) * g(x, y);
        }
    }
    s / (hx.powi(j as i32) * hy.powi(k as i32))
}

/// Richardson-extrapolated mixed partial at the origin.
pub fn richardson(g: &dyn Fn(f64, f64) -> f64, j: usize, k: usize, hx: f64, hy: f64) -> f64 {
    let d1 = central(g, j, k, hx, hy);
    let d2 = central(g, j, k, 0.5 * hx, 0.5 * hy);
    (4.0 * d2 - d1) / 3.0
}

/// Worst relative mismatch between an analytic partial table and Richardson differences of `g`.
/// `scale[j+k]` floors the denominator for entries that vanish.
fn worst_partial_error(
    exact: &[[f64; 4]; 4],
    g: &dyn Fn(f64, f64) -> f64,
    h: f64,
    scale: &[f64; 4],
) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..4 {
        for k in 0..(4 - j) {
            if j + k == 0 {
                continue;
            }
            let fd = richardson(g, j, k, h, h);
            let e = exact[j][k];
            worst = worst.max((fd - e).abs() / e.abs().max(scale[j + k]));
        }
    }
    worst
}

pub fn rf_trap() -> TrapParams {
    TrapParams::rf_only(angular(2.5e6), 0.282843).unwrap()
}

pub fn dressing_li7(omega_hz: f64, delta_hz: f64) -> DressingParams {
    let li = Species::lithium7();
    DressingParams::new(
        angular(omega_hz),
        angular(delta_hz),
        RydbergState::s_half(&li, 30).unwrap(),
    )
}

/// Finite-difference agreement of every transverse derivative used by the expansion: the
/// field norm partials and the Ṽ Taylor coefficients, for the Coulomb and rf-trap field models.
pub fn derivative_check() -> f64 {
    let trap = rf_trap();
    let ion = Species::ytterbium171_ion();
    let d = 1e-6;
    let h = 2e-3 * d;
    let mut worst = 0.0f64;
    for t in [0.0, 0.1e-6, 0.23e-6] {
        let exact = field_norm_partials(0.0, 0.0, t, d, &trap, &ion).unwrap();
        let f0 = field_norm_sq(0.0, 0.0, t, d, &trap, &ion).unwrap();
        let g = |xi: f64, xa: f64| field_norm_sq(xa, xi, t, d, &trap, &ion).unwrap();
        let scale = [
            0.0,
            1e-6 * f0 / d,
            1e-6 * f0 / (d * d),
            1e-6 * f0 / d.powi(3),
        ];
        worst = worst.max(worst_partial_error(&exact, &g, h, &scale));
    }
    let dressing = dressing_li7(13.1e6, 0.8e9);
    let pot =
        AdiabaticPotential::new(&dressing, HBAR * dressing.delta0 * 1.142e-6f64.powi(4)).unwrap();
    for field in [
        FieldModel::Coulomb,
        FieldModel::Trap {
            trap: &trap,
            ion: &ion,
        },
    ] {
        for t in [0.0, 0.17e-6] {
            let tc: TaylorCoeffs = taylor3(d, t, &dressing, &pot, field).unwrap();
            let mut exact = [[0.0; 4]; 4];
            for (j, row) in exact.iter_mut().enumerate() {
                for (k, v) in row.iter_mut().enumerate() {
                    *v = tc.derivative(j, k);
                }
            }
            let g = |xi: f64, xa: f64| v_tilde(xi, xa, t, d, &dressing, &pot, field).unwrap();
            let v0 = pot.a;
            let scale = [
                0.0,
                1e-6 * v0 / d,
                1e-6 * v0 / (d * d),
                1e-6 * v0 / d.powi(3),
            ];
            worst = worst.max(worst_partial_error(&exact, &g, h, &scale));
        }
    }
    worst
}

/// Gate parameters with the potential removed, drive on and δ = 0 (ω_v = ω_i).
pub fn bare_drive_params(eta_omega: f64) -> GateParams {
    let mut p = GateParams::reference(HBAR * angular(0.4e9) * 1.4e-6f64.powi(4)).unwrap();
    p.potential.coeff = [[0.0; 4]; 4];
    p.delta = 0.0;
    p.eta_omega_sm = eta_omega;
    p.modulation = Modulation::Plus;
    p
}

/// Resonant drive ηħΩ cos(ωt)(a + a†) from vacuum gives, in the frame rotating at ω,
/// α(t) = −iηΩ[t/2 + (e^{2iωt} − 1)/(4iω)]. Returns the worst |⟨a⟩ − α| and the worst
/// Poisson population error over a few sample times in the atom-↓, ion-↑ sector.
pub fn coherent_displacement_check() -> (f64, f64) {
    let eta = angular(1.0e3);
    let p = bare_drive_params(eta);
    let w = p.omega_i;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let s0 =
        CompositeState::product([zero, one], [one, zero], 0, 0, p.cutoff_a, p.cutoff_i).unwrap();
    let sector = 2;
    let (mut worst_a, mut worst_p) = (0.0f64, 0.0f64);
    let mut state = s0;
    for t in [20e-6, 60e-6, 100e-6] {
        state = evolve(&state, &p, t, None).unwrap().state;
        let frame = to_interaction_frame(&state, &p);
        let mut a_mean = Complex64::new(0.0, 0.0);
        for n in 0..p.cutoff_i - 1 {
            let c0 = frame.amps[frame.index(sector, 0, n)];
            let c1 = frame.amps[frame.index(sector, 0, n + 1)];
            a_mean += c0.conj() * c1 * ((n + 1) as f64).sqrt();
        }
        let i = Complex64::new(0.0, 1.0);
        let alpha = -i * eta * (t / 2.0 + ((2.0 * i * w * t).exp() - 1.0) / (4.0 * i * w));
        worst_a = worst_a.max((a_mean - alpha).norm());
        let nb = alpha.norm_sqr();
        let mut fact = 1.0;
        for n in 0..p.cutoff_i {
            if n > 0 {
                fact *= n as f64;
            }
            let poisson = (-nb).exp() * nb.powi(n as i32) / fact;
            let pop = frame.amps[frame.index(sector, 0, n)].norm_sqr();
            worst_p = worst_p.max((pop - poisson).abs());
        }
    }
    (worst_a, worst_p)
}

/// Largest |H − Hᵀ| relative to ‖H‖ over a few times for the reference gate.
pub fn hamiltonian_asymmetry() -> f64 {
    let mut p = GateParams::reference(HBAR * angular(0.4e9) * 1.4e-6f64.powi(4)).unwrap();
    p.cutoff_a = 5;
    p.cutoff_i = 5;
    let mut worst = 0.0f64;
    for t in [0.0, 1.3e-6, 7.1e-5] {
        let h = build_hamiltonian(t, &p);
        let asym = (&h - h.transpose()).amax();
        worst = worst.max(asym / h.amax());
    }
    worst
}

/// |ΔF(++)| between cutoffs (10, 12) and between 200 and 400 steps per period.
pub fn gate_self_convergence() -> (f64, f64) {
    let base = GateParams::reference(HBAR * angular(0.4e9) * 1.4e-6f64.powi(4)).unwrap();
    let f = |p: &GateParams| run_all_inputs(p, 0, 0, None, None).unwrap().inputs[0].fidelity;
    let f0 = f(&base);
    let mut big = base.clone();
    big.cutoff_a = 12;
    big.cutoff_i = 12;
    let mut fine = base.clone();
    fine.steps_per_period = 400;
    ((f(&big) - f0).abs(), (f(&fine) - f0).abs())
}

/// Micromotion parameters shortened to `t_end` with a proportionally short ramp.
pub fn short_mm(t_end: f64) -> MMParams {
    let mut p = MMParams::reference(HBAR * angular(0.8e9) * 1.142e-6f64.powi(4)).unwrap();
    p.t_end = t_end;
    p.ramp_time = 0.05 * t_end;
    p
}

/// Peak |⟨x⟩| over every sector, the scale both convergence checks divide by. Sectors
/// that never move (↓↓) would otherwise compare round-off against round-off.
fn trace_scale(r: &MMResult) -> f64 {
    r.traces
        .iter()
        .flat_map(|t| t.x_i.iter().chain(&t.x_a))
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Largest change of the ⟨x_i⟩, ⟨x_a⟩ traces, relative to the largest excursion, when the
/// grid resolution doubles (n → 2n at fixed extents) over a short gate segment.
pub fn mm_grid_convergence(n: usize, t_end: f64) -> f64 {
    let p = short_mm(t_end);
    let opts = MMOptions {
        steps_per_rf: 100,
        samples: 200,
        zoom: Vec::new(),
    };
    let coarse = run_micromotion_gate(&p, &Grid2D::for_params(&p, n), &opts).unwrap();
    let fine = run_micromotion_gate(&p, &Grid2D::for_params(&p, 2 * n), &opts).unwrap();
    let scale = trace_scale(&fine);
    let mut worst = 0.0f64;
    for (a, b) in coarse.traces.iter().zip(&fine.traces) {
        for (xa, xb) in [(&a.x_i, &b.x_i), (&a.x_a, &b.x_a)] {
            let diff = xa
                .iter()
                .zip(xb)
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            worst = worst.max(diff / scale);
        }
    }
    worst
}

/// Same with the time step halved (T_rf/100 → T_rf/200). Sample times differ slightly
/// between step sizes, so only the final values and the peaks are compared.
pub fn mm_step_convergence(n: usize, t_end: f64) -> f64 {
    let p = short_mm(t_end);
    let g = Grid2D::for_params(&p, n);
    let run = |spr: usize| {
        run_micromotion_gate(
            &p,
            &g,
            &MMOptions {
                steps_per_rf: spr,
                samples: 200,
                zoom: Vec::new(),
            },
        )
        .unwrap()
    };
    let (a, b) = (run(100), run(200));
    let scale = trace_scale(&b);
    let peak = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut worst = 0.0f64;
    for (x, y) in a.traces.iter().zip(&b.traces) {
        for (u, v) in [(&x.x_i, &y.x_i), (&x.x_a, &y.x_a)] {
            let end = (u.last().unwrap() - v.last().unwrap()).abs();
            worst = worst.max(end.max((peak(u) - peak(v)).abs()) / scale);
        }
    }
    worst
}

/// Norm drift of the dense ↑↑ sector over `n` split steps.
pub fn mm_norm_drift(n: usize) -> f64 {
    let p = short_mm(1e-3);
    let g = Grid2D::for_params(&p, 32);
    let mut s = init_gaussian(&g, &p).unwrap()[0].clone();
    let mut st = SplitStepper::new(&p, &g, 0, 2.0 * PI / p.trap.omega_rf / 100.0).unwrap();
    st.run(&mut s, n).unwrap();
    (s.norm() - 1.0).abs()
}
