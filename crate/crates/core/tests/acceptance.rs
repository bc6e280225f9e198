//! Acceptance suite: one PASS/FAIL line per criterion, with the measured values.
//!
//! `cargo test -p rydion-core --test acceptance -- 2 5` runs a subset. The micromotion
//! criterion uses the 128² smoke grid unless `RYDION_MM_GRID=256`.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use rydion_core::bo::{diagonalize_curves, log_grid, BoOperators};
use rydion_core::dressed::{
    force_profile, lifetime_enhancement, match_drive, optimal_separation, AdiabaticPotential,
    DressingParams, FieldModel,
};
use rydion_core::gate::{
    run_all_inputs, run_thermal, rwa_ratio, spin_spin_phase, GateParams, Input, ThermalSpec,
};
use rydion_core::micromotion::{
    orbit_summary, run_micromotion_gate, taylor_adequacy_check, Grid2D, MMOptions, MMParams,
    MM_NORM_TOL,
};
use rydion_core::physics_core::{
    angular, char_lengths, rf_crossover, Species, TrapParams, HBAR, H_PLANCK,
};
use rydion_core::rydberg::{defect_energy, BasisSpec, RydbergState, StepSpec, WavefunctionStore};

use common::*;

type Outcome = Result<Vec<Check>, String>;

struct Check {
    ok: bool,
    text: String,
}

fn short(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-3 {
        format!("{x:.1e}")
    } else {
        format!("{}", (x * 1e6).round() / 1e6)
    }
}

/// `value` within `tol` of `target`.
fn near(name: &str, value: f64, target: f64, tol: f64, unit: &str) -> Check {
    Check {
        ok: (value - target).abs() <= tol,
        text: format!(
            "{name} = {value:.6} {unit} (target {} ± {})",
            short(target),
            short(tol)
        ),
    }
}

fn below(name: &str, value: f64, limit: f64) -> Check {
    Check {
        ok: value < limit,
        text: format!("{name} = {value:.3e} (< {limit:e})"),
    }
}

fn above(name: &str, value: f64, limit: f64) -> Check {
    Check {
        ok: value >= limit,
        text: format!("{name} = {value:.6} (≥ {limit})"),
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn khz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e3)
}

fn ghz(e: f64) -> f64 {
    e / H_PLANCK / 1e9
}

fn yb() -> Species {
    Species::ytterbium171_ion()
}

fn criterion_1() -> Outcome {
    let ell = char_lengths(
        &TrapParams::new(angular(250e3), angular(2.5e6), 0.28).map_err(err)?,
        &yb(),
    )
    .map_err(err)?;
    let cross = rf_crossover(
        &TrapParams::rf_only(angular(2.5e6), 0.28).map_err(err)?,
        &yb(),
    );
    Ok(vec![
        near("ℓ_z", ell.ell_z * 1e6, 6.9, 0.1, "μm"),
        near("rf crossover", cross * 1e6, 2.9, 0.1, "μm"),
    ])
}

fn criterion_2() -> Outcome {
    let trap = TrapParams::rf_only(angular(2.5e6), 0.282843).map_err(err)?;
    let nu = khz(trap.secular_frequency().map_err(err)?);
    let beta = 2.0 * trap.secular_frequency().map_err(err)? / trap.omega_rf;
    let oracle = floquet_beta(0.0, 0.282843);
    let literal = khz(TrapParams::rf_only(angular(2.5e6), 0.28)
        .map_err(err)?
        .secular_frequency()
        .map_err(err)?);
    Ok(vec![
        near("ω_sec/2π at q = 0.282843", nu, 254.089, 1e-3, "kHz"),
        below("|β_cf/β_floquet − 1|", (beta / oracle - 1.0).abs(), 1e-6),
        Check {
            ok: true,
            text: format!("(literal q = 0.28 gives {literal:.3} kHz)"),
        },
    ])
}

fn criterion_3() -> Outcome {
    let li = Species::lithium6();
    let s = defect_energy(&li, 30, 0, 1).map_err(err)?;
    let p = defect_energy(&li, 30, 1, 1).map_err(err)?;
    Ok(vec![
        near("E(30S)/h", ghz(s.energy), -3754.4, 0.5, "GHz"),
        near("E(30P)/h", ghz(p.energy), -3666.7, 0.5, "GHz"),
        below("Numerov 1S pointwise error", hydrogen_1s_error(), 1e-4),
        near("α ∝ n*^k exponent", polarizability_exponent(), 7.0, 0.5, ""),
    ])
}

/// Gap floor for "separated": 1 GHz, two orders below the 30S–30P spacing.
const GAP_FLOOR_GHZ: f64 = 1.0;

fn criterion_4() -> Outcome {
    let li = Species::lithium6();
    let store = WavefunctionStore::new(li.clone(), StepSpec::default());
    let ops =
        BoOperators::new(&store, &BasisSpec::new(25, 35, 34).map_err(err)?, 1).map_err(err)?;
    let grid = log_grid(0.4e-6, 4e-6, 200);
    let curves = diagonalize_curves(&ops, &grid, None, false).map_err(err)?;
    let c = curves
        .curve_of(&ops.basis, 30, 0, 1)
        .ok_or("no 30S curve")?;
    let e_inf = defect_energy(&li, 30, 0, 1).map_err(err)?.energy;
    let c4 = internal_c4(&li, 30);
    let (mut min_gap, mut worst_c4) = (f64::INFINITY, 0.0f64);
    for (i, &r) in grid.iter().enumerate() {
        if r >= 500e-9 {
            min_gap = min_gap.min(ghz(curves.gap_to_neighbours(c, i)));
        }
        if r >= 1.5e-6 {
            let shift = e_inf - curves.energies[c][i];
            worst_c4 = worst_c4.max((shift * r.powi(4) / c4 - 1.0).abs());
        }
    }
    let ambiguous = curves
        .ambiguities
        .iter()
        .filter(|a| a.curve == c && a.r >= 500e-9)
        .count();
    Ok(vec![
        above("min 30S gap for R ≥ 500 nm [GHz]", min_gap, GAP_FLOOR_GHZ),
        Check {
            ok: ambiguous == 0,
            text: format!("ambiguous 30S links for R ≥ 500 nm = {ambiguous}"),
        },
        below("max |ΔE R⁴/C₄ − 1| for R ≥ 1.5 μm", worst_c4, 0.05),
    ])
}

fn dressing(omega_hz: f64, delta_hz: f64) -> Result<DressingParams, String> {
    let li = Species::lithium7();
    Ok(DressingParams::new(
        angular(omega_hz),
        angular(delta_hz),
        RydbergState::s_half(&li, 30).map_err(err)?,
    ))
}

fn criterion_5() -> Outcome {
    let c4 = internal_c4(&Species::lithium7(), 30);
    let p1 = dressing(10e6, 1e9)?;
    let p2 = dressing(10.02e6, 0.4e9)?;
    let v1 = AdiabaticPotential::new(&p1, c4).map_err(err)?;
    let v2 = AdiabaticPotential::new(&p2, c4).map_err(err)?;
    let d_star = optimal_separation(&v2);
    let f_max = force_profile(d_star, &v2).map_err(err)?.force * v2.r_w / v2.a;
    let mut ratio = dressing(10e6, 1e9)?;
    ratio.delta0 = 100.0 * ratio.omega;
    Ok(vec![
        near(
            "A/h at (10 MHz, 1 GHz)",
            v1.a / H_PLANCK / 1e3,
            100.0,
            1.0,
            "kHz",
        ),
        near(
            "A₀/h at (10.02 MHz, 0.4 GHz)",
            v2.a / H_PLANCK / 1e3,
            250.0,
            2.5,
            "kHz",
        ),
        near("R_w at 1 GHz", v1.r_w * 1e6, 1.0, 0.15, "μm"),
        near("R_w at 0.4 GHz", v2.r_w * 1e6, 1.4, 0.21, "μm"),
        near("d*/R_w", d_star / v2.r_w, 0.88, 0.005, ""),
        near("F_max R_w/A", f_max, 1.065, 0.001, ""),
        near(
            "lifetime enhancement / 1e4",
            lifetime_enhancement(&ratio).map_err(err)? / 1e4,
            1.0,
            1e-9,
            "",
        ),
    ])
}

/// C₄ pinned so that R_w = 1.4 μm at Δ₀ = 2π·0.4 GHz.
fn pinned_gate_c4() -> f64 {
    HBAR * angular(0.4e9) * 1.4e-6f64.powi(4)
}

fn criterion_6() -> Outcome {
    let gate = GateParams::reference(pinned_gate_c4()).map_err(err)?;
    let mm = MMParams::reference(internal_c4(&Species::lithium7(), 30)).map_err(err)?;
    let field = FieldModel::Trap {
        trap: &mm.trap,
        ion: &mm.ion,
    };
    let rf = match_drive(
        mm.d,
        &mm.dressing,
        &mm.potential,
        field,
        &mm.ion,
        mm.omega_i(),
    )
    .map_err(err)?;
    Ok(vec![
        near(
            "static ηΩ/2π",
            khz(gate.eta_omega_sm),
            1.045,
            0.03 * 1.045,
            "kHz",
        ),
        near("rf-averaged ηΩ/2π", khz(rf), 1.06, 0.05 * 1.06, "kHz"),
    ])
}

fn criterion_7() -> Outcome {
    let p = GateParams::reference(pinned_gate_c4()).map_err(err)?;
    let run = run_all_inputs(&p, 0, 0, None, None).map_err(err)?;
    let mut checks = Vec::new();
    for r in &run.inputs {
        if r.input == Input::PlusPlus {
            checks.push(near("F(++)", r.fidelity, 0.997, 0.003, ""));
        }
        checks.push(above(
            &format!("F({})", r.input.label()),
            r.fidelity,
            0.992 - 0.003,
        ));
    }
    let th = run_thermal(
        &ThermalSpec {
            nbar_a: 0.25,
            nbar_i: 0.25,
            n_max: 3,
        },
        &p,
    )
    .map_err(err)?;
    checks.push(near("thermal F (n̄ = 0.25)", th.fidelity, 0.992, 0.005, ""));
    checks.push(near("truncated trace", th.trace, 0.997, 0.0005, ""));
    checks.push(near("|V(d)|/(2ħω_v)", rwa_ratio(&p), 0.31, 0.01, ""));
    let phase = spin_spin_phase(&p).map_err(err)?;
    checks.push(near(
        "|two-qubit phase|",
        phase.simulated.abs(),
        PI / 4.0,
        0.02,
        "rad",
    ));
    Ok(checks)
}

fn criterion_8() -> Outcome {
    let n: usize = std::env::var("RYDION_MM_GRID")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(128);
    let p = MMParams::reference(internal_c4(&Species::lithium7(), 30)).map_err(err)?;
    let res =
        run_micromotion_gate(&p, &Grid2D::for_params(&p, n), &MMOptions::default()).map_err(err)?;
    let orbit = orbit_summary(&res, &p).map_err(err)?;
    let drift = res.norm_drift.iter().fold(0.0f64, |m, v| m.max(*v));
    let taylor = taylor_adequacy_check(&p, 200).map_err(err)?;
    Ok(vec![
        Check {
            ok: true,
            text: format!("grid {n}², T = {:.1} μs", p.t_end * 1e6),
        },
        below("max per-sector norm drift", drift, MM_NORM_TOL),
        above("↑↓/↑↑ ion amplitude", orbit.suppression(), 10.0),
        below("final/peak ⟨x_i⟩ excursion", orbit.return_ratio(), 0.10),
        below(
            "Taylor orbit deviation [ℓ]",
            taylor.dev_i.max(taylor.dev_a),
            5e-3,
        ),
    ])
}

fn criterion_9() -> Outcome {
    let (da, dp) = coherent_displacement_check();
    let (dc, ds) = gate_self_convergence();
    Ok(vec![
        below(
            "FD mismatch of field and Ṽ derivatives",
            derivative_check(),
            1e-6,
        ),
        below("gate H asymmetry", hamiltonian_asymmetry(), 1e-14),
        below("coherent ⟨a⟩ error at δ = 0", da, 1e-3),
        below("coherent population error", dp, 1e-4),
        below("|ΔF| cutoff 10 → 12", dc, 1e-4),
        below("|ΔF| steps 200 → 400", ds, 1e-4),
        below(
            "split-step norm drift (1e4 steps)",
            mm_norm_drift(10_000),
            1e-10,
        ),
        below(
            "micromotion grid doubling",
            mm_grid_convergence(64, 60e-6),
            1e-6,
        ),
        below(
            "micromotion step halving",
            mm_step_convergence(64, 60e-6),
            1e-3,
        ),
    ])
}

type Criterion = (usize, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "trap scales", criterion_1),
        (2, "Mathieu secular frequency", criterion_2),
        (3, "Rydberg structure", criterion_3),
        (4, "BO curves", criterion_4),
        (5, "dressed potential", criterion_5),
        (6, "drive matching", criterion_6),
        (7, "gate fidelities", criterion_7),
        (8, "micromotion run", criterion_8),
        (9, "property suites", criterion_9),
    ];
    let wanted: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (id, name, f) in criteria {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        let (ok, lines) = match outcome {
            Ok(checks) => (checks.iter().all(|c| c.ok), checks),
            Err(e) => (
                false,
                vec![Check {
                    ok: false,
                    text: format!("error: {e}"),
                }],
            ),
        };
        println!(
            "{} criterion {id}: {name} ({secs:.1} s)",
            if ok { "PASS" } else { "FAIL" }
        );
        for c in lines {
            println!("    [{}] {}", if c.ok { "ok" } else { "XX" }, c.text);
        }
        if !ok {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
