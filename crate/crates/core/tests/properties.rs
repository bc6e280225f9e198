//! Invariants and oracle checks that do not depend on any quoted number.

mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rydion_core::dressed::{v_dressed, v_tilde, AdiabaticPotential, FieldModel};
use rydion_core::gate::{apply_virtual_z, pi2_pulse, thermal_weight, CompositeState};
use rydion_core::micromotion::Ramp;
use rydion_core::physics_core::mathieu::characteristic_exponent;
use rydion_core::physics_core::{angular, ScaledUnits, Species, HBAR};

use common::*;

#[test]
fn derivatives_match_finite_differences() {
    let worst = derivative_check();
    assert!(worst < 1e-6, "worst relative mismatch {worst:e}");
}

#[test]
fn coherent_state_displacement_at_zero_detuning() {
    let (da, dp) = coherent_displacement_check();
    assert!(da < 1e-3, "⟨a⟩ off by {da:e}");
    assert!(dp < 1e-4, "populations off by {dp:e}");
}

#[test]
fn gate_hamiltonian_is_hermitian() {
    assert!(hamiltonian_asymmetry() < 1e-14);
}

#[test]
fn gate_cutoff_and_step_convergence() {
    let (dc, ds) = gate_self_convergence();
    assert!(dc < 1e-4, "cutoff 10 → 12 moves F by {dc:e}");
    assert!(ds < 1e-4, "step halving moves F by {ds:e}");
}

#[test]
fn split_step_unitarity() {
    assert!(mm_norm_drift(10_000) < 1e-10);
}

#[test]
fn micromotion_grid_and_step_convergence() {
    let g = mm_grid_convergence(64, 60e-6);
    assert!(g < 1e-6, "grid doubling changes traces by {g:e}");
    let s = mm_step_convergence(64, 60e-6);
    assert!(s < 1e-3, "step halving changes traces by {s:e}");
}

#[test]
fn numerov_hydrogen_ground_state() {
    assert!(hydrogen_1s_error() < 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mathieu_matches_monodromy(q in 0.05f64..0.6, frac in 0.0f64..1.0) {
        // a ranges from just inside the lower stability edge a ≈ −q²/2 up to 0.04
        let a = -0.4 * q * q + frac * (0.04 + 0.4 * q * q);
        let cf = characteristic_exponent(a, q).unwrap();
        let fl = floquet_beta(a, q);
        prop_assert!((cf / fl - 1.0).abs() < 1e-6, "cf {} floquet {}", cf, fl);
    }

    #[test]
    fn coulomb_dressing_depends_on_separation_only(
        xi in -50e-9f64..50e-9, xa in -50e-9f64..50e-9, c in -100e-9f64..100e-9,
    ) {
        let dressing = dressing_li7(13.1e6, 0.8e9);
        let pot = AdiabaticPotential::new(&dressing, HBAR * dressing.delta0 * 1.142e-6f64.powi(4)).unwrap();
        let v = |a: f64, b: f64| v_tilde(a, b, 0.0, 1e-6, &dressing, &pot, FieldModel::Coulomb).unwrap();
        let (v1, v2) = (v(xi, xa), v(xi + c, xa + c));
        prop_assert!((v1 - v2).abs() <= 1e-12 * v1.abs());
    }

    #[test]
    fn dressed_potential_is_bounded_and_monotone(r in 0.05e-6f64..5e-6, dr in 1e-9f64..1e-6) {
        let dressing = dressing_li7(10.02e6, 0.4e9);
        let pot = AdiabaticPotential::new(&dressing, HBAR * dressing.delta0 * 1.4e-6f64.powi(4)).unwrap();
        let (v1, v2) = (v_dressed(r, &pot), v_dressed(r + dr, &pot));
        prop_assert!(v1 >= -pot.a && v1 <= 0.0);
        prop_assert!(v2 >= v1);
    }

    #[test]
    fn spin_rotations_preserve_norm(
        th_a in 0.0f64..PI, ph_a in 0.0f64..(2.0 * PI), th_i in 0.0f64..PI, ph_i in 0.0f64..(2.0 * PI),
        za in -PI..PI, zi in -PI..PI,
    ) {
        let spin = |t: f64, p: f64| [Complex64::new((0.5 * t).cos(), 0.0), Complex64::from_polar((0.5 * t).sin(), p)];
        let s = CompositeState::product(spin(th_a, ph_a), spin(th_i, ph_i), 1, 2, 4, 4).unwrap();
        let r = apply_virtual_z(&pi2_pulse(&s), za, zi);
        prop_assert!((r.norm_sqr() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn thermal_weights_normalize(nbar in 0.01f64..2.0) {
        let total: f64 = (0..400).map(|n| thermal_weight(nbar, n)).sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn ramps_rise_monotonically(t1 in 0.0f64..60e-6, dt in 0.0f64..10e-6) {
        for ramp in [Ramp::SinSquared, Ramp::Linear] {
            let probe = |t: f64| ramp.value(t, 50e-6);
            prop_assert!(probe(t1 + dt) >= probe(t1));
            prop_assert!((0.0..=1.0).contains(&probe(t1)));
        }
    }

    #[test]
    fn scaled_units_round_trip(x in -1e-5f64..1e-5, e in -1e-27f64..1e-27, t in 0.0f64..1e-3) {
        let u = ScaledUnits::new(
            &Species::lithium7(), &Species::ytterbium171_ion(),
            angular(200e3), angular(250e3), angular(2.5e6), 164.11 * 1.648_777_274_36e-41,
        ).unwrap();
        prop_assert!((u.to_si_length(u.from_si_length(x)) - x).abs() <= 1e-15 * x.abs().max(1e-30));
        prop_assert!((u.to_si_energy(u.from_si_energy(e)) - e).abs() <= 1e-15 * e.abs().max(1e-45));
        prop_assert!((u.to_si_time(u.from_si_time(t)) - t).abs() <= 1e-15 * t.max(1e-30));
    }
}
