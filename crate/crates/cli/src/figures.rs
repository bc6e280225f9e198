//! Figure presets. Each reuses an experiment with a few settings changed and adds a
//! `.meta.json` sidecar naming the columns.

use rydion_core::bo::{diagonalize_curves, log_grid, BoOperators, RfPhase, TrapAxis, TrapSnapshot};
use rydion_core::dressed::{v_dressed, AdiabaticPotential};
use rydion_core::micromotion::gate_windows;
use rydion_core::physics_core::{angular, TrapParams, H_PLANCK};
use rydion_core::rydberg::{defect_energy, BasisSpec, RydbergState};

use crate::commands::{self, ground_potential, linear_grid, MM_COLUMNS};
use crate::config::{Experiment, ExperimentConfig};
use crate::error::{CliError, Context};
use crate::output::{num, Column, OutputDir};

pub const FIGURES: [&str; 5] = ["fig2", "fig3", "fig4", "fig5mm", "figA"];

pub fn check_id(id: &str) -> Result<(), CliError> {
    if FIGURES.contains(&id) {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "unknown figure `{id}`; valid ids: {}",
            FIGURES.join(", ")
        )))
    }
}

/// Defaults with the settings each figure needs.
pub fn preset(id: &str) -> Result<ExperimentConfig, CliError> {
    check_id(id)?;
    let mut cfg = ExperimentConfig::default();
    match id {
        "fig2" => {
            cfg.bo.r_min_um = 0.3;
            cfg.bo.r_max_um = 4.0;
        }
        "fig3" => {
            cfg.dressed.rabi_MHz = 10.0;
            cfg.dressed.r_min_um = 0.3;
            cfg.dressed.r_max_um = 3.0;
        }
        "fig4" => cfg.gate.trace_every = 20,
        "figA" => {
            cfg.trap.q = 0.28;
            cfg.bo.points = 45;
        }
        _ => {}
    }
    Ok(cfg)
}

/// The experiment whose defaults and validation apply to a figure.
pub fn experiment_of(id: &str) -> Experiment {
    match id {
        "fig3" => Experiment::Dressed,
        "fig4" => Experiment::Gate,
        "fig5mm" => Experiment::Micromotion,
        _ => Experiment::BoCurves,
    }
}

pub fn run(id: &str, cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    check_id(id)?;
    match id {
        "fig2" => fig2(cfg, out),
        "fig3" => fig3(cfg, out),
        "fig4" => fig4(cfg, out),
        "fig5mm" => fig5mm(cfg, out),
        _ => fig_a(cfg, out),
    }
}

fn fig2(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    commands::bo_curves(cfg, out)?;
    out.write_sidecar(
        "curves.csv",
        "fig2",
        "Born-Oppenheimer curves of the Rydberg atom near the ion, without trap fields",
        &[
            Column {
                name: "r_um",
                unit: "um",
                meaning: "atom-ion separation",
            },
            Column {
                name: "c4_reference_GHz",
                unit: "GHz",
                meaning: "E_inf - C4/R^4 of the target level",
            },
            Column {
                name: "E_c<k>_<level>_GHz",
                unit: "GHz",
                meaning: "curve k, labelled by its large-R level",
            },
        ],
    )
}

fn fig3(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let atom = cfg.atom(Experiment::Dressed)?;
    let d = &cfg.dressed;
    let c4 = commands::internal_c4(cfg, &atom)?;
    let target = RydbergState::s_half(&atom, cfg.rydberg.n).context("rydberg.n")?;
    let mut pots = Vec::new();
    for det in [1.0, 0.4] {
        let params = rydion_core::dressed::DressingParams::new(
            angular(d.rabi_MHz * 1e6),
            angular(det * 1e9),
            target,
        );
        pots.push(AdiabaticPotential::new(&params, c4).context("dressed potential")?);
    }
    let khz = |e: f64| e / H_PLANCK / 1e3;
    let rows = linear_grid(d.r_min_um * 1e-6, d.r_max_um * 1e-6, d.points)
        .into_iter()
        .map(|r| {
            vec![
                num(r * 1e6),
                num(khz(ground_potential(r))),
                num(khz(v_dressed(r, &pots[0]))),
                num(khz(v_dressed(r, &pots[1]))),
            ]
        });
    out.write_csv(
        "fig3.csv",
        &[
            "r_um",
            "ground_kHz",
            "dressed_1GHz_kHz",
            "dressed_0p4GHz_kHz",
        ],
        rows,
    )?;
    out.write_sidecar(
        "fig3.csv",
        "fig3",
        "ground-state and Rydberg-dressed atom-ion potentials",
        &[
            Column {
                name: "r_um",
                unit: "um",
                meaning: "atom-ion separation",
            },
            Column {
                name: "ground_kHz",
                unit: "kHz",
                meaning: "-C4g/R^4 of the undressed ground state",
            },
            Column {
                name: "dressed_1GHz_kHz",
                unit: "kHz",
                meaning: "dressed potential at detuning 1 GHz",
            },
            Column {
                name: "dressed_0p4GHz_kHz",
                unit: "kHz",
                meaning: "dressed potential at detuning 0.4 GHz",
            },
        ],
    )?;
    out.write_json(
        "fig3.json",
        &serde_json::json!({
            "rabi_MHz": d.rabi_MHz,
            "c4_au": c4 / (rydion_core::physics_core::HARTREE * rydion_core::physics_core::BOHR.powi(4)),
            "r_w_um": [pots[0].r_w * 1e6, pots[1].r_w * 1e6],
            "A_kHz": [khz(pots[0].a), khz(pots[1].a)],
        }),
    )
}

fn fig4(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    if cfg.gate.trace_every == 0 {
        return Err(CliError::Validation(
            "gate.trace_every: fig4 needs traces (> 0)".into(),
        ));
    }
    commands::gate(cfg, out)?;
    out.write_sidecar(
        "traces.csv",
        "fig4",
        "spin populations and mean phonon numbers during the gate, per input state",
        &[
            Column {
                name: "input",
                unit: "",
                meaning: "initial spin state (++, +-, -+, --)",
            },
            Column {
                name: "t_us",
                unit: "us",
                meaning: "time",
            },
            Column {
                name: "P_uu",
                unit: "",
                meaning: "population of up-up",
            },
            Column {
                name: "P_ud",
                unit: "",
                meaning: "population of up-down",
            },
            Column {
                name: "P_du",
                unit: "",
                meaning: "population of down-up",
            },
            Column {
                name: "P_dd",
                unit: "",
                meaning: "population of down-down",
            },
            Column {
                name: "n_ion",
                unit: "",
                meaning: "mean ion phonon number",
            },
            Column {
                name: "n_atom",
                unit: "",
                meaning: "mean atom phonon number",
            },
        ],
    )
}

const MM_META: [Column<'static>; 6] = [
    Column {
        name: "t_us",
        unit: "us",
        meaning: "time",
    },
    Column {
        name: "sector",
        unit: "",
        meaning: "spin sector (uu, ud, du, dd)",
    },
    Column {
        name: "x_i_nm",
        unit: "nm",
        meaning: "ion position expectation",
    },
    Column {
        name: "x_a_nm",
        unit: "nm",
        meaning: "atom position expectation",
    },
    Column {
        name: "n_i_eff",
        unit: "",
        meaning: "ion energy over h-bar omega_i, minus 1/2",
    },
    Column {
        name: "n_a_eff",
        unit: "",
        meaning: "atom energy over h-bar omega_a, minus 1/2",
    },
];

fn fig5mm(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let p = commands::mm_params(cfg)?;
    let windows = gate_windows(&p).context("zoom windows")?;
    let (_, zoom) = commands::micromotion_with(cfg, out, &windows)?;
    debug_assert_eq!(MM_COLUMNS.len(), MM_META.len());
    out.write_sidecar(
        "traces.csv",
        "fig5mm",
        "sector-resolved orbits over the whole gate",
        &MM_META,
    )?;
    for (k, (t0, len)) in zoom.iter().enumerate() {
        let about = format!("zoom from {} us over {} us", num(t0 * 1e6), num(len * 1e6));
        out.write_sidecar(&format!("zoom_{k}.csv"), "fig5mm", &about, &MM_META)?;
    }
    Ok(())
}

/// 30S curve without trap and with the rf field frozen at three phases.
fn fig_a(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let atom = cfg.atom(Experiment::BoCurves)?;
    let ion = cfg.ion()?;
    let b = &cfg.bo;
    let st = commands::store(cfg, &atom)?;
    let ops = BoOperators::new(
        &st,
        &BasisSpec::new(b.n_min, b.n_max, b.l_max).context("bo basis")?,
        b.two_mj,
    )
    .context("BO operators")?;
    let grid = log_grid(b.r_min_um * 1e-6, b.r_max_um * 1e-6, b.points);
    let trap = TrapParams::new(
        angular(cfg.trap.secular_kHz * 1e3),
        cfg.rf_omega(),
        cfg.trap.q,
    )
    .context("trap")?;
    let n = cfg.rydberg.n;
    let e_inf = defect_energy(&atom, n, 0, 1)
        .context("target level")?
        .energy;
    let mut columns = Vec::new();
    let phases = [
        None,
        Some(RfPhase::MaxPlus),
        Some(RfPhase::Zero),
        Some(RfPhase::MaxMinus),
    ];
    for phase in phases {
        let snap = phase.map(|phase| TrapSnapshot {
            trap,
            ion: ion.clone(),
            axis: TrapAxis::X,
            phase,
        });
        let curves = diagonalize_curves(&ops, &grid, snap.as_ref(), b.strict)
            .context("BO diagonalization")?;
        let c = curves.curve_of(&ops.basis, n, 0, 1).ok_or_else(|| {
            CliError::Validation(format!("rydberg.n: {n}S is not in the bo basis"))
        })?;
        columns.push(curves.energies[c].clone());
        out.diagnostic(
            &format!(
                "figA_ambiguities_{}",
                ["none", "max_plus", "zero", "max_minus"][columns.len() - 1]
            ),
            curves.ambiguities.len(),
        );
    }
    let ghz = |e: f64| (e - e_inf) / H_PLANCK / 1e9;
    let rows = grid.iter().enumerate().map(|(i, &r)| {
        let mut row = vec![num(r * 1e6)];
        row.extend(columns.iter().map(|col| num(ghz(col[i]))));
        row
    });
    out.write_csv(
        "figA.csv",
        &[
            "r_um",
            "no_trap_GHz",
            "rf_max_plus_GHz",
            "rf_zero_GHz",
            "rf_max_minus_GHz",
        ],
        rows,
    )?;
    out.write_sidecar(
        "figA.csv",
        "figA",
        "target S curve with the trap field frozen at three rf phases, atom along the rf axis",
        &[
            Column {
                name: "r_um",
                unit: "um",
                meaning: "atom-ion separation",
            },
            Column {
                name: "no_trap_GHz",
                unit: "GHz",
                meaning: "curve energy minus the free level, ion field only",
            },
            Column {
                name: "rf_max_plus_GHz",
                unit: "GHz",
                meaning: "same with rf at its positive maximum",
            },
            Column {
                name: "rf_zero_GHz",
                unit: "GHz",
                meaning: "same with rf at zero (static part only)",
            },
            Column {
                name: "rf_max_minus_GHz",
                unit: "GHz",
                meaning: "same with rf at its negative maximum",
            },
        ],
    )
}
