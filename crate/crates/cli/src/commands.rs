//! One function per experiment. Each reads its block of the config, calls the core
//! crate and writes plot-ready files through [`OutputDir`].

use std::f64::consts::PI;

use rydion_core::bo::{
    c4_from_alpha, c4_second_order, diagonalize_curves, log_grid, BoOperators, PotentialCurves,
};
use rydion_core::dressed::{
    force_profile, lifetime_enhancement, match_drive, optimal_separation, v_dressed,
    AdiabaticPotential, DressingParams, FieldModel,
};
use rydion_core::gate::{
    run_all_inputs, run_thermal, rwa_ratio, spin_spin_phase, GateParams, Modulation, ThermalSpec,
};
use rydion_core::micromotion::{
    classical_orbits, orbit_summary, run_micromotion_gate, taylor_adequacy_check,
    ClassicalCoupling, Grid2D, IonMotion, MMOptions, MMParams, MMResult, Ramp, SECTOR_LABELS,
};
use rydion_core::physics_core::{
    angular, char_lengths, rf_crossover, Species, TrapParams, ALPHA_LI_GROUND_AU,
    AU_POLARIZABILITY, BOHR, HARTREE, HBAR, H_PLANCK,
};
use rydion_core::rydberg::{defect_energy, BasisSpec, RydbergState, StepSpec, WavefunctionStore};
use serde_json::{json, Value};

use crate::config::{CachePolicy, Experiment, ExperimentConfig, ModulationChoice, RampChoice};
use crate::error::{CliError, Context};
use crate::output::{num, OutputDir};

pub fn run(exp: Experiment, cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    match exp {
        Experiment::TrapInfo => trap_info(cfg, out),
        Experiment::BoCurves => bo_curves(cfg, out).map(|_| ()),
        Experiment::Dressed => dressed(cfg, out),
        Experiment::Gate => gate(cfg, out).map(|_| ()),
        Experiment::GateThermal => gate_thermal(cfg, out),
        Experiment::Micromotion => micromotion(cfg, out).map(|_| ()),
        Experiment::TaylorCheck => taylor_check(cfg, out),
    }
}

fn khz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e3)
}

fn ghz(e: f64) -> f64 {
    e / H_PLANCK / 1e9
}

fn khz_energy(e: f64) -> f64 {
    e / H_PLANCK / 1e3
}

fn c4_au(c4: f64) -> f64 {
    c4 / (HARTREE * BOHR.powi(4))
}

pub fn store(cfg: &ExperimentConfig, species: &Species) -> Result<WavefunctionStore, CliError> {
    let step = StepSpec {
        h: cfg.rydberg.numerov_step_sqrt_bohr,
    };
    match cfg.cache {
        CachePolicy::Memory => Ok(WavefunctionStore::new(species.clone(), step)),
        CachePolicy::Disk => {
            WavefunctionStore::with_disk(species.clone(), step, cfg.cache_dir.join(&species.name))
                .context("cache")
        }
    }
}

fn target(cfg: &ExperimentConfig, atom: &Species) -> Result<RydbergState, CliError> {
    RydbergState::s_half(atom, cfg.rydberg.n).context("rydberg.n")
}

pub fn internal_c4(cfg: &ExperimentConfig, atom: &Species) -> Result<f64, CliError> {
    let r = &cfg.rydberg;
    let basis = BasisSpec::new(r.c4_n_min, r.c4_n_max, r.c4_l_max).context("rydberg.c4_n_min")?;
    c4_second_order(&target(cfg, atom)?, &store(cfg, atom)?, &basis).context("second-order C₄")
}

/// C₄ from a pinned soft-core width, or the internal second-order value.
fn c4_for(
    cfg: &ExperimentConfig,
    atom: &Species,
    pin: bool,
    r_w_um: f64,
    delta0: f64,
) -> Result<f64, CliError> {
    if pin {
        Ok(HBAR * delta0 * (r_w_um * 1e-6).powi(4))
    } else {
        internal_c4(cfg, atom)
    }
}

fn trap_info(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let ion = cfg.ion()?;
    let t = &cfg.trap;
    let full =
        TrapParams::new(angular(t.secular_kHz * 1e3), cfg.rf_omega(), t.q).context("trap")?;
    let rf = TrapParams::rf_only(cfg.rf_omega(), t.q).context("trap")?;
    let ell = char_lengths(&full, &ion).context("characteristic lengths")?;
    let report = json!({
        "ion": ion.name,
        "secular_kHz": t.secular_kHz,
        "rf_MHz": t.rf_MHz,
        "q": t.q,
        "a": full.a,
        "ell_z_um": ell.ell_z * 1e6,
        "ell_perp_um": ell.ell_perp * 1e6,
        "rf_crossover_um": rf_crossover(&rf, &ion) * 1e6,
        "rf_only": {
            "mathieu_beta": 2.0 * rf.secular_frequency().context("Mathieu exponent")? / rf.omega_rf,
            "secular_kHz": khz(rf.secular_frequency().context("Mathieu exponent")?),
            "secular_lowest_order_kHz": khz(rf.secular_frequency_lowest_order()),
            "pseudo_kHz": khz(rf.pseudo_frequency()),
        },
        "with_static": {
            "transverse_secular_kHz": khz(full.secular_frequency().context("Mathieu exponent")?),
        },
    });
    out.write_json("report.json", &report)
}

/// Column tag such as `30S1_2` for a basis state.
fn level_tag(s: &RydbergState) -> String {
    const L: [&str; 7] = ["S", "P", "D", "F", "G", "H", "I"];
    let l = L
        .get(s.l as usize)
        .map(|x| x.to_string())
        .unwrap_or_else(|| format!("l{}", s.l));
    format!("{}{}{}_2", s.n, l, s.j2)
}

pub struct BoOutput {
    pub curves: PotentialCurves,
    pub basis: Vec<RydbergState>,
    pub target: usize,
    pub c4: f64,
    pub e_inf: f64,
}

pub fn bo_curves(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<BoOutput, CliError> {
    let atom = cfg.atom(Experiment::BoCurves)?;
    let b = &cfg.bo;
    let st = store(cfg, &atom)?;
    let ops = BoOperators::new(
        &st,
        &BasisSpec::new(b.n_min, b.n_max, b.l_max).context("bo basis")?,
        b.two_mj,
    )
    .context("BO operators")?;
    let grid = log_grid(b.r_min_um * 1e-6, b.r_max_um * 1e-6, b.points);
    let curves = diagonalize_curves(&ops, &grid, None, b.strict).context("BO diagonalization")?;
    let n = cfg.rydberg.n;
    let target = curves
        .curve_of(&ops.basis, n, 0, 1)
        .ok_or_else(|| CliError::Validation(format!("rydberg.n: {n}S is not in the bo basis")))?;
    let e_inf = defect_energy(&atom, n, 0, 1)
        .context("target level")?
        .energy;
    let c4 = internal_c4(cfg, &atom)?;
    let window = b.window_GHz;
    let chosen: Vec<usize> = (0..curves.curve_count())
        .filter(|&c| (ghz(ops.energies[curves.asymptotic_state[c]] - e_inf)).abs() <= window)
        .collect();
    let mut header = vec!["r_um".to_string(), "c4_reference_GHz".to_string()];
    header.extend(chosen.iter().map(|&c| {
        format!(
            "E_c{c}_{}_GHz",
            level_tag(&ops.basis[curves.asymptotic_state[c]])
        )
    }));
    let rows = grid.iter().enumerate().map(|(i, &r)| {
        let mut row = vec![num(r * 1e6), num(ghz(e_inf - c4 / r.powi(4)))];
        row.extend(chosen.iter().map(|&c| num(ghz(curves.energies[c][i]))));
        row
    });
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    out.write_csv("curves.csv", &header_refs, rows)?;

    let (mut min_gap, mut worst_c4, mut first_close) = (f64::INFINITY, 0.0f64, None);
    for (i, &r) in grid.iter().enumerate().rev() {
        let gap = ghz(curves.gap_to_neighbours(target, i));
        if r >= 0.5e-6 {
            min_gap = min_gap.min(gap);
        }
        if first_close.is_none() && gap < 1.0 {
            first_close = Some(r * 1e6);
        }
        if r >= 1.5e-6 {
            worst_c4 =
                worst_c4.max(((e_inf - curves.energies[target][i]) * r.powi(4) / c4 - 1.0).abs());
        }
    }
    let min_overlap = curves
        .min_link_overlap
        .iter()
        .fold(1.0f64, |m, v| m.min(*v));
    let summary = json!({
        "atom": atom.name,
        "basis_dim": ops.dim(),
        "target": curves.labels[target],
        "target_energy_GHz": ghz(e_inf),
        "c4_au": c4_au(c4),
        "min_gap_GHz_above_500nm": if min_gap.is_finite() { Value::from(min_gap) } else { Value::Null },
        "largest_r_with_gap_below_1GHz_um": first_close,
        "max_rel_dev_from_c4_above_1p5um": worst_c4,
        "ambiguities": curves.ambiguities.len(),
        "min_link_overlap": min_overlap,
        "curves_written": chosen.len(),
    });
    out.write_json("summary.json", &summary)?;
    out.diagnostic("bo_basis_dim", ops.dim());
    out.diagnostic("bo_points", grid.len());
    out.diagnostic("bo_ambiguities", curves.ambiguities.len());
    out.diagnostic("bo_min_link_overlap", min_overlap);
    let basis = ops.basis.to_vec();
    Ok(BoOutput {
        curves,
        basis,
        target,
        c4,
        e_inf,
    })
}

fn dressing(
    atom: &Species,
    cfg: &ExperimentConfig,
    rabi_mhz: f64,
    det_ghz: f64,
) -> Result<DressingParams, CliError> {
    Ok(DressingParams::new(
        angular(rabi_mhz * 1e6),
        angular(det_ghz * 1e9),
        target(cfg, atom)?,
    ))
}

/// −C₄ᵍ/R⁴ of the ground-state atom.
pub fn ground_potential(r: f64) -> f64 {
    -c4_from_alpha(ALPHA_LI_GROUND_AU * AU_POLARIZABILITY) / r.powi(4)
}

pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

fn dressed(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let atom = cfg.atom(Experiment::Dressed)?;
    let ion = cfg.ion()?;
    let d = &cfg.dressed;
    let params = dressing(&atom, cfg, d.rabi_MHz, d.detuning_GHz)?;
    let c4 = c4_for(cfg, &atom, d.pin_r_w, d.r_w_um, params.delta0)?;
    let pot = AdiabaticPotential::new(&params, c4).context("dressed potential")?;
    let rows = linear_grid(d.r_min_um * 1e-6, d.r_max_um * 1e-6, d.points)
        .into_iter()
        .map(|r| {
            let f = force_profile(r, &pot).map(|f| f.force).unwrap_or(0.0);
            vec![
                num(r * 1e6),
                num(khz_energy(ground_potential(r))),
                num(khz_energy(v_dressed(r, &pot))),
                num(khz_energy(f) * 1e-6),
            ]
        });
    out.write_csv(
        "potential.csv",
        &["r_um", "ground_kHz", "dressed_kHz", "force_kHz_per_um"],
        rows,
    )?;
    let d_star = optimal_separation(&pot);
    let f_max = force_profile(d_star, &pot).context("force")?.force;
    let d_gate = cfg.gate.d_over_r_w * pot.r_w;
    let omega_static = angular(cfg.trap.secular_kHz * 1e3);
    let eta_static = match_drive(
        d_gate,
        &params,
        &pot,
        FieldModel::Coulomb,
        &ion,
        omega_static,
    )
    .context("drive")?;
    let rf = TrapParams::rf_only(cfg.rf_omega(), cfg.trap.q).context("trap")?;
    let eta_rf = match_drive(
        d_gate,
        &params,
        &pot,
        FieldModel::Trap {
            trap: &rf,
            ion: &ion,
        },
        &ion,
        rf.pseudo_frequency(),
    )
    .context("drive")?;
    let summary = json!({
        "atom": atom.name,
        "rabi_MHz": d.rabi_MHz,
        "detuning_GHz": d.detuning_GHz,
        "c4_au": c4_au(c4),
        "c4_pinned": d.pin_r_w,
        "A_kHz": khz_energy(pot.a),
        "r_w_um": pot.r_w * 1e6,
        "d_star_um": d_star * 1e6,
        "d_star_over_r_w": d_star / pot.r_w,
        "f_max_in_A_over_r_w": f_max * pot.r_w / pot.a,
        "lifetime_enhancement": lifetime_enhancement(&params).context("lifetime")?,
        "drive_match": {
            "d_um": d_gate * 1e6,
            "static_kHz": khz(eta_static),
            "rf_averaged_kHz": khz(eta_rf),
        },
    });
    out.write_json("summary.json", &summary)
}

pub fn gate_params(cfg: &ExperimentConfig) -> Result<(GateParams, AdiabaticPotential), CliError> {
    let atom = cfg.atom(Experiment::Gate)?;
    let ion = cfg.ion()?;
    let g = &cfg.gate;
    let params = dressing(&atom, cfg, g.rabi_MHz, g.detuning_GHz)?;
    let c4 = c4_for(cfg, &atom, g.pin_r_w, g.r_w_um, params.delta0)?;
    let pot = AdiabaticPotential::new(&params, c4).context("dressed potential")?;
    let mut p = GateParams::matched(
        &params,
        &pot,
        &atom,
        &ion,
        angular(cfg.trap.secular_kHz * 1e3),
        angular(g.atom_trap_kHz * 1e3),
        angular(g.detuning_delta_kHz * 1e3),
        g.d_over_r_w * pot.r_w,
    )
    .context("gate parameters")?;
    p.cutoff_a = g.cutoff;
    p.cutoff_i = g.cutoff;
    p.steps_per_period = g.steps_per_period;
    p.order = g.order;
    p.modulation = match g.modulation {
        ModulationChoice::Plus => Modulation::Plus,
        ModulationChoice::Minus => Modulation::Minus,
    };
    p.validate().context("gate parameters")?;
    Ok((p, pot))
}

pub fn gate(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Vec<Vec<String>>, CliError> {
    let (p, pot) = gate_params(cfg)?;
    let every = (cfg.gate.trace_every > 0).then_some(cfg.gate.trace_every);
    let run = run_all_inputs(&p, 0, 0, every, None).context("gate evolution")?;
    let phase = spin_spin_phase(&p).context("two-qubit phase")?;
    let inputs: Vec<Value> = run
        .inputs
        .iter()
        .map(|r| {
            json!({
                "input": r.input.label(),
                "goal": r.goal,
                "fidelity": r.fidelity,
                "fidelity_raw": r.fidelity_raw,
                "motional_return": r.motional_return,
            })
        })
        .collect();
    let summary = json!({
        "inputs": inputs,
        "compensation_rad": [run.compensation.0, run.compensation.1],
        "phase_rad": phase.simulated,
        "phase_analytic_rad": phase.analytic,
        "rwa_ratio": rwa_ratio(&p),
        "eta_omega_kHz": khz(p.eta_omega_sm),
        "A_kHz": khz_energy(pot.a),
        "r_w_um": pot.r_w * 1e6,
        "d_um": p.d * 1e6,
        "omega_v_kHz": khz(p.omega_v()),
        "gate_time_us": p.gate_time() * 1e6,
        "max_leakage": run.max_leakage,
    });
    out.write_json("summary.json", &summary)?;
    let mut rows = Vec::new();
    for r in &run.inputs {
        for t in &r.traces {
            let mut row = vec![r.input.label().to_string(), num(t.t * 1e6)];
            row.extend(t.populations.iter().map(|v| num(*v)));
            row.push(num(t.n_ion));
            row.push(num(t.n_atom));
            rows.push(row);
        }
    }
    if every.is_some() {
        out.write_csv(
            "traces.csv",
            &[
                "input", "t_us", "P_uu", "P_ud", "P_du", "P_dd", "n_ion", "n_atom",
            ],
            rows.clone(),
        )?;
    }
    out.diagnostic("gate_cutoff", p.cutoff_i);
    out.diagnostic("gate_steps_per_period", p.steps_per_period);
    out.diagnostic("gate_max_leakage", run.max_leakage);
    Ok(rows)
}

fn gate_thermal(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let (p, _) = gate_params(cfg)?;
    let t = &cfg.thermal;
    let spec = ThermalSpec {
        nbar_a: t.nbar_atom,
        nbar_i: t.nbar_ion,
        n_max: t.n_max,
    };
    let res = run_thermal(&spec, &p).context("thermal ensemble")?;
    out.write_json(
        "thermal.json",
        &json!({
            "nbar_atom": t.nbar_atom,
            "nbar_ion": t.nbar_ion,
            "n_max": t.n_max,
            "fidelity": res.fidelity,
            "fidelity_unnormalized": res.fidelity_unnormalized,
            "trace_overlap": res.trace_overlap,
            "truncated_trace": res.trace,
        }),
    )?;
    let rows = res
        .members
        .iter()
        .map(|&(a, i, w, f)| vec![a.to_string(), i.to_string(), num(w), num(f)]);
    out.write_csv(
        "members.csv",
        &["n_atom", "n_ion", "weight", "fidelity"],
        rows,
    )?;
    out.diagnostic("thermal_truncated_trace", res.trace);
    out.diagnostic("gate_cutoff", p.cutoff_i);
    Ok(())
}

pub fn mm_params(cfg: &ExperimentConfig) -> Result<MMParams, CliError> {
    let atom = cfg.atom(Experiment::Micromotion)?;
    let m = &cfg.micromotion;
    let params = dressing(&atom, cfg, m.rabi_MHz, m.detuning_GHz)?;
    let c4 = c4_for(cfg, &atom, m.pin_r_w, m.r_w_um, params.delta0)?;
    let delta_perp = angular(m.delta_perp_kHz * 1e3);
    let p = MMParams {
        trap: TrapParams::rf_only(cfg.rf_omega(), cfg.trap.q).context("trap")?,
        ion: cfg.ion()?,
        omega_a: angular(m.atom_trap_kHz * 1e3),
        d: m.d_um * 1e-6,
        potential: AdiabaticPotential::new(&params, c4).context("dressed potential")?,
        dressing: params,
        atom,
        eta_omega_sm: angular(m.eta_omega_kHz * 1e3),
        delta_perp,
        ramp_time: m.ramp_us * 1e-6,
        ramp: match m.ramp {
            RampChoice::SinSquared => Ramp::SinSquared,
            RampChoice::Linear => Ramp::Linear,
        },
        ramp_drive: m.ramp_drive,
        t_end: m.t_end_us.map_or(2.0 * PI / delta_perp, |t| t * 1e-6),
        modulation: Modulation::Plus,
        ion_motion: IonMotion::Rf,
    };
    p.validate().context("micromotion parameters")?;
    Ok(p)
}

fn trace_rows(res: &MMResult, keep: impl Fn(f64) -> bool) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for (s, tr) in res.traces.iter().enumerate() {
        for k in 0..tr.t.len() {
            if keep(tr.t[k]) {
                rows.push(vec![
                    num(tr.t[k] * 1e6),
                    SECTOR_LABELS[s].to_string(),
                    num(tr.x_i[k] * 1e9),
                    num(tr.x_a[k] * 1e9),
                    num(tr.n_i[k]),
                    num(tr.n_a[k]),
                ]);
            }
        }
    }
    rows
}

pub const MM_COLUMNS: [&str; 6] = ["t_us", "sector", "x_i_nm", "x_a_nm", "n_i_eff", "n_a_eff"];

/// Runs the grid propagation; `extra_zoom` windows (s) are added to the configured ones.
pub fn micromotion(
    cfg: &ExperimentConfig,
    out: &mut OutputDir,
) -> Result<(MMParams, Vec<(f64, f64)>), CliError> {
    micromotion_with(cfg, out, &[])
}

pub fn micromotion_with(
    cfg: &ExperimentConfig,
    out: &mut OutputDir,
    extra_zoom: &[(f64, f64)],
) -> Result<(MMParams, Vec<(f64, f64)>), CliError> {
    let p = mm_params(cfg)?;
    let m = &cfg.micromotion;
    let grid = Grid2D::for_params(&p, m.grid);
    grid.validate(&p).context("micromotion.grid")?;
    let mut zoom: Vec<(f64, f64)> = m
        .zoom_us
        .iter()
        .map(|w| (w[0] * 1e-6, w[1] * 1e-6))
        .collect();
    zoom.extend_from_slice(extra_zoom);
    let opts = MMOptions {
        steps_per_rf: m.steps_per_rf,
        samples: m.samples,
        zoom: zoom.clone(),
    };
    let res = run_micromotion_gate(&p, &grid, &opts).context("micromotion propagation")?;
    out.write_csv("traces.csv", &MM_COLUMNS, trace_rows(&res, |_| true))?;
    for (k, &(t0, len)) in zoom.iter().enumerate() {
        out.write_csv(
            &format!("zoom_{k}.csv"),
            &MM_COLUMNS,
            trace_rows(&res, |t| t >= t0 && t <= t0 + len),
        )?;
    }
    let orbit = orbit_summary(&res, &p).context("orbit summary")?;
    let secular = p.trap.secular_frequency().context("Mathieu exponent")?;
    let field = FieldModel::Trap {
        trap: &p.trap,
        ion: &p.ion,
    };
    let matched =
        match_drive(p.d, &p.dressing, &p.potential, field, &p.ion, p.omega_i()).context("drive")?;
    let drift = res.norm_drift.iter().fold(0.0f64, |a, b| a.max(*b));
    let edge = res.max_edge.iter().fold(0.0f64, |a, b| a.max(*b));
    let summary = json!({
        "sectors": SECTOR_LABELS,
        "peak_x_i_over_ell_i": orbit.peak,
        "last_period_x_i_over_ell_i": orbit.last,
        "suppression_ud_over_uu": orbit.suppression(),
        "return_ratio": orbit.return_ratio(),
        "norm_drift": res.norm_drift,
        "max_edge_probability": res.max_edge,
        "ell_i_nm": p.ell_i() * 1e9,
        "ell_a_nm": p.ell_a() * 1e9,
        "r_w_um": p.potential.r_w * 1e6,
        "secular_kHz": khz(secular),
        "omega_v_kHz": khz(p.omega_v().context("secular frequency")?),
        "eta_omega_kHz": khz(p.eta_omega_sm),
        "eta_rf_matched_kHz": khz(matched),
        "t_end_us": p.t_end * 1e6,
        "grid": m.grid,
        "dt_ns": 2.0 * PI / p.trap.omega_rf / m.steps_per_rf as f64 * 1e9,
    });
    out.write_json("summary.json", &summary)?;
    out.diagnostic("mm_grid", m.grid);
    out.diagnostic("mm_steps_per_rf", m.steps_per_rf);
    out.diagnostic("mm_max_norm_drift", drift);
    out.diagnostic("mm_max_edge_probability", edge);
    Ok((p, zoom))
}

/// Rows kept when thinning long classical orbits for output.
const ORBIT_ROWS: usize = 4000;

fn taylor_check(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let base = mm_params(cfg)?;
    let spr = cfg.taylor.steps_per_rf;
    let mut rows = Vec::new();
    for &d in &cfg.taylor.d_um {
        let mut p = base.clone();
        p.d = d * 1e-6;
        let rep = taylor_adequacy_check(&p, spr).context("classical orbits")?;
        rows.push(json!({
            "d_um": d,
            "d_over_r_w": p.d / p.potential.r_w,
            "dev_i_over_ell_i": rep.dev_i,
            "dev_a_over_ell_a": rep.dev_a,
            "amp_i_over_ell_i": rep.amp_i,
            "amp_a_over_ell_a": rep.amp_a,
            "below_5e-3": rep.dev_i.max(rep.dev_a) < 5e-3,
        }));
    }
    out.write_json(
        "report.json",
        &json!({ "steps_per_rf": spr, "separations": rows }),
    )?;
    let mut p = base;
    p.d = cfg.taylor.d_um[0] * 1e-6;
    let mut csv = Vec::new();
    for drive in [false, true] {
        let full = classical_orbits(&p, ClassicalCoupling::Full, drive, spr)
            .context("classical orbits")?;
        let tay = classical_orbits(&p, ClassicalCoupling::Taylor3, drive, spr)
            .context("classical orbits")?;
        let stride = (full.len() / ORBIT_ROWS).max(1);
        for (f, t) in full.iter().zip(&tay).step_by(stride) {
            csv.push(vec![
                drive.to_string(),
                num(f.0 * 1e6),
                num(f.1 * 1e9),
                num(f.2 * 1e9),
                num(t.1 * 1e9),
                num(t.2 * 1e9),
            ]);
        }
    }
    out.write_csv(
        "orbits.csv",
        &[
            "ion_drive",
            "t_us",
            "x_i_full_nm",
            "x_a_full_nm",
            "x_i_taylor_nm",
            "x_a_taylor_nm",
        ],
        csv,
    )?;
    out.diagnostic("taylor_steps_per_rf", spr);
    Ok(())
}
