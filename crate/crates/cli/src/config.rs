//! Experiment configuration.
//!
//! One TOML file, every physical quantity with a unit suffix in its key (`_kHz`, `_MHz`,
//! `_GHz`, `_um`, `_nm`, `_us`). Frequencies are ordinary frequencies; the 2π is applied
//! when converting to SI. Defaults reproduce the published parameter sets.

// keys keep the unit symbol's case (kHz, MHz)
#![allow(non_snake_case)]

use std::path::PathBuf;

use rydion_core::physics_core::{angular, Species};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    BoCurves,
    Dressed,
    TrapInfo,
    Gate,
    GateThermal,
    Micromotion,
    TaylorCheck,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::BoCurves => "bo-curves",
            Experiment::Dressed => "dressed",
            Experiment::TrapInfo => "trap-info",
            Experiment::Gate => "gate",
            Experiment::GateThermal => "gate-thermal",
            Experiment::Micromotion => "micromotion",
            Experiment::TaylorCheck => "taylor-check",
        }
    }

    /// ⁶Li for the structure calculations, ⁷Li for the gate and everything built on it.
    fn default_atom(self) -> &'static str {
        match self {
            Experiment::BoCurves => "Li6",
            _ => "Li7",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CachePolicy {
    /// Radial wavefunctions kept on disk under `cache_dir` between runs.
    Disk,
    Memory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    pub cache: CachePolicy,
    pub cache_dir: PathBuf,
    pub species: SpeciesBlock,
    pub rydberg: RydbergBlock,
    pub trap: TrapBlock,
    pub bo: BoBlock,
    pub dressed: DressedBlock,
    pub gate: GateBlock,
    pub thermal: ThermalBlock,
    pub micromotion: MicromotionBlock,
    pub taylor: TaylorBlock,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            out_dir: None,
            cache: CachePolicy::Disk,
            cache_dir: PathBuf::from(".rydion-cache"),
            species: SpeciesBlock::default(),
            rydberg: RydbergBlock::default(),
            trap: TrapBlock::default(),
            bo: BoBlock::default(),
            dressed: DressedBlock::default(),
            gate: GateBlock::default(),
            thermal: ThermalBlock::default(),
            micromotion: MicromotionBlock::default(),
            taylor: TaylorBlock::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpeciesBlock {
    /// "Li6" or "Li7"; unset picks the one the experiment was published with.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atom: Option<String>,
    /// Only "Yb171+" is tabulated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ion: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RydbergBlock {
    /// Principal quantum number of the nS₁/₂ target.
    pub n: u32,
    /// Numerov step in √r, units of √a₀.
    pub numerov_step_sqrt_bohr: f64,
    /// Basis of the second-order C₄ sum.
    pub c4_n_min: u32,
    pub c4_n_max: u32,
    pub c4_l_max: u32,
}

impl Default for RydbergBlock {
    fn default() -> Self {
        Self {
            n: 30,
            numerov_step_sqrt_bohr: 0.01,
            c4_n_min: 25,
            c4_n_max: 35,
            c4_l_max: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrapBlock {
    /// Static (axial) secular frequency used by the gate and trap-info.
    pub secular_kHz: f64,
    pub rf_MHz: f64,
    pub q: f64,
}

impl Default for TrapBlock {
    fn default() -> Self {
        Self {
            secular_kHz: 250.0,
            rf_MHz: 2.5,
            q: 0.282843,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoBlock {
    pub n_min: u32,
    pub n_max: u32,
    pub l_max: u32,
    /// 2m_j.
    pub two_mj: i32,
    pub r_min_um: f64,
    pub r_max_um: f64,
    pub points: usize,
    /// Curves whose large-R energy lies within this distance of the target are written.
    pub window_GHz: f64,
    /// Abort on an ambiguous eigenvector link instead of recording it.
    pub strict: bool,
}

impl Default for BoBlock {
    fn default() -> Self {
        Self {
            n_min: 25,
            n_max: 35,
            l_max: 34,
            two_mj: 1,
            r_min_um: 0.3,
            r_max_um: 4.0,
            points: 200,
            window_GHz: 200.0,
            strict: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DressedBlock {
    pub rabi_MHz: f64,
    pub detuning_GHz: f64,
    /// Pin C₄ so that the soft-core width at this detuning is `r_w_um`; otherwise the
    /// internal second-order C₄ is used.
    pub pin_r_w: bool,
    pub r_w_um: f64,
    pub r_min_um: f64,
    pub r_max_um: f64,
    pub points: usize,
}

impl Default for DressedBlock {
    fn default() -> Self {
        Self {
            rabi_MHz: 10.02,
            detuning_GHz: 0.4,
            pin_r_w: false,
            r_w_um: 1.4,
            r_min_um: 0.1,
            r_max_um: 4.0,
            points: 400,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModulationChoice {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GateBlock {
    pub rabi_MHz: f64,
    pub detuning_GHz: f64,
    /// Pin C₄ so that the soft-core width at this detuning is `r_w_um`; otherwise the
    /// internal second-order C₄ is used.
    pub pin_r_w: bool,
    pub r_w_um: f64,
    pub atom_trap_kHz: f64,
    pub detuning_delta_kHz: f64,
    pub d_over_r_w: f64,
    pub cutoff: usize,
    pub steps_per_period: usize,
    pub order: usize,
    pub modulation: ModulationChoice,
    /// Record populations every this many steps; 0 disables traces.
    pub trace_every: usize,
}

impl Default for GateBlock {
    fn default() -> Self {
        Self {
            rabi_MHz: 10.02,
            detuning_GHz: 0.4,
            pin_r_w: true,
            r_w_um: 1.4,
            atom_trap_kHz: 205.0,
            detuning_delta_kHz: 1.040,
            d_over_r_w: 0.88,
            cutoff: 10,
            steps_per_period: 200,
            order: 3,
            modulation: ModulationChoice::Plus,
            trace_every: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThermalBlock {
    pub nbar_atom: f64,
    pub nbar_ion: f64,
    pub n_max: usize,
}

impl Default for ThermalBlock {
    fn default() -> Self {
        Self {
            nbar_atom: 0.25,
            nbar_ion: 0.25,
            n_max: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RampChoice {
    SinSquared,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MicromotionBlock {
    pub rabi_MHz: f64,
    pub detuning_GHz: f64,
    pub pin_r_w: bool,
    pub r_w_um: f64,
    pub atom_trap_kHz: f64,
    pub d_um: f64,
    pub eta_omega_kHz: f64,
    pub delta_perp_kHz: f64,
    pub ramp_us: f64,
    pub ramp: RampChoice,
    pub ramp_drive: bool,
    /// Unset runs one loop, 2π/δ⊥.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end_us: Option<f64>,
    pub grid: usize,
    pub steps_per_rf: usize,
    pub samples: usize,
    /// (start, length) windows sampled at every step.
    pub zoom_us: Vec<[f64; 2]>,
}

impl Default for MicromotionBlock {
    fn default() -> Self {
        Self {
            rabi_MHz: 13.1,
            detuning_GHz: 0.8,
            pin_r_w: false,
            r_w_um: 1.142,
            atom_trap_kHz: 200.0,
            d_um: 1.0,
            eta_omega_kHz: 1.06,
            delta_perp_kHz: 1.064,
            ramp_us: 50.0,
            ramp: RampChoice::SinSquared,
            ramp_drive: false,
            t_end_us: None,
            grid: 128,
            steps_per_rf: 128,
            samples: 1000,
            zoom_us: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TaylorBlock {
    pub steps_per_rf: usize,
    /// Separations to test; the micromotion parameters are used otherwise.
    pub d_um: Vec<f64>,
}

impl Default for TaylorBlock {
    fn default() -> Self {
        Self {
            steps_per_rf: 200,
            d_um: vec![1.0],
        }
    }
}

fn invalid(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{key}: {msg}"))
}

fn positive(key: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be positive, got {v}")))
    }
}

/// Adds a unit-suffix hint to serde's unknown-field message when the key is a bare
/// prefix of an accepted one.
fn suffix_hint(msg: &str) -> String {
    let Some(start) = msg.find("unknown field `") else {
        return msg.to_string();
    };
    let rest = &msg[start + 15..];
    let Some(end) = rest.find('`') else {
        return msg.to_string();
    };
    let key = &rest[..end];
    let expected: Vec<&str> = rest[end..].split('`').skip(2).step_by(2).collect();
    match expected
        .iter()
        .find(|e| e.strip_prefix(key).is_some_and(|s| s.starts_with('_')))
    {
        Some(e) => format!("{msg}\nkey `{key}` is missing its unit suffix (expected `{e}`)"),
        None => msg.to_string(),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self =
            toml::from_str(text).map_err(|e| CliError::Validation(suffix_hint(&e.to_string())))?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn atom(&self, exp: Experiment) -> Result<Species, CliError> {
        match self.species.atom.as_deref().unwrap_or(exp.default_atom()) {
            "Li6" => Ok(Species::lithium6()),
            "Li7" => Ok(Species::lithium7()),
            other => Err(invalid(
                "species.atom",
                format!("unknown atom {other:?} (Li6, Li7)"),
            )),
        }
    }

    pub fn ion(&self) -> Result<Species, CliError> {
        match self.species.ion.as_deref().unwrap_or("Yb171+") {
            "Yb171+" => Ok(Species::ytterbium171_ion()),
            other => Err(invalid(
                "species.ion",
                format!("unknown ion {other:?} (Yb171+)"),
            )),
        }
    }

    pub fn rf_omega(&self) -> f64 {
        angular(self.trap.rf_MHz * 1e6)
    }

    /// Checks what serde cannot: signs, ranges and consistency with the command.
    pub fn validate(&self, exp: Experiment) -> Result<(), CliError> {
        if let Some(kind) = self.experiment {
            if kind != exp {
                return Err(invalid(
                    "experiment",
                    format!("config is for {}, command is {}", kind.name(), exp.name()),
                ));
            }
        }
        self.atom(exp)?;
        self.ion()?;
        let r = &self.rydberg;
        if r.n < 3 {
            return Err(invalid("rydberg.n", "must be at least 3"));
        }
        positive("rydberg.numerov_step_sqrt_bohr", r.numerov_step_sqrt_bohr)?;
        if r.c4_n_min > r.n || r.c4_n_max < r.n {
            return Err(invalid(
                "rydberg.c4_n_min",
                "C₄ basis must contain the target n",
            ));
        }
        positive("trap.secular_kHz", self.trap.secular_kHz)?;
        positive("trap.rf_MHz", self.trap.rf_MHz)?;
        positive("trap.q", self.trap.q)?;
        let b = &self.bo;
        if b.n_min > b.n_max || b.two_mj % 2 == 0 {
            return Err(invalid("bo", "need n_min ≤ n_max and odd two_mj"));
        }
        positive("bo.r_min_um", b.r_min_um)?;
        if b.r_max_um.partial_cmp(&b.r_min_um) != Some(std::cmp::Ordering::Greater) || b.points < 2
        {
            return Err(invalid(
                "bo.r_max_um",
                "need r_max_um > r_min_um and at least 2 points",
            ));
        }
        positive("bo.window_GHz", b.window_GHz)?;
        let d = &self.dressed;
        positive("dressed.rabi_MHz", d.rabi_MHz)?;
        positive("dressed.detuning_GHz", d.detuning_GHz)?;
        positive("dressed.r_min_um", d.r_min_um)?;
        if d.r_max_um.partial_cmp(&d.r_min_um) != Some(std::cmp::Ordering::Greater) || d.points < 2
        {
            return Err(invalid(
                "dressed.r_max_um",
                "need r_max_um > r_min_um and at least 2 points",
            ));
        }
        positive("dressed.r_w_um", d.r_w_um)?;
        let g = &self.gate;
        positive("gate.rabi_MHz", g.rabi_MHz)?;
        positive("gate.detuning_GHz", g.detuning_GHz)?;
        positive("gate.atom_trap_kHz", g.atom_trap_kHz)?;
        positive("gate.d_over_r_w", g.d_over_r_w)?;
        if g.detuning_delta_kHz == 0.0 || !g.detuning_delta_kHz.is_finite() {
            return Err(invalid("gate.detuning_delta_kHz", "must be non-zero"));
        }
        positive("gate.r_w_um", g.r_w_um)?;
        if g.cutoff < 4 {
            return Err(invalid("gate.cutoff", "must be at least 4"));
        }
        if g.steps_per_period < 8 {
            return Err(invalid("gate.steps_per_period", "must be at least 8"));
        }
        if !(1..=3).contains(&g.order) {
            return Err(invalid("gate.order", "must be 1, 2 or 3"));
        }
        let t = &self.thermal;
        if !(t.nbar_atom >= 0.0 && t.nbar_ion >= 0.0) {
            return Err(invalid(
                "thermal.nbar_atom",
                "occupations must be non-negative",
            ));
        }
        if t.n_max + 3 > g.cutoff {
            return Err(invalid(
                "thermal.n_max",
                format!("must stay 3 below gate.cutoff = {}", g.cutoff),
            ));
        }
        let m = &self.micromotion;
        positive("micromotion.rabi_MHz", m.rabi_MHz)?;
        positive("micromotion.detuning_GHz", m.detuning_GHz)?;
        positive("micromotion.atom_trap_kHz", m.atom_trap_kHz)?;
        positive("micromotion.d_um", m.d_um)?;
        positive("micromotion.delta_perp_kHz", m.delta_perp_kHz)?;
        if m.ramp_us.is_nan() || m.ramp_us < 0.0 {
            return Err(invalid("micromotion.ramp_us", "must be non-negative"));
        }
        if let Some(t) = m.t_end_us {
            positive("micromotion.t_end_us", t)?;
        }
        positive("micromotion.r_w_um", m.r_w_um)?;
        if m.grid < 16 || !m.grid.is_power_of_two() {
            return Err(invalid("micromotion.grid", "must be a power of two ≥ 16"));
        }
        if m.steps_per_rf < 100 {
            return Err(invalid("micromotion.steps_per_rf", "must be at least 100"));
        }
        for (k, w) in m.zoom_us.iter().enumerate() {
            if !(w[0] >= 0.0 && w[1] > 0.0) {
                return Err(invalid(
                    &format!("micromotion.zoom_us[{k}]"),
                    "need start ≥ 0 and length > 0",
                ));
            }
        }
        if self.taylor.steps_per_rf < 20 {
            return Err(invalid("taylor.steps_per_rf", "must be at least 20"));
        }
        if self.taylor.d_um.is_empty() {
            return Err(invalid("taylor.d_um", "needs at least one separation"));
        }
        for (k, d) in self.taylor.d_um.iter().enumerate() {
            positive(&format!("taylor.d_um[{k}]"), *d)?;
        }
        Ok(())
    }
}
