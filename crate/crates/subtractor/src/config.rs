//! Experiment configuration: JSON parsing, presets and sweep expansion.
//!
//! Rates and frequencies are entered as frequency/2π in GHz and times in
//! ns. Conversion to the angular units of the core happens in
//! [`PointParams::to_system`].

use serde::{Deserialize, Serialize};
use subtractor_core::engine::{Controls, Integrator};
use subtractor_core::model::{resonant_preset, Detunings, InputSpec, SpontVariant, SystemParams, Truncations};
use subtractor_core::units::ghz_to_angular;

use crate::error::RunError;

/// Largest coherent mean photon number accepted without `long_running`.
pub const DESK_NBAR_CAP: f64 = 5.0;
/// Largest Hilbert-space dimension for which `oracle: auto` runs the
/// master-equation cross-check.
pub const AUTO_ORACLE_DIM: usize = 200;
pub const DEFAULT_N_TRAJ: usize = 10_000;
pub const DEFAULT_G2_N_TRAJ: usize = 40_000;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Fig2,
    Fig3a,
    Fig3b,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3a => "fig3a",
            Preset::Fig3b => "fig3b",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
            Preset::Fig7 => "fig7",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OracleMode {
    On,
    Off,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SpontVariantConfig {
    Literal,
    Radiative,
}

impl From<SpontVariantConfig> for SpontVariant {
    fn from(v: SpontVariantConfig) -> Self {
        match v {
            SpontVariantConfig::Literal => SpontVariant::LiteralProjector,
            SpontVariantConfig::Radiative => SpontVariant::RadiativeLowering,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InputConfig {
    Fock(usize),
    Coherent(f64),
}

impl From<InputConfig> for InputSpec {
    fn from(v: InputConfig) -> Self {
        match v {
            InputConfig::Fock(n) => InputSpec::Fock(n),
            InputConfig::Coherent(x) => InputSpec::Coherent(x),
        }
    }
}

/// Explicit rotating-frame frequencies in GHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetuningsConfig {
    pub omega_s: f64,
    pub omega_a: f64,
    pub omega_b: f64,
    pub omega_12: f64,
    pub omega_13: f64,
    pub omega_14: f64,
}

/// Parameters as written in a config; every field optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    /// Sets both g_a and g_b.
    pub g: Option<f64>,
    pub g_a: Option<f64>,
    pub g_b: Option<f64>,
    /// Sets both kappa_a and kappa_b.
    pub kappa: Option<f64>,
    pub kappa_a: Option<f64>,
    pub kappa_b: Option<f64>,
    pub kappa_s: Option<f64>,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    /// Overrides the on-resonance frequencies derived from `delta`.
    pub detunings: Option<DetuningsConfig>,
    pub spont_variant: Option<SpontVariantConfig>,
    pub input: Option<InputConfig>,
    pub qd_initial_level: Option<usize>,
    pub qd_present: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationConfig {
    pub source: usize,
    pub mode_a: usize,
    pub mode_b: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorConfig {
    Exponential,
    Rk4,
}

/// Engine control overrides; times in ns.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlsConfig {
    pub t_end: Option<f64>,
    pub dt_max: Option<f64>,
    pub jump_time_tol: Option<f64>,
    pub norm_floor: Option<f64>,
    pub residual_tolerance: Option<f64>,
    pub integrator: Option<IntegratorConfig>,
    pub coarse_steps: Option<u32>,
}

impl ControlsConfig {
    pub fn apply(&self, params: &SystemParams) -> Controls {
        let mut c = Controls::for_params(params);
        if let Some(v) = self.t_end {
            c.t_end = v;
        }
        if let Some(v) = self.dt_max {
            c.dt_max = v;
        }
        if let Some(v) = self.jump_time_tol {
            c.jump_time_tol = v;
        }
        if let Some(v) = self.norm_floor {
            c.norm_floor = v;
        }
        if let Some(v) = self.residual_tolerance {
            c.residual_tolerance = v;
        }
        c.integrator = match (self.integrator, self.coarse_steps) {
            (Some(IntegratorConfig::Rk4), _) => Integrator::Rk4,
            (_, Some(coarse_steps)) => Integrator::Exponential { coarse_steps },
            _ => c.integrator,
        };
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    G,
    GA,
    GB,
    Kappa,
    KappaA,
    KappaB,
    KappaOverG,
    KappaAOverG,
    KappaBOverG,
    KappaS,
    Gamma,
    Delta,
    NbarIn,
    FockN,
    /// 1 = dot present, 0 = absent.
    QdPresent,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::G => "g",
            SweepParam::GA => "g_a",
            SweepParam::GB => "g_b",
            SweepParam::Kappa => "kappa",
            SweepParam::KappaA => "kappa_a",
            SweepParam::KappaB => "kappa_b",
            SweepParam::KappaOverG => "kappa_over_g",
            SweepParam::KappaAOverG => "kappa_a_over_g",
            SweepParam::KappaBOverG => "kappa_b_over_g",
            SweepParam::KappaS => "kappa_s",
            SweepParam::Gamma => "gamma",
            SweepParam::Delta => "delta",
            SweepParam::NbarIn => "nbar_in",
            SweepParam::FockN => "fock_n",
            SweepParam::QdPresent => "qd_present",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

/// Raw config file contents.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: Option<String>,
    pub preset: Option<Preset>,
    #[serde(default)]
    pub params: ParamsConfig,
    pub truncations: Option<TruncationConfig>,
    pub n_traj: Option<usize>,
    pub master_seed: Option<u64>,
    /// 0 or absent: one worker per available core.
    pub workers: Option<usize>,
    #[serde(default)]
    pub controls: ControlsConfig,
    /// Replaces the preset sweep when present.
    pub sweep: Option<Vec<SweepAxis>>,
    pub oracle: Option<OracleMode>,
    /// Rerun coherent points with every mode truncation +4 and flag changes
    /// of n̄_out above 1e-3. Defaults to on for coherent inputs.
    pub truncation_check: Option<bool>,
    pub bootstrap_resamples: Option<usize>,
    #[serde(default)]
    pub long_running: bool,
}

/// Human-unit parameters of one sweep point (GHz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointParams {
    pub g_a: f64,
    pub g_b: f64,
    pub kappa_a: f64,
    pub kappa_b: f64,
    pub kappa_s: f64,
    pub gamma: f64,
    pub delta: f64,
    pub detunings: Option<DetuningsConfig>,
    pub spont_variant: SpontVariantConfig,
    pub input: InputConfig,
    pub qd_initial_level: usize,
    pub qd_present: bool,
}

impl PointParams {
    /// g/2π = 10, κ/2π = 20, κ_s/2π = 0.05, γ/2π = 0.25, δ/2π = 25 GHz,
    /// single-photon input, dot in |↑⟩.
    pub fn benchmark() -> Self {
        Self {
            g_a: 10.0,
            g_b: 10.0,
            kappa_a: 20.0,
            kappa_b: 20.0,
            kappa_s: 0.05,
            gamma: 0.25,
            delta: 25.0,
            detunings: None,
            spont_variant: SpontVariantConfig::Literal,
            input: InputConfig::Fock(1),
            qd_initial_level: 1,
            qd_present: true,
        }
    }

    fn merge(&mut self, p: &ParamsConfig) {
        if let Some(g) = p.g {
            self.g_a = g;
            self.g_b = g;
        }
        if let Some(k) = p.kappa {
            self.kappa_a = k;
            self.kappa_b = k;
        }
        let fields = [
            (&mut self.g_a, p.g_a),
            (&mut self.g_b, p.g_b),
            (&mut self.kappa_a, p.kappa_a),
            (&mut self.kappa_b, p.kappa_b),
            (&mut self.kappa_s, p.kappa_s),
            (&mut self.gamma, p.gamma),
            (&mut self.delta, p.delta),
        ];
        for (slot, v) in fields {
            if let Some(v) = v {
                *slot = v;
            }
        }
        if p.detunings.is_some() {
            self.detunings = p.detunings;
        }
        if let Some(v) = p.spont_variant {
            self.spont_variant = v;
        }
        if let Some(v) = p.input {
            self.input = v;
        }
        if let Some(v) = p.qd_initial_level {
            self.qd_initial_level = v;
        }
        if let Some(v) = p.qd_present {
            self.qd_present = v;
        }
    }

    /// Sets one sweep coordinate.
    pub fn set(&mut self, param: SweepParam, v: f64) -> Result<(), RunError> {
        let bad = |msg: &str| RunError::config(param.name(), msg);
        match param {
            SweepParam::G => {
                self.g_a = v;
                self.g_b = v;
            }
            SweepParam::GA => self.g_a = v,
            SweepParam::GB => self.g_b = v,
            SweepParam::Kappa => {
                self.kappa_a = v;
                self.kappa_b = v;
            }
            SweepParam::KappaA => self.kappa_a = v,
            SweepParam::KappaB => self.kappa_b = v,
            SweepParam::KappaOverG => {
                self.kappa_a = v * self.g_a;
                self.kappa_b = v * self.g_b;
            }
            SweepParam::KappaAOverG => self.kappa_a = v * self.g_a,
            SweepParam::KappaBOverG => self.kappa_b = v * self.g_b,
            SweepParam::KappaS => self.kappa_s = v,
            SweepParam::Gamma => self.gamma = v,
            SweepParam::Delta => self.delta = v,
            SweepParam::NbarIn => self.input = InputConfig::Coherent(v),
            SweepParam::FockN => {
                if v < 0.0 || v.fract() != 0.0 {
                    return Err(bad("Fock photon number must be a non-negative integer"));
                }
                self.input = InputConfig::Fock(v as usize);
            }
            SweepParam::QdPresent => {
                self.qd_present = match v {
                    0.0 => false,
                    1.0 => true,
                    _ => return Err(bad("qd_present takes the values 0 or 1")),
                }
            }
        }
        Ok(())
    }

    pub fn to_system(&self) -> SystemParams {
        let w = ghz_to_angular;
        let mut p = SystemParams::resonant(
            w(self.g_a),
            w(self.kappa_a),
            w(self.kappa_s),
            w(self.gamma),
            w(self.delta),
            self.input.into(),
        );
        p.g_b = w(self.g_b);
        p.kappa_b = w(self.kappa_b);
        p.spont_variant = self.spont_variant.into();
        p.qd_initial_level = self.qd_initial_level;
        p.qd_present = self.qd_present;
        let d = match self.detunings {
            Some(d) => Detunings {
                omega_s: w(d.omega_s),
                omega_a: w(d.omega_a),
                omega_b: w(d.omega_b),
                omega_12: w(d.omega_12),
                omega_13: w(d.omega_13),
                omega_14: w(d.omega_14),
            },
            None => resonant_preset(w(self.delta)),
        };
        p.set_detunings(d);
        p
    }

    fn validate(&self, long_running: bool) -> Result<(), RunError> {
        let rates = [
            ("g_a", self.g_a),
            ("g_b", self.g_b),
            ("kappa_a", self.kappa_a),
            ("kappa_b", self.kappa_b),
            ("kappa_s", self.kappa_s),
            ("gamma", self.gamma),
        ];
        for (name, v) in rates {
            if !v.is_finite() || v < 0.0 {
                return Err(RunError::config(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !(self.kappa_s > 0.0) {
            return Err(RunError::config("kappa_s", "must be positive"));
        }
        if self.qd_present {
            for (name, v) in [
                ("g_a", self.g_a),
                ("g_b", self.g_b),
                ("kappa_a", self.kappa_a),
                ("kappa_b", self.kappa_b),
            ] {
                if !(v > 0.0) {
                    return Err(RunError::config(name, "must be positive when the dot is present"));
                }
            }
        }
        if !self.delta.is_finite() {
            return Err(RunError::config("delta", "must be finite"));
        }
        if let InputConfig::Coherent(nbar) = self.input {
            if !(nbar.is_finite() && nbar >= 0.0) {
                return Err(RunError::config(
                    "input",
                    format!("coherent mean must be finite and >= 0, got {nbar}"),
                ));
            }
            if nbar > DESK_NBAR_CAP && !long_running {
                return Err(RunError::config(
                    "input",
                    format!("coherent mean {nbar} exceeds {DESK_NBAR_CAP}; set long_running to allow it"),
                ));
            }
        }
        self.to_system()
            .validate()
            .map_err(|e| RunError::config("params", e.to_string()))
    }
}

/// Fully resolved experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub name: String,
    pub preset: Option<Preset>,
    pub base: PointParams,
    pub truncations: Option<TruncationConfig>,
    pub n_traj: usize,
    pub master_seed: u64,
    /// Not echoed into result files, which must not depend on it.
    #[serde(skip)]
    pub workers: usize,
    pub controls: ControlsConfig,
    pub sweep: Vec<SweepAxis>,
    pub oracle: OracleMode,
    pub truncation_check: Option<bool>,
    pub bootstrap_resamples: usize,
    pub long_running: bool,
}

/// One point of the cartesian sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub coords: Vec<(SweepParam, f64)>,
    pub params: PointParams,
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

/// `lo, lo+step, …` up to `hi` inclusive (within round-off).
pub fn linspace_step(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

fn axis(param: SweepParam, values: Vec<f64>) -> SweepAxis {
    SweepAxis { param, values }
}

struct PresetDefaults {
    input: InputConfig,
    sweep: Vec<SweepAxis>,
    n_traj: usize,
}

fn preset_defaults(preset: Preset, long_running: bool) -> PresetDefaults {
    let kappa_log = logspace(1.0, 1000.0, 13);
    let mut nbar = vec![0.5, 1.0, 2.0, 3.0, 4.0, 5.0];
    if long_running {
        nbar.extend([8.0, 12.0]);
    }
    let on_off = vec![1.0, 0.0];
    match preset {
        Preset::Fig2 => PresetDefaults {
            input: InputConfig::Fock(1),
            sweep: vec![
                axis(SweepParam::KappaAOverG, logspace(0.1, 10.0, 21)),
                axis(SweepParam::KappaBOverG, logspace(0.1, 10.0, 21)),
            ],
            n_traj: DEFAULT_N_TRAJ,
        },
        Preset::Fig3a => PresetDefaults {
            input: InputConfig::Fock(1),
            sweep: vec![
                axis(SweepParam::G, linspace_step(5.0, 30.0, 5.0)),
                axis(SweepParam::Kappa, kappa_log),
            ],
            n_traj: DEFAULT_N_TRAJ,
        },
        Preset::Fig3b => PresetDefaults {
            input: InputConfig::Fock(1),
            sweep: vec![
                axis(SweepParam::Gamma, linspace_step(0.05, 1.05, 0.2)),
                axis(SweepParam::Kappa, kappa_log),
            ],
            n_traj: DEFAULT_N_TRAJ,
        },
        Preset::Fig4 => PresetDefaults {
            input: InputConfig::Fock(2),
            sweep: vec![
                axis(SweepParam::KappaOverG, vec![1.0, 2.0, 3.0, 4.0]),
                axis(SweepParam::Delta, linspace_step(0.0, 40.0, 2.5)),
            ],
            n_traj: DEFAULT_N_TRAJ,
        },
        Preset::Fig5 => PresetDefaults {
            input: InputConfig::Coherent(1.0),
            sweep: vec![axis(SweepParam::QdPresent, on_off), axis(SweepParam::NbarIn, nbar)],
            n_traj: DEFAULT_N_TRAJ,
        },
        Preset::Fig6 => PresetDefaults {
            input: InputConfig::Coherent(1.0),
            sweep: vec![axis(SweepParam::QdPresent, on_off), axis(SweepParam::NbarIn, nbar)],
            n_traj: DEFAULT_G2_N_TRAJ,
        },
        Preset::Fig7 => {
            let mut values = vec![2.0, 5.0];
            if long_running {
                values.push(12.0);
            }
            PresetDefaults {
                input: InputConfig::Coherent(2.0),
                sweep: vec![axis(SweepParam::QdPresent, on_off), axis(SweepParam::NbarIn, values)],
                n_traj: DEFAULT_N_TRAJ,
            }
        }
    }
}

fn kind_name(input: InputConfig) -> &'static str {
    match input {
        InputConfig::Fock(_) => "fock",
        InputConfig::Coherent(_) => "coherent",
    }
}

fn same_kind(a: InputConfig, b: InputConfig) -> bool {
    matches!(
        (a, b),
        (InputConfig::Fock(_), InputConfig::Fock(_)) | (InputConfig::Coherent(_), InputConfig::Coherent(_))
    )
}

/// Parses and validates a JSON config, filling every default.
pub fn parse_config(text: &str) -> Result<Experiment, RunError> {
    let raw: ExperimentConfig = serde_json::from_str(text).map_err(|e| RunError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    resolve(raw).map_err(|e| match e {
        RunError::Config { field, message, .. } => {
            let line = locate_key(text, &field);
            RunError::Config { field, message, line }
        }
        other => other,
    })
}

/// 1-based line of the first occurrence of the last segment of `field` as a
/// JSON key.
fn locate_key(text: &str, field: &str) -> Option<usize> {
    let key = format!("\"{}\"", field.rsplit('.').next()?);
    text.lines().position(|l| l.contains(&key)).map(|i| i + 1)
}

pub fn resolve(raw: ExperimentConfig) -> Result<Experiment, RunError> {
    let mut base = PointParams::benchmark();
    let mut sweep = Vec::new();
    let mut n_traj = DEFAULT_N_TRAJ;
    if let Some(preset) = raw.preset {
        let d = preset_defaults(preset, raw.long_running);
        if let Some(input) = raw.params.input {
            if !same_kind(input, d.input) {
                return Err(RunError::config(
                    "params.input",
                    format!("preset {} needs a {} input", preset.name(), kind_name(d.input)),
                ));
            }
        }
        base.input = d.input;
        sweep = d.sweep;
        n_traj = d.n_traj;
    }
    base.merge(&raw.params);
    if let Some(s) = raw.sweep {
        sweep = s;
    }
    for ax in &sweep {
        if ax.values.is_empty() {
            return Err(RunError::config(ax.param.name(), "sweep axis has no values"));
        }
        if let Some(v) = ax.values.iter().find(|v| !v.is_finite()) {
            return Err(RunError::config(ax.param.name(), format!("non-finite sweep value {v}")));
        }
    }
    if let Some(t) = raw.truncations {
        for (name, d) in [("source", t.source), ("mode_a", t.mode_a), ("mode_b", t.mode_b)] {
            if d < 2 {
                return Err(RunError::config(name, format!("truncation {d} is below 2")));
            }
        }
    }
    let c = raw.controls;
    for (name, v) in [
        ("t_end", c.t_end),
        ("dt_max", c.dt_max),
        ("jump_time_tol", c.jump_time_tol),
    ] {
        if let Some(v) = v {
            if !(v.is_finite() && v > 0.0) {
                return Err(RunError::config(name, format!("must be finite and positive, got {v}")));
            }
        }
    }
    for (name, v) in [
        ("norm_floor", c.norm_floor),
        ("residual_tolerance", c.residual_tolerance),
    ] {
        if let Some(v) = v {
            if !(v.is_finite() && v >= 0.0) {
                return Err(RunError::config(name, format!("must be finite and >= 0, got {v}")));
            }
        }
    }
    if c.coarse_steps == Some(0) {
        return Err(RunError::config("coarse_steps", "must be positive"));
    }
    let exp = Experiment {
        name: raw
            .name
            .or_else(|| raw.preset.map(|p| p.name().to_string()))
            .unwrap_or_else(|| "results".to_string()),
        preset: raw.preset,
        base,
        truncations: raw.truncations,
        n_traj: raw.n_traj.unwrap_or(n_traj),
        master_seed: raw.master_seed.unwrap_or(DEFAULT_SEED),
        workers: raw.workers.unwrap_or(0),
        controls: raw.controls,
        sweep,
        oracle: raw.oracle.unwrap_or(OracleMode::Auto),
        truncation_check: raw.truncation_check,
        bootstrap_resamples: raw
            .bootstrap_resamples
            .unwrap_or(subtractor_core::observables::BOOTSTRAP_RESAMPLES),
        long_running: raw.long_running,
    };
    if exp.n_traj == 0 {
        return Err(RunError::config("n_traj", "must be at least 1"));
    }
    // every point must be valid before any work starts
    for point in exp.points()? {
        point
            .params
            .validate(exp.long_running)
            .map_err(|e| e.at(&point.coords))?;
    }
    Ok(exp)
}

impl Experiment {
    pub fn from_preset(preset: Preset) -> Result<Self, RunError> {
        resolve(ExperimentConfig {
            preset: Some(preset),
            ..ExperimentConfig::default()
        })
    }

    /// Cartesian product of the sweep axes, first axis slowest.
    pub fn points(&self) -> Result<Vec<SweepPoint>, RunError> {
        let mut points = vec![SweepPoint {
            coords: Vec::new(),
            params: self.base,
        }];
        for ax in &self.sweep {
            let mut next = Vec::with_capacity(points.len() * ax.values.len());
            for p in &points {
                for &v in &ax.values {
                    let mut q = p.clone();
                    q.params.set(ax.param, v)?;
                    q.coords.push((ax.param, v));
                    next.push(q);
                }
            }
            points = next;
        }
        Ok(points)
    }

    pub fn axis_names(&self) -> Vec<&'static str> {
        self.sweep.iter().map(|a| a.param.name()).collect()
    }

    /// Truncations for one point: the configured ones or the input rule.
    pub fn truncations_for(&self, params: &SystemParams) -> Truncations {
        match self.truncations {
            Some(t) => Truncations {
                source: t.source,
                mode_a: t.mode_a,
                mode_b: t.mode_b,
            },
            None => Truncations::for_input(&params.input),
        }
    }

    /// Command-line overrides; revalidates the result.
    pub fn with_overrides(mut self, o: &Overrides) -> Result<Self, RunError> {
        if let Some(v) = o.seed {
            self.master_seed = v;
        }
        if let Some(v) = o.n_traj {
            if v == 0 {
                return Err(RunError::config("traj", "must be at least 1"));
            }
            self.n_traj = v;
        }
        if let Some(v) = o.workers {
            self.workers = v;
        }
        if let Some(v) = o.oracle {
            self.oracle = v;
        }
        if let Some(v) = o.spont_variant {
            self.base.spont_variant = v;
        }
        if o.long_running && !self.long_running {
            self.long_running = true;
            if let Some(preset) = self.preset {
                let d = preset_defaults(preset, true);
                if self.sweep == preset_defaults(preset, false).sweep {
                    self.sweep = d.sweep;
                }
            }
        }
        for point in self.points()? {
            point
                .params
                .validate(self.long_running)
                .map_err(|e| e.at(&point.coords))?;
        }
        Ok(self)
    }
}

/// Values given on the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub n_traj: Option<usize>,
    pub workers: Option<usize>,
    pub oracle: Option<OracleMode>,
    pub spont_variant: Option<SpontVariantConfig>,
    pub long_running: bool,
}
