//! Effective Hamiltonian, collapse channels and initial states of the
//! cascaded source → dot-in-bimodal-cavity system.
//!
//! Dot levels: |1⟩=|↑⟩ and |2⟩=|↓⟩ are the ground states, |3⟩=|↑↓↑⟩ and
//! |4⟩=|↑↓↓⟩ the trion states. Mode-a (V) drives 1↔3 and 2↔4, mode-b (H)
//! drives 2↔3 and 1↔4.
//!
//! All frequencies are detunings in a frame co-rotating with the input
//! carrier, in rad/ns.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

// unused when a dependency links std
#[allow(unused_imports)]
use num_traits::Float;

use crate::operator::Operator;
use crate::space::{Slot, SpaceLayout};
use crate::state::{coherent_state_factor, coherent_truncation, StateVector};
use crate::{Error, Result, C64};

/// Bohr magneton over the reduced Planck constant, in rad/(ns·T).
const BOHR_MAGNETON_OVER_HBAR: f64 = 9.274_010_078_3e-24 / 1.054_571_817e-34 * 1e-9;

/// Zeeman splitting μ_B·g·B/ħ in rad/ns.
pub fn zeeman_splitting(g_factor: f64, field_tesla: f64) -> Result<f64> {
    if !(field_tesla >= 0.0) || !field_tesla.is_finite() {
        return Err(Error::InvalidInput(format!(
            "magnetic field must be finite and non-negative, got {field_tesla}"
        )));
    }
    if !g_factor.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite g-factor {g_factor}")));
    }
    Ok(BOHR_MAGNETON_OVER_HBAR * g_factor * field_tesla)
}

/// Zeeman splitting μ_B·g·B/h in Hz.
pub fn zeeman_splitting_hz(g_factor: f64, field_tesla: f64) -> Result<f64> {
    Ok(zeeman_splitting(g_factor, field_tesla)? * 1e9 / core::f64::consts::TAU)
}

/// Rotating-frame frequencies of every term of H_eff.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Detunings {
    pub omega_s: f64,
    pub omega_a: f64,
    pub omega_b: f64,
    pub omega_12: f64,
    pub omega_13: f64,
    pub omega_14: f64,
}

/// On-resonance assignment ω_s = ω_a = ω_13 = 0, ω_b = ω_14 = −δ,
/// ω_12 = +δ.
///
/// The signs follow the level diagram: E₂ − E₁ = δ_h and E₃ − E₄ = δ_e with
/// δ_h = δ_e = δ, so the two inner transitions 2↔3 and 1↔4 share the
/// mode-b frequency −δ while the outer transition 2↔4 sits at −2δ.
pub fn resonant_preset(delta: f64) -> Detunings {
    Detunings {
        omega_s: 0.0,
        omega_a: 0.0,
        omega_b: -delta,
        omega_12: delta,
        omega_13: 0.0,
        omega_14: -delta,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpontVariant {
    /// √γ σ₃₃ and √γ σ₄₄: excitation-conserving projector jumps.
    LiteralProjector,
    /// √(γ/2) σ₁₃, √(γ/2) σ₂₃, √(γ/2) σ₁₄, √(γ/2) σ₂₄: radiative decay.
    RadiativeLowering,
}

/// Photon state loaded into the source cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InputSpec {
    Fock(usize),
    /// Coherent state with real amplitude √n̄.
    Coherent(f64),
}

impl InputSpec {
    pub fn mean_photons(&self) -> f64 {
        match *self {
            InputSpec::Fock(n) => n as f64,
            InputSpec::Coherent(nbar) => nbar,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Channel {
    OutA,
    OutB,
    /// Spontaneous channel, numbered from 1.
    Spont(u8),
}

impl Channel {
    pub fn label(&self) -> String {
        format!("{self}")
    }

    pub fn is_cavity(&self) -> bool {
        matches!(self, Channel::OutA | Channel::OutB)
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Channel::OutA => f.write_str("OutA"),
            Channel::OutB => f.write_str("OutB"),
            Channel::Spont(k) => write!(f, "Spont{k}"),
        }
    }
}

/// Physical parameters. Rates and frequencies in rad/ns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub g_a: f64,
    pub g_b: f64,
    pub kappa_a: f64,
    pub kappa_b: f64,
    pub kappa_s: f64,
    pub gamma: f64,
    pub omega_s: f64,
    pub omega_a: f64,
    pub omega_b: f64,
    pub omega_12: f64,
    pub omega_13: f64,
    pub omega_14: f64,
    pub delta: f64,
    pub spont_variant: SpontVariant,
    pub input: InputSpec,
    /// Initial dot level, 1..=4.
    pub qd_initial_level: usize,
    pub qd_present: bool,
}

impl SystemParams {
    /// Symmetric on-resonance parameter set: g_a = g_b = g,
    /// κ_a = κ_b = κ, frequencies from [`resonant_preset`], dot in |↑⟩.
    pub fn resonant(g: f64, kappa: f64, kappa_s: f64, gamma: f64, delta: f64, input: InputSpec) -> Self {
        let mut p = Self {
            g_a: g,
            g_b: g,
            kappa_a: kappa,
            kappa_b: kappa,
            kappa_s,
            gamma,
            omega_s: 0.0,
            omega_a: 0.0,
            omega_b: 0.0,
            omega_12: 0.0,
            omega_13: 0.0,
            omega_14: 0.0,
            delta,
            spont_variant: SpontVariant::LiteralProjector,
            input,
            qd_initial_level: 1,
            qd_present: true,
        };
        p.set_detunings(resonant_preset(delta));
        p
    }

    pub fn set_detunings(&mut self, d: Detunings) {
        self.omega_s = d.omega_s;
        self.omega_a = d.omega_a;
        self.omega_b = d.omega_b;
        self.omega_12 = d.omega_12;
        self.omega_13 = d.omega_13;
        self.omega_14 = d.omega_14;
    }

    pub fn detunings(&self) -> Detunings {
        Detunings {
            omega_s: self.omega_s,
            omega_a: self.omega_a,
            omega_b: self.omega_b,
            omega_12: self.omega_12,
            omega_13: self.omega_13,
            omega_14: self.omega_14,
        }
    }

    /// ω_s = ω_a = ω_13, ω_b = ω_14 and ω_12 = δ.
    pub fn is_resonant(&self) -> bool {
        self.omega_s == self.omega_a
            && self.omega_a == self.omega_13
            && self.omega_b == self.omega_14
            && self.omega_12 == self.delta
    }

    pub fn validate(&self) -> Result<()> {
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
                return Err(Error::InvalidInput(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if !(self.kappa_s > 0.0) {
            return Err(Error::InvalidInput("kappa_s must be positive".into()));
        }
        let freqs = [
            ("omega_s", self.omega_s),
            ("omega_a", self.omega_a),
            ("omega_b", self.omega_b),
            ("omega_12", self.omega_12),
            ("omega_13", self.omega_13),
            ("omega_14", self.omega_14),
            ("delta", self.delta),
        ];
        for (name, v) in freqs {
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!("{name} must be finite, got {v}")));
            }
        }
        if !(1..=4).contains(&self.qd_initial_level) {
            return Err(Error::InvalidLevel(self.qd_initial_level));
        }
        match self.input {
            InputSpec::Coherent(nbar) if !(nbar >= 0.0 && nbar.is_finite()) => Err(Error::InvalidInput(format!(
                "coherent mean photon number must be finite and >= 0, got {nbar}"
            ))),
            _ => Ok(()),
        }
    }

    /// Largest rate among κ_a, κ_b, κ_s, γ.
    pub fn kappa_max(&self) -> f64 {
        [self.kappa_a, self.kappa_b, self.kappa_s, self.gamma]
            .into_iter()
            .fold(0.0, f64::max)
    }

    pub fn g_max(&self) -> f64 {
        if self.qd_present {
            self.g_a.max(self.g_b)
        } else {
            0.0
        }
    }

    pub fn omega_max(&self) -> f64 {
        [
            self.omega_s,
            self.omega_a,
            self.omega_b,
            self.omega_12,
            self.omega_13,
            self.omega_14,
        ]
        .into_iter()
        .fold(0.0, |m, w| m.max(w.abs()))
    }
}

/// Fock-space sizes of the three bosonic factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Truncations {
    pub source: usize,
    pub mode_a: usize,
    pub mode_b: usize,
}

/// Default Fock-space size of the target-cavity modes for coherent input.
/// Both modes are strongly damped relative to the pulse rate, so their
/// occupation stays far below one photon.
pub const COHERENT_TARGET_MODE_DIM: usize = 4;

impl Truncations {
    /// Fock(n): n+1 levels everywhere. Coherent(n̄): the source gets
    /// ⌈n̄ + 6√n̄ + 6⌉ levels and the target modes
    /// [`COHERENT_TARGET_MODE_DIM`].
    pub fn for_input(input: &InputSpec) -> Self {
        match *input {
            InputSpec::Fock(n) => {
                let d = (n + 1).max(2);
                Self {
                    source: d,
                    mode_a: d,
                    mode_b: d,
                }
            }
            InputSpec::Coherent(nbar) => Self {
                source: coherent_truncation(nbar),
                mode_a: COHERENT_TARGET_MODE_DIM,
                mode_b: COHERENT_TARGET_MODE_DIM,
            },
        }
    }

    pub fn widened(&self, extra: usize) -> Self {
        Self {
            source: self.source + extra,
            mode_a: self.mode_a + extra,
            mode_b: self.mode_b + extra,
        }
    }

    pub fn layout(&self, qd_present: bool) -> Result<SpaceLayout> {
        SpaceLayout::cascaded(self.source, self.mode_a, self.mode_b, qd_present)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollapseChannel {
    pub channel: Channel,
    pub op: Operator,
    /// Whether a jump removes one excitation (an emitted photon).
    pub lowers_excitation: bool,
}

/// Everything the trajectory engine and the oracle need.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelOperators {
    pub params: SystemParams,
    pub layout: SpaceLayout,
    pub h_eff: Operator,
    pub collapse: Vec<CollapseChannel>,
    /// N̂ = â_s†â_s + â†â + b̂†b̂ + σ₃₃ + σ₄₄.
    pub number_op: Operator,
    pub initial_state: StateVector,
}

impl ModelOperators {
    /// Σ_k C_k†C_k.
    pub fn total_decay(&self) -> Result<Operator> {
        let mut acc = Operator::zero(self.layout.clone());
        for c in &self.collapse {
            acc = acc.add(&c.op.dagger().compose(&c.op)?)?;
        }
        Ok(acc)
    }

    pub fn channel_index(&self, channel: Channel) -> Option<usize> {
        self.collapse.iter().position(|c| c.channel == channel)
    }
}

struct Ladder {
    source: Operator,
    mode_a: Operator,
    mode_b: Operator,
}

fn ladder(layout: &SpaceLayout) -> Result<Ladder> {
    let op = |slot: Slot| Operator::annihilation(layout.factor_dim(slot.index()))?.embed(slot.index(), layout);
    Ok(Ladder {
        source: op(Slot::Source)?,
        mode_a: op(Slot::ModeA)?,
        mode_b: op(Slot::ModeB)?,
    })
}

fn sigma(i: usize, j: usize, layout: &SpaceLayout) -> Result<Operator> {
    Operator::transition(i, j)?.embed(Slot::Dot.index(), layout)
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn check_layout(params: &SystemParams, layout: &SpaceLayout) -> Result<()> {
    if !layout.is_cascaded() {
        return Err(Error::Layout(format!(
            "expected (source, mode-a, mode-b, dot) factors, got {:?}",
            layout.factor_dims()
        )));
    }
    if layout.has_dot() != params.qd_present {
        return Err(Error::Layout(format!(
            "dot factor of dimension {} inconsistent with qd_present = {}",
            layout.factor_dim(Slot::Dot.index()),
            params.qd_present
        )));
    }
    for slot in [Slot::Source, Slot::ModeA, Slot::ModeB] {
        let d = layout.factor_dim(slot.index());
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
    }
    Ok(())
}

/// Builds H_eff, the collapse channels, N̂ and the initial state.
pub fn build_model(params: &SystemParams, layout: &SpaceLayout) -> Result<ModelOperators> {
    params.validate()?;
    check_layout(params, layout)?;
    let Ladder {
        source: a_s,
        mode_a: a,
        mode_b: b,
    } = ladder(layout)?;
    let (a_s_d, a_d, b_d) = (a_s.dagger(), a.dagger(), b.dagger());
    let n_s = a_s_d.compose(&a_s)?;
    let n_a = a_d.compose(&a)?;
    let n_b = b_d.compose(&b)?;
    let p = params;
    let i = C64::new(0.0, 1.0);

    let mut terms: Vec<(C64, Operator)> = vec![
        (re(p.omega_a) - i * (p.kappa_a / 2.0), n_a.clone()),
        (re(p.omega_b) - i * (p.kappa_b / 2.0), n_b.clone()),
        (re(p.omega_s) - i * (p.kappa_s / 2.0), n_s.clone()),
        (-i * (p.kappa_a * p.kappa_s).sqrt(), a_d.compose(&a_s)?),
    ];
    let mut number_terms = vec![n_s, n_a, n_b];
    let mut collapse = vec![
        CollapseChannel {
            channel: Channel::OutA,
            op: Operator::linear_combination(layout, &[(re(p.kappa_s.sqrt()), &a_s), (re(p.kappa_a.sqrt()), &a)])?,
            lowers_excitation: true,
        },
        CollapseChannel {
            channel: Channel::OutB,
            op: b.scale(re(p.kappa_b.sqrt())),
            lowers_excitation: true,
        },
    ];

    if p.qd_present {
        let s = |i, j| sigma(i, j, layout);
        // ĝ couplings: mode-a on 1↔3 and 2↔4, mode-b on 2↔3 and 1↔4
        let couplings = [
            (p.g_a, &a, &a_d, 3, 1),
            (p.g_b, &b, &b_d, 3, 2),
            (p.g_a, &a, &a_d, 4, 2),
            (p.g_b, &b, &b_d, 4, 1),
        ];
        for (g, lower, raise, upper, ground) in couplings {
            terms.push((re(g), lower.compose(&s(upper, ground)?)?));
            terms.push((re(g), raise.compose(&s(ground, upper)?)?));
        }
        let s33 = s(3, 3)?;
        let s44 = s(4, 4)?;
        terms.push((re(p.omega_13) - i * (p.gamma / 2.0), s33.clone()));
        terms.push((re(p.omega_14) - i * (p.gamma / 2.0), s44.clone()));
        terms.push((re(p.omega_12), s(2, 2)?));
        number_terms.push(s33.clone());
        number_terms.push(s44.clone());

        match p.spont_variant {
            SpontVariant::LiteralProjector => {
                let rate = re(p.gamma.sqrt());
                for (k, proj) in [(1, s33), (2, s44)] {
                    collapse.push(CollapseChannel {
                        channel: Channel::Spont(k),
                        op: proj.scale(rate),
                        lowers_excitation: false,
                    });
                }
            }
            SpontVariant::RadiativeLowering => {
                let rate = re((p.gamma / 2.0).sqrt());
                for (k, (lo, hi)) in [(1, 3), (2, 3), (1, 4), (2, 4)].into_iter().enumerate() {
                    collapse.push(CollapseChannel {
                        channel: Channel::Spont(k as u8 + 1),
                        op: s(lo, hi)?.scale(rate),
                        lowers_excitation: true,
                    });
                }
            }
        }
    }

    let term_refs: Vec<(C64, &Operator)> = terms.iter().map(|(c, o)| (*c, o)).collect();
    let h_eff = Operator::linear_combination(layout, &term_refs)?;
    let number_refs: Vec<(C64, &Operator)> = number_terms.iter().map(|o| (re(1.0), o)).collect();
    let number_op = Operator::linear_combination(layout, &number_refs)?;
    let initial = initial_state(params, layout)?;
    Ok(ModelOperators {
        params: *params,
        layout: layout.clone(),
        h_eff,
        collapse,
        number_op,
        initial_state: initial,
    })
}

/// Source in the input state, both target modes empty, dot in
/// `qd_initial_level`.
pub fn initial_state(params: &SystemParams, layout: &SpaceLayout) -> Result<StateVector> {
    check_layout(params, layout)?;
    let ds = layout.factor_dim(Slot::Source.index());
    let source = match params.input {
        InputSpec::Fock(n) => {
            if n >= ds {
                return Err(Error::Truncation {
                    slot: Slot::Source.index(),
                    occupation: n,
                    dim: ds,
                });
            }
            let mut v = vec![C64::new(0.0, 0.0); ds];
            v[n] = re(1.0);
            v
        }
        InputSpec::Coherent(nbar) => coherent_state_factor(ds, re(nbar.sqrt()))?,
    };
    let vacuum = |d: usize| {
        let mut v = vec![C64::new(0.0, 0.0); d];
        v[0] = re(1.0);
        v
    };
    let dot_dim = layout.factor_dim(Slot::Dot.index());
    let mut dot = vec![C64::new(0.0, 0.0); dot_dim];
    dot[if params.qd_present {
        params.qd_initial_level - 1
    } else {
        0
    }] = re(1.0);
    StateVector::product(
        layout.clone(),
        &[
            source,
            vacuum(layout.factor_dim(Slot::ModeA.index())),
            vacuum(layout.factor_dim(Slot::ModeB.index())),
            dot,
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{angular_to_ghz, ghz_to_angular};

    fn benchmark(input: InputSpec) -> SystemParams {
        SystemParams::resonant(
            ghz_to_angular(10.0),
            ghz_to_angular(20.0),
            ghz_to_angular(0.05),
            ghz_to_angular(0.25),
            ghz_to_angular(25.0),
            input,
        )
    }

    #[test]
    fn zeeman_examples() {
        assert_eq!(zeeman_splitting(0.0, 7.0).unwrap(), 0.0);
        let hz = zeeman_splitting_hz(0.4287, 5.0).unwrap();
        assert!((hz / 1e9 - 30.0).abs() < 0.05, "{hz}");
        let full = zeeman_splitting(0.4287, 5.0).unwrap();
        let half = zeeman_splitting(0.4287, 2.5).unwrap();
        assert!((half / full - 0.5).abs() < 1e-12);
        assert!(zeeman_splitting(0.4287, -1.0).is_err());
    }

    #[test]
    fn resonant_preset_signs() {
        let zero = resonant_preset(0.0);
        assert_eq!(
            zero,
            Detunings {
                omega_s: 0.0,
                omega_a: 0.0,
                omega_b: -0.0,
                omega_12: 0.0,
                omega_13: 0.0,
                omega_14: -0.0
            }
        );
        let d = resonant_preset(ghz_to_angular(25.0));
        assert!((angular_to_ghz(d.omega_12) - 25.0).abs() < 1e-12);
        assert!((angular_to_ghz(d.omega_14) + 25.0).abs() < 1e-12);
        let p = benchmark(InputSpec::Fock(1));
        assert!(p.is_resonant());
    }

    #[test]
    fn fock_initial_state_index() {
        let p = benchmark(InputSpec::Fock(1));
        let layout = Truncations::for_input(&p.input).layout(true).unwrap();
        let psi = initial_state(&p, &layout).unwrap();
        let idx = layout.index_of(&[1, 0, 0, 0]).unwrap();
        assert_eq!(psi.amplitudes()[idx], re(1.0));
        assert!((psi.norm_sq() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coherent_vacuum_initial_state() {
        let p = benchmark(InputSpec::Coherent(0.0));
        let layout = Truncations::for_input(&p.input).layout(true).unwrap();
        let psi = initial_state(&p, &layout).unwrap();
        assert_eq!(psi.amplitudes()[0], re(1.0));
    }

    #[test]
    fn coherent_initial_mean() {
        let p = benchmark(InputSpec::Coherent(2.0));
        let layout = Truncations::for_input(&p.input).layout(true).unwrap();
        let model = build_model(&p, &layout).unwrap();
        let a_s = Operator::annihilation(layout.factor_dim(0))
            .unwrap()
            .embed(0, &layout)
            .unwrap();
        let n_s = a_s.dagger().compose(&a_s).unwrap();
        let mean = model.initial_state.expectation(&n_s).unwrap().re;
        // oracle: Σ n p_n over the truncated Poisson weights
        let d = layout.factor_dim(0);
        let mut p_n = (-2.0f64).exp();
        let (mut z, mut m) = (p_n, 0.0);
        for n in 1..d {
            p_n *= 2.0 / n as f64;
            z += p_n;
            m += n as f64 * p_n;
        }
        assert!((mean - m / z).abs() < 1e-12);
        assert!((mean - 2.0).abs() < 1e-9);
    }

    #[test]
    fn layout_must_match_dot_presence() {
        let p = benchmark(InputSpec::Fock(1));
        let layout = Truncations::for_input(&p.input).layout(false).unwrap();
        assert!(matches!(build_model(&p, &layout), Err(Error::Layout(_))));
    }

    #[test]
    fn negative_rate_is_rejected() {
        let mut p = benchmark(InputSpec::Fock(1));
        p.kappa_a = -1.0;
        assert!(matches!(p.validate(), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn channel_labels() {
        assert_eq!(Channel::OutA.label(), "OutA");
        assert_eq!(Channel::Spont(3).label(), "Spont3");
    }
}
