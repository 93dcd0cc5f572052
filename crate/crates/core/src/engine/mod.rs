//! Monte-Carlo wavefunction integrator.
//!
//! Each trajectory evolves an unnormalised |ψ⟩ under d|ψ⟩/dt = −iH_eff|ψ⟩.
//! A uniform draw r ∈ (0,1) sets the jump threshold: when ‖ψ‖² falls to r
//! the crossing time is refined, a channel k is chosen with probability
//! ∝ ‖C_k ψ‖², the state is replaced by C_k ψ/‖C_k ψ‖ and a fresh r is
//! drawn. This repeats until `t_end`.
//!
//! Two integrators share that contract:
//!
//! * [`Integrator::Exponential`] (default) applies exact block propagators
//!   on a dyadic time ladder and refines crossings by bisection down the
//!   ladder, then by a Taylor expansion of the norm polynomial.
//! * [`Integrator::Rk4`] takes fixed RK4 steps of `dt_max` and bisects the
//!   last step.

mod propagator;
mod rk4;

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

// unused when a dependency links std
#[allow(unused_imports)]
use num_traits::Float;

use crate::dense::norm_sqr;
use crate::fingerprint::Fingerprinter;
use crate::model::{Channel, CollapseChannel, InputSpec, ModelOperators, SystemParams};
use crate::operator::Operator;
use crate::rng::StreamRng;
use crate::space::SpaceLayout;
use crate::state::StateVector;
use crate::{Error, Result, C64};

use propagator::{block_order, BlockPropagator};
use rk4::{rk4_step, Rk4Scratch};

/// Bisection iterations allowed when refining a jump time.
const MAX_BISECTIONS: usize = 60;
/// Relative slack for round-off in the norm-monotonicity check.
const NORM_GROWTH_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Integrator {
    /// Exact propagation; the horizon is covered by `coarse_steps` top-rung
    /// steps.
    Exponential { coarse_steps: u32 },
    /// Fixed-step RK4 with step `dt_max`.
    Rk4,
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator::Exponential { coarse_steps: 16 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Controls {
    /// Simulation horizon in ns.
    pub t_end: f64,
    /// RK4 step in ns.
    pub dt_max: f64,
    /// Jump times are refined until |‖ψ‖² − r| < jump_time_tol · r.
    pub jump_time_tol: f64,
    /// A norm below this without a pending threshold is an error.
    pub norm_floor: f64,
    /// Largest ⟨N̂⟩(t_end) for a trajectory to count as complete.
    pub residual_tolerance: f64,
    pub integrator: Integrator,
}

impl Controls {
    /// Horizon 10/κ_s, `dt_max` from [`default_dt_max`], exponential
    /// integrator.
    pub fn for_params(params: &SystemParams) -> Self {
        Self {
            t_end: 10.0 / params.kappa_s,
            dt_max: default_dt_max(params),
            jump_time_tol: 1e-10,
            norm_floor: 1e-14,
            residual_tolerance: 1e-3,
            integrator: Integrator::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.t_end > 0.0
            && self.t_end.is_finite()
            && self.dt_max > 0.0
            && self.dt_max.is_finite()
            && self.jump_time_tol > 0.0
            && self.norm_floor >= 0.0
            && self.residual_tolerance >= 0.0;
        if !ok {
            return Err(Error::InvalidInput(alloc::format!("invalid controls {self:?}")));
        }
        if let Integrator::Exponential { coarse_steps: 0 } = self.integrator {
            return Err(Error::InvalidInput("coarse_steps must be positive".into()));
        }
        Ok(())
    }
}

/// min(0.01/κ_max, 0.01/g_max, 0.05/|ω|_max), ignoring vanishing scales.
pub fn default_dt_max(params: &SystemParams) -> f64 {
    let candidates = [
        0.01 / params.kappa_max(),
        0.01 / params.g_max(),
        0.05 / params.omega_max(),
    ];
    let dt = candidates
        .into_iter()
        .filter(|v| v.is_finite())
        .fold(f64::INFINITY, f64::min);
    if dt.is_finite() {
        dt
    } else {
        10.0 / params.kappa_s / 1000.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    /// ns.
    pub time: f64,
    pub channel: Channel,
    /// ‖ψ‖² just before the jump (≈ the threshold draw).
    pub pre_jump_norm_sq: f64,
    /// ⟨N̂⟩ of the normalised post-jump state.
    pub excitation_after: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub jumps: Vec<JumpEvent>,
    /// ⟨N̂⟩ of the normalised state at `t_end`.
    pub residual_excitation: f64,
    pub seed_index: u64,
}

impl TrajectoryRecord {
    pub fn count(&self, channel: Channel) -> usize {
        self.jumps.iter().filter(|j| j.channel == channel).count()
    }

    pub fn cavity_jumps(&self) -> impl Iterator<Item = &JumpEvent> {
        self.jumps.iter().filter(|j| j.channel.is_cavity())
    }
}

/// Channel metadata carried alongside ensemble results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelInfo {
    pub channel: Channel,
    pub lowers_excitation: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRecord {
    /// Ordered by `seed_index`.
    pub trajectories: Vec<TrajectoryRecord>,
    pub n_traj: usize,
    pub master_seed: u64,
    pub fingerprint: u64,
    pub channels: Vec<ChannelInfo>,
    pub input: InputSpec,
    pub residual_tolerance: f64,
}

impl EnsembleRecord {
    /// Wraps trajectories (in any order) produced by [`Evolver::trajectory`].
    pub fn from_trajectories(evolver: &Evolver<'_>, mut trajectories: Vec<TrajectoryRecord>, master_seed: u64) -> Self {
        trajectories.sort_by_key(|t| t.seed_index);
        Self {
            n_traj: trajectories.len(),
            trajectories,
            master_seed,
            fingerprint: evolver.fingerprint(),
            channels: evolver.channel_info(),
            input: evolver.model.params.input,
            residual_tolerance: evolver.controls.residual_tolerance,
        }
    }
}

/// Reproducibility fingerprint of a run: parameters, truncations and
/// controls.
pub fn run_fingerprint(params: &SystemParams, layout: &SpaceLayout, controls: &Controls) -> u64 {
    let h = Fingerprinter::default()
        .params(params)
        .layout(layout)
        .f64(controls.t_end)
        .f64(controls.dt_max)
        .f64(controls.jump_time_tol)
        .f64(controls.norm_floor)
        .f64(controls.residual_tolerance);
    match controls.integrator {
        Integrator::Exponential { coarse_steps } => h.u64(0).u64(coarse_steps as u64),
        Integrator::Rk4 => h.u64(1),
    }
    .finish()
}

/// Picks channel k with probability fluxes[k] / Σ fluxes for a uniform
/// draw `u` ∈ (0,1).
pub fn pick_channel(fluxes: &[f64], u: f64) -> Result<usize> {
    let total: f64 = fluxes.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::NoJumpPossible);
    }
    let target = u * total;
    let mut cum = 0.0;
    let mut last_positive = 0;
    for (k, &f) in fluxes.iter().enumerate() {
        if f > 0.0 {
            cum += f;
            last_positive = k;
            if cum > target {
                return Ok(k);
            }
        }
    }
    Ok(last_positive)
}

/// Channel selection for `state` with the branching rule
/// P(k) = ⟨ψ|C_k†C_k|ψ⟩ / Σ_j ⟨ψ|C_j†C_j|ψ⟩.
pub fn select_jump_channel(state: &StateVector, collapse: &[CollapseChannel], u: f64) -> Result<Channel> {
    let mut buf = vec![C64::new(0.0, 0.0); state.amplitudes().len()];
    let mut fluxes = Vec::with_capacity(collapse.len());
    for c in collapse {
        state.layout().ensure_same(c.op.layout())?;
        c.op.apply_into(state.amplitudes(), &mut buf);
        fluxes.push(norm_sqr(&buf));
    }
    Ok(collapse[pick_channel(&fluxes, u)?].channel)
}

#[derive(Debug, Clone)]
enum Stepper {
    Exponential(BlockPropagator),
    Rk4,
}

/// Precomputed trajectory machinery for one model and set of controls.
/// Shareable across threads; each trajectory owns its own buffers.
#[derive(Debug, Clone)]
pub struct Evolver<'m> {
    model: &'m ModelOperators,
    controls: Controls,
    /// −i H_eff in block order.
    generator: Operator,
    collapse: Vec<Operator>,
    number: Operator,
    initial: Vec<C64>,
    stepper: Stepper,
    block_count: usize,
}

struct Workspace {
    cand: Vec<C64>,
    jump: Vec<Vec<C64>>,
    taylor: Vec<Vec<C64>>,
    rk4: Rk4Scratch,
    active: Vec<bool>,
    fluxes: Vec<f64>,
}

enum Advance {
    Reached,
    Crossed(f64),
}

impl<'m> Evolver<'m> {
    pub fn new(model: &'m ModelOperators, controls: Controls) -> Result<Self> {
        controls.validate()?;
        let (order, ranges) = block_order(&model.h_eff);
        let h = model.h_eff.permuted(&order);
        let generator = h.scale(C64::new(0.0, -1.0));
        let collapse = model.collapse.iter().map(|c| c.op.permuted(&order)).collect();
        let number = model.number_op.permuted(&order);
        let amps = model.initial_state.amplitudes();
        let initial = order.iter().map(|&old| amps[old]).collect();
        let block_count = ranges.len();
        let stepper = match controls.integrator {
            Integrator::Exponential { coarse_steps } => {
                Stepper::Exponential(BlockPropagator::new(&h, ranges, controls.t_end / coarse_steps as f64))
            }
            Integrator::Rk4 => Stepper::Rk4,
        };
        Ok(Self {
            model,
            controls,
            generator,
            collapse,
            number,
            initial,
            stepper,
            block_count,
        })
    }

    pub fn controls(&self) -> &Controls {
        &self.controls
    }

    pub fn model(&self) -> &ModelOperators {
        self.model
    }

    pub fn fingerprint(&self) -> u64 {
        run_fingerprint(&self.model.params, &self.model.layout, &self.controls)
    }

    pub fn channel_info(&self) -> Vec<ChannelInfo> {
        self.model
            .collapse
            .iter()
            .map(|c| ChannelInfo {
                channel: c.channel,
                lowers_excitation: c.lowers_excitation,
            })
            .collect()
    }

    fn workspace(&self) -> Workspace {
        let n = self.initial.len();
        let z = vec![C64::new(0.0, 0.0); n];
        Workspace {
            cand: z.clone(),
            jump: vec![z.clone(); self.collapse.len()],
            taylor: Vec::new(),
            rk4: Rk4Scratch::new(n),
            active: vec![true; self.block_count],
            fluxes: vec![0.0; self.collapse.len()],
        }
    }

    /// Trajectory `index` of the ensemble with master seed `master_seed`.
    pub fn trajectory(&self, master_seed: u64, index: u64) -> Result<TrajectoryRecord> {
        let mut rng = StreamRng::new(master_seed, index);
        self.trajectory_with_rng(&mut rng, index)
    }

    pub fn trajectory_with_rng(&self, rng: &mut StreamRng, seed_index: u64) -> Result<TrajectoryRecord> {
        let mut ws = self.workspace();
        let mut psi = self.initial.clone();
        let mut norm = norm_sqr(&psi);
        let mut t = 0.0;
        let mut threshold = rng.uniform_open();
        let mut jumps = Vec::new();
        let t_end = self.controls.t_end;
        if let Stepper::Exponential(p) = &self.stepper {
            p.active_blocks(&psi, &mut ws.active);
        }
        loop {
            let step = match &self.stepper {
                Stepper::Exponential(p) => {
                    self.advance_exponential(p, &mut psi, &mut norm, &mut t, t_end, threshold, &mut ws)?
                }
                Stepper::Rk4 => self.advance_rk4(&mut psi, &mut norm, &mut t, t_end, threshold, &mut ws)?,
            };
            let time = match step {
                Advance::Reached => break,
                Advance::Crossed(time) => time,
            };
            for (k, c) in self.collapse.iter().enumerate() {
                c.apply_into(&psi, &mut ws.jump[k]);
                ws.fluxes[k] = norm_sqr(&ws.jump[k]);
            }
            let k = pick_channel(&ws.fluxes, rng.uniform_open())?;
            let scale = 1.0 / ws.fluxes[k].sqrt();
            for (p, v) in psi.iter_mut().zip(&ws.jump[k]) {
                *p = v * scale;
            }
            let pre = norm;
            norm = norm_sqr(&psi);
            if !norm.is_finite() {
                return Err(Error::Divergence { time });
            }
            if let Stepper::Exponential(p) = &self.stepper {
                p.active_blocks(&psi, &mut ws.active);
            }
            jumps.push(JumpEvent {
                time,
                channel: self.model.collapse[k].channel,
                pre_jump_norm_sq: pre,
                excitation_after: self.number.braket(&psi).re / norm,
            });
            threshold = rng.uniform_open();
        }
        Ok(TrajectoryRecord {
            jumps,
            residual_excitation: self.number.braket(&psi).re / norm,
            seed_index,
        })
    }

    fn check_step(&self, time: f64, before: f64, after: f64) -> Result<()> {
        if !after.is_finite() {
            return Err(Error::Divergence { time });
        }
        if after > before * (1.0 + NORM_GROWTH_SLACK) {
            return Err(Error::NormIncrease { time, before, after });
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn advance_exponential(
        &self,
        prop: &BlockPropagator,
        psi: &mut Vec<C64>,
        norm: &mut f64,
        t: &mut f64,
        t_stop: f64,
        threshold: f64,
        ws: &mut Workspace,
    ) -> Result<Advance> {
        let mut level = 0;
        // time by which the norm is known to have reached the threshold
        let mut crossing_before: Option<f64> = None;
        loop {
            let limit = match crossing_before {
                Some(hi) => 0.5 * (hi - *t),
                None => t_stop - *t,
            };
            if crossing_before.is_none() && limit <= 0.0 {
                return Ok(Advance::Reached);
            }
            while level < prop.level_count() && prop.tau(level) > limit * (1.0 + 1e-9) {
                level += 1;
            }
            if level == prop.level_count() {
                let h = match crossing_before {
                    Some(hi) => hi - *t,
                    None => t_stop - *t,
                };
                match self.fine_stage(psi, norm, t, h, threshold, ws)? {
                    Advance::Crossed(time) => return Ok(Advance::Crossed(time)),
                    Advance::Reached if crossing_before.is_none() => {
                        *t = t_stop;
                        return Ok(Advance::Reached);
                    }
                    Advance::Reached => {
                        // round-off put the crossing just past `hi`
                        crossing_before = None;
                        level = 0;
                        continue;
                    }
                }
            }
            let tau = prop.tau(level);
            prop.apply(level, psi, &mut ws.cand, &ws.active);
            let n = norm_sqr(&ws.cand);
            self.check_step(*t, *norm, n)?;
            if n > threshold {
                core::mem::swap(psi, &mut ws.cand);
                *norm = n;
                *t += tau;
                if crossing_before.is_none() && *t > t_stop {
                    *t = t_stop;
                }
                if n < self.controls.norm_floor {
                    return Err(Error::IntegrationFailure { time: *t, norm_sq: n });
                }
            } else {
                crossing_before = Some(*t + tau);
                level += 1;
            }
        }
    }

    /// Evolves over an interval `h` with ‖H‖h ≤ 1/2 using the Taylor
    /// series ψ(s) = Σ v_k s^k, whose squared norm is a polynomial in s.
    fn fine_stage(
        &self,
        psi: &mut [C64],
        norm: &mut f64,
        t: &mut f64,
        h: f64,
        threshold: f64,
        ws: &mut Workspace,
    ) -> Result<Advance> {
        let n = psi.len();
        let terms = &mut ws.taylor;
        if terms.is_empty() {
            terms.push(vec![C64::new(0.0, 0.0); n]);
        }
        terms[0].copy_from_slice(psi);
        let base = norm_sqr(psi).sqrt();
        let mut order = 1;
        let mut h_pow = 1.0;
        while order < 64 {
            if terms.len() <= order {
                terms.push(vec![C64::new(0.0, 0.0); n]);
            }
            let (done, rest) = terms.split_at_mut(order);
            let prev = &done[order - 1];
            let next = &mut rest[0];
            self.generator.apply_into(prev, next);
            let inv = 1.0 / order as f64;
            next.iter_mut().for_each(|v| *v *= inv);
            h_pow *= h;
            order += 1;
            if norm_sqr(next).sqrt() * h_pow <= 1e-17 * base {
                break;
            }
        }
        // coefficients of ‖ψ(s)‖² = Σ_m c_m s^m
        let mut coeffs = vec![0.0; 2 * order - 1];
        for j in 0..order {
            for k in j..order {
                let ip: f64 = terms[j].iter().zip(&terms[k]).map(|(a, b)| (a.conj() * b).re).sum();
                coeffs[j + k] += if j == k { ip } else { 2.0 * ip };
            }
        }
        let poly = |s: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c);
        let evaluate = |s: f64, out: &mut [C64]| {
            out.copy_from_slice(&terms[order - 1]);
            for k in (0..order - 1).rev() {
                for (o, v) in out.iter_mut().zip(&terms[k]) {
                    *o = *o * s + v;
                }
            }
        };
        if poly(h) > threshold {
            evaluate(h, psi);
            let after = norm_sqr(psi);
            self.check_step(*t, *norm, after)?;
            *norm = after;
            *t += h;
            return Ok(Advance::Reached);
        }
        let (mut lo, mut hi) = (0.0, h);
        let mut s = h;
        for _ in 0..200 {
            s = 0.5 * (lo + hi);
            let v = poly(s);
            if (v - threshold).abs() <= self.controls.jump_time_tol * threshold {
                break;
            }
            if v > threshold {
                lo = s;
            } else {
                hi = s;
            }
            if hi - lo <= f64::EPSILON * (*t + h) {
                break;
            }
        }
        evaluate(s, psi);
        *norm = norm_sqr(psi);
        if !norm.is_finite() {
            return Err(Error::Divergence { time: *t + s });
        }
        *t += s;
        Ok(Advance::Crossed(*t))
    }

    fn advance_rk4(
        &self,
        psi: &mut Vec<C64>,
        norm: &mut f64,
        t: &mut f64,
        t_stop: f64,
        threshold: f64,
        ws: &mut Workspace,
    ) -> Result<Advance> {
        loop {
            let remaining = t_stop - *t;
            if remaining <= 0.0 {
                return Ok(Advance::Reached);
            }
            let h = self.controls.dt_max.min(remaining);
            rk4_step(&self.generator, psi, h, &mut ws.cand, &mut ws.rk4);
            let n = norm_sqr(&ws.cand);
            self.check_step(*t, *norm, n)?;
            if n > threshold {
                core::mem::swap(psi, &mut ws.cand);
                *norm = n;
                *t = if h == remaining { t_stop } else { *t + h };
                if n < self.controls.norm_floor {
                    return Err(Error::IntegrationFailure { time: *t, norm_sq: n });
                }
                continue;
            }
            let (mut lo, mut hi) = (0.0, h);
            let (mut s, mut ns) = (h, n);
            for _ in 0..MAX_BISECTIONS {
                if (ns - threshold).abs() <= self.controls.jump_time_tol * threshold {
                    break;
                }
                s = 0.5 * (lo + hi);
                rk4_step(&self.generator, psi, s, &mut ws.cand, &mut ws.rk4);
                ns = norm_sqr(&ws.cand);
                if ns > threshold {
                    lo = s;
                } else {
                    hi = s;
                }
            }
            core::mem::swap(psi, &mut ws.cand);
            *norm = ns;
            *t += s;
            return Ok(Advance::Crossed(*t));
        }
    }
}

/// Single trajectory with an explicit random stream.
pub fn evolve_trajectory(
    model: &ModelOperators,
    controls: Controls,
    rng: &mut StreamRng,
    seed_index: u64,
) -> Result<TrajectoryRecord> {
    Evolver::new(model, controls)?.trajectory_with_rng(rng, seed_index)
}

/// Runs trajectories `0..n_traj` sequentially. Trajectory `i` uses stream
/// `i` of `master_seed`, so the result matches any parallel schedule.
pub fn run_ensemble(
    model: &ModelOperators,
    n_traj: usize,
    master_seed: u64,
    controls: Controls,
) -> Result<EnsembleRecord> {
    if n_traj == 0 {
        return Err(Error::InvalidInput("n_traj must be at least 1".into()));
    }
    let evolver = Evolver::new(model, controls)?;
    let trajectories = (0..n_traj as u64)
        .map(|i| {
            evolver.trajectory(master_seed, i).map_err(|e| Error::TrajectoryFailed {
                seed_index: i,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleRecord::from_trajectories(&evolver, trajectories, master_seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pick_channel_boundaries() {
        assert_eq!(pick_channel(&[0.0, 2.0, 0.0], 0.999), Ok(1));
        assert_eq!(pick_channel(&[3.0, 1.0], 0.74), Ok(0));
        assert_eq!(pick_channel(&[3.0, 1.0], 0.76), Ok(1));
        assert_eq!(pick_channel(&[0.0, 0.0], 0.5), Err(Error::NoJumpPossible));
    }
}
