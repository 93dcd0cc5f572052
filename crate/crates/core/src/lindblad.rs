//! Dense master-equation oracle.
//!
//! Integrates dρ/dt = −i(H_eff ρ − ρ H_eff†) + Σ_k C_k ρ C_k† with classical
//! RK4, together with the time-integrated fluxes Φ_k = ∫ Tr(C_k ρ C_k†) dt.
//! For channels that remove one photon, Φ_k is the ensemble-mean number of
//! jumps on channel k, which is what the trajectory ensemble estimates.

use alloc::vec;
use alloc::vec::Vec;

// unused when a dependency links std
#[allow(unused_imports)]
use num_traits::Float;

use crate::dense::DenseMatrix;
use crate::model::{Channel, ModelOperators};
use crate::operator::Operator;
use crate::space::SpaceLayout;
use crate::{Error, Result, C64};

/// Largest RK4 stability margin accepted for Λ·dt, where Λ bounds the
/// generator.
pub const MAX_STABLE_STEP: f64 = 2.5;
/// Default Λ·dt.
pub const DEFAULT_STEP_FRACTION: f64 = 1.0;
/// Largest Hilbert-space dimension the oracle accepts by default.
pub const DEFAULT_DIM_CAP: usize = 4096;
/// Tolerance on |Tr ρ − 1|.
pub const TRACE_TOLERANCE: f64 = 1e-8;
/// Largest entry of H_eff − (H − (i/2)Σ C†C) treated as round-off.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    layout: SpaceLayout,
    rho: DenseMatrix,
}

impl DensityMatrix {
    /// |ψ⟩⟨ψ| / ⟨ψ|ψ⟩.
    pub fn pure(layout: SpaceLayout, amps: &[C64]) -> Result<Self> {
        if amps.len() != layout.total_dim() {
            return Err(Error::Layout(alloc::format!(
                "{} amplitudes for dimension {}",
                amps.len(),
                layout.total_dim()
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        let rho = DenseMatrix::from_fn(amps.len(), |i, j| amps[i] * amps[j].conj() / norm);
        Ok(Self { layout, rho })
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    /// Tr(A ρ).
    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        self.layout.ensure_same(op.layout())?;
        let mut acc = C64::new(0.0, 0.0);
        for (r, c, v) in op.iter() {
            acc += v * self.rho.get(c, r);
        }
        Ok(acc)
    }

    pub fn is_positive(&self, tol: f64) -> bool {
        self.rho.is_positive_semidefinite(tol)
    }
}

/// Hermitian part H = (H_eff + H_eff†)/2, after checking that
/// H_eff − (H − (i/2)Σ_k C_k†C_k) vanishes.
pub fn hermitian_part(model: &ModelOperators) -> Result<Operator> {
    let h = &model.h_eff;
    let herm = h.add(&h.dagger())?.scale(C64::new(0.5, 0.0));
    let decay = model.total_decay()?;
    let rebuilt = herm.add(&decay.scale(C64::new(0.0, -0.5)))?;
    let residual = h.sub(&rebuilt)?.max_abs();
    if !(residual <= CONSISTENCY_TOLERANCE) {
        return Err(Error::ModelInconsistency { residual });
    }
    Ok(herm)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Step in ns; `None` picks `DEFAULT_STEP_FRACTION / Λ`.
    pub dt: Option<f64>,
    pub dim_cap: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            dt: None,
            dim_cap: DEFAULT_DIM_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub final_state: DensityMatrix,
    /// Φ_k per collapse channel, in model order.
    pub fluxes: Vec<(Channel, f64)>,
    /// Tr(N̂ ρ(t_end)).
    pub residual_excitation: f64,
    /// Largest |Tr ρ − 1| seen.
    pub trace_drift: f64,
    pub steps: usize,
    pub dt: f64,
    /// Cholesky test of ρ(t_end) + 1e-9·I.
    pub positive: bool,
}

impl OracleResult {
    pub fn flux(&self, channel: Channel) -> Option<f64> {
        self.fluxes.iter().find(|(c, _)| *c == channel).map(|(_, f)| *f)
    }
}

/// Bound Λ on the norm of the Lindblad generator: 2‖H_eff‖ + Σ‖C_k‖².
pub fn generator_bound(model: &ModelOperators) -> f64 {
    2.0 * model.h_eff.norm_bound() + model.collapse.iter().map(|c| c.op.norm_bound().powi(2)).sum::<f64>()
}

struct Generator<'a> {
    h: &'a Operator,
    collapse: Vec<&'a Operator>,
    n: usize,
    x: DenseMatrix,
    y: DenseMatrix,
}

impl Generator<'_> {
    /// Writes L(ρ) into `out` and the per-channel fluxes into `flux`.
    fn eval(&mut self, rho: &DenseMatrix, out: &mut DenseMatrix, flux: &mut [f64]) {
        let n = self.n;
        // X = H ρ; −i(Hρ − ρH†) = −i(X − X†) for Hermitian ρ
        sparse_left(self.h, rho, &mut self.x);
        for i in 0..n {
            for j in 0..n {
                let v = self.x.get(i, j) - self.x.get(j, i).conj();
                out.set(i, j, C64::new(v.im, -v.re));
            }
        }
        for (k, c) in self.collapse.iter().enumerate() {
            sparse_left(c, rho, &mut self.y);
            // out += Y C†, (Y C†)_ij = Σ_m Y_im conj(C_jm)
            let mut tr = 0.0;
            for j in 0..n {
                for (m, cv) in c.row(j) {
                    let cc = cv.conj();
                    for i in 0..n {
                        out.add_at(i, j, self.y.get(i, m) * cc);
                    }
                    tr += (self.y.get(j, m) * cc).re;
                }
            }
            flux[k] = tr;
        }
    }
}

/// `out = A ρ` for sparse `A`.
fn sparse_left(a: &Operator, rho: &DenseMatrix, out: &mut DenseMatrix) {
    let n = rho.dim();
    for r in 0..n {
        let row = &mut out.as_mut_slice()[r * n..(r + 1) * n];
        row.fill(C64::new(0.0, 0.0));
        for (c, v) in a.row(r) {
            for (o, x) in row.iter_mut().zip(rho.row(c)) {
                *o += v * x;
            }
        }
    }
}

/// Integrates the master equation from the model's initial state to
/// `t_end`. `observer` sees (t, ρ) at t = 0 and after every step.
pub fn evolve_lindblad(
    model: &ModelOperators,
    t_end: f64,
    options: OracleOptions,
    mut observer: impl FnMut(f64, &DensityMatrix),
) -> Result<OracleResult> {
    let n = model.layout.total_dim();
    if n > options.dim_cap {
        return Err(Error::OracleTooLarge {
            dim: n,
            cap: options.dim_cap,
        });
    }
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidInput(alloc::format!("oracle horizon {t_end}")));
    }
    hermitian_part(model)?;
    let bound = generator_bound(model);
    let dt_target = options.dt.unwrap_or(DEFAULT_STEP_FRACTION / bound);
    if !(dt_target > 0.0) || bound * dt_target > MAX_STABLE_STEP {
        return Err(Error::StepSize { dt: dt_target, bound });
    }
    let steps = (t_end / dt_target).ceil().max(1.0) as usize;
    let dt = t_end / steps as f64;

    let mut state = DensityMatrix::pure(model.layout.clone(), model.initial_state.amplitudes())?;
    let n_ch = model.collapse.len();
    let mut gen = Generator {
        h: &model.h_eff,
        collapse: model.collapse.iter().map(|c| &c.op).collect(),
        n,
        x: DenseMatrix::zeros(n),
        y: DenseMatrix::zeros(n),
    };
    let mut k = [
        DenseMatrix::zeros(n),
        DenseMatrix::zeros(n),
        DenseMatrix::zeros(n),
        DenseMatrix::zeros(n),
    ];
    let mut f = vec![vec![0.0; n_ch]; 4];
    let mut stage = DenseMatrix::zeros(n);
    let mut integrals = vec![0.0; n_ch];
    let mut drift: f64 = 0.0;
    observer(0.0, &state);
    for step in 0..steps {
        let rho = &mut state.rho;
        gen.eval(rho, &mut k[0], &mut f[0]);
        for (s, frac) in [(1usize, 0.5), (2, 0.5), (3, 1.0)] {
            stage.as_mut_slice().copy_from_slice(rho.as_slice());
            stage.axpy(C64::new(frac * dt, 0.0), &k[s - 1]);
            gen.eval(&stage, &mut k[s], &mut f[s]);
        }
        let w = [dt / 6.0, dt / 3.0, dt / 3.0, dt / 6.0];
        for s in 0..4 {
            rho.axpy(C64::new(w[s], 0.0), &k[s]);
            for (acc, v) in integrals.iter_mut().zip(&f[s]) {
                *acc += w[s] * v;
            }
        }
        // the commutator term is evaluated for Hermitian ρ only, so round-off
        // in the anti-Hermitian part must not be left to accumulate
        for i in 0..n {
            for j in i..n {
                let v = 0.5 * (rho.get(i, j) + rho.get(j, i).conj());
                rho.set(i, j, v);
                rho.set(j, i, v.conj());
            }
        }
        let tr = rho.trace().re;
        if !tr.is_finite() {
            return Err(Error::Divergence {
                time: (step + 1) as f64 * dt,
            });
        }
        drift = drift.max((tr - 1.0).abs());
        if drift > TRACE_TOLERANCE {
            return Err(Error::TraceDrift { drift });
        }
        observer((step + 1) as f64 * dt, &state);
    }
    let residual_excitation = state.expectation(&model.number_op)?.re;
    let positive = state.is_positive(1e-9);
    Ok(OracleResult {
        fluxes: model.collapse.iter().map(|c| c.channel).zip(integrals).collect(),
        final_state: state,
        residual_excitation,
        trace_drift: drift,
        steps,
        dt,
        positive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, InputSpec, SystemParams, Truncations};

    #[test]
    fn single_photon_flux_accounts_for_the_photon() {
        let params = SystemParams::resonant(10.0, 20.0, 0.5, 0.25, 0.0, InputSpec::Fock(1));
        let layout = Truncations::for_input(&params.input).layout(true).unwrap();
        let model = build_model(&params, &layout).unwrap();
        let res = evolve_lindblad(&model, 30.0, OracleOptions::default(), |_, _| {}).unwrap();
        let out = res.flux(Channel::OutA).unwrap() + res.flux(Channel::OutB).unwrap();
        assert!(
            (out + res.residual_excitation - 1.0).abs() < 1e-6,
            "{out} {}",
            res.residual_excitation
        );
        assert!(res.positive);
        assert!(res.trace_drift < 1e-10);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let params = SystemParams::resonant(10.0, 20.0, 0.5, 0.25, 0.0, InputSpec::Fock(1));
        let layout = Truncations::for_input(&params.input).layout(true).unwrap();
        let model = build_model(&params, &layout).unwrap();
        let opts = OracleOptions {
            dt: Some(1.0),
            ..OracleOptions::default()
        };
        assert!(matches!(
            evolve_lindblad(&model, 1.0, opts, |_, _| {}),
            Err(Error::StepSize { .. })
        ));
    }
}
