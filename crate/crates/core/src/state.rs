//! Pure states on a [`SpaceLayout`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

// unused when a dependency links std
#[allow(unused_imports)]
use num_traits::Float;

use crate::dense::norm_sqr;
use crate::operator::Operator;
use crate::space::{SpaceLayout, DOT_LEVELS};
use crate::{Error, Result, C64};

/// Largest Poisson tail mass accepted when truncating a coherent state.
pub const COHERENT_TAIL_TOLERANCE: f64 = 1e-9;

/// Dense state vector with a cached squared norm.
///
/// The cache is refreshed by every method that mutates amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: SpaceLayout,
    amps: Vec<C64>,
    norm_sq: f64,
}

impl StateVector {
    pub fn from_amplitudes(layout: SpaceLayout, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != layout.total_dim() {
            return Err(Error::Layout(format!(
                "{} amplitudes for dimension {}",
                amps.len(),
                layout.total_dim()
            )));
        }
        let norm_sq = norm_sqr(&amps);
        Ok(Self { layout, amps, norm_sq })
    }

    /// Basis state |index⟩.
    pub fn basis(layout: SpaceLayout, index: usize) -> Result<Self> {
        let n = layout.total_dim();
        if index >= n {
            return Err(Error::Layout(format!("basis index {index} outside dimension {n}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); n];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self {
            layout,
            amps,
            norm_sq: 1.0,
        })
    }

    /// Fock state |n_s, n_a, n_b⟩ ⊗ |level⟩ on a cascaded layout. For a
    /// layout without the dot, `level` is ignored.
    pub fn fock(layout: SpaceLayout, occupations: &[usize], level: usize) -> Result<Self> {
        if !layout.is_cascaded() || occupations.len() != 3 {
            return Err(Error::Layout(
                "Fock states need a cascaded layout and three occupations".into(),
            ));
        }
        let dot = if layout.has_dot() {
            if !(1..=DOT_LEVELS).contains(&level) {
                return Err(Error::InvalidLevel(level));
            }
            level - 1
        } else {
            0
        };
        let idx = layout.index_of(&[occupations[0], occupations[1], occupations[2], dot])?;
        Self::basis(layout, idx)
    }

    /// Tensor product of per-factor amplitude lists.
    pub fn product(layout: SpaceLayout, factors: &[Vec<C64>]) -> Result<Self> {
        if factors.len() != layout.factors() {
            return Err(Error::Layout(format!(
                "{} factor states for a {}-factor layout",
                factors.len(),
                layout.factors()
            )));
        }
        for (slot, f) in factors.iter().enumerate() {
            if f.len() != layout.factor_dim(slot) {
                return Err(Error::Layout(format!(
                    "factor {slot} has {} amplitudes, expected {}",
                    f.len(),
                    layout.factor_dim(slot)
                )));
            }
        }
        let amps = (0..layout.total_dim())
            .map(|i| {
                factors
                    .iter()
                    .enumerate()
                    .map(|(slot, f)| f[layout.digit(i, slot)])
                    .product()
            })
            .collect();
        Self::from_amplitudes(layout, amps)
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    /// Cached ⟨ψ|ψ⟩.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// ⟨ψ|ψ⟩ recomputed from the amplitudes.
    pub fn recompute_norm_sq(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    /// Mutates amplitudes in place and refreshes the norm cache.
    pub fn update(&mut self, f: impl FnOnce(&mut [C64])) {
        f(&mut self.amps);
        self.norm_sq = norm_sqr(&self.amps);
    }

    pub fn normalize(&mut self) {
        let s = 1.0 / self.norm_sq.sqrt();
        self.update(|a| a.iter_mut().for_each(|v| *v *= s));
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.layout.ensure_same(&other.layout)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// ⟨ψ|A|ψ⟩ / ⟨ψ|ψ⟩.
    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        self.layout.ensure_same(op.layout())?;
        Ok(op.braket(&self.amps) / self.norm_sq)
    }
}

/// Minimum Fock-space size for a coherent state of mean `nbar`:
/// ⌈n̄ + 6√n̄ + 6⌉.
pub fn coherent_truncation(nbar: f64) -> usize {
    (nbar + 6.0 * nbar.sqrt() + 6.0).ceil() as usize
}

/// Poisson probability mass of photon numbers ≥ `dim` for mean `nbar`.
pub fn poisson_tail(nbar: f64, dim: usize) -> f64 {
    if nbar == 0.0 {
        return 0.0;
    }
    // p_n by recursion in log space to stay finite for large dims
    let mut log_p = -nbar;
    for n in 1..=dim {
        log_p += nbar.ln() - (n as f64).ln();
    }
    let mut tail = 0.0;
    let mut p = log_p.exp();
    let mut n = dim;
    while p > 0.0 && n < dim + 10_000 {
        tail += p;
        n += 1;
        p *= nbar / n as f64;
        if p < tail * 1e-18 {
            break;
        }
    }
    tail
}

/// Amplitudes c_n ∝ αⁿ/√(n!) of a coherent state truncated to `dim`
/// levels and renormalised.
pub fn coherent_state_factor(dim: usize, alpha: C64) -> Result<Vec<C64>> {
    if dim < 1 {
        return Err(Error::InvalidDimension(dim));
    }
    let nbar = alpha.norm_sqr();
    let tail = poisson_tail(nbar, dim);
    if tail >= COHERENT_TAIL_TOLERANCE {
        return Err(Error::TruncationTooSmall { nbar, dim, tail });
    }
    let mut amps = Vec::with_capacity(dim);
    let mut c = C64::new((-0.5 * nbar).exp(), 0.0);
    amps.push(c);
    for n in 1..dim {
        c = c * alpha / (n as f64).sqrt();
        amps.push(c);
    }
    let norm = norm_sqr(&amps).sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    Ok(amps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coherent_vacuum_is_exact() {
        let amps = coherent_state_factor(6, C64::new(0.0, 0.0)).unwrap();
        assert_eq!(amps[0], C64::new(1.0, 0.0));
        assert!(amps[1..].iter().all(|a| *a == C64::new(0.0, 0.0)));
    }

    #[test]
    fn coherent_mean_occupation_matches_direct_sum() {
        // oracle: Σ n·|c_n|² with c_n from the Poisson weights directly
        let dim = 20;
        let nbar = 2.0f64;
        let mut weights = Vec::new();
        let mut fact = 1.0f64;
        for n in 0..dim {
            if n > 0 {
                fact *= n as f64;
            }
            weights.push((-nbar).exp() * nbar.powi(n as i32) / fact);
        }
        let z: f64 = weights.iter().sum();
        let oracle: f64 = weights.iter().enumerate().map(|(n, w)| n as f64 * w).sum::<f64>() / z;
        let amps = coherent_state_factor(dim, C64::new(nbar.sqrt(), 0.0)).unwrap();
        let mean: f64 = amps.iter().enumerate().map(|(n, a)| n as f64 * a.norm_sqr()).sum();
        assert!((mean - 2.0).abs() < 1e-9, "mean {mean}");
        assert!((mean - oracle).abs() < 1e-13);
    }

    #[test]
    fn truncation_rule_values() {
        assert_eq!(coherent_truncation(0.0), 6);
        assert_eq!(coherent_truncation(1.0), 13);
        assert_eq!(coherent_truncation(2.0), 17);
        assert_eq!(coherent_truncation(5.0), 25);
        for nbar in [0.5, 1.0, 2.0, 3.0, 5.0, 12.0] {
            assert!(poisson_tail(nbar, coherent_truncation(nbar)) < COHERENT_TAIL_TOLERANCE);
        }
    }

    #[test]
    fn undersized_coherent_factor_is_rejected() {
        let err = coherent_state_factor(4, C64::new(2.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::TruncationTooSmall { dim: 4, .. }));
    }

    #[test]
    fn poisson_tail_matches_complement() {
        let nbar = 3.0f64;
        let mut head = 0.0;
        let mut p = (-nbar).exp();
        for n in 0..5 {
            if n > 0 {
                p *= nbar / n as f64;
            }
            head += p;
        }
        assert!((poisson_tail(nbar, 5) - (1.0 - head)).abs() < 1e-14);
    }

    #[test]
    fn fock_state_has_single_unit_amplitude() {
        let layout = SpaceLayout::cascaded(2, 2, 2, true).unwrap();
        let psi = StateVector::fock(layout.clone(), &[1, 0, 0], 1).unwrap();
        let idx = layout.index_of(&[1, 0, 0, 0]).unwrap();
        assert_eq!(idx, 16);
        for (i, a) in psi.amplitudes().iter().enumerate() {
            let expected = if i == idx { 1.0 } else { 0.0 };
            assert_eq!(*a, C64::new(expected, 0.0));
        }
        assert_eq!(psi.norm_sq(), 1.0);
        assert!(matches!(
            StateVector::fock(layout.clone(), &[2, 0, 0], 1),
            Err(Error::Truncation { .. })
        ));
        assert_eq!(
            StateVector::fock(layout, &[0, 0, 0], 5).unwrap_err(),
            Error::InvalidLevel(5)
        );
    }

    #[test]
    fn norm_cache_tracks_updates() {
        let layout = SpaceLayout::new(vec![3]).unwrap();
        let mut psi = StateVector::from_amplitudes(
            layout,
            vec![C64::new(1.0, 1.0), C64::new(0.5, 0.0), C64::new(0.0, -2.0)],
        )
        .unwrap();
        psi.update(|a| a[2] = C64::new(0.0, 0.0));
        assert!((psi.norm_sq() - psi.recompute_norm_sq()).abs() < 1e-15);
        psi.normalize();
        assert!((psi.norm_sq() - 1.0).abs() < 1e-15);
    }
}
