//! Exact block-diagonal propagators for a time-independent H_eff.
//!
//! H_eff conserves the excitation number, so its sparsity graph splits the
//! basis into small connected blocks. Each block gets dense propagators
//! exp(−i H τ_ℓ) on a dyadic ladder τ_ℓ = τ₀ / 2^ℓ. The finest rung obeys
//! ‖H‖ τ_L ≤ 1/2 and is computed by Taylor series; coarser rungs are exact
//! squares of the finer ones.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::dense::{taylor_exp, DenseMatrix};
use crate::operator::Operator;
use crate::C64;

/// Largest ‖H‖·τ for which a Taylor series is used directly.
pub(crate) const TAYLOR_RADIUS: f64 = 0.5;

/// Basis ordering that makes every connected block of `op` contiguous.
/// Returns `(order, ranges)` with `order[new] = old`.
pub(crate) fn block_order(op: &Operator) -> (Vec<usize>, Vec<Range<usize>>) {
    let n = op.dim();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (r, c, _) in op.iter() {
        let (a, b) = (find(&mut parent, r), find(&mut parent, c));
        if a != b {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            parent[hi] = lo;
        }
    }
    // roots are the smallest index of their block; blocks in root order
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let root = find(&mut parent, i);
        members[root].push(i);
    }
    let mut order = Vec::with_capacity(n);
    let mut ranges = Vec::new();
    for block in members.into_iter().filter(|m| !m.is_empty()) {
        let start = order.len();
        order.extend(block);
        ranges.push(start..order.len());
    }
    (order, ranges)
}

#[derive(Debug, Clone)]
pub(crate) struct BlockPropagator {
    ranges: Vec<Range<usize>>,
    taus: Vec<f64>,
    /// `levels[ℓ][b]` = exp(−i H_b τ_ℓ).
    levels: Vec<Vec<DenseMatrix>>,
}

impl BlockPropagator {
    /// `h` must already be in block order with blocks `ranges`.
    pub(crate) fn new(h: &Operator, ranges: Vec<Range<usize>>, coarse_step: f64) -> Self {
        let bound = h.norm_bound();
        let mut finest = 0usize;
        while bound * coarse_step / (1u64 << finest) as f64 > TAYLOR_RADIUS {
            finest += 1;
        }
        let taus: Vec<f64> = (0..=finest).map(|l| coarse_step / (1u64 << l) as f64).collect();
        let minus_i_tau = C64::new(0.0, -taus[finest]);
        let finest_blocks: Vec<DenseMatrix> = ranges
            .iter()
            .map(|r| {
                let mut m = DenseMatrix::zeros(r.len());
                for (i_local, row) in r.clone().enumerate() {
                    for (col, v) in h.row(row) {
                        debug_assert!(r.contains(&col), "H couples two blocks");
                        m.set(i_local, col - r.start, minus_i_tau * v);
                    }
                }
                taylor_exp(&m)
            })
            .collect();
        let mut levels = vec![finest_blocks];
        for _ in 0..finest {
            let next: Vec<DenseMatrix> = levels
                .last()
                .expect("at least one level")
                .iter()
                .map(|p| p.mul(p))
                .collect();
            levels.push(next);
        }
        levels.reverse();
        Self { ranges, taus, levels }
    }

    pub(crate) fn level_count(&self) -> usize {
        self.taus.len()
    }

    pub(crate) fn tau(&self, level: usize) -> f64 {
        self.taus[level]
    }

    /// `out = exp(−i H τ_level) · psi`, skipping blocks flagged inactive
    /// (identically zero in `psi`).
    pub(crate) fn apply(&self, level: usize, psi: &[C64], out: &mut [C64], active: &[bool]) {
        for ((range, p), &on) in self.ranges.iter().zip(&self.levels[level]).zip(active) {
            if on {
                p.matvec_into(&psi[range.clone()], &mut out[range.clone()]);
            } else {
                out[range.clone()].fill(C64::new(0.0, 0.0));
            }
        }
    }

    pub(crate) fn active_blocks(&self, psi: &[C64], active: &mut [bool]) {
        for (range, flag) in self.ranges.iter().zip(active.iter_mut()) {
            *flag = psi[range.clone()].iter().any(|v| v.re != 0.0 || v.im != 0.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::SpaceLayout;

    #[test]
    fn blocks_follow_connectivity() {
        let layout = SpaceLayout::single(5).unwrap();
        let one = C64::new(1.0, 0.0);
        let h = Operator::from_triplets(layout, [(0, 3, one), (3, 0, one), (1, 1, one), (2, 4, one)]).unwrap();
        let (order, ranges) = block_order(&h);
        assert_eq!(order, vec![0, 3, 1, 2, 4]);
        assert_eq!(ranges, vec![0..2, 2..3, 3..5]);
    }

    #[test]
    fn ladder_matches_direct_exponential() {
        // two-level system with decay: exact exp via scaling and squaring
        let layout = SpaceLayout::single(2).unwrap();
        let h = Operator::from_triplets(
            layout,
            [
                (0, 1, C64::new(3.0, 0.0)),
                (1, 0, C64::new(3.0, 0.0)),
                (1, 1, C64::new(1.0, -2.0)),
            ],
        )
        .unwrap();
        let prop = BlockPropagator::new(&h, vec![Range { start: 0, end: 2 }], 5.0);
        assert!(prop.level_count() > 3);
        for level in 0..prop.level_count() {
            let mut gen = h.to_dense();
            gen.scale(C64::new(0.0, -prop.tau(level)));
            let direct = gen.exp();
            let psi = [C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
            let mut out = [C64::new(0.0, 0.0); 2];
            prop.apply(level, &psi, &mut out, &[true]);
            let mut expected = [C64::new(0.0, 0.0); 2];
            direct.matvec_into(&psi, &mut expected);
            for k in 0..2 {
                assert!((out[k] - expected[k]).norm() < 1e-12, "level {level}");
            }
        }
    }
}
