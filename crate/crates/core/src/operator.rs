//! Sparse operators on a [`SpaceLayout`].
//!
//! Storage is compressed sparse row with exact arithmetic: entries that
//! cancel to exactly zero are removed, nothing else is dropped unless
//! [`Operator::pruned`] is called explicitly.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

// unused when a dependency links std
#[allow(unused_imports)]
use num_traits::Float;

use crate::dense::DenseMatrix;
use crate::space::{SpaceLayout, DOT_LEVELS};
use crate::state::StateVector;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    layout: SpaceLayout,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl Operator {
    /// Builds an operator from `(row, col, value)` triplets. Duplicates are
    /// summed and exact zeros removed.
    pub fn from_triplets(layout: SpaceLayout, triplets: impl IntoIterator<Item = (usize, usize, C64)>) -> Result<Self> {
        let n = layout.total_dim();
        let mut rows: Vec<BTreeMap<usize, C64>> = vec![BTreeMap::new(); n];
        for (r, c, v) in triplets {
            if r >= n || c >= n {
                return Err(Error::Layout(format!("entry ({r}, {c}) outside dimension {n}")));
            }
            *rows[r].entry(c).or_insert(C64::new(0.0, 0.0)) += v;
        }
        Ok(Self::from_rows(layout, rows))
    }

    fn from_rows(layout: SpaceLayout, rows: Vec<BTreeMap<usize, C64>>) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                if v.re != 0.0 || v.im != 0.0 {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            layout,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn zero(layout: SpaceLayout) -> Self {
        let n = layout.total_dim();
        Self {
            layout,
            row_ptr: vec![0; n + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(layout: SpaceLayout) -> Self {
        let n = layout.total_dim();
        Self {
            layout,
            row_ptr: (0..=n).collect(),
            cols: (0..n).collect(),
            vals: vec![C64::new(1.0, 0.0); n],
        }
    }

    /// Bosonic lowering operator on a `dim`-level Fock space,
    /// ⟨n−1|â|n⟩ = √n.
    pub fn annihilation(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        let layout = SpaceLayout::single(dim)?;
        Self::from_triplets(layout, (1..dim).map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0))))
    }

    /// Dot transition |i⟩⟨j| with levels numbered 1..=4.
    pub fn transition(i: usize, j: usize) -> Result<Self> {
        for level in [i, j] {
            if !(1..=DOT_LEVELS).contains(&level) {
                return Err(Error::InvalidLevel(level));
            }
        }
        let layout = SpaceLayout::single(DOT_LEVELS)?;
        Self::from_triplets(layout, [(i - 1, j - 1, C64::new(1.0, 0.0))])
    }

    /// Diagonal operator with the given entries.
    pub fn diagonal(layout: SpaceLayout, diag: &[C64]) -> Result<Self> {
        if diag.len() != layout.total_dim() {
            return Err(Error::Layout(format!(
                "diagonal of length {} for dimension {}",
                diag.len(),
                layout.total_dim()
            )));
        }
        Self::from_triplets(layout, diag.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    /// Embeds a single-factor operator at `slot` of `layout`, with
    /// identities on every other factor.
    pub fn embed(&self, slot: usize, layout: &SpaceLayout) -> Result<Self> {
        if self.layout.factors() != 1 {
            return Err(Error::Layout("only single-factor operators can be embedded".into()));
        }
        if slot >= layout.factors() {
            return Err(Error::Layout(format!(
                "slot {slot} outside a {}-factor layout",
                layout.factors()
            )));
        }
        let d = self.dim();
        if layout.factor_dim(slot) != d {
            return Err(Error::Layout(format!(
                "operator of dimension {d} cannot act on factor {slot} of dimension {}",
                layout.factor_dim(slot)
            )));
        }
        let inner = layout.stride(slot);
        let outer = layout.total_dim() / (d * inner);
        let mut triplets = Vec::with_capacity(self.nnz() * outer * inner);
        for o in 0..outer {
            for (r, c, v) in self.iter() {
                for i in 0..inner {
                    let base = o * d * inner + i;
                    triplets.push((base + r * inner, base + c * inner, v));
                }
            }
        }
        Self::from_triplets(layout.clone(), triplets)
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.total_dim()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Iterates stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim())
            .flat_map(move |r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k])))
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        let span = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.cols[span.clone()].binary_search(&col) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn dagger(&self) -> Self {
        let n = self.dim();
        let mut rows: Vec<BTreeMap<usize, C64>> = vec![BTreeMap::new(); n];
        for (r, c, v) in self.iter() {
            rows[c].insert(r, v.conj());
        }
        Self::from_rows(self.layout.clone(), rows)
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v *= s;
        }
        if s.re == 0.0 && s.im == 0.0 {
            return Self::zero(self.layout.clone());
        }
        out
    }

    pub fn add(&self, other: &Operator) -> Result<Self> {
        self.layout.ensure_same(&other.layout)?;
        Self::from_triplets(self.layout.clone(), self.iter().chain(other.iter()))
    }

    pub fn sub(&self, other: &Operator) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Sum of `(coefficient, operator)` terms on a common layout.
    pub fn linear_combination(layout: &SpaceLayout, terms: &[(C64, &Operator)]) -> Result<Self> {
        let mut triplets = Vec::new();
        for (s, op) in terms {
            layout.ensure_same(&op.layout)?;
            triplets.extend(op.iter().map(|(r, c, v)| (r, c, s * v)));
        }
        Self::from_triplets(layout.clone(), triplets)
    }

    /// Product `self · other`.
    pub fn compose(&self, other: &Operator) -> Result<Self> {
        self.layout.ensure_same(&other.layout)?;
        let n = self.dim();
        let mut rows: Vec<BTreeMap<usize, C64>> = vec![BTreeMap::new(); n];
        for (r, row) in rows.iter_mut().enumerate() {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    *row.entry(c).or_insert(C64::new(0.0, 0.0)) += a * b;
                }
            }
        }
        Ok(Self::from_rows(self.layout.clone(), rows))
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Operator) -> Result<Self> {
        self.compose(other)?.sub(&other.compose(self)?)
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        self.layout.ensure_same(psi.layout())?;
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        self.apply_into(psi.amplitudes(), &mut out);
        StateVector::from_amplitudes(self.layout.clone(), out)
    }

    /// `y = self · x` on raw amplitude slices; O(nnz).
    #[inline]
    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(y.len(), self.dim());
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yr = acc;
        }
    }

    /// ⟨x|self|x⟩ without normalisation.
    pub fn braket(&self, x: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (r, xr) in x.iter().enumerate() {
            let mut row = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                row += self.vals[k] * x[self.cols[k]];
            }
            acc += xr.conj() * row;
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Upper bound on the spectral norm: max of the induced 1- and ∞-norms.
    pub fn norm_bound(&self) -> f64 {
        let n = self.dim();
        let mut col_sums = vec![0.0; n];
        let mut row_max = 0.0f64;
        for r in 0..n {
            let mut s = 0.0;
            for (c, v) in self.row(r) {
                s += v.norm();
                col_sums[c] += v.norm();
            }
            row_max = row_max.max(s);
        }
        col_sums.into_iter().fold(row_max, f64::max)
    }

    /// Removes entries with |value| ≤ `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        let rows = (0..self.dim())
            .map(|r| self.row(r).filter(|(_, v)| v.norm() > tol).collect())
            .collect();
        Self::from_rows(self.layout.clone(), rows)
    }

    /// Relabels the basis: entry (r, c) moves to (pos[r], pos[c]) where
    /// `pos` is the inverse of `order`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let n = self.dim();
        let mut pos = vec![0; n];
        for (new, &old) in order.iter().enumerate() {
            pos[old] = new;
        }
        let mut rows: Vec<BTreeMap<usize, C64>> = vec![BTreeMap::new(); n];
        for (r, c, v) in self.iter() {
            rows[pos[r]].insert(pos[c], v);
        }
        Self::from_rows(self.layout.clone(), rows)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.dim());
        for (r, c, v) in self.iter() {
            m.set(r, c, v);
        }
        m
    }

    pub fn is_diagonal(&self) -> bool {
        self.iter().all(|(r, c, _)| r == c)
    }
}
