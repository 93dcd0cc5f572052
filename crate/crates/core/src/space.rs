//! Composite Hilbert-space layout.
//!
//! Basis states are ordered row-major over the factors, so the last factor
//! varies fastest. For the cascaded system the factor order is
//! (source, mode-a, mode-b, dot).

use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Number of dot levels: |1⟩=|↑⟩, |2⟩=|↓⟩, |3⟩=|↑↓↑⟩, |4⟩=|↑↓↓⟩.
pub const DOT_LEVELS: usize = 4;

/// Factor slots of the cascaded system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Source = 0,
    ModeA = 1,
    ModeB = 2,
    Dot = 3,
}

impl Slot {
    pub const fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpaceLayout {
    dims: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl SpaceLayout {
    /// Tensor-product layout with the given factor dimensions.
    ///
    /// A factor of dimension 1 is a disabled subsystem.
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Layout("layout needs at least one factor".into()));
        }
        if let Some(&d) = dims.iter().find(|&&d| d == 0) {
            return Err(Error::InvalidDimension(d));
        }
        let mut strides = alloc::vec![1; dims.len()];
        for k in (0..dims.len() - 1).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        let total = dims.iter().product();
        Ok(Self { dims, strides, total })
    }

    pub fn single(dim: usize) -> Result<Self> {
        Self::new(alloc::vec![dim])
    }

    /// Layout of source ⊗ mode-a ⊗ mode-b ⊗ dot. The dot factor has
    /// dimension 4, or 1 when the dot is absent.
    pub fn cascaded(source: usize, mode_a: usize, mode_b: usize, dot_present: bool) -> Result<Self> {
        for d in [source, mode_a, mode_b] {
            if d < 2 {
                return Err(Error::InvalidDimension(d));
            }
        }
        let dot = if dot_present { DOT_LEVELS } else { 1 };
        Self::new(alloc::vec![source, mode_a, mode_b, dot])
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn factor_dim(&self, slot: usize) -> usize {
        self.dims[slot]
    }

    pub fn factors(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.total
    }

    /// True for the four-factor cascaded layout.
    pub fn is_cascaded(&self) -> bool {
        self.dims.len() == 4 && (self.dims[3] == DOT_LEVELS || self.dims[3] == 1)
    }

    pub fn has_dot(&self) -> bool {
        self.is_cascaded() && self.dims[3] == DOT_LEVELS
    }

    pub(crate) fn stride(&self, slot: usize) -> usize {
        self.strides[slot]
    }

    /// Basis index of a per-factor index tuple.
    pub fn index_of(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.dims.len() {
            return Err(Error::Layout(format!(
                "expected {} factor indices, got {}",
                self.dims.len(),
                digits.len()
            )));
        }
        let mut idx = 0;
        for (slot, (&d, &dim)) in digits.iter().zip(&self.dims).enumerate() {
            if d >= dim {
                return Err(Error::Truncation {
                    slot,
                    occupation: d,
                    dim,
                });
            }
            idx += d * self.strides[slot];
        }
        Ok(idx)
    }

    /// Per-factor index of `slot` in basis state `index`.
    pub fn digit(&self, index: usize, slot: usize) -> usize {
        (index / self.strides[slot]) % self.dims[slot]
    }

    pub fn digits(&self, index: usize) -> Vec<usize> {
        (0..self.dims.len()).map(|s| self.digit(index, s)).collect()
    }

    pub(crate) fn ensure_same(&self, other: &SpaceLayout) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::Layout(format!(
                "factor dims {:?} vs {:?}",
                self.dims, other.dims
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_is_product_and_indexing_is_row_major() {
        let l = SpaceLayout::cascaded(3, 2, 2, true).unwrap();
        assert_eq!(l.total_dim(), 48);
        assert_eq!(l.index_of(&[0, 0, 0, 1]).unwrap(), 1);
        assert_eq!(l.index_of(&[0, 0, 1, 0]).unwrap(), 4);
        assert_eq!(l.index_of(&[1, 0, 0, 0]).unwrap(), 16);
        for i in 0..l.total_dim() {
            assert_eq!(l.index_of(&l.digits(i)).unwrap(), i);
        }
    }

    #[test]
    fn rejects_zero_and_undersized_factors() {
        assert!(SpaceLayout::new(alloc::vec![2, 0]).is_err());
        assert_eq!(
            SpaceLayout::cascaded(1, 2, 2, true).unwrap_err(),
            Error::InvalidDimension(1)
        );
        let no_dot = SpaceLayout::cascaded(2, 2, 2, false).unwrap();
        assert_eq!(no_dot.factor_dims(), &[2, 2, 2, 1]);
        assert!(!no_dot.has_dot());
    }

    #[test]
    fn out_of_range_digit_is_a_truncation_error() {
        let l = SpaceLayout::new(alloc::vec![2, 4]).unwrap();
        assert!(matches!(l.index_of(&[2, 0]), Err(Error::Truncation { slot: 0, .. })));
    }
}
