//! Small dense complex matrices.
//!
//! Used for the block propagators of the trajectory engine and for the
//! density matrix of the master-equation oracle.

use alloc::vec;
use alloc::vec::Vec;

// unused when a dependency links std
#[allow(unused_imports)]
use num_traits::Float;

use crate::C64;

/// Square row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.n + j] += v;
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch in dense product");
        let n = self.n;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(&other.data[k * n..(k + 1) * n]) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `y = self · x`.
    #[inline]
    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for (row, yi) in self.data.chunks_exact(self.n).zip(y.iter_mut()) {
            *yi = dot(row, x);
        }
    }

    pub fn adjoint(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.n, |i, j| self.get(j, i).conj())
    }

    pub fn scale(&mut self, s: C64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn axpy(&mut self, s: C64, other: &DenseMatrix) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest |a_ij - conj(a_ji)|.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in i..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Induced 1-norm (max column sum).
    pub fn norm_one(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `true` when every eigenvalue of the Hermitian part is ≥ `-tol`,
    /// tested by a Cholesky factorisation of `(A + A†)/2 + tol·I`.
    pub fn is_positive_semidefinite(&self, tol: f64) -> bool {
        let n = self.n;
        let mut l = DenseMatrix::zeros(n);
        for j in 0..n {
            let mut diag = self.get(j, j).re + tol;
            for k in 0..j {
                diag -= l.get(j, k).norm_sqr();
            }
            if !(diag > 0.0) {
                return false;
            }
            let d = diag.sqrt();
            l.set(j, j, C64::new(d, 0.0));
            for i in j + 1..n {
                let mut s = 0.5 * (self.get(i, j) + self.get(j, i).conj());
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k).conj();
                }
                l.set(i, j, s / d);
            }
        }
        true
    }

    /// exp(self) for a matrix of modest norm, by Taylor series with
    /// scaling and squaring.
    pub fn exp(&self) -> DenseMatrix {
        let norm = self.norm_one();
        let mut squarings = 0u32;
        let mut scale = 1.0;
        while norm * scale > 0.5 {
            scale *= 0.5;
            squarings += 1;
        }
        let mut a = self.clone();
        a.scale(C64::new(scale, 0.0));
        let mut result = taylor_exp(&a);
        for _ in 0..squarings {
            result = result.mul(&result);
        }
        result
    }
}

/// Taylor series of exp(a); `a` must have 1-norm ≲ 1.
pub(crate) fn taylor_exp(a: &DenseMatrix) -> DenseMatrix {
    let n = a.dim();
    let mut result = DenseMatrix::identity(n);
    let mut term = DenseMatrix::identity(n);
    for k in 1..64 {
        term = term.mul(a);
        term.scale(C64::new(1.0 / k as f64, 0.0));
        result.axpy(C64::new(1.0, 0.0), &term);
        if term.max_abs() < 1e-18 {
            break;
        }
    }
    result
}

/// Unconjugated dot product with split accumulators.
#[inline]
pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    let mut re = [0.0f64; 4];
    let mut im = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            let x = a[4 * c + l];
            let y = b[4 * c + l];
            re[l] += x.re * y.re - x.im * y.im;
            im[l] += x.re * y.im + x.im * y.re;
        }
    }
    for k in 4 * chunks..a.len() {
        let x = a[k];
        let y = b[k];
        re[0] += x.re * y.re - x.im * y.im;
        im[0] += x.re * y.im + x.im * y.re;
    }
    C64::new((re[0] + re[1]) + (re[2] + re[3]), (im[0] + im[1]) + (im[2] + im[3]))
}

/// Σ |x_i|².
#[inline]
pub(crate) fn norm_sqr(x: &[C64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = x.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            acc[l] += x[4 * c + l].norm_sqr();
        }
    }
    for v in &x[4 * chunks..] {
        acc[0] += v.norm_sqr();
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3])
}
