//! Quantum-trajectory simulation of single-photon subtraction.
//!
//! A single-sided source cavity emits a pulse that is fed unidirectionally
//! into one mode of a bimodal cavity containing a charged quantum dot. The
//! dot behaves as a double-Λ system: a photon in mode-a is absorbed on one
//! branch and re-emitted into mode-b while the ground-state spin flips,
//! after which the dot is transparent to the rest of the pulse.
//!
//! The crate is `no_std` (with `alloc`) and holds the numerical core:
//!
//! * [`space`], [`operator`], [`state`], [`dense`]: composite Hilbert space
//!   and sparse operator algebra.
//! * [`model`]: effective Hamiltonian, collapse channels and initial states.
//! * [`engine`]: Monte-Carlo wavefunction integrator and seeded ensembles.
//! * [`lindblad`]: dense master-equation oracle for cross-checks.
//! * [`observables`]: reductions of jump records to detection
//!   probabilities, photon-number statistics and g²(0).
//!
//! Internal units: angular frequencies in rad/ns, times in ns. The
//! [`units`] module converts from the GHz (frequency / 2π) convention used
//! for human-facing values.
#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod dense;
pub mod engine;
mod error;
pub mod fingerprint;
pub mod lindblad;
pub mod model;
pub mod observables;
pub mod operator;
pub mod rng;
pub mod space;
pub mod state;
pub mod units;

pub use error::{Error, Result};

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;
