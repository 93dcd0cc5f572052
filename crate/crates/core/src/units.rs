//! Unit conversions between the human-facing GHz convention and the
//! internal angular units.
//!
//! Human-facing rates are quoted as `rate / 2π` in GHz. Internally every
//! rate is an angular frequency in rad/ns and every time is in ns, so that
//! operator entries are O(1–1000) and absolute tolerances stay meaningful.

use core::f64::consts::TAU;

/// `f` in GHz (value of rate/2π) to rad/ns.
pub fn ghz_to_angular(f: f64) -> f64 {
    TAU * f
}

/// rad/ns to GHz (value of rate/2π).
pub fn angular_to_ghz(w: f64) -> f64 {
    w / TAU
}

/// rad/ns to rad/s.
pub fn angular_to_si(w: f64) -> f64 {
    w * 1e9
}

/// rad/s to rad/ns.
pub fn si_to_angular(w: f64) -> f64 {
    w * 1e-9
}
