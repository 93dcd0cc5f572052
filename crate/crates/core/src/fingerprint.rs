//! Stable 64-bit fingerprints of run inputs (FNV-1a over a canonical byte
//! encoding).

use crate::model::{InputSpec, SpontVariant, SystemParams};
use crate::space::SpaceLayout;

const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const PRIME: u64 = 0x0000_0100_0000_01b3;

#[derive(Debug, Clone, Copy)]
pub struct Fingerprinter(u64);

impl Default for Fingerprinter {
    fn default() -> Self {
        Self(OFFSET)
    }
}

impl Fingerprinter {
    pub fn bytes(mut self, bytes: &[u8]) -> Self {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(PRIME);
        }
        self
    }

    pub fn u64(self, v: u64) -> Self {
        self.bytes(&v.to_le_bytes())
    }

    pub fn f64(self, v: f64) -> Self {
        // +0.0 and -0.0 hash alike
        let v = if v == 0.0 { 0.0 } else { v };
        self.u64(v.to_bits())
    }

    pub fn params(self, p: &SystemParams) -> Self {
        let mut h = self;
        for v in [
            p.g_a, p.g_b, p.kappa_a, p.kappa_b, p.kappa_s, p.gamma, p.omega_s, p.omega_a, p.omega_b, p.omega_12,
            p.omega_13, p.omega_14, p.delta,
        ] {
            h = h.f64(v);
        }
        h = h.u64(match p.spont_variant {
            SpontVariant::LiteralProjector => 0,
            SpontVariant::RadiativeLowering => 1,
        });
        h = match p.input {
            InputSpec::Fock(n) => h.u64(0).u64(n as u64),
            InputSpec::Coherent(nbar) => h.u64(1).f64(nbar),
        };
        h.u64(p.qd_initial_level as u64).u64(p.qd_present as u64)
    }

    pub fn layout(self, layout: &SpaceLayout) -> Self {
        layout
            .factor_dims()
            .iter()
            .fold(self.u64(layout.factors() as u64), |h, &d| h.u64(d as u64))
    }

    pub fn finish(self) -> u64 {
        self.0
    }
}
