//! Classical fourth-order Runge–Kutta step for d|ψ⟩/dt = A|ψ⟩.

use alloc::vec;
use alloc::vec::Vec;

use crate::operator::Operator;
use crate::C64;

#[derive(Debug, Clone)]
pub(crate) struct Rk4Scratch {
    k: [Vec<C64>; 4],
    tmp: Vec<C64>,
}

impl Rk4Scratch {
    pub(crate) fn new(n: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); n];
        Self {
            k: [z.clone(), z.clone(), z.clone(), z.clone()],
            tmp: z,
        }
    }
}

/// `out = ψ(h)` from `psi = ψ(0)` under generator `a` (= −i H_eff).
pub(crate) fn rk4_step(a: &Operator, psi: &[C64], h: f64, out: &mut [C64], s: &mut Rk4Scratch) {
    let [k1, k2, k3, k4] = &mut s.k;
    let tmp = &mut s.tmp;
    a.apply_into(psi, k1);
    for ((t, p), k) in tmp.iter_mut().zip(psi).zip(k1.iter()) {
        *t = p + k * (0.5 * h);
    }
    a.apply_into(tmp, k2);
    for ((t, p), k) in tmp.iter_mut().zip(psi).zip(k2.iter()) {
        *t = p + k * (0.5 * h);
    }
    a.apply_into(tmp, k3);
    for ((t, p), k) in tmp.iter_mut().zip(psi).zip(k3.iter()) {
        *t = p + k * h;
    }
    a.apply_into(tmp, k4);
    let w = h / 6.0;
    for i in 0..psi.len() {
        out[i] = psi[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
    }
}
