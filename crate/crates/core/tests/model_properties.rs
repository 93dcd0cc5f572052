use proptest::prelude::*;
use subtractor_core::dense::DenseMatrix;
use subtractor_core::lindblad::hermitian_part;
use subtractor_core::model::{build_model, InputSpec, SpontVariant, SystemParams, Truncations};
use subtractor_core::operator::Operator;
use subtractor_core::space::SpaceLayout;
use subtractor_core::state::StateVector;
use subtractor_core::units::ghz_to_angular;
use subtractor_core::C64;

fn benchmark(input: InputSpec) -> SystemParams {
    let w = ghz_to_angular;
    SystemParams::resonant(w(10.0), w(20.0), w(0.05), w(0.25), w(25.0), input)
}

fn kron(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let (n, m) = (a.dim(), b.dim());
    DenseMatrix::from_fn(n * m, |i, j| a.get(i / m, j / m) * b.get(i % m, j % m))
}

#[test]
fn decomposition_residual_at_benchmark() {
    for variant in [SpontVariant::LiteralProjector, SpontVariant::RadiativeLowering] {
        for input in [InputSpec::Fock(1), InputSpec::Fock(2)] {
            let mut p = benchmark(input);
            p.spont_variant = variant;
            let layout = Truncations::for_input(&input).layout(true).unwrap();
            let model = build_model(&p, &layout).unwrap();
            let h = hermitian_part(&model).unwrap();
            assert!(h.sub(&h.dagger()).unwrap().max_abs() < 1e-10);
            let rebuilt = h.add(&model.total_decay().unwrap().scale(C64::new(0.0, -0.5))).unwrap();
            assert!(model.h_eff.sub(&rebuilt).unwrap().max_abs() < 1e-10);
        }
    }
}

#[test]
fn lossless_hermitian_part_is_h_eff() {
    let mut p = benchmark(InputSpec::Fock(1));
    p.kappa_a = 0.0;
    p.kappa_b = 0.0;
    p.gamma = 0.0;
    // κ_s must stay positive; a lossless target still carries the source term
    let layout = Truncations::for_input(&p.input).layout(true).unwrap();
    let model = build_model(&p, &layout).unwrap();
    let h = hermitian_part(&model).unwrap();
    let decay = model.total_decay().unwrap();
    let expected = model.h_eff.add(&decay.scale(C64::new(0.0, 0.5))).unwrap();
    assert!(h.sub(&expected).unwrap().max_abs() < 1e-12);
}

#[test]
fn hermitian_part_conserves_excitation_number() {
    for input in [InputSpec::Fock(1), InputSpec::Fock(3), InputSpec::Coherent(1.0)] {
        let p = benchmark(input);
        let layout = Truncations::for_input(&input).layout(true).unwrap();
        let model = build_model(&p, &layout).unwrap();
        let h = hermitian_part(&model).unwrap();
        let c = h.commutator(&model.number_op).unwrap();
        assert!(c.max_abs() < 1e-10, "{input:?}: {}", c.max_abs());
        assert!(model.h_eff.commutator(&model.number_op).unwrap().max_abs() < 1e-10);
    }
}

#[test]
fn dot_couplings_follow_selection_rules() {
    // with the cavity losses and detunings removed, H_eff restricted to one
    // photon connects |↑,1_a⟩ only to |↑↓↑⟩ and |↑↓↑⟩ only to |↓,1_b⟩
    let mut p = benchmark(InputSpec::Fock(1));
    p.set_detunings(Default::default());
    let layout = Truncations::for_input(&p.input).layout(true).unwrap();
    let model = build_model(&p, &layout).unwrap();
    let idx = |s: usize, a: usize, b: usize, dot: usize| layout.index_of(&[s, a, b, dot - 1]).unwrap();
    let g = p.g_a;
    let h = &model.h_eff;
    assert_eq!(h.get(idx(0, 0, 0, 3), idx(0, 1, 0, 1)), C64::new(g, 0.0));
    assert_eq!(h.get(idx(0, 0, 1, 2), idx(0, 0, 0, 3)), C64::new(g, 0.0));
    assert_eq!(h.get(idx(0, 0, 0, 4), idx(0, 1, 0, 2)), C64::new(g, 0.0));
    assert_eq!(h.get(idx(0, 0, 1, 1), idx(0, 0, 0, 4)), C64::new(g, 0.0));
    // forbidden: mode-a on 1↔4, mode-b on 1↔3
    assert_eq!(h.get(idx(0, 0, 0, 4), idx(0, 1, 0, 1)), C64::new(0.0, 0.0));
    assert_eq!(h.get(idx(0, 0, 0, 3), idx(0, 0, 1, 1)), C64::new(0.0, 0.0));
    // feed is one-way: target mode-a gains from the source, never the reverse
    let feed = h.get(idx(0, 1, 0, 1), idx(1, 0, 0, 1));
    assert!((feed - C64::new(0.0, -(p.kappa_a * p.kappa_s).sqrt())).norm() < 1e-12);
    assert_eq!(h.get(idx(1, 0, 0, 1), idx(0, 1, 0, 1)), C64::new(0.0, 0.0));
}

#[test]
fn absent_dot_drops_couplings_and_channels() {
    let mut p = benchmark(InputSpec::Fock(1));
    p.qd_present = false;
    let layout = Truncations::for_input(&p.input).layout(false).unwrap();
    let model = build_model(&p, &layout).unwrap();
    assert_eq!(layout.total_dim(), 8);
    assert_eq!(model.collapse.len(), 2);
    assert!(hermitian_part(&model).is_ok());
}

#[test]
fn spont_variants_share_the_same_damping() {
    // both variants give γσ₃₃ + γσ₄₄ in Σ C†C, so H_eff is identical
    let lit = benchmark(InputSpec::Fock(1));
    let mut rad = lit;
    rad.spont_variant = SpontVariant::RadiativeLowering;
    let layout = Truncations::for_input(&lit.input).layout(true).unwrap();
    let a = build_model(&lit, &layout).unwrap();
    let b = build_model(&rad, &layout).unwrap();
    assert!(a.h_eff.sub(&b.h_eff).unwrap().max_abs() < 1e-12);
    let diff = a.total_decay().unwrap().sub(&b.total_decay().unwrap()).unwrap();
    assert!(diff.max_abs() < 1e-12);
    assert_eq!(a.collapse.len(), 4);
    assert_eq!(b.collapse.len(), 6);
}

fn arb_dims() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..4, 1..4)
}

proptest! {
    #[test]
    fn embed_matches_kronecker_product(dims in arb_dims(), slot_seed in 0usize..8, entries in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 9)) {
        let slot = slot_seed % dims.len();
        let d = dims[slot];
        let mut triplets = Vec::new();
        for i in 0..d {
            for j in 0..d {
                let (re, im) = entries[i * 3 + j];
                triplets.push((i, j, C64::new(re, im)));
            }
        }
        let local = Operator::from_triplets(SpaceLayout::single(d).unwrap(), triplets).unwrap();
        let layout = SpaceLayout::new(dims.clone()).unwrap();
        let embedded = local.embed(slot, &layout).unwrap().to_dense();
        let mut expected = DenseMatrix::identity(1);
        for (k, &dk) in dims.iter().enumerate() {
            let factor = if k == slot { local.to_dense() } else { DenseMatrix::identity(dk) };
            expected = kron(&expected, &factor);
        }
        prop_assert_eq!(embedded.dim(), expected.dim());
        for i in 0..expected.dim() {
            for j in 0..expected.dim() {
                prop_assert!((embedded.get(i, j) - expected.get(i, j)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn sparse_apply_matches_dense(n in 1usize..12, entries in prop::collection::vec((0usize..144, -1.0f64..1.0, -1.0f64..1.0), 0..40), x in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 12)) {
        let layout = SpaceLayout::single(n).unwrap();
        let triplets: Vec<_> = entries.iter().map(|&(k, re, im)| ((k / 12) % n, (k % 12) % n, C64::new(re, im))).collect();
        let op = Operator::from_triplets(layout.clone(), triplets).unwrap();
        let amps: Vec<C64> = x[..n].iter().map(|&(re, im)| C64::new(re, im)).collect();
        let psi = StateVector::from_amplitudes(layout, amps.clone()).unwrap();
        let y = op.apply(&psi).unwrap();
        let dense = op.to_dense();
        let mut expected = vec![C64::new(0.0, 0.0); n];
        dense.matvec_into(&amps, &mut expected);
        for (a, b) in y.amplitudes().iter().zip(&expected) {
            prop_assert!((a - b).norm() < 1e-12);
        }
        prop_assert!((y.norm_sq() - y.recompute_norm_sq()).abs() <= 1e-12 * y.norm_sq().max(1e-300));
    }

    #[test]
    fn norm_cache_is_consistent(amps in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..30), scale in 0.0f64..2.0) {
        let layout = SpaceLayout::single(amps.len()).unwrap();
        let v: Vec<C64> = amps.iter().map(|&(re, im)| C64::new(re, im)).collect();
        let mut psi = StateVector::from_amplitudes(layout, v).unwrap();
        prop_assert!((psi.norm_sq() - psi.recompute_norm_sq()).abs() <= 1e-12 * psi.norm_sq().max(1e-300));
        psi.update(|a| a.iter_mut().for_each(|x| *x *= scale));
        prop_assert!((psi.norm_sq() - psi.recompute_norm_sq()).abs() <= 1e-12 * psi.norm_sq().max(1e-300));
    }

    #[test]
    fn random_parameters_conserve_excitation(g in 0.0f64..80.0, kappa in 0.1f64..700.0, kappa_s in 0.05f64..5.0, gamma in 0.0f64..10.0, delta in -200.0f64..200.0, n in 1usize..3) {
        let p = SystemParams::resonant(g, kappa, kappa_s, gamma, delta, InputSpec::Fock(n));
        let layout = Truncations::for_input(&p.input).layout(true).unwrap();
        let model = build_model(&p, &layout).unwrap();
        let h = hermitian_part(&model).unwrap();
        prop_assert!(h.commutator(&model.number_op).unwrap().max_abs() < 1e-10);
    }
}
