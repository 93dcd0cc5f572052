use subtractor_core::engine::{run_ensemble, select_jump_channel, Controls, Evolver, Integrator};
use subtractor_core::model::{
    build_model, Channel, InputSpec, ModelOperators, SpontVariant, SystemParams, Truncations,
};
use subtractor_core::observables::detection_probabilities;
use subtractor_core::rng::StreamRng;
use subtractor_core::state::StateVector;
use subtractor_core::units::ghz_to_angular;
use subtractor_core::{Error, C64};

fn benchmark(input: InputSpec) -> SystemParams {
    let w = ghz_to_angular;
    SystemParams::resonant(w(10.0), w(20.0), w(0.05), w(0.25), w(25.0), input)
}

fn model(p: &SystemParams) -> ModelOperators {
    let layout = Truncations::for_input(&p.input).layout(p.qd_present).unwrap();
    build_model(p, &layout).unwrap()
}

/// Small dimensionless set cheap enough for fixed-step RK4.
fn small(input: InputSpec) -> SystemParams {
    SystemParams::resonant(1.0, 2.0, 1.0, 0.3, 1.0, input)
}

#[test]
fn bare_cavity_emission_times_are_exponential() {
    let mut p = benchmark(InputSpec::Fock(1));
    p.qd_present = false;
    let m = model(&p);
    let n = 10_000;
    let ens = run_ensemble(&m, n, 11, Controls::for_params(&p)).unwrap();
    let mut times: Vec<f64> = ens
        .trajectories
        .iter()
        .filter_map(|t| t.jumps.first().map(|j| j.time))
        .collect();
    times.sort_by(f64::total_cmp);
    // one-sample KS statistic against 1 − exp(−κ_s t); missing jumps lie past t_end
    let mut d: f64 = 0.0;
    for (i, t) in times.iter().enumerate() {
        let f = 1.0 - (-p.kappa_s * t).exp();
        d = d
            .max((f - i as f64 / n as f64).abs())
            .max((f - (i + 1) as f64 / n as f64).abs());
    }
    let critical = 1.628 / (n as f64).sqrt();
    assert!(d < critical, "KS statistic {d} vs {critical}");
}

#[test]
fn channel_selection_follows_flux_ratios() {
    let p = benchmark(InputSpec::Fock(1));
    let m = model(&p);
    let layout = &m.layout;
    let ia = layout.index_of(&[0, 1, 0, 0]).unwrap();
    let ib = layout.index_of(&[0, 0, 1, 0]).unwrap();
    for (wa, wb) in [(1.0, 1.0), (3.0, 1.0)] {
        let mut amps = vec![C64::new(0.0, 0.0); layout.total_dim()];
        amps[ia] = C64::new(f64::sqrt(wa), 0.0);
        amps[ib] = C64::new(0.0, f64::sqrt(wb));
        let psi = StateVector::from_amplitudes(layout.clone(), amps).unwrap();
        let mut rng = StreamRng::new(5, 0);
        let draws = 100_000;
        let hits = (0..draws)
            .filter(|_| select_jump_channel(&psi, &m.collapse, rng.uniform_open()).unwrap() == Channel::OutA)
            .count();
        let p_a = wa / (wa + wb);
        let sigma = (p_a * (1.0 - p_a) / draws as f64).sqrt();
        let got = hits as f64 / draws as f64;
        assert!((got - p_a).abs() < 3.0 * sigma, "{got} vs {p_a}");
    }
    let vacuum = StateVector::basis(layout.clone(), 0).unwrap();
    assert_eq!(
        select_jump_channel(&vacuum, &m.collapse, 0.5),
        Err(Error::NoJumpPossible)
    );
}

#[test]
fn replay_is_bit_identical() {
    let p = benchmark(InputSpec::Fock(2));
    let m = model(&p);
    let c = Controls::for_params(&p);
    let a = run_ensemble(&m, 50, 99, c).unwrap();
    let b = run_ensemble(&m, 50, 99, c).unwrap();
    assert_eq!(a, b);
    let evolver = Evolver::new(&m, c).unwrap();
    // any single trajectory can be replayed out of order
    assert_eq!(evolver.trajectory(99, 37).unwrap(), a.trajectories[37]);
    let other = run_ensemble(&m, 50, 100, c).unwrap();
    assert_ne!(a.trajectories, other.trajectories);
    assert_eq!(a.fingerprint, other.fingerprint);
}

#[test]
fn single_trajectory_ensemble() {
    let p = benchmark(InputSpec::Fock(1));
    let m = model(&p);
    let ens = run_ensemble(&m, 1, 3, Controls::for_params(&p)).unwrap();
    assert_eq!(ens.trajectories.len(), 1);
    assert_eq!(ens.n_traj, 1);
    assert!(matches!(
        run_ensemble(&m, 0, 3, Controls::for_params(&p)),
        Err(Error::InvalidInput(_))
    ));
}

#[test]
fn excitation_ledger_and_photon_counts() {
    for variant in [SpontVariant::LiteralProjector, SpontVariant::RadiativeLowering] {
        for n in [1usize, 2] {
            let mut p = benchmark(InputSpec::Fock(n));
            p.spont_variant = variant;
            // a lossier dot exercises the spontaneous channels
            p.gamma = ghz_to_angular(5.0);
            let m = model(&p);
            let lowering: Vec<bool> = m.collapse.iter().map(|c| c.lowers_excitation).collect();
            let ens = run_ensemble(&m, 400, 21, Controls::for_params(&p)).unwrap();
            for t in &ens.trajectories {
                let mut emitted = 0;
                for j in &t.jumps {
                    let k = m.channel_index(j.channel).unwrap();
                    if lowering[k] {
                        emitted += 1;
                    }
                    let ledger = j.excitation_after + emitted as f64;
                    assert!((ledger - n as f64).abs() < 1e-9, "{variant:?} ledger {ledger}");
                }
                assert!((t.residual_excitation + emitted as f64 - n as f64).abs() < 1e-9);
                let counted = match variant {
                    SpontVariant::LiteralProjector => t.count(Channel::OutA) + t.count(Channel::OutB),
                    SpontVariant::RadiativeLowering => t.jumps.len(),
                };
                assert!(counted <= n);
                if t.residual_excitation < ens.residual_tolerance {
                    assert_eq!(counted, n);
                }
            }
        }
    }
}

#[test]
fn rk4_and_exponential_integrators_agree() {
    let p = small(InputSpec::Fock(2));
    let m = model(&p);
    let exact = Controls::for_params(&p);
    let rk4 = Controls {
        integrator: Integrator::Rk4,
        ..exact
    };
    let a = Evolver::new(&m, exact).unwrap();
    let b = Evolver::new(&m, rk4).unwrap();
    for i in 0..40 {
        let ta = a.trajectory(7, i).unwrap();
        let tb = b.trajectory(7, i).unwrap();
        assert_eq!(ta.jumps.len(), tb.jumps.len(), "trajectory {i}");
        for (x, y) in ta.jumps.iter().zip(&tb.jumps) {
            assert_eq!(x.channel, y.channel);
            assert!(
                (x.time - y.time).abs() < 1e-6 * (1.0 + x.time),
                "{} vs {}",
                x.time,
                y.time
            );
        }
    }
}

#[test]
fn halving_rk4_step_is_within_monte_carlo_error() {
    let p = small(InputSpec::Fock(1));
    let m = model(&p);
    let coarse = Controls {
        integrator: Integrator::Rk4,
        ..Controls::for_params(&p)
    };
    let fine = Controls {
        dt_max: coarse.dt_max / 2.0,
        ..coarse
    };
    let n = 10_000;
    let a = detection_probabilities(&run_ensemble(&m, n, 4, coarse).unwrap()).unwrap();
    let b = detection_probabilities(&run_ensemble(&m, n, 4, fine).unwrap()).unwrap();
    let se = a.stderr(a.out_b);
    assert!((a.out_b - b.out_b).abs() < se, "{} vs {} (se {se})", a.out_b, b.out_b);
}

#[test]
fn norm_is_never_allowed_to_grow() {
    // an anti-damped generator must be rejected, not silently integrated
    let p = small(InputSpec::Fock(1));
    let mut m = model(&p);
    m.h_eff = m
        .h_eff
        .scale(C64::new(1.0, 0.0))
        .add(&m.number_op.scale(C64::new(0.0, 5.0)))
        .unwrap();
    for integrator in [Integrator::default(), Integrator::Rk4] {
        let c = Controls {
            integrator,
            ..Controls::for_params(&p)
        };
        let err = Evolver::new(&m, c).unwrap().trajectory(1, 0).unwrap_err();
        assert!(matches!(err, Error::NormIncrease { .. }), "{err:?}");
    }
}
