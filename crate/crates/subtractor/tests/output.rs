use proptest::prelude::*;
use subtractor::config::{InputConfig, PointParams};
use subtractor::output::{read_json, to_csv, to_json, write_atomic, ResultsFile, VERSION};
use subtractor::parallel::{pool, run_ensemble_parallel};
use subtractor::runner::{run_points, FLAG_TRUNCATION};
use subtractor::{parse_config, Row};
use subtractor_core::engine::{run_ensemble, Controls};
use subtractor_core::model::{build_model, Truncations};

fn row(estimate: f64, stderr: f64, flags: Vec<String>) -> Row {
    Row {
        axes: vec![("kappa".into(), 20.0)],
        observable: "mean_photons".into(),
        channel: "OutB".into(),
        bin: None,
        estimate,
        stderr,
        n_traj: 100,
        seed: 7,
        fingerprint: format!("{:016x}", 0xabcdu64),
        flags,
    }
}

#[test]
fn single_row_csv_has_header_and_one_line() {
    let bytes = to_csv(&[row(0.5, 0.01, vec![])], &["kappa"]).unwrap();
    let text = String::from_utf8(bytes).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(
        lines[1],
        "2.00000000000e1,mean_photons,OutB,,5.00000000000e-1,1.00000000000e-2,100,7,000000000000abcd,"
    );
    let nan = String::from_utf8(to_csv(&[row(f64::NAN, f64::NAN, vec!["a".into(), "b".into()])], &["kappa"]).unwrap())
        .unwrap();
    assert!(nan.lines().nth(1).unwrap().ends_with(",,,100,7,000000000000abcd,a;b"));
}

#[test]
fn atomic_writes_replace_whole_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/x.txt");
    write_atomic(&path, b"first version").unwrap();
    write_atomic(&path, b"2").unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), b"2");
    assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
}

#[test]
fn parallel_ensemble_matches_sequential() {
    let mut pp = PointParams::benchmark();
    pp.input = InputConfig::Fock(2);
    let p = pp.to_system();
    let layout = Truncations::for_input(&p.input).layout(true).unwrap();
    let m = build_model(&p, &layout).unwrap();
    let c = Controls::for_params(&p);
    let seq = run_ensemble(&m, 300, 12, c).unwrap();
    for workers in [1, 4] {
        assert_eq!(
            run_ensemble_parallel(&pool(workers).unwrap(), &m, 300, 12, c).unwrap(),
            seq
        );
    }
}

#[test]
fn truncation_check_runs_for_coherent_points() {
    let exp = parse_config(
        r#"{"params": {"input": {"coherent": 3}}, "truncations": {"source": 3, "mode_a": 2, "mode_b": 2},
            "n_traj": 200, "oracle": "off"}"#,
    );
    // the config is valid; the coherent state itself does not fit three levels
    assert!(exp.is_ok());
    let err = run_points(&exp.unwrap()).unwrap_err();
    assert_eq!(err.class(), "simulation");

    let exp = parse_config(
        r#"{"params": {"input": {"coherent": 0.2}}, "truncations": {"source": 9, "mode_a": 2, "mode_b": 2},
            "n_traj": 300, "oracle": "off"}"#,
    )
    .unwrap();
    let res = run_points(&exp).unwrap();
    let widened = res[0].widened.as_ref().unwrap();
    assert_eq!(widened.len(), 2);
    let flagged = res[0].flags.iter().any(|f| f == FLAG_TRUNCATION);
    let moved = widened
        .iter()
        .any(|(c, m)| (m - res[0].stats.mean(*c).unwrap()).abs() >= 1e-3);
    assert_eq!(flagged, moved);
}

fn arb_row() -> impl Strategy<Value = Row> {
    (
        prop::collection::vec(("[a-z_]{1,8}", -1e6f64..1e6), 0..3),
        "[a-z_]{1,12}",
        "[A-Za-z0-9]{1,6}",
        prop::option::of(0u64..50),
        prop_oneof![Just(f64::NAN), -1e9f64..1e9],
        prop_oneof![Just(f64::NAN), 0f64..1e3],
        1usize..100_000,
        any::<u64>(),
        prop::collection::vec("[a-z_]{1,10}", 0..3),
    )
        .prop_map(
            |(axes, observable, channel, bin, estimate, stderr, n_traj, seed, flags)| Row {
                axes,
                observable,
                channel,
                bin,
                estimate,
                stderr,
                n_traj,
                seed,
                fingerprint: format!("{seed:016x}"),
                flags,
            },
        )
}

fn same(a: f64, b: f64) -> bool {
    (a.is_nan() && b.is_nan()) || a == b
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn json_round_trip(rows in prop::collection::vec(arb_row(), 0..6)) {
        let config = parse_config(r#"{"preset": "fig2"}"#).unwrap();
        let file = ResultsFile { version: VERSION.into(), config, rows };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        write_atomic(&path, &to_json(&file).unwrap()).unwrap();
        let back = read_json(&path).unwrap();
        prop_assert_eq!(&back.config, &file.config);
        prop_assert_eq!(back.rows.len(), file.rows.len());
        for (x, y) in back.rows.iter().zip(&file.rows) {
            prop_assert!(same(x.estimate, y.estimate) && same(x.stderr, y.stderr));
            prop_assert_eq!(&x.axes, &y.axes);
            prop_assert_eq!((&x.observable, &x.channel, x.bin, x.n_traj, x.seed), (&y.observable, &y.channel, y.bin, y.n_traj, y.seed));
            prop_assert_eq!(&x.flags, &y.flags);
        }
    }

    #[test]
    fn csv_has_one_line_per_row(mut rows in prop::collection::vec(arb_row(), 0..6)) {
        for r in &mut rows {
            r.axes = vec![("x".into(), r.seed as f64), ("y".into(), 0.5)];
        }
        let text = String::from_utf8(to_csv(&rows, &["x", "y"]).unwrap()).unwrap();
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        prop_assert_eq!(reader.headers().unwrap().len(), 11);
        let records: Vec<_> = reader.records().map(Result::unwrap).collect();
        prop_assert_eq!(records.len(), rows.len());
        for (rec, r) in records.iter().zip(&rows) {
            prop_assert_eq!(&rec[2], r.observable.as_str());
            let flags = r.flags.join(";");
            prop_assert_eq!(&rec[10], flags.as_str());
        }
    }
}
