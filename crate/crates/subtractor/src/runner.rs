//! Runs every point of an experiment and turns the ensembles into rows.

use serde::{Deserialize, Serialize};
use subtractor_core::engine::EnsembleRecord;
use subtractor_core::lindblad::{evolve_lindblad, OracleOptions};
use subtractor_core::model::{build_model, Channel, InputSpec, ModelOperators, SystemParams};
use subtractor_core::observables::{binomial_stderr, EnsembleStatistics, G2Estimate};

use crate::config::{Experiment, OracleMode, SweepPoint, AUTO_ORACLE_DIM};
use crate::error::RunError;
use crate::parallel::{pool, run_ensemble_parallel};

/// Extra Fock levels per mode for the truncation check.
pub const TRUNCATION_CHECK_EXTRA: usize = 4;
/// Largest accepted change of a mean photon number under the check.
pub const TRUNCATION_CHECK_TOL: f64 = 1e-3;
/// MCWF and oracle fluxes further apart than this many standard errors
/// are flagged.
pub const ORACLE_SIGMAS: f64 = 3.0;

pub const FLAG_ORACLE_MISMATCH: &str = "oracle_mismatch";
pub const FLAG_TRUNCATION: &str = "truncation_unconverged";
pub const FLAG_INCOMPLETE: &str = "incomplete";

/// One long-format output record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    /// Sweep coordinates in axis order, human units.
    pub axes: Vec<(String, f64)>,
    pub observable: String,
    pub channel: String,
    pub bin: Option<u64>,
    /// NaN (JSON null) when undefined, e.g. g²(0) with no counts.
    #[serde(with = "nan_as_null")]
    pub estimate: f64,
    /// NaN when no error estimate applies.
    #[serde(with = "nan_as_null")]
    pub stderr: f64,
    pub n_traj: usize,
    pub seed: u64,
    /// 16 hex digits.
    pub fingerprint: String,
    pub flags: Vec<String>,
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// Results of one sweep point, before flattening.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub point: SweepPoint,
    pub system: SystemParams,
    pub ensemble: EnsembleRecord,
    pub stats: EnsembleStatistics,
    /// Per channel: oracle flux.
    pub oracle: Option<Vec<(Channel, f64)>>,
    /// Per cavity channel: mean photons at the widened truncation.
    pub widened: Option<Vec<(Channel, f64)>>,
    pub flags: Vec<String>,
}

/// Per-channel standard error of the mean count.
fn mean_stderr(ens: &EnsembleRecord, channel: Channel) -> f64 {
    let n = ens.trajectories.len() as f64;
    let counts = ens.trajectories.iter().map(|t| t.count(channel) as f64);
    let mean = counts.clone().sum::<f64>() / n;
    if n < 2.0 {
        return f64::NAN;
    }
    let var = counts.map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (var / n).sqrt()
}

fn build(params: &SystemParams, exp: &Experiment, extra: usize) -> Result<ModelOperators, RunError> {
    let layout = exp
        .truncations_for(params)
        .widened(extra)
        .layout(params.qd_present)
        .map_err(RunError::sim)?;
    build_model(params, &layout).map_err(RunError::sim)
}

fn run_point(exp: &Experiment, point: SweepPoint, pool: &rayon::ThreadPool) -> Result<PointResult, RunError> {
    let system = point.params.to_system();
    let controls = exp.controls.apply(&system);
    controls.validate().map_err(RunError::sim)?;
    let model = build(&system, exp, 0)?;
    let ensemble = run_ensemble_parallel(pool, &model, exp.n_traj, exp.master_seed, controls).map_err(RunError::sim)?;
    let stats =
        EnsembleStatistics::compute(&ensemble, exp.bootstrap_resamples, exp.master_seed).map_err(RunError::sim)?;
    let mut flags = Vec::new();
    if stats.incomplete_fraction > 0.0 {
        flags.push(FLAG_INCOMPLETE.to_string());
    }

    let dim = model.layout.total_dim();
    let run_oracle = match exp.oracle {
        OracleMode::On => true,
        OracleMode::Off => false,
        OracleMode::Auto => dim <= AUTO_ORACLE_DIM,
    };
    let oracle = if run_oracle {
        let res =
            evolve_lindblad(&model, controls.t_end, OracleOptions::default(), |_, _| {}).map_err(RunError::sim)?;
        let mismatch = res.fluxes.iter().any(|&(c, f)| {
            let got = stats.mean(c).unwrap_or(0.0);
            let se = mean_stderr(&ensemble, c).max(1.0 / exp.n_traj as f64);
            (got - f).abs() > ORACLE_SIGMAS * se
        });
        if mismatch {
            flags.push(FLAG_ORACLE_MISMATCH.to_string());
        }
        Some(res.fluxes)
    } else {
        None
    };

    let check = exp
        .truncation_check
        .unwrap_or(matches!(system.input, InputSpec::Coherent(_)));
    let widened = if check {
        let wide = build(&system, exp, TRUNCATION_CHECK_EXTRA)?;
        // same master seed: both runs consume identical random streams
        let ens = run_ensemble_parallel(pool, &wide, exp.n_traj, exp.master_seed, controls).map_err(RunError::sim)?;
        let means: Vec<(Channel, f64)> = [Channel::OutA, Channel::OutB]
            .into_iter()
            .map(|c| {
                let n = ens.trajectories.len() as f64;
                (c, ens.trajectories.iter().map(|t| t.count(c)).sum::<usize>() as f64 / n)
            })
            .collect();
        if means
            .iter()
            .any(|&(c, m)| (m - stats.mean(c).unwrap_or(0.0)).abs() >= TRUNCATION_CHECK_TOL)
        {
            flags.push(FLAG_TRUNCATION.to_string());
        }
        Some(means)
    } else {
        None
    };

    Ok(PointResult {
        point,
        system,
        ensemble,
        stats,
        oracle,
        widened,
        flags,
    })
}

/// Runs every sweep point in order.
pub fn run_points(exp: &Experiment) -> Result<Vec<PointResult>, RunError> {
    let pool = pool(exp.workers)?;
    exp.points()?
        .into_iter()
        .map(|p| {
            let coords = p.coords.clone();
            run_point(exp, p, &pool).map_err(|e| e.at(&coords))
        })
        .collect()
}

impl PointResult {
    pub fn rows(&self) -> Vec<Row> {
        let ens = &self.ensemble;
        let n = ens.n_traj;
        let fingerprint = format!("{:016x}", ens.fingerprint);
        let row = |observable: &str, channel: &str, bin: Option<u64>, estimate: f64, stderr: f64| Row {
            axes: self
                .point
                .coords
                .iter()
                .map(|(p, v)| (p.name().to_string(), *v))
                .collect(),
            observable: observable.to_string(),
            channel: channel.to_string(),
            bin,
            estimate,
            stderr,
            n_traj: n,
            seed: ens.master_seed,
            fingerprint: fingerprint.clone(),
            flags: self.flags.clone(),
        };
        let mut rows = Vec::new();
        let d = &self.stats.detection;
        for (label, p) in [
            ("OutA", d.out_a),
            ("OutB", d.out_b),
            ("Spont", d.spont),
            ("none", d.no_emission),
            ("incomplete", d.incomplete),
        ] {
            rows.push(row("detection_probability", label, None, p, d.stderr(p)));
        }
        if matches!(self.system.input, InputSpec::Fock(k) if k >= 2) {
            let t = &self.stats.two_photon;
            for (label, p) in [
                ("aa", t.aa),
                ("ab", t.ab),
                ("ba", t.ba),
                ("bb", t.bb),
                ("lost", t.lost),
                ("incomplete", t.incomplete),
                ("coincidence", t.p_c()),
            ] {
                rows.push(row("ordered_pair_probability", label, None, p, t.stderr(p)));
            }
        }
        for (c, hist, mean) in &self.stats.counts {
            let label = c.label();
            rows.push(row("mean_photons", &label, None, *mean, mean_stderr(ens, *c)));
            for (k, &count) in hist.iter().enumerate() {
                let p = count as f64 / n as f64;
                rows.push(row(
                    "photon_count",
                    &label,
                    Some(k as u64),
                    count as f64,
                    n as f64 * binomial_stderr(p, n),
                ));
            }
        }
        let g2 = |c: Channel, g: &Option<G2Estimate>| {
            let (v, se) = g.map(|g| (g.value, g.stderr)).unwrap_or((f64::NAN, f64::NAN));
            row("g2_zero", &c.label(), None, v, se)
        };
        rows.push(g2(Channel::OutA, &self.stats.g2_a));
        rows.push(g2(Channel::OutB, &self.stats.g2_b));
        rows.push(row(
            "incomplete_fraction",
            "all",
            None,
            self.stats.incomplete_fraction,
            binomial_stderr(self.stats.incomplete_fraction, n),
        ));
        if let Some(fluxes) = &self.oracle {
            for (c, f) in fluxes {
                rows.push(row("oracle_flux", &c.label(), None, *f, 0.0));
            }
        }
        if let Some(means) = &self.widened {
            for (c, m) in means {
                rows.push(row("mean_photons_widened", &c.label(), None, *m, mean_stderr(ens, *c)));
            }
        }
        rows
    }
}

/// Runs the experiment and flattens it into rows.
pub fn run_experiment(exp: &Experiment) -> Result<Vec<Row>, RunError> {
    Ok(run_points(exp)?.iter().flat_map(PointResult::rows).collect())
}
