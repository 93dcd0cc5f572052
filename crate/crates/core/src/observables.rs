//! Reductions of trajectory jump records.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

// unused when a dependency links std
#[allow(unused_imports)]
use num_traits::Float;

use crate::engine::{EnsembleRecord, TrajectoryRecord};
use crate::model::Channel;
use crate::rng::StreamRng;
use crate::{Error, Result};

/// Default number of bootstrap resamples for g²(0).
pub const BOOTSTRAP_RESAMPLES: usize = 1000;

/// √(p(1−p)/n).
pub fn binomial_stderr(p: f64, n: usize) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    (p * (1.0 - p) / n as f64).max(0.0).sqrt()
}

/// Fate of the first excitation-lowering jump of each trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionProbabilities {
    pub out_a: f64,
    pub out_b: f64,
    /// Any radiative dot channel.
    pub spont: f64,
    /// No lowering jump and the residual excitation is below tolerance.
    pub no_emission: f64,
    /// No lowering jump and excitation left at `t_end`.
    pub incomplete: f64,
    pub n_traj: usize,
}

impl DetectionProbabilities {
    pub fn stderr(&self, p: f64) -> f64 {
        binomial_stderr(p, self.n_traj)
    }
}

fn ensure_nonempty(ens: &EnsembleRecord) -> Result<usize> {
    match ens.trajectories.len() {
        0 => Err(Error::NoData),
        n => Ok(n),
    }
}

fn lowers(ens: &EnsembleRecord, channel: Channel) -> bool {
    ens.channels
        .iter()
        .find(|c| c.channel == channel)
        .is_some_and(|c| c.lowers_excitation)
}

pub fn detection_probabilities(ens: &EnsembleRecord) -> Result<DetectionProbabilities> {
    let n = ensure_nonempty(ens)?;
    let mut counts = [0usize; 5];
    for t in &ens.trajectories {
        let first = t.jumps.iter().find(|j| lowers(ens, j.channel));
        let class = match first.map(|j| j.channel) {
            Some(Channel::OutA) => 0,
            Some(Channel::OutB) => 1,
            Some(Channel::Spont(_)) => 2,
            None if t.residual_excitation > ens.residual_tolerance => 4,
            None => 3,
        };
        counts[class] += 1;
    }
    let p = |k: usize| counts[k] as f64 / n as f64;
    Ok(DetectionProbabilities {
        out_a: p(0),
        out_b: p(1),
        spont: p(2),
        no_emission: p(3),
        incomplete: p(4),
        n_traj: n,
    })
}

/// Ordered channels of the first two cavity detections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPhotonProbabilities {
    pub aa: f64,
    pub ab: f64,
    /// OutB first, then OutA.
    pub ba: f64,
    pub bb: f64,
    /// Fewer than two cavity detections with the excitation exhausted.
    pub lost: f64,
    /// Fewer than two cavity detections with excitation left at `t_end`.
    pub incomplete: f64,
    pub n_traj: usize,
}

impl TwoPhotonProbabilities {
    /// P_ab + P_ba.
    pub fn p_c(&self) -> f64 {
        self.ab + self.ba
    }

    pub fn stderr(&self, p: f64) -> f64 {
        binomial_stderr(p, self.n_traj)
    }
}

pub fn ordered_two_photon_probs(ens: &EnsembleRecord) -> Result<TwoPhotonProbabilities> {
    let n = ensure_nonempty(ens)?;
    let mut counts = [0usize; 6];
    for t in &ens.trajectories {
        let mut cav = t.cavity_jumps().map(|j| j.channel);
        let class = match (cav.next(), cav.next()) {
            (Some(Channel::OutA), Some(Channel::OutA)) => 0,
            (Some(Channel::OutA), Some(Channel::OutB)) => 1,
            (Some(Channel::OutB), Some(Channel::OutA)) => 2,
            (Some(Channel::OutB), Some(Channel::OutB)) => 3,
            _ if t.residual_excitation > ens.residual_tolerance => 5,
            _ => 4,
        };
        counts[class] += 1;
    }
    let p = |k: usize| counts[k] as f64 / n as f64;
    Ok(TwoPhotonProbabilities {
        aa: p(0),
        ab: p(1),
        ba: p(2),
        bb: p(3),
        lost: p(4),
        incomplete: p(5),
        n_traj: n,
    })
}

/// `hist[k]` = number of trajectories with exactly k jumps on `channel`.
pub fn photon_number_histogram(ens: &EnsembleRecord, channel: Channel) -> Result<Vec<u64>> {
    ensure_nonempty(ens)?;
    let mut hist: Vec<u64> = vec![0];
    for t in &ens.trajectories {
        let k = t.count(channel);
        if hist.len() <= k {
            hist.resize(k + 1, 0);
        }
        hist[k] += 1;
    }
    Ok(hist)
}

/// Σ_k k·hist[k] / Σ_k hist[k].
pub fn histogram_mean(hist: &[u64]) -> f64 {
    let total: u64 = hist.iter().sum();
    let weighted: u64 = hist.iter().enumerate().map(|(k, &c)| k as u64 * c).sum();
    weighted as f64 / total as f64
}

/// Mean number of detections on `channel` per trajectory.
pub fn mean_output_photons(ens: &EnsembleRecord, channel: Channel) -> Result<f64> {
    Ok(histogram_mean(&photon_number_histogram(ens, channel)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G2Estimate {
    pub value: f64,
    /// Bootstrap standard deviation; NaN when fewer than two resamples
    /// had a non-zero mean.
    pub stderr: f64,
}

fn g2_from_counts(counts: impl Iterator<Item = usize>) -> Option<f64> {
    let (mut s1, mut s2, mut n) = (0u64, 0u64, 0u64);
    for k in counts {
        let k = k as u64;
        s1 += k;
        s2 += k * k.saturating_sub(1);
        n += 1;
    }
    if s1 == 0 {
        return None;
    }
    let mean = s1 as f64 / n as f64;
    Some((s2 as f64 / n as f64) / (mean * mean))
}

/// g²(0) = ⟨n(n−1)⟩/⟨n⟩² of the counts on `channel`, with a seeded
/// bootstrap over trajectories.
pub fn g2_zero(ens: &EnsembleRecord, channel: Channel, resamples: usize, seed: u64) -> Result<G2Estimate> {
    let n = ensure_nonempty(ens)?;
    let counts: Vec<usize> = ens.trajectories.iter().map(|t| t.count(channel)).collect();
    let value =
        g2_from_counts(counts.iter().copied()).ok_or_else(|| Error::UndefinedCorrelation(channel.to_string()))?;
    let mut rng = StreamRng::new(seed, 0);
    let mut samples = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let draw = (0..n).map(|_| counts[rng.below(n as u64) as usize]);
        if let Some(v) = g2_from_counts(draw) {
            samples.push(v);
        }
    }
    let stderr = if samples.len() < 2 {
        f64::NAN
    } else {
        let m = samples.iter().sum::<f64>() / samples.len() as f64;
        let var = samples.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (samples.len() - 1) as f64;
        var.sqrt()
    };
    Ok(G2Estimate { value, stderr })
}

/// Everything the runner reports for one ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStatistics {
    pub detection: DetectionProbabilities,
    pub two_photon: TwoPhotonProbabilities,
    /// Per channel: (channel, histogram, mean).
    pub counts: Vec<(Channel, Vec<u64>, f64)>,
    pub g2_a: Option<G2Estimate>,
    pub g2_b: Option<G2Estimate>,
    pub incomplete_fraction: f64,
}

impl EnsembleStatistics {
    pub fn compute(ens: &EnsembleRecord, resamples: usize, seed: u64) -> Result<Self> {
        let n = ensure_nonempty(ens)?;
        let mut counts = Vec::new();
        for info in &ens.channels {
            let hist = photon_number_histogram(ens, info.channel)?;
            let mean = histogram_mean(&hist);
            counts.push((info.channel, hist, mean));
        }
        let g2 = |c: Channel| match g2_zero(ens, c, resamples, seed) {
            Ok(v) => Ok(Some(v)),
            Err(Error::UndefinedCorrelation(_)) => Ok(None),
            Err(e) => Err(e),
        };
        let incomplete = ens
            .trajectories
            .iter()
            .filter(|t: &&TrajectoryRecord| t.residual_excitation > ens.residual_tolerance)
            .count();
        Ok(Self {
            detection: detection_probabilities(ens)?,
            two_photon: ordered_two_photon_probs(ens)?,
            counts,
            g2_a: g2(Channel::OutA)?,
            g2_b: g2(Channel::OutB)?,
            incomplete_fraction: incomplete as f64 / n as f64,
        })
    }

    pub fn mean(&self, channel: Channel) -> Option<f64> {
        self.counts.iter().find(|(c, _, _)| *c == channel).map(|(_, _, m)| *m)
    }
}
