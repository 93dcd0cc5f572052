use alloc::boxed::Box;
use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid dimension {0}: bosonic factors need at least 2 levels")]
    InvalidDimension(usize),
    #[error("invalid dot level {0}: expected 1..=4")]
    InvalidLevel(usize),
    #[error("layout mismatch: {0}")]
    Layout(String),
    #[error("occupation {occupation} does not fit factor {slot} of dimension {dim}")]
    Truncation { slot: usize, occupation: usize, dim: usize },
    #[error("coherent state with mean {nbar} needs more than {dim} Fock levels (tail mass {tail:e})")]
    TruncationTooSmall { nbar: f64, dim: usize, tail: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("integration failure at t = {time} ns: squared norm {norm_sq:e} fell below the floor")]
    IntegrationFailure { time: f64, norm_sq: f64 },
    #[error("non-finite amplitudes at t = {time} ns")]
    Divergence { time: f64 },
    #[error("squared norm increased from {before} to {after} at t = {time} ns")]
    NormIncrease { time: f64, before: f64, after: f64 },
    #[error("no jump possible: every collapse channel has zero flux")]
    NoJumpPossible,
    #[error("trajectory {seed_index} failed: {source}")]
    TrajectoryFailed {
        seed_index: u64,
        #[source]
        source: Box<Error>,
    },
    #[error("H_eff is not H - (i/2) sum C^dag C: residual {residual:e}")]
    ModelInconsistency { residual: f64 },
    #[error("oracle dimension {dim} exceeds the cap {cap}")]
    OracleTooLarge { dim: usize, cap: usize },
    #[error("oracle step {dt} ns is unstable for generator bound {bound} rad/ns")]
    StepSize { dt: f64, bound: f64 },
    #[error("oracle trace drifted by {drift:e}")]
    TraceDrift { drift: f64 },
    #[error("no data: the ensemble is empty")]
    NoData,
    #[error("g2(0) is undefined: mean count on {0} is zero")]
    UndefinedCorrelation(String),
}
