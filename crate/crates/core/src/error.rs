use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the scheduling model and the algorithms built on it.
///
/// Job and machine indices are zero-based here; text formats print them
/// one-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("probabilities sum to {sum}, expected 1")]
    ProbSum { sum: String },
    #[error("probability {prob} for value {value} is not positive")]
    NonPositiveProb { value: u64, prob: String },
    #[error("value {0} appears twice in the distribution")]
    DuplicateValue(u64),
    #[error("empty distribution")]
    EmptyDist,
    #[error("expected value is zero; squared coefficient of variation undefined")]
    ZeroMean,
    #[error("job {job} has zero expected processing time on machine {machine}")]
    ZeroMeanPair { job: usize, machine: usize },
    #[error("job {job} is forbidden on machine {machine}")]
    ForbiddenPair { job: usize, machine: usize },
    #[error("job {0} cannot be processed on any machine")]
    Unschedulable(usize),
    #[error("job {job}: {reason}")]
    InvalidJob { job: usize, reason: String },
    #[error("instance has no machines")]
    NoMachines,
    #[error("releases must be nondecreasing in job order (job {0})")]
    ReleaseOrder(usize),
    #[error("speed factor must satisfy f >= {min}, got {f}")]
    BadSpeed { f: String, min: u32 },
    #[error("start probabilities of job {job} sum to {sum}, expected 1")]
    NotAPolicyDistribution { job: usize, sum: String },
    #[error("horizon {horizon} is too small for a feasible schedule")]
    HorizonTooSmall { horizon: u64 },
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("processing times must be point masses")]
    NotDeterministic,
    #[error("release dates must all be zero")]
    NonzeroRelease,
    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),
    #[error("machine count {m} is not divisible by {h}^2")]
    BadM { m: usize, h: usize },
    #[error("stopping process violated its hypotheses: {0}")]
    HypothesisViolated(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
