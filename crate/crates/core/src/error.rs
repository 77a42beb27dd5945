use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("arm {arm}: mean {value} is outside [0, 1]")]
    MeanOutOfRange { arm: usize, value: f64 },

    #[error("threshold {0} is outside [0, 1]")]
    ThresholdOutOfRange(f64),

    #[error("tolerance must be non-negative and finite, got {0}")]
    NegativeTolerance(f64),

    #[error("instance needs at least one arm")]
    NoArms,

    #[error("arm {arm}: {reason}")]
    InvalidDistribution { arm: usize, reason: String },

    #[error("arm {arm}: distribution mean {dist_mean} does not match declared mean {mean}")]
    DistributionMeanMismatch { arm: usize, mean: f64, dist_mean: f64 },

    #[error("expected {expected} per-arm distributions, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("arm index {index} out of range for {arms} arms")]
    ArmIndex { index: usize, arms: usize },

    #[error("hard-instance construction puts arm {arm} at mean {value}, outside [0, 1]")]
    ConstructedMeanOutOfRange { arm: usize, value: f64 },

    #[error("privacy parameter must be finite and non-negative, got {0}")]
    InvalidEpsilon(f64),

    #[error("reward {0} is outside [0, 1]")]
    RewardOutOfRange(f64),

    #[error("budget T = {budget} is smaller than the number of arms K = {arms}")]
    BudgetTooSmall { budget: u64, arms: usize },

    #[error("arm {0} has not been pulled yet")]
    ArmNeverPulled(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    Domain { name: &'static str, reason: String },

    #[error("exact oracle supports Bernoulli arms only")]
    OracleNonBernoulli,

    #[error("exact oracle enumerates 2^T sequences; T = {0} exceeds the cap of 24")]
    OracleBudgetCap(u64),

    #[error("trial {index} failed: {source}")]
    Trial {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain { name, reason: reason.into() }
    }
}
