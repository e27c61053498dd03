use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HtmrError {
    #[error("binary digit must be 0 or 1, got {0}")]
    InvalidDigit(u8),

    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("TMR order {order} exceeds the configured maximum {max}")]
    OrderTooLarge { order: u32, max: u32 },

    #[error("a TMR network needs order >= 1, got {0}")]
    OrderTooSmall(u32),

    #[error("reduction rate is undefined for a zero module error probability")]
    UndefinedReduction,

    #[error("error probability is zero: no errors expected")]
    NoErrorsExpected,

    #[error("expected {expected} leaf modules, got {got}")]
    LeafCountMismatch { expected: usize, got: usize },

    #[error("invalid sweep grid: {0}")]
    InvalidGrid(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "empirical estimates below pf = {limit} are infeasible (requested pf = {pf}); \
         use an analytic-only sweep"
    )]
    EmpiricalInfeasible { pf: f64, limit: f64 },

    #[error("empirical runs need at least one trial")]
    NoTrials,

    #[error("unknown scenario {0:?}; expected one of NNF, NFF, FFF")]
    UnknownScenario(String),
}
