use thiserror::Error;

/// Errors produced by design, analysis and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("risk {0} is outside [0, 1]")]
    InvalidRisk(f64),

    #[error("angle {0} is outside [0, pi/2]")]
    InvalidAngle(f64),

    #[error("probability {0} is outside the open interval (0, 1)")]
    InvalidProbability(f64),

    #[error("invalid frontier: {0}")]
    InvalidFrontier(String),

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("invalid trial data: {0}")]
    InvalidTrialData(String),

    #[error("invalid alpha strategy: {0}")]
    InvalidStrategy(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("log risk ratio undefined: zero risk in {0}")]
    DegenerateRatio(&'static str),

    #[error("risk difference has zero estimated variance")]
    DegenerateVariance,

    #[error("infeasible design: margin equals the expected effect on this scale")]
    InfeasibleDesign,

    #[error("arcsine Z statistic is zero; significance-level ratio undefined")]
    UndefinedRatio,

    #[error("risk difference and arcsine Z statistics have opposite signs")]
    InconsistentDirection,

    #[error("alpha lookup table does not cover observed control risk {0}")]
    LookupNotCovering(f64),

    #[error("no candidate alpha controls type I error at control risk(s) {0:?}")]
    UncontrollableCell(Vec<f64>),

    #[error("{0} outcome pairs exceed the enumeration limit of {1}")]
    TooLargeToEnumerate(u64, u64),
}

pub type Result<T> = std::result::Result<T, Error>;
