use thiserror::Error;

/// Errors raised by the numeric, simulation and theory layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is not a probability in [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("k = {k} exceeds n = {n}")]
    CountOutOfRange { k: u64, n: u64 },

    #[error("beta parameters must be >= 1 (got alpha = {alpha}, beta = {beta})")]
    InvalidBetaParams { alpha: u64, beta: u64 },

    #[error("at least two arms are required (got {0})")]
    TooFewArms(usize),

    #[error("arm index {arm} out of range for {arms} arms")]
    ArmOutOfRange { arm: usize, arms: usize },

    #[error("exponent h = {0} must be a finite non-negative number")]
    InvalidExponent(f64),

    #[error("selection weights are degenerate: every best-arm probability is zero")]
    DegenerateWeights,

    #[error("arm 1 must be the unique optimal arm (mu1 = {mu1}, mu2 = {mu2})")]
    NotUniqueOptimum { mu1: f64, mu2: f64 },

    #[error("means must lie strictly inside (0, 1) (got {0})")]
    BoundaryMean(f64),

    #[error("gap delta = {0} must lie in (0, 1]")]
    InvalidGap(f64),

    #[error("horizon must be at least {min} (got {got})")]
    HorizonTooShort { min: u64, got: u64 },

    #[error("inconsistent exceedance state: {0}")]
    InconsistentState(String),

    #[error("fit needs at least {needed} points in the tail window (got {got})")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("power-law fit needs positive regret values (got {0} at t = {1})")]
    NonPositiveValue(f64, u64),

    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::InvalidProbability { name, value })
    }
}
