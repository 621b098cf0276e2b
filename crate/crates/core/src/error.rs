use thiserror::Error;

/// Errors raised by the estimators, selectors and experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty sample")]
    EmptySample,

    #[error("block length exceeds sample (ell = {ell}, n = {n})")]
    BlockTooLong { ell: usize, n: usize },

    #[error("incompatible block statistics: {0}")]
    IncompatibleStats(String),

    #[error("invalid c0 = {0}: must lie in (0, 1)")]
    InvalidC0(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("beta out of range: {0} (need beta > 2)")]
    BetaOutOfRange(f64),

    #[error("enumeration too large: {size} index tuples exceeds {limit}")]
    EnumerationTooLarge { size: f64, limit: usize },

    #[error("root bracketing failed on ({lo}, {hi})")]
    RootBracketing { lo: f64, hi: f64 },

    #[error("practical-choice window violated: need b0 in ({b0_lo:.5}, {b0_hi:.5}) and delta in (0, {delta_hi:.5}), got b0 = {b0}, delta = {delta}")]
    WindowViolated {
        b0: f64,
        delta: f64,
        b0_lo: f64,
        b0_hi: f64,
        delta_hi: f64,
    },

    #[error("b outside the admissible window: b = {b} not in [{lo:.3}, {hi:.3}]")]
    BOutsideWindow { b: usize, lo: f64, hi: f64 },

    #[error("regime infeasible at this n: {0}")]
    RegimeInfeasible(String),

    #[error("n too small for log scaling (n = {0}, need n >= 8)")]
    TooSmallForLog(usize),

    #[error("quadrature did not converge (estimated error {error:e})")]
    Quadrature { error: f64 },

    #[error("no rate-table row matches {query:?}; valid rows: {valid}")]
    UnknownRateRow { query: String, valid: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by parameter values that cannot be realised
    /// at the given sample size, as opposed to malformed input.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::BlockTooLong { .. }
                | Error::RegimeInfeasible(_)
                | Error::BOutsideWindow { .. }
                | Error::WindowViolated { .. }
                | Error::EnumerationTooLarge { .. }
                | Error::TooSmallForLog(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
