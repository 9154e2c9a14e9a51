use std::path::PathBuf;

/// Errors raised anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0} is not a p-adic unit")]
    NotAUnit(String),
    #[error("bad argument: {0}")]
    BadArgument(String),
    #[error("insufficient precision: need {needed}, have {available}")]
    InsufficientPrecision { needed: u32, available: u32 },
    #[error("p^{prec} with p = {p} does not fit the residue representation")]
    PrecisionOverflow { p: u32, prec: u32 },
    #[error("mismatched parameters: {0}")]
    MismatchedParameters(String),
    #[error("need {needed} samples, got {got}")]
    NotEnoughSamples { needed: usize, got: usize },
    #[error("matrix is not in the required monoid: {0}")]
    NotInMonoid(String),
    #[error("precision too low to certify entry ({row}, {col}): certified order {certified}, bound {bound}")]
    PrecisionTooLow { row: usize, col: usize, certified: i64, bound: i64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("entry ({row}, {col}) cannot be certified after the T-rescaling")]
    NegativePowerUncertified { row: usize, col: usize },
    #[error("characteristic series is unstable at coefficient {index} between sizes {small} and {large}")]
    StabilityFailure { index: usize, small: usize, large: usize },
    #[error("lower hull is uncertified: point at x = {x} may lie below it")]
    UncertifiedHull { x: i64 },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("no slope table for character exponent {0}")]
    MissingCharacterTable(u32),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True when the failure stems from running out of p-adic or T-adic precision.
    pub fn is_precision(&self) -> bool {
        matches!(
            self,
            Error::InsufficientPrecision { .. }
                | Error::PrecisionOverflow { .. }
                | Error::PrecisionTooLow { .. }
                | Error::NegativePowerUncertified { .. }
                | Error::UncertifiedHull { .. }
                | Error::StabilityFailure { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
