use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("denominator depends on Q")]
    QDependentDenominator,
    #[error("denominator is not a unit at u = 0")]
    NonUnitConstant,
    #[error("constant term must be {expected}")]
    ConstantTerm { expected: &'static str },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate: {0}")]
    Degenerate(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("trusted range is empty")]
    EmptyTrustedRange,
    #[error("insufficient band: {0}")]
    InsufficientBand(String),
}

pub type Result<T> = std::result::Result<T, Error>;
