//! Kernel error type.
//!
//! Every mathematically meaningful failure carries a named variant so that
//! callers (and the CLI report layer) can surface it by name.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("mode mismatch: {0}")]
    ModeMismatch(String),
    #[error("auxiliary parameter mismatch: {0}")]
    AuxMismatch(String),
    #[error("zero series has no leading term")]
    ZeroSeries,
    #[error("zero operator has no order")]
    ZeroOperator,
    #[error("not a unit: constant term vanishes in Taylor mode")]
    NotAUnit,
    #[error("residue obstruction: an x{0}^-1 term blocks antidifferentiation")]
    ResidueObstruction(usize),
    #[error("leading exponent not divisible by {0}")]
    ExponentNotDivisible(u32),
    #[error("leading coefficient is not a rational {0}-th power")]
    CoefficientNotAPower(u32),
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("result has an infinite tail; truncate the inputs to a finite window first")]
    InfiniteTail,
    #[error("internal precision loss: {0}")]
    PrecisionLoss(String),
    #[error("operator is not invertible in E: leading coefficient is not a unit")]
    NotInvertibleInE,
    #[error("tuple is not pairwise commuting on the window")]
    NotCommuting,
    #[error("wrong form: {0}")]
    WrongForm(String),
    #[error("integration obstruction: compatibility residual depends on x{0}")]
    IntegrationObstruction(usize),
    #[error("operator does not lie in the centralizer: conjugate has x-dependent terms")]
    NotInCentralizer,
    #[error("order mismatch: {0} vs {1}")]
    OrderMismatch(i64, i64),
    #[error("wrong normal form: {0}")]
    WrongNormalForm(String),
    #[error("constraint not satisfied: {0}")]
    ConstraintNotSatisfied(String),
    #[error("gradient hypothesis failed: [U_i, L_i] != 0 for slot {0}")]
    HypothesisFailed(usize),
    #[error("value depends on a formal time parameter")]
    TimeDependent,
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown variable {name}: session has n = {n}")]
    UnknownVariable { name: String, n: usize },
    #[error("exponent overflow: |{0}| exceeds the supported range")]
    ExponentOverflow(i64),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// Stable machine-readable name used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::ModeMismatch(_) => "ModeMismatch",
            Error::AuxMismatch(_) => "AuxMismatch",
            Error::ZeroSeries => "ZeroSeries",
            Error::ZeroOperator => "ZeroOperator",
            Error::NotAUnit => "NotAUnit",
            Error::ResidueObstruction(_) => "ResidueObstruction",
            Error::ExponentNotDivisible(_) => "ExponentNotDivisible",
            Error::CoefficientNotAPower(_) => "CoefficientNotAPower",
            Error::WindowTooSmall(_) => "WindowTooSmall",
            Error::InfiniteTail => "InfiniteTail",
            Error::PrecisionLoss(_) => "PrecisionLoss",
            Error::NotInvertibleInE => "NotInvertibleInE",
            Error::NotCommuting => "NotCommuting",
            Error::WrongForm(_) => "WrongForm",
            Error::IntegrationObstruction(_) => "IntegrationObstruction",
            Error::NotInCentralizer => "NotInCentralizer",
            Error::OrderMismatch(_, _) => "OrderMismatch",
            Error::WrongNormalForm(_) => "WrongNormalForm",
            Error::ConstraintNotSatisfied(_) => "ConstraintNotSatisfied",
            Error::HypothesisFailed(_) => "HypothesisFailed",
            Error::TimeDependent => "TimeDependent",
            Error::Syntax { .. } => "SyntaxError",
            Error::UnknownVariable { .. } => "UnknownVariable",
            Error::ExponentOverflow(_) => "ExponentOverflow",
            Error::Config(_) => "ConfigError",
        }
    }

    /// Usage-level errors exit with code 2 from the CLI; mathematical
    /// errors exit with code 1.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. }
                | Error::UnknownVariable { .. }
                | Error::ExponentOverflow(_)
                | Error::Config(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
