use std::fmt;

use crate::qseries::CoefficientDomain;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("coefficient domain mismatch: {left} vs {right}")]
    DomainMismatch {
        left: CoefficientDomain,
        right: CoefficientDomain,
    },
    #[error("negative exponent {0}; invert the series first")]
    NegativeExponent(i64),
    #[error("{0}: series is identically zero through its truncation")]
    ZeroSeries(&'static str),
    #[error("big-float precision must be at least 64 bits, got {0}")]
    InvalidPrecision(u32),
    #[error("operation requires exact-rational coefficients")]
    NotExact,
    #[error("invalid weight {weight}: {reason}")]
    InvalidWeight { weight: i64, reason: &'static str },
    #[error("unsupported level {0}; expected one of 1, 2, 3, 5, 7")]
    UnsupportedLevel(u32),
    #[error("level {level} is not valid here: {reason}")]
    LevelNotAllowed { level: u32, reason: &'static str },
    #[error("truncation shortfall: need {required} terms, have {available}")]
    TruncationShortfall { required: usize, available: usize },
    #[error("arc {arc} does not exist at level {level}")]
    InvalidArc { level: u32, arc: u8 },
    #[error("theta {theta} outside the parameter interval [{lo}, {hi}] of arc {arc}")]
    OutsideArc { arc: u8, theta: f64, lo: f64, hi: f64 },
    #[error("point is not in the upper half-plane")]
    NotInUpperHalfPlane,
    #[error("point is not an elliptic point of level {0}")]
    NotElliptic(u32),
    #[error(
        "truncated evaluation unusable: tail estimate {tail:e} exceeds tolerance {tol:e}; \
         about {required} terms needed, {available} available"
    )]
    InsufficientTruncation {
        tail: f64,
        tol: f64,
        required: usize,
        available: usize,
    },
    #[error("j-decomposition failed: {0}")]
    Decomposition(String),
    #[error("theorem hypothesis not satisfied: {0}")]
    HypothesisFailed(String),
    #[error("valence audit failed: residual {residual}; {diagnostics}")]
    AuditFailed {
        residual: String,
        diagnostics: String,
    },
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("weight mismatch in addition: {left} vs {right}")]
    WeightMismatch { left: i64, right: i64 },
    #[error("unknown generator `{name}` at level {level}")]
    UnknownGenerator { name: String, level: u32 },
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("invalid interval: {0}")]
    InvalidInterval(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl fmt::Display for CoefficientDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientDomain::ExactRational => f.write_str("exact-rational"),
            CoefficientDomain::BigFloat { precision_bits } => {
                write!(f, "big-float({precision_bits} bits)")
            }
        }
    }
}
