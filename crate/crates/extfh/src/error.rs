use std::fmt;

/// Errors reported by grid construction, weight generation and interpolant
/// evaluation. Parameter-validation variants name the violated constraint so
/// callers (in particular the CLI) can surface it verbatim.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Interval [a, b] with b <= a.
    EmptyInterval { a: f64, b: f64 },
    /// A grid needs at least one interval (n >= 1).
    ZeroIntervalCount,
    /// delta outside 0..=n.
    DeltaOutOfRange { delta: usize, n: usize },
    /// Weight vectors feeding the derivative recurrence must be nonzero.
    ZeroWeight { index: isize },
    /// A constraint of the extended-interpolant parameter tuple was violated.
    InvalidConfig { constraint: &'static str },
    /// Vector length does not match the expected node count.
    DimensionMismatch { expected: usize, got: usize },
    /// The barycentric denominator underflowed to zero away from a node.
    ZeroDenominator { t: f64 },
    /// A reduced-form evaluation received a vanished common denominator.
    ZeroDenominatorSum,
    /// Reduced coefficients are undefined at a node.
    AtNode { t: f64 },
    /// Evaluation produced a non-finite value.
    NonFinite { t: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptyInterval { a, b } => {
                write!(f, "invalid interval: b must exceed a (got a = {a}, b = {b})")
            }
            Self::ZeroIntervalCount => write!(f, "n must be at least 1"),
            Self::DeltaOutOfRange { delta, n } => {
                write!(f, "delta must satisfy 0 <= delta <= n (got delta = {delta}, n = {n})")
            }
            Self::ZeroWeight { index } => {
                write!(f, "weight at index {index} is zero")
            }
            Self::InvalidConfig { constraint } => {
                write!(f, "invalid parameter combination: {constraint}")
            }
            Self::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected} values, got {got}")
            }
            Self::ZeroDenominator { t } => {
                write!(f, "barycentric denominator vanished at t = {t}")
            }
            Self::ZeroDenominatorSum => write!(f, "common denominator is zero"),
            Self::AtNode { t } => {
                write!(f, "reduced coefficients are undefined at the node t = {t}")
            }
            Self::NonFinite { t } => write!(f, "evaluation at t = {t} is not finite"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
