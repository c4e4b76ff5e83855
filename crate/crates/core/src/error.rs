use alloc::string::String;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("field degree {degree} outside 1..=64")]
    DegreeOutOfRange { degree: u32 },
    #[error("modulus must have degree {degree} and a nonzero constant term")]
    BadModulus { degree: u32 },
    #[error("modulus is reducible over GF(2)")]
    Reducible,
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("value does not fit in GF(2^{degree})")]
    ElementOutOfRange { degree: u32 },
    #[error("malformed hex value {0:?}")]
    BadHex(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("series is zero to the known precision")]
    ZeroSeries,
    #[error("coefficient of t^{exponent} is nonzero, so the series is not a square")]
    NotASquare { exponent: i64 },
    #[error("precision t^{available} is insufficient (need t^{required})")]
    InsufficientPrecision { available: i64, required: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("polynomials use different variable lists")]
    VarMismatch,
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("divisor does not divide the dividend exactly")]
    NotDivisible,
    #[error("division by the zero polynomial")]
    ZeroDivisor,
    #[error("coordinate systems do not match: expected {expected}, found {found}")]
    CoordinateMismatch {
        expected: &'static str,
        found: &'static str,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CurveError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("omega must differ from 0 and 1")]
    DegenerateOmega,
    #[error("elements belong to different curve rings")]
    RingMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("the quadric map is undefined at its base point")]
    BasePoint,
    #[error("the Frobenius step is undefined at the excluded point (0:0:1:mu)")]
    ExcludedPoint,
    #[error("all coordinates are zero")]
    ZeroPoint,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("orbit did not close within {steps} steps")]
    StepLimit { steps: u64 },
}
