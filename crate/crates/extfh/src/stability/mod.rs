//! Configurable-precision arithmetic, noise injection, backward-instability
//! certificates and the error-experiment harness.

pub mod precision;

pub use precision::{
    mp_sin, Direction, MpContext, MpFloat, PrecisionPolicy, Rounding, RoundingMonitor,
    MIN_MANTISSA_BITS, WORKING_PRECISION_BITS,
};
