//! Polar blocks: the `G2^{(x)n}` transform, Bhattacharyya-bound construction,
//! successive-cancellation decoding and composite (aligned) factor graphs.
//!
//! Indices are 0-based and in natural decoding order: `x = u G2^{(x)n}` with
//! `G2 = [[1, 0], [1, 1]]` and no bit reversal. The most significant bit of an
//! index selects the outermost split, so for `n = 2` the decoder visits
//! `u0, u1, u2, u3`, where `u0` is the all-minus (worst) channel and `u3` the
//! all-plus (best) one.

mod construct;
mod graph;
mod sc;
mod transform;

use thiserror::Error;

pub use construct::{build_spec, evolve_bhattacharyya, PolarCodeSpec};
pub(crate) use construct::best_indices;
pub use graph::{GraphDecoder, PolarGraph, Role};
pub use sc::{boxplus, decide, g_update, sc_decode, BaseSc, Kernel, Pin, ProcessingOrder, ScOutput};
pub use transform::{polar_transform, polar_transform_in_place};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum PolarError {
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("processing order violates decoding dependencies: {0}")]
    InvalidOrder(String),
    #[error("rate {0} outside [0, 1]")]
    Rate(f64),
}

/// Exponent `n` of a power-of-two length.
pub fn log2_len(len: usize) -> Result<u32, PolarError> {
    if len.is_power_of_two() {
        Ok(len.trailing_zeros())
    } else {
        Err(PolarError::NotPowerOfTwo(len))
    }
}

/// Universal blocklength exponent
/// `n = ceil(7 log2(1/delta) + c (log2 log2(4/delta))^2)`.
///
/// `capacity` and `error` do not enter the formula directly; they are the
/// operating point the caller's constant `c` was calibrated for and are only
/// range-checked here.
pub fn blocklength_helper(capacity: f64, delta: f64, error: f64, c: f64) -> u32 {
    assert!(capacity > 0.0 && capacity < 1.0, "capacity must lie in (0, 1)");
    assert!(delta > 0.0, "delta must be positive");
    assert!(error > 0.0, "target error must be positive");
    assert!(c >= 0.0, "c must be non-negative");
    let loglog = (4.0 / delta).log2().log2();
    let v = 7.0 * (1.0 / delta).log2() + c * loglog * loglog;
    // Guard against values like 21.000000000000004.
    (v - 1e-9).ceil().max(0.0) as u32
}
