//! Succinct representations of equivalence classes over `{1, ..., n}`.
//!
//! Given a partition of `n` elements into classes, this crate provides:
//!
//! * an implicit canonical labeling derived from the multiset of class sizes
//!   ([`partition`]),
//! * direct labeling schemes that answer same-class queries from the labels
//!   alone ([`labels`]),
//! * three static query structures at different space/time trade-offs
//!   ([`structures`]): [`structures::CompactEq`] (smallest, logarithmic
//!   query), [`structures::FastEq`] (loglog query), and
//!   [`structures::ConstEq`] (constant-probe query),
//! * a table-driven constant-time ceiling square root ([`isqrt`]), and
//! * a dynamic structure supporting class merges with periodic relabeling
//!   ([`dynamic`]).
//!
//! All static structures are immutable after construction and safe to query
//! from many threads. Batched query entry points live in [`batch`] and use
//! data parallelism when the `parallel` feature (default) is enabled.

pub mod batch;
pub mod bits;
pub mod bitvec;
pub mod dynamic;
pub mod isqrt;
pub mod labels;
pub mod oracle;
pub mod partition;
pub mod predecessor;
pub mod probe;
pub mod rng;
pub mod serialize;
pub mod structures;

use std::fmt;

/// Errors reported by query and construction entry points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Construction input violates a precondition.
    InvalidInput(String),
    /// A query argument falls outside its valid range.
    OutOfRange {
        what: &'static str,
        value: u64,
        max: u64,
    },
    /// A decoded artifact (label or dump) is structurally inconsistent.
    Malformed(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::OutOfRange { what, value, max } => {
                write!(f, "{what} out of range: {value} (max {max})")
            }
            Error::Malformed(msg) => write!(f, "malformed data: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
