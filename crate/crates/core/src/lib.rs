//! Exact arithmetic workbench for twisted cyclic group rings of purely
//! ramified extensions of discrete valuation rings, their tie descriptions
//! inside matrix rings, and the resulting additive Galois cohomology rings.
//!
//! All scalars are exact rationals or vectors of rationals; there is no
//! floating point anywhere in this crate.

pub mod appendix;
pub mod cohom;
pub mod exact;
pub mod fields;
pub mod modlat;
pub mod nebe;
pub mod oracle;
pub mod poly;
pub mod report;
pub mod ties;
pub mod wedder;

pub use exact::{Mat, Prime, Val, ValuedField};
pub use fields::{Tower, TowerKind};

/// Crate-wide error taxonomy. `Usage` maps to CLI exit code 2, the rest to 1.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal consistency error: {0}")]
    Internal(String),
    #[error("resource guard: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, Error>;
