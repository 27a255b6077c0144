//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by registry construction, state building, truncation
/// control, and the reduction/measure pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("party count must be at least 1")]
    ZeroParties,

    #[error("party id {0} out of range for {1} parties")]
    PartyOutOfRange(usize, usize),

    #[error("duplicate party id {0} in accelerated set")]
    DuplicateParty(usize),

    #[error("party ids collide when joining registries")]
    PartyCollision,

    #[error("joined registries must keep party ids in ascending order")]
    NonAscendingParties,

    #[error("occupation label has {got} entries, registry has {expected} modes")]
    LabelLength { got: usize, expected: usize },

    #[error("occupation {occ} exceeds dimension {dim} of mode {mode}")]
    OccupationOutOfBounds { mode: usize, occ: u32, dim: u32 },

    #[error("packed label width {0} bits exceeds the 128-bit key budget")]
    LabelWidthExceeded(u32),

    #[error("state norm {0} exceeds 1 beyond tolerance")]
    NormExceedsOne(f64),

    #[error("acceleration parameter r must be finite and non-negative, got {0}")]
    InvalidSqueezing(f64),

    #[error("Rindler frequency must be positive and finite, got {0}")]
    InvalidFrequency(f64),

    #[error("squeezing r={r} inconsistent with frequency omega={omega}")]
    InconsistentSpec { r: f64, omega: f64 },

    #[error("tail tolerance must lie in (0, 1), got {0}")]
    InvalidTailTol(f64),

    #[error("truncation cutoff {needed} exceeds the hard cap {cap} (r too large for the requested tolerance)")]
    CapExceeded { needed: u64, cap: u32 },

    #[error("angle {name}={value} outside [0, 2*pi)")]
    InvalidAngle { name: &'static str, value: f64 },

    #[error("family requires at least {min} parties, got {got}")]
    TooFewParties { min: usize, got: usize },

    #[error("kept modes must form a nonempty subset of the registry")]
    KeepNotSubset,

    #[error("unknown party {0} in partial trace")]
    UnknownParty(usize),

    #[error("subsystems do not partition the visible modes")]
    BadPartition,

    #[error("polylogarithm argument must lie in [0, 1), got {0}")]
    PolylogDomain(f64),

    #[error("closed form not available for this family/acceleration pattern: {0}")]
    UnsupportedPattern(String),

    #[error("inertial coherence is zero; normalized coherence undefined")]
    ZeroInertialCoherence,

    #[error("numeric evaluation supports at most two accelerated parties, got {0}")]
    TooManyAccelerated(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
