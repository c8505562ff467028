//! Error type shared by all modules.

use thiserror::Error;

/// Errors reported by the toolkit. Numeric payloads are carried as `f64`
/// regardless of the working scalar type so the messages stay uniform.
#[derive(Debug, Error)]
pub enum HodgeError {
    /// `Q` outside the density model's admissible interval `[0, q_cavitation)`.
    #[error("density domain: Q = {q} outside [0, {limit})")]
    DensityDomain { q: f64, limit: f64 },

    /// Operation applied at an inadmissible form degree.
    #[error("degree: {op} requires {requirement}, got q = {q}")]
    Degree {
        op: &'static str,
        requirement: &'static str,
        q: usize,
    },

    /// A theorem hypothesis on dimensions is violated (needs n > 2q).
    #[error("dimension hypothesis violated: need n > 2q, got n = {n}, q = {q}")]
    DimensionHypothesis { n: usize, q: usize },

    /// Geometry does not fit inside the domain.
    #[error("geometry: {what}")]
    Geometry { what: String },

    /// Two fields do not live on the same complex / degree.
    #[error("mismatch: {what}")]
    Mismatch { what: String },

    /// Invalid construction parameters.
    #[error("invalid argument: {what}")]
    Invalid { what: String },

    /// Iteration budget exhausted before the residual target was met.
    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e}, target {target:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        target: f64,
    },

    /// Damping cannot keep the field subsonic.
    #[error("subsonic margin violated: max Q = {max_q} exceeds {limit} and damping underflowed")]
    SubsonicViolation { max_q: f64, limit: f64 },

    /// Gauge field entries are not rotations within tolerance.
    #[error("gauge field invalid: {what}")]
    GaugeInvalid { what: String },

    /// Snapshot file malformed or inconsistent.
    #[error("snapshot: {what}")]
    Snapshot { what: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HodgeError>;
