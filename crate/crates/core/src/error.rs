//! Error taxonomy shared by the solver and analysis layers.

/// Crate-wide error type. Variants map onto the failure classes the
/// library distinguishes at the CLI boundary: configuration problems,
/// bad call arguments, runtime step-size trouble, and diagnosed
/// analytical conditions (smallness, divergence).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid scenario or grid configuration (wrong sizes, bad keys).
    #[error("configuration error: {0}")]
    Config(String),

    /// A function received an argument outside its documented domain.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Two fields or records that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The requested time step violates the advective stability bound.
    #[error("time step too large ({context}); suggested dt <= {suggested_dt:.3e}")]
    StepSize { suggested_dt: f64, context: String },

    /// A smallness hypothesis failed on the supplied horizon; rerun with a
    /// shorter one.
    #[error("smallness condition violated beyond t = {t_ok:.3e}; shorten the horizon to at most that time")]
    Smallness { t_ok: f64 },

    /// An iteration stopped contracting.
    #[error("iteration diverged: {0}")]
    Divergence(String),

    /// Filesystem trouble while dumping or loading artifacts.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
