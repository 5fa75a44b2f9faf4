//! Error type shared by all modules.

use thiserror::Error;

/// Library result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A zero of a Blaschke product lies outside the open unit disk.
    #[error("zero outside open disk: |{0}| >= 1")]
    ZeroOutsideDisk(String),

    /// The product has no zero at the origin, so f(0) != 0.
    #[error("f(0) != 0: the zero list must contain the origin")]
    NoZeroAtOrigin,

    /// A unit-modulus argument was not on the circle.
    #[error("{what} must have unit modulus, got |z| = {modulus}")]
    NotOnCircle { what: &'static str, modulus: f64 },

    /// An operation requiring a non-rotation was given a degree-1 product.
    #[error("operation requires an inner function that is not a rotation")]
    RotationRejected,

    /// Generic domain violation (parameter out of range).
    #[error("domain error: {0}")]
    Domain(String),

    /// Empty input where at least one element is required.
    #[error("argument error: {0}")]
    Argument(String),

    /// Root polishing failed to place Clark atoms on the circle.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// A divergent sequence kind was used where summability is required.
    #[error("divergent sequence for tail mode: {0}")]
    DivergentSequence(String),

    /// growth_ratio on an all-zero prefix is undefined.
    #[error("growth ratio undefined: all coefficients up to N are zero")]
    AllZeroPrefix,

    /// The block construction needs a larger N for the given envelope.
    #[error("insufficient scale: phi = {phi} too large at N = {n}; smallest admissible N is {}",
            minimal_n.map_or("unknown within horizon".to_string(), |m| m.to_string()))]
    InsufficientScale { phi: f64, n: u64, minimal_n: Option<u64> },

    /// A correlation-check precondition (index ordering/separation) failed.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Requested grid cannot resolve the integrand.
    #[error("grid too small: need at least {needed} points, got {got}")]
    GridTooSmall { needed: u64, got: u64 },
}
