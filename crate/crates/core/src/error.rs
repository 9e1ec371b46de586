//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by graph construction, objective evaluation, the
/// integrators, the rate calculus, and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// The graph has more than one connected component.
    #[error("graph is disconnected")]
    DisconnectedGraph,

    /// An edge weight is non-positive or a self-loop was given.
    #[error("invalid edge weight or self-loop: ({i}, {j}, {w})")]
    InvalidWeight { i: usize, j: usize, w: f64 },

    /// An edge references a vertex outside 1..=n.
    #[error("edge endpoint {v} outside 1..={n}")]
    InvalidVertex { v: usize, n: usize },

    /// The symmetric eigensolver did not reach the off-diagonal tolerance.
    #[error("eigensolver failed to converge after {sweeps} sweeps (off-diagonal norm {off:.3e})")]
    EigenFailure { sweeps: usize, off: f64 },

    /// Projection requested onto an optimal set given only as samples.
    #[error("projection unsupported for sample-list optimal sets")]
    UnsupportedOptSet,

    /// A point claimed to lie in the optimal set has a non-vanishing gradient.
    #[error("point is not a minimizer: |grad f| = {grad_norm:.3e} > 1e-8")]
    NotAMinimizer { grad_norm: f64 },

    /// The consensus gain is at or below the threshold required by the
    /// rate calculus.
    #[error("alpha = {alpha} does not exceed the threshold {threshold}")]
    ThresholdViolation { alpha: f64, threshold: f64 },

    /// The interpolation parameter for the convex-case constant is outside
    /// its open interval.
    #[error("iota = {iota} outside (0, {upper})")]
    IotaOutOfRange { iota: f64, upper: f64 },

    /// A state coordinate became NaN/Inf or the trajectory left the
    /// divergence guard ball.
    #[error("non-finite or diverging state at t = {at}")]
    NonFiniteState { at: f64 },

    /// The discrete algorithm requires the dual variable to start at zero.
    #[error("discrete run requires v(0) = 0")]
    NonZeroDualInit,

    /// Fewer points inside the fit window than the fit requires.
    #[error("only {found} points inside the fit window; need at least {need}")]
    InsufficientData { found: usize, need: usize },

    /// The input file is not valid JSON.
    #[error("config parse error: {0}")]
    ParseError(String),

    /// The config parsed but a field is missing or out of range.
    #[error("invalid config field `{field}`: {reason}")]
    ValidationError { field: String, reason: String },

    /// Dimension mismatch between inputs.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
