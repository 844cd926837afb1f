//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input lies outside an operation's declared domain.
    #[error("domain: {0}")]
    Domain(String),

    /// The request cannot be represented at the working precision
    /// (for example a grid increment below one ulp of the evaluation point).
    #[error("precision: {0}")]
    Precision(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A sum hit its term cap before meeting the stopping estimate.
    /// Carries the best partial result so callers can inspect how far it got.
    #[error("no convergence within {max_terms} terms; best partial value {value} (bound {bound})")]
    NonConvergence {
        max_terms: u64,
        value: String,
        bound: String,
        best: Box<crate::series_engine::SeriesResult>,
    },

    /// The requested series has no finite value.
    #[error("divergent series: {0}")]
    Divergence(String),

    /// Extrapolation deltas stopped shrinking before the target was met.
    #[error("unreliable extrapolation: {0}")]
    Extrapolation(String),

    /// Two independent computation routes disagree beyond their combined
    /// error bounds. The computation is rejected, never averaged.
    #[error(
        "consistency: {what}: {a} [{a_method}] vs {b} [{b_method}] \
         differ by {delta}, combined bound {bound}"
    )]
    Consistency {
        what: String,
        a: String,
        a_method: String,
        b: String,
        b_method: String,
        delta: String,
        bound: String,
    },

    /// A monotone search ran past its configured cap.
    #[error("search cap {cap} exceeded")]
    CapExceeded { cap: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
