//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by validation, estimation and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
#[non_exhaustive]
pub enum Error {
    /// A probability entry is negative.
    #[error("probability entry {value} at index {index} is negative")]
    NegativeEntry { index: usize, value: f64 },

    /// A probability entry or parameter is NaN or infinite.
    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    /// Probabilities do not sum to 1 within the simplex tolerance.
    #[error("probabilities sum to {sum}, expected 1 within {tolerance}")]
    SumNotOne { sum: f64, tolerance: f64 },

    /// Fewer than two classes.
    #[error("need at least 2 classes, got {0}")]
    DimensionTooSmall(usize),

    /// Two vectors that must share a dimension do not.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// A count vector with zero trials.
    #[error("count vector must have total >= 1")]
    ZeroTotal,

    /// A positive count meets a zero probability in the likelihood.
    #[error("positive count at index {index} has zero probability")]
    DomainError { index: usize },

    /// The equivalence margin exceeds the norm's range on simplex differences.
    #[error("epsilon {epsilon} is not attainable for {norm} (must lie in (0, {max}))")]
    EpsilonInfeasible {
        epsilon: f64,
        norm: &'static str,
        max: f64,
    },

    /// All multistart attempts of the constrained solver failed.
    #[error("constrained solver did not converge; best residual {residual}")]
    NoConvergence { residual: f64 },

    /// Invalid relative sample-size weights for the limit covariance.
    #[error("weights must be positive and sum to 1, got lambda1={lambda1}, lambda2={lambda2}")]
    BadWeights { lambda1: f64, lambda2: f64 },

    /// Quantile of an empty sample.
    #[error("empty sample")]
    EmptySample,

    /// Scenario parameter outside its domain.
    #[error("delta {delta} outside ({lo}, {hi}) for scenario {name}")]
    BadDelta {
        name: &'static str,
        delta: f64,
        lo: f64,
        hi: f64,
    },

    /// Built-in scenarios are defined for six classes only.
    #[error("scenario requires k = 6, got {0}")]
    BadDimension(usize),

    /// A configuration field violates its invariant.
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
