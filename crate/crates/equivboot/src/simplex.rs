//! Probability vectors and multinomial count vectors.
//!
//! These are the value types everything else operates on. A [`ProbVector`] is
//! a validated point of the probability simplex; a [`CountVector`] holds
//! observed multinomial counts. Both are immutable after construction.

use crate::error::{Error, Result};

/// Tolerance on `|sum - 1|` accepted by [`ProbVector::new`]. Inputs within
/// the tolerance are renormalized so downstream code sees exact simplex
/// points.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// A point of the probability simplex with `k >= 2` classes.
///
/// Entries are nonnegative and sum to 1 (renormalized at construction).
/// Entries equal to zero are allowed; the estimation routines confine their
/// iterates to the simplex interior separately.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    entries: Vec<f64>,
}

impl ProbVector {
    /// Validate `entries` as class probabilities.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::DimensionTooSmall(entries.len()));
        }
        for (index, &value) in entries.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { index, value });
            }
            if value < 0.0 {
                return Err(Error::NegativeEntry { index, value });
            }
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::SumNotOne {
                sum,
                tolerance: PROB_SUM_TOL,
            });
        }
        let entries = entries.into_iter().map(|e| e / sum).collect();
        Ok(Self { entries })
    }

    /// The uniform distribution on `k` classes.
    pub fn uniform(k: usize) -> Result<Self> {
        Self::new(vec![1.0 / k as f64; k])
    }

    /// Number of classes.
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// Probabilities as a slice.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

impl std::ops::Index<usize> for ProbVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.entries[i]
    }
}

/// Observed multinomial counts with `total = sum(counts) >= 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountVector {
    counts: Vec<u64>,
    total: u64,
}

impl CountVector {
    /// Validate a vector of class counts.
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::DimensionTooSmall(counts.len()));
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::ZeroTotal);
        }
        Ok(Self { counts, total })
    }

    /// Number of classes.
    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    /// Counts as a slice.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of trials.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Relative class frequencies, the unconstrained MLE of the class
    /// probabilities.
    pub fn frequencies(&self) -> ProbVector {
        let n = self.total as f64;
        let entries = self.counts.iter().map(|&c| c as f64 / n).collect();
        // Frequencies sum to 1 up to k rounding errors, well inside the
        // simplex tolerance.
        ProbVector::new(entries).expect("relative frequencies lie on the simplex")
    }
}

impl std::ops::Index<usize> for CountVector {
    type Output = u64;

    fn index(&self, i: usize) -> &u64 {
        &self.counts[i]
    }
}

/// Componentwise difference `p - q` of two probability vectors.
///
/// The result sums to zero (both inputs sum to one).
pub fn theta(p: &ProbVector, q: &ProbVector) -> Result<Vec<f64>> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            left: p.dim(),
            right: q.dim(),
        });
    }
    Ok(p.entries()
        .iter()
        .zip(q.entries())
        .map(|(a, b)| a - b)
        .collect())
}
