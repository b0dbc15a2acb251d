//! The limiting law of the normalized statistic, used as a validation
//! oracle.
//!
//! As both sample sizes grow with `lim n2/n1 > 0`, `sqrt(n) ((p_hat -
//! q_hat) - (p - q))` converges to a centered normal `Z` with degenerate
//! covariance, and the normalized statistic converges to `T =
//! d'_theta(Z)`. This module assembles the covariance, factors it so `Z`
//! can be sampled despite the rank deficiency, pushes draws through the
//! directional derivative and estimates quantiles of `T`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::bootstrap::empirical_quantile;
use crate::error::{Error, Result};
use crate::norms::{directional_derivative, NormKind, DEFAULT_TAU_ACT};
use crate::par::map_indexed;
use crate::sampling::RngStream;
use crate::simplex::ProbVector;

/// A positive-semidefinite covariance with a factor `A` such that
/// `A A^T = Sigma`.
///
/// Differences of simplex-constrained estimators always have singular
/// covariance (every row sums to zero), so sampling goes through the
/// `k x rank` factor instead of a Cholesky decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    sigma: DMatrix<f64>,
    factor: DMatrix<f64>,
}

impl CovMatrix {
    /// Dimension `k`.
    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    /// Rank of the factor.
    pub fn rank(&self) -> usize {
        self.factor.ncols()
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    /// Entry of Sigma.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.sigma[(i, j)]
    }

    /// One draw of `Z = A eta` with `eta` standard normal of dimension
    /// `rank`.
    pub fn sample_z<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let k = self.dim();
        let r = self.rank();
        let eta: Vec<f64> = (0..r).map(|_| rng.sample(StandardNormal)).collect();
        let mut z = vec![0.0; k];
        for i in 0..k {
            let mut acc = 0.0;
            for (j, &e) in eta.iter().enumerate() {
                acc += self.factor[(i, j)] * e;
            }
            z[i] = acc;
        }
        z
    }
}

/// Covariance of the limit `Z` of `sqrt(n) ((p_hat - q_hat) - (p - q))`
/// with `lambda_i = n_i / n`:
///
/// `Sigma = (1/lambda1) (diag(p) - p p^T) + (1/lambda2) (diag(q) - q q^T)`.
///
/// Factored by symmetric eigendecomposition; eigenvalues in `[-1e-10, 0)`
/// are clamped to zero (the ones-direction is null to rounding error).
pub fn covariance_sigma(
    p: &ProbVector,
    q: &ProbVector,
    lambda1: f64,
    lambda2: f64,
) -> Result<CovMatrix> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            left: p.dim(),
            right: q.dim(),
        });
    }
    if !(lambda1 > 0.0 && lambda2 > 0.0 && (lambda1 + lambda2 - 1.0).abs() <= 1e-12) {
        return Err(Error::BadWeights { lambda1, lambda2 });
    }
    let k = p.dim();
    let mut sigma = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            let from_p = if i == j { p[i] * (1.0 - p[i]) } else { -p[i] * p[j] };
            let from_q = if i == j { q[i] * (1.0 - q[i]) } else { -q[i] * q[j] };
            sigma[(i, j)] = from_p / lambda1 + from_q / lambda2;
        }
    }

    let eigen = SymmetricEigen::new(sigma.clone());
    let max_eig = eigen.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v));
    let cutoff = 1e-14 * max_eig.max(1.0);
    let mut cols = Vec::new();
    for (j, &val) in eigen.eigenvalues.iter().enumerate() {
        debug_assert!(val >= -1e-10, "covariance eigenvalue {val} below -1e-10");
        if val > cutoff {
            let col = eigen.eigenvectors.column(j) * val.sqrt();
            cols.push(col);
        }
    }
    let factor = if cols.is_empty() {
        DMatrix::zeros(k, 0)
    } else {
        DMatrix::from_columns(&cols)
    };
    Ok(CovMatrix { sigma, factor })
}

/// `m` independent draws of `T = d'_theta(Z)`.
pub fn sample_limit_t(
    kind: NormKind,
    theta: &[f64],
    sigma: &CovMatrix,
    m: usize,
    stream: &RngStream,
) -> Vec<f64> {
    assert!(m >= 1, "need at least one draw");
    map_indexed(m, |i| {
        let mut rng = stream.derive("draw", i as u64).rng();
        let z = sigma.sample_z(&mut rng);
        directional_derivative(kind, theta, &z, DEFAULT_TAU_ACT)
            .expect("theta and Z share the dimension")
    })
}

/// Empirical `alpha`-quantile of the limit statistic from `m` Monte Carlo
/// draws. For a stable estimate `m` should be at least `10 / alpha`.
pub fn limit_quantile(
    kind: NormKind,
    theta: &[f64],
    sigma: &CovMatrix,
    alpha: f64,
    m: usize,
    stream: &RngStream,
) -> Result<f64> {
    let draws = sample_limit_t(kind, theta, sigma, m, stream);
    empirical_quantile(&draws, alpha)
}
