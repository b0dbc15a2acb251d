//! Equivalence testing for two multinomial distributions by a constrained
//! parametric bootstrap.
//!
//! Given independent samples `X ~ Multi(n1, p)` and `Y ~ Multi(n2, q)`,
//! the test decides between
//!
//! ```text
//! H0: ||p - q|| >= epsilon     vs.     H1: ||p - q|| < epsilon
//! ```
//!
//! for the L1, sup or Euclidean norm. Rejecting the null certifies that
//! the two distributions are equivalent up to the margin `epsilon`. The
//! critical value is an empirical quantile of bootstrap statistics
//! resampled from estimates forced onto the null boundary
//! `||p - q|| = epsilon`, which keeps the test valid even where the norm
//! is not differentiable (kinks of the L1 and sup norms).
//!
//! Modules:
//!
//! - [`simplex`]: validated probability and count vectors;
//! - [`norms`]: norm evaluation, active sets, directional derivatives;
//! - [`estimation`]: unconstrained and norm-constrained maximum likelihood;
//! - [`sampling`]: splittable deterministic random streams and exact
//!   multinomial sampling;
//! - [`bootstrap`]: the test itself;
//! - [`asymptotics`]: the limiting law of the statistic, as a validation
//!   oracle;
//! - [`simulation`]: Monte Carlo rejection-probability studies.
//!
//! With the default `parallel` feature, bootstrap replicates, Monte Carlo
//! replications and limit-law draws run on the rayon pool; every random
//! quantity is drawn from a path-derived stream, so results are identical
//! with and without parallelism, at any thread count.

pub mod asymptotics;
pub mod bootstrap;
pub mod error;
pub mod estimation;
pub mod norms;
pub mod sampling;
pub mod simplex;
pub mod simulation;

mod par;

pub use bootstrap::{empirical_quantile, equivalence_test, TestConfig, TestReport};
pub use error::{Error, Result};
pub use estimation::{
    constrained_mle, log_likelihood, mle, select_bootstrap_params, BootstrapParams,
    ConstrainedFit, SolverConfig,
};
pub use norms::{active_sets, directional_derivative, norm_eval, ActiveSets, NormKind};
pub use sampling::{multinomial_sample, RngStream};
pub use simplex::{theta, CountVector, ProbVector};
