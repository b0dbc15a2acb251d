//! The constrained parametric bootstrap test.
//!
//! Procedure: estimate `(p_hat, q_hat)` by relative frequencies and the
//! statistic `d_hat = ||p_hat - q_hat||`; pick the bootstrap-generating
//! pair by the case split of [`select_bootstrap_params`] (constrained onto
//! `||p - q|| = epsilon` when `d_hat < epsilon`); resample `B` pairs of
//! multinomials from it; reject the null `||p - q|| >= epsilon` when
//! `d_hat` falls below the empirical `alpha`-quantile of the bootstrap
//! statistics. Small `d_hat` is evidence of equivalence, so rejection
//! certifies similarity.

use crate::error::{Error, Result};
use crate::estimation::{select_bootstrap_params, ConstrainedFit, SolverConfig};
use crate::norms::{norm_eval, NormKind};
use crate::par::map_indexed;
use crate::sampling::{multinomial_sample, RngStream};
use crate::simplex::{theta, CountVector};

/// Everything the test needs besides the data.
#[derive(Debug, Clone, PartialEq)]
pub struct TestConfig {
    pub norm: NormKind,
    /// Equivalence margin of the hypotheses.
    pub epsilon: f64,
    /// Nominal level, in (0, 0.5).
    pub alpha: f64,
    /// Number of bootstrap replicates.
    pub bootstrap_b: usize,
    /// Root seed; every random draw is derived from it.
    pub seed: u64,
    pub solver: SolverConfig,
}

impl TestConfig {
    /// A configuration with the default level 0.05, 500 replicates and
    /// seed 0.
    pub fn new(norm: NormKind, epsilon: f64) -> Self {
        Self {
            norm,
            epsilon,
            alpha: 0.05,
            bootstrap_b: 500,
            seed: 0,
            solver: SolverConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidConfig("epsilon must be positive and finite"));
        }
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(Error::InvalidConfig("alpha must lie in (0, 0.5)"));
        }
        if self.bootstrap_b == 0 {
            return Err(Error::InvalidConfig("bootstrap_b must be at least 1"));
        }
        Ok(())
    }
}

/// Outcome of one test invocation.
///
/// The asymptotic guarantees assume the level is small enough that the
/// limiting statistic's `alpha`-quantile is negative; that cannot be
/// checked from data, so it is not gated on here.
#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    /// Observed statistic `||p_hat - q_hat||`.
    pub d_hat: f64,
    /// Empirical `alpha`-quantile of the bootstrap statistics.
    pub quantile_hat: f64,
    /// True iff `d_hat < quantile_hat`: the distributions are declared
    /// equivalent.
    pub reject: bool,
    /// The `B` bootstrap statistics, in replicate order.
    pub bootstrap_stats: Vec<f64>,
    /// Whether the resampling parameters came from the constrained fit.
    pub used_constrained: bool,
    /// The constrained fit, when used.
    pub fit: Option<ConstrainedFit>,
    /// Configuration echo (includes the seed).
    pub config: TestConfig,
}

impl TestReport {
    /// Norm distance of the bootstrap-generating pair; `epsilon` up to the
    /// solver tolerance whenever the constrained fit was used.
    pub fn generating_distance(&self) -> f64 {
        match &self.fit {
            Some(fit) => {
                let diff = theta(&fit.p_tilde, &fit.q_tilde)
                    .expect("fit vectors share the dimension");
                norm_eval(self.config.norm, &diff)
            }
            None => self.d_hat,
        }
    }
}

/// Empirical `alpha`-quantile: the `ceil(alpha * B)`-th smallest value
/// (left-continuous inverse CDF).
pub fn empirical_quantile(sample: &[f64], alpha: f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig("alpha must lie in (0, 1)"));
    }
    let b = sample.len();
    let t = alpha * b as f64;
    // ceil(alpha * B) with protection against fp noise just above an
    // integer (e.g. 0.05 * 1000 = 50.000000000000007).
    let rank = if (t - t.round()).abs() < 1e-9 {
        t.round() as usize
    } else {
        t.ceil() as usize
    };
    let rank = rank.clamp(1, b);
    let mut sorted = sample.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(sorted[rank - 1])
}

/// Run the constrained parametric bootstrap test.
///
/// Deterministic given `(x, y, config)`: replicate `b` draws from the
/// stream `root/boot/b`, so parallel and sequential execution produce the
/// same report.
pub fn equivalence_test(
    x: &CountVector,
    y: &CountVector,
    config: &TestConfig,
) -> Result<TestReport> {
    config.validate()?;
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            left: x.dim(),
            right: y.dim(),
        });
    }

    let params = select_bootstrap_params(x, y, config.epsilon, config.norm, &config.solver)?;
    let n1 = x.total();
    let n2 = y.total();
    let root = RngStream::from_seed(config.seed);

    let kind = config.norm;
    let bootstrap_stats = map_indexed(config.bootstrap_b, |b| {
        let mut rng = root.derive("boot", b as u64).rng();
        let x_star = multinomial_sample(n1, &params.p, &mut rng);
        let y_star = multinomial_sample(n2, &params.q, &mut rng);
        let p_star = x_star.frequencies();
        let q_star = y_star.frequencies();
        let diff = theta(&p_star, &q_star).expect("resamples share the dimension");
        norm_eval(kind, &diff)
    });

    let quantile_hat = empirical_quantile(&bootstrap_stats, config.alpha)?;
    let reject = params.d_hat < quantile_hat;
    Ok(TestReport {
        d_hat: params.d_hat,
        quantile_hat,
        reject,
        bootstrap_stats,
        used_constrained: params.used_constrained(),
        fit: params.fit,
        config: config.clone(),
    })
}
