//! Norm evaluation, active sets and directional derivatives.
//!
//! The test statistic is a norm of the difference `theta = p - q`. The L1
//! and sup norms are not differentiable everywhere, but they admit
//! directional (Hadamard) derivatives whose closed forms are driven by two
//! active sets: the zero coordinates of `theta` (L1 kinks) and the
//! coordinates attaining `±||theta||_inf` (sup-norm kinks). This module
//! evaluates the norms, classifies the active sets with an explicit
//! tolerance band, and evaluates the directional derivative
//! `d'_theta(v) = lim (||theta + t v|| - ||theta||) / t`.

use crate::error::{Error, Result};

/// Norms available for the equivalence test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NormKind {
    /// Sum of absolute differences.
    L1,
    /// Maximum absolute difference.
    LInf,
    /// Euclidean distance.
    L2,
}

impl NormKind {
    /// Short token used on the command line and in CSV output.
    pub fn token(self) -> &'static str {
        match self {
            NormKind::L1 => "l1",
            NormKind::LInf => "linf",
            NormKind::L2 => "l2",
        }
    }

    /// Largest value the norm attains on differences of two points of the
    /// simplex.
    pub fn max_on_simplex_differences(self) -> f64 {
        match self {
            NormKind::L1 => 2.0,
            NormKind::LInf => 1.0,
            NormKind::L2 => std::f64::consts::SQRT_2,
        }
    }
}

impl std::fmt::Display for NormKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.token())
    }
}

impl std::str::FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" | "L1" => Ok(NormKind::L1),
            "linf" | "Linf" | "LInf" => Ok(NormKind::LInf),
            "l2" | "L2" => Ok(NormKind::L2),
            _ => Err(Error::InvalidConfig("norm must be one of l1, linf, l2")),
        }
    }
}

/// Default tolerance for active-set membership. Exact-arithmetic conditions
/// like `theta_i = 0` need a band under floating point; this keeps the
/// classification deterministic near ties.
pub const DEFAULT_TAU_ACT: f64 = 1e-9;

/// Active sets of a difference vector at a given tolerance.
///
/// `zero_set` collects indices with `|theta_i| <= tau`, `plus_set` and
/// `minus_set` the indices attaining `+||theta||_inf` and `-||theta||_inf`
/// within `tau`. When `||theta||_inf <= tau` the vector is treated as zero
/// and all three sets contain every index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveSets {
    pub zero_set: Vec<usize>,
    pub plus_set: Vec<usize>,
    pub minus_set: Vec<usize>,
    /// Whether the norm is (fully) Hadamard differentiable at `theta`:
    /// empty zero set for L1, a single extreme coordinate for LInf, a
    /// nonzero vector for L2.
    pub fully_differentiable: bool,
}

/// Evaluate the chosen norm of `theta`.
pub fn norm_eval(kind: NormKind, theta: &[f64]) -> f64 {
    assert!(!theta.is_empty(), "norm of an empty vector");
    match kind {
        NormKind::L1 => theta.iter().map(|t| t.abs()).sum(),
        NormKind::LInf => theta.iter().fold(0.0, |m, t| m.max(t.abs())),
        NormKind::L2 => theta.iter().map(|t| t * t).sum::<f64>().sqrt(),
    }
}

/// Classify the active sets of `theta` at tolerance `tau_act`.
pub fn active_sets(kind: NormKind, theta: &[f64], tau_act: f64) -> ActiveSets {
    assert!(tau_act >= 0.0, "tau_act must be nonnegative");
    let d_inf = norm_eval(NormKind::LInf, theta);
    let zero_set: Vec<usize> = (0..theta.len())
        .filter(|&i| theta[i].abs() <= tau_act)
        .collect();
    let (plus_set, minus_set) = if d_inf <= tau_act {
        (zero_set.clone(), zero_set.clone())
    } else {
        let plus = (0..theta.len())
            .filter(|&i| (theta[i] - d_inf).abs() <= tau_act)
            .collect();
        let minus = (0..theta.len())
            .filter(|&i| (theta[i] + d_inf).abs() <= tau_act)
            .collect();
        (plus, minus)
    };
    let fully_differentiable = match kind {
        NormKind::L1 => zero_set.is_empty(),
        NormKind::LInf => plus_set.len() + minus_set.len() == 1,
        NormKind::L2 => norm_eval(NormKind::L2, theta) > tau_act,
    };
    ActiveSets {
        zero_set,
        plus_set,
        minus_set,
        fully_differentiable,
    }
}

/// Directional derivative `d'_theta(v)` of the norm at `theta` in
/// direction `v`.
///
/// For L1 every nonzero coordinate contributes `sgn(theta_i) v_i` and every
/// zero coordinate `|v_i|`; for LInf the derivative is the largest of `v_i`
/// over the upper extreme set and `-v_i` over the lower one. At `theta = 0`
/// both formulas reduce to the norm of `v` itself, as does the Euclidean
/// case.
pub fn directional_derivative(
    kind: NormKind,
    theta: &[f64],
    v: &[f64],
    tau_act: f64,
) -> Result<f64> {
    if theta.len() != v.len() {
        return Err(Error::DimensionMismatch {
            left: theta.len(),
            right: v.len(),
        });
    }
    assert!(tau_act >= 0.0, "tau_act must be nonnegative");
    Ok(match kind {
        NormKind::L1 => theta
            .iter()
            .zip(v)
            .map(|(&t, &vi)| {
                if t.abs() <= tau_act {
                    vi.abs()
                } else {
                    t.signum() * vi
                }
            })
            .sum(),
        NormKind::LInf => {
            let d_inf = norm_eval(NormKind::LInf, theta);
            if d_inf <= tau_act {
                norm_eval(NormKind::LInf, v)
            } else {
                let mut best = f64::NEG_INFINITY;
                for (i, &t) in theta.iter().enumerate() {
                    if (t - d_inf).abs() <= tau_act {
                        best = best.max(v[i]);
                    }
                    if (t + d_inf).abs() <= tau_act {
                        best = best.max(-v[i]);
                    }
                }
                best
            }
        }
        NormKind::L2 => {
            let nrm = norm_eval(NormKind::L2, theta);
            if nrm <= tau_act {
                norm_eval(NormKind::L2, v)
            } else {
                theta.iter().zip(v).map(|(t, vi)| t * vi).sum::<f64>() / nrm
            }
        }
    })
}

/// A subgradient of the norm at `theta`, used by the constrained solver.
///
/// L1 uses the componentwise sign with `sgn(0) = 0`; LInf puts the whole
/// weight on the first coordinate attaining the maximum; L2 uses the usual
/// gradient. At `theta = 0` every norm's subdifferential is its dual unit
/// ball; a zero element there would leave the solver with no constraint
/// force at all (the iterate can collapse onto `p = q` and stay), so a
/// fixed nonzero element is returned instead.
pub(crate) fn norm_subgradient(kind: NormKind, theta: &[f64]) -> Vec<f64> {
    if theta.iter().all(|&t| t == 0.0) {
        let k = theta.len();
        let mut g = vec![0.0; k];
        match kind {
            NormKind::L1 => {
                for (i, gi) in g.iter_mut().enumerate() {
                    *gi = if i % 2 == 0 { 1.0 } else { -1.0 };
                }
            }
            NormKind::LInf => {
                g[0] = 0.5;
                g[1] = -0.5;
            }
            NormKind::L2 => {
                g[0] = std::f64::consts::FRAC_1_SQRT_2;
                g[1] = -std::f64::consts::FRAC_1_SQRT_2;
            }
        }
        return g;
    }
    match kind {
        NormKind::L1 => theta
            .iter()
            .map(|&t| {
                if t > 0.0 {
                    1.0
                } else if t < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            })
            .collect(),
        NormKind::LInf => {
            let mut g = vec![0.0; theta.len()];
            let d_inf = norm_eval(NormKind::LInf, theta);
            if d_inf > 0.0 {
                let first = theta
                    .iter()
                    .position(|&t| t.abs() == d_inf)
                    .expect("maximum is attained");
                g[first] = theta[first].signum();
            }
            g
        }
        NormKind::L2 => {
            let nrm = norm_eval(NormKind::L2, theta);
            if nrm > 0.0 {
                theta.iter().map(|t| t / nrm).collect()
            } else {
                vec![0.0; theta.len()]
            }
        }
    }
}
