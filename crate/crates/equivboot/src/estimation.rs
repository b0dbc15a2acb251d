//! Likelihood, unconstrained MLE and the norm-constrained MLE.
//!
//! The constrained problem maximizes the multinomial log-likelihood over
//! pairs of simplex points subject to `||p - q|| = epsilon`. No closed form
//! exists, so the solver runs projected gradient ascent on an augmented
//! (multiplier + quadratic penalty) objective over the product of
//! interior-floored simplices, escalates the penalty across outer rounds,
//! and finishes each round by nudging the iterate exactly onto the
//! constraint surface. Multiple deterministic starts cover mirrored and
//! coordinate-swapped optima; ties are broken lexicographically so the
//! result is independent of evaluation order.

use crate::error::{Error, Result};
use crate::norms::{norm_eval, norm_subgradient, NormKind};
use crate::simplex::{theta, CountVector, ProbVector};

/// Settings for the constrained-MLE solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Initial quadratic penalty weight.
    pub penalty_init: f64,
    /// Multiplicative penalty escalation per outer round.
    pub penalty_growth: f64,
    /// Number of outer penalty rounds.
    pub max_outer: usize,
    /// Iteration cap for each inner projected-gradient solve.
    pub max_inner: usize,
    /// Inner convergence threshold on the iterate displacement.
    pub grad_tol: f64,
    /// Accepted deviation `| ||p - q|| - epsilon |` of the returned fit.
    pub constraint_tol: f64,
    /// Number of deterministic starting points.
    pub multistart_count: usize,
    /// Lower bound kept on every probability during optimization, so the
    /// log-likelihood stays finite in the presence of zero counts.
    pub interior_floor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            penalty_init: 10.0,
            penalty_growth: 10.0,
            max_outer: 8,
            max_inner: 2000,
            grad_tol: 1e-10,
            constraint_tol: 1e-8,
            multistart_count: 5,
            interior_floor: 1e-9,
        }
    }
}

impl SolverConfig {
    /// Check the solver settings against the problem dimension.
    pub fn validate(&self, k: usize) -> Result<()> {
        if !(self.penalty_init > 0.0) {
            return Err(Error::InvalidConfig("penalty_init must be positive"));
        }
        if !(self.penalty_growth > 1.0) {
            return Err(Error::InvalidConfig("penalty_growth must exceed 1"));
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::InvalidConfig("iteration caps must be positive"));
        }
        if !(self.grad_tol > 0.0) || !(self.constraint_tol > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive"));
        }
        if self.multistart_count == 0 {
            return Err(Error::InvalidConfig("multistart_count must be positive"));
        }
        if !(self.interior_floor > 0.0 && self.interior_floor < 1.0 / k as f64) {
            return Err(Error::InvalidConfig("interior_floor must lie in (0, 1/k)"));
        }
        Ok(())
    }
}

/// Result of the constrained maximum-likelihood fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedFit {
    pub p_tilde: ProbVector,
    pub q_tilde: ProbVector,
    /// Log-likelihood of the fit; never exceeds the unconstrained maximum.
    pub log_likelihood: f64,
    /// `| ||p - q|| - epsilon |` at the fit.
    pub constraint_residual: f64,
    pub converged: bool,
    pub starts_tried: usize,
}

/// Parameters the bootstrap resamples from, after the case split between
/// the unconstrained and the constrained MLE.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapParams {
    pub p: ProbVector,
    pub q: ProbVector,
    /// Test statistic `||p_hat - q_hat||` of the observed data.
    pub d_hat: f64,
    /// The constrained fit, present exactly when `d_hat < epsilon`.
    pub fit: Option<ConstrainedFit>,
}

impl BootstrapParams {
    pub fn used_constrained(&self) -> bool {
        self.fit.is_some()
    }
}

/// Multinomial log-likelihood of `(p, q)` for observed counts `(x, y)`,
/// dropping the combinatorial constants (they do not depend on the
/// parameters).
///
/// Uses the convention `0 * ln 0 = 0`; a positive count on a
/// zero-probability class is a domain error.
pub fn log_likelihood(
    p: &ProbVector,
    q: &ProbVector,
    x: &CountVector,
    y: &CountVector,
) -> Result<f64> {
    check_dims(p.dim(), x.dim())?;
    check_dims(q.dim(), y.dim())?;
    check_dims(p.dim(), q.dim())?;
    Ok(count_log_lik(x.counts(), p.entries())? + count_log_lik(y.counts(), q.entries())?)
}

fn check_dims(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch { left, right });
    }
    Ok(())
}

fn count_log_lik(counts: &[u64], probs: &[f64]) -> Result<f64> {
    let mut ll = 0.0;
    for (index, (&c, &pr)) in counts.iter().zip(probs).enumerate() {
        if c == 0 {
            continue;
        }
        if pr <= 0.0 {
            return Err(Error::DomainError { index });
        }
        ll += c as f64 * pr.ln();
    }
    Ok(ll)
}

/// Unconstrained MLE: relative class frequencies of each sample.
pub fn mle(x: &CountVector, y: &CountVector) -> (ProbVector, ProbVector) {
    (x.frequencies(), y.frequencies())
}

/// Maximize the log-likelihood subject to `||p - q|| = epsilon`.
pub fn constrained_mle(
    x: &CountVector,
    y: &CountVector,
    epsilon: f64,
    kind: NormKind,
    cfg: &SolverConfig,
) -> Result<ConstrainedFit> {
    check_dims(x.dim(), y.dim())?;
    let k = x.dim();
    cfg.validate(k)?;
    let max = kind.max_on_simplex_differences();
    if !(epsilon > 0.0 && epsilon < max) {
        return Err(Error::EpsilonInfeasible {
            epsilon,
            norm: kind.token(),
            max,
        });
    }

    let (p_hat, q_hat) = mle(x, y);
    let d_hat = norm_eval(kind, &theta(&p_hat, &q_hat)?);

    let problem = Problem {
        x: x.counts(),
        y: y.counts(),
        epsilon,
        kind,
        cfg,
        k,
    };

    let starts = problem.build_starts(p_hat.entries(), q_hat.entries(), d_hat);
    let starts_tried = starts.len();

    let mut best: Option<Candidate> = None;
    let mut best_residual = f64::INFINITY;
    for start in starts {
        let cand = problem.solve_from(start);
        best_residual = best_residual.min(cand.residual);
        if cand.residual <= cfg.constraint_tol {
            best = Some(match best {
                None => cand,
                Some(prev) => pick_candidate(prev, cand),
            });
        }
    }

    let best = best.ok_or(Error::NoConvergence {
        residual: best_residual,
    })?;
    let p_tilde = ProbVector::new(best.p)?;
    let q_tilde = ProbVector::new(best.q)?;
    // Report the log-likelihood and residual of the vectors actually
    // returned (construction renormalizes at fp noise level).
    let log_lik = log_likelihood(&p_tilde, &q_tilde, x, y)?;
    let residual = (norm_eval(kind, &theta(&p_tilde, &q_tilde)?) - epsilon).abs();
    Ok(ConstrainedFit {
        p_tilde,
        q_tilde,
        log_likelihood: log_lik,
        constraint_residual: residual,
        converged: residual <= cfg.constraint_tol,
        starts_tried,
    })
}

/// Case split of the bootstrap-generating parameters: the unconstrained MLE
/// when the data already satisfy the null (`d_hat >= epsilon`, ties
/// included), the constrained MLE otherwise. Either way the returned pair
/// satisfies `||p - q|| >= epsilon - constraint_tol`, which is what makes
/// the resampling null-constrained.
pub fn select_bootstrap_params(
    x: &CountVector,
    y: &CountVector,
    epsilon: f64,
    kind: NormKind,
    cfg: &SolverConfig,
) -> Result<BootstrapParams> {
    check_dims(x.dim(), y.dim())?;
    let (p_hat, q_hat) = mle(x, y);
    let d_hat = norm_eval(kind, &theta(&p_hat, &q_hat)?);
    if d_hat >= epsilon {
        return Ok(BootstrapParams {
            p: p_hat,
            q: q_hat,
            d_hat,
            fit: None,
        });
    }
    let fit = constrained_mle(x, y, epsilon, kind, cfg)?;
    Ok(BootstrapParams {
        p: fit.p_tilde.clone(),
        q: fit.q_tilde.clone(),
        d_hat,
        fit: Some(fit),
    })
}

// ---------------------------------------------------------------------------
// Solver internals
// ---------------------------------------------------------------------------

struct Problem<'a> {
    x: &'a [u64],
    y: &'a [u64],
    epsilon: f64,
    kind: NormKind,
    cfg: &'a SolverConfig,
    k: usize,
}

#[derive(Debug, Clone)]
struct Candidate {
    p: Vec<f64>,
    q: Vec<f64>,
    log_lik: f64,
    residual: f64,
}

fn pick_candidate(a: Candidate, b: Candidate) -> Candidate {
    // Strictly better likelihood wins; near-ties go to the
    // lexicographically largest concatenated parameter vector.
    if (a.log_lik - b.log_lik).abs() <= 1e-8 {
        let a_key = a.p.iter().chain(&a.q);
        let b_key = b.p.iter().chain(&b.q);
        for (av, bv) in a_key.zip(b_key) {
            match av.total_cmp(bv) {
                std::cmp::Ordering::Greater => return a,
                std::cmp::Ordering::Less => return b,
                std::cmp::Ordering::Equal => continue,
            }
        }
        a
    } else if a.log_lik > b.log_lik {
        a
    } else {
        b
    }
}

impl Problem<'_> {
    fn raw_log_lik(&self, p: &[f64], q: &[f64]) -> f64 {
        let mut ll = 0.0;
        for i in 0..self.k {
            if self.x[i] > 0 {
                ll += self.x[i] as f64 * p[i].ln();
            }
            if self.y[i] > 0 {
                ll += self.y[i] as f64 * q[i].ln();
            }
        }
        ll
    }

    fn distance(&self, p: &[f64], q: &[f64]) -> f64 {
        let diff: Vec<f64> = p.iter().zip(q).map(|(a, b)| a - b).collect();
        norm_eval(self.kind, &diff)
    }

    fn objective(&self, p: &[f64], q: &[f64], lambda: f64, rho: f64) -> f64 {
        let e = self.distance(p, q) - self.epsilon;
        self.raw_log_lik(p, q) - lambda * e - rho * e * e
    }

    /// Full multiplier-penalty loop from one starting point, returning the
    /// best surface candidate encountered.
    ///
    /// The start's own refined surface point is recorded as a candidate
    /// before any gradient step: early rounds run at low penalty, where
    /// the ascent can leave the start's basin for the one nearest the
    /// unconstrained MLE, and the whole point of multistart is that the
    /// basins compete on their own optima.
    fn solve_from(&self, start: (Vec<f64>, Vec<f64>)) -> Candidate {
        let cfg = self.cfg;
        let (mut p, mut q) = start;
        let mut lambda = 0.0;
        let mut rho = cfg.penalty_init;
        let mut best: Option<Candidate> = Some(self.refined_candidate(&p, &q));

        for _ in 0..cfg.max_outer {
            self.inner_ascent(&mut p, &mut q, lambda, rho);
            let d = self.distance(&p, &q);
            let e = d - self.epsilon;

            let cand = self.polished_candidate(&p, &q);
            best = Some(match best {
                None => cand,
                Some(prev) => better_of(prev, cand, cfg.constraint_tol),
            });

            if e.abs() <= cfg.constraint_tol {
                break;
            }
            lambda += 2.0 * rho * e;
            rho *= cfg.penalty_growth;
        }
        let best = best.expect("the start itself is a candidate");

        // The penalty turns kink manifolds of the piecewise-linear norms
        // into ill-conditioned valleys where projected gradient crawls.
        // Finish with exact line searches along surface-preserving
        // directions; these can only improve the candidate.
        let refined = self.refined_candidate(&best.p, &best.q);
        better_of(best, refined, cfg.constraint_tol)
    }

    /// Exact coordinate ascent restricted to the constraint surface.
    ///
    /// Two families of moves keep `||p - q|| = epsilon` exactly: shared
    /// transfers (the same amount moves from coordinate `j` to `i` in both
    /// `p` and `q`, leaving the difference untouched) and, for L1/LInf,
    /// one-sided transfers between coordinates whose contribution to the
    /// norm stays fixed (no sign flip for L1, staying below the maximum
    /// for LInf). Each move maximizes the log-likelihood in closed
    /// one-dimensional form by bisecting its monotone derivative.
    fn refine_on_surface(&self, p: &mut [f64], q: &mut [f64]) {
        self.refine_on_surface_bounded(p, q, 25);
    }

    fn refine_on_surface_bounded(&self, p: &mut [f64], q: &mut [f64], max_sweeps: usize) {
        let k = self.k;
        let eta = self.cfg.interior_floor;
        for _ in 0..max_sweeps {
            let mut improved = false;
            // Shared transfers: difference-preserving for every norm.
            for i in 0..k {
                for j in 0..k {
                    if i == j {
                        continue;
                    }
                    let t_lo = (low_bound(p[i], eta) - p[i]).max(low_bound(q[i], eta) - q[i]);
                    let t_hi = (p[j] - low_bound(p[j], eta)).min(q[j] - low_bound(q[j], eta));
                    if t_hi <= t_lo {
                        continue;
                    }
                    let obj = |t: f64| {
                        xlogy(self.x[i], p[i] + t)
                            + xlogy(self.y[i], q[i] + t)
                            + xlogy(self.x[j], p[j] - t)
                            + xlogy(self.y[j], q[j] - t)
                    };
                    let slope = |t: f64| {
                        ratio(self.x[i], p[i] + t) + ratio(self.y[i], q[i] + t)
                            - ratio(self.x[j], p[j] - t)
                            - ratio(self.y[j], q[j] - t)
                    };
                    if let Some(t) = maximize_1d(obj, slope, t_lo, t_hi) {
                        p[i] += t;
                        q[i] += t;
                        p[j] -= t;
                        q[j] -= t;
                        improved = true;
                    }
                }
            }
            // One-sided transfers along flat directions of the norm.
            if matches!(self.kind, NormKind::L1 | NormKind::LInf) {
                for a in 0..k {
                    for b in 0..k {
                        if a == b {
                            continue;
                        }
                        improved |= self.one_sided_transfer(p, q, a, b, true);
                        improved |= self.one_sided_transfer(p, q, a, b, false);
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }

    /// Try `side[a] += t, side[b] -= t` on one of the two simplices,
    /// bounded so the norm contribution pattern cannot change.
    fn one_sided_transfer(
        &self,
        p: &mut [f64],
        q: &mut [f64],
        a: usize,
        b: usize,
        on_p: bool,
    ) -> bool {
        let eta = self.cfg.interior_floor;
        let theta_a = p[a] - q[a];
        let theta_b = p[b] - q[b];
        // The transfer changes theta_a by +t and theta_b by -t (p side)
        // or by -t and +t (q side); express bounds on the theta change.
        let sign = if on_p { 1.0 } else { -1.0 };
        let (lo_a, hi_a, lo_b, hi_b) = match self.kind {
            // Both differences must stay on a common closed half-line:
            // within one sign class the two contribution changes cancel,
            // across classes they would add.
            NormKind::L1 => {
                if (theta_a >= 0.0) != (theta_b >= 0.0) {
                    return false;
                }
                let (lo_a, hi_a) = sign_interval(theta_a);
                let (lo_b, hi_b) = sign_interval(theta_b);
                (lo_a, hi_a, lo_b, hi_b)
            }
            // Non-extreme coordinates may move freely below the maximum.
            NormKind::LInf => {
                let d = self.distance(p, q);
                if theta_a.abs() >= d - 1e-12 || theta_b.abs() >= d - 1e-12 {
                    return false;
                }
                (-d, d, -d, d)
            }
            NormKind::L2 => return false,
        };
        // theta_a + sign*t in [lo_a, hi_a]; theta_b - sign*t in [lo_b, hi_b].
        let mut t_lo = f64::NEG_INFINITY;
        let mut t_hi = f64::INFINITY;
        let apply = |lo: f64, hi: f64, s: f64, base: f64, t_lo: &mut f64, t_hi: &mut f64| {
            // base + s*t in [lo, hi]
            if s > 0.0 {
                *t_lo = t_lo.max((lo - base) / s);
                *t_hi = t_hi.min((hi - base) / s);
            } else {
                *t_lo = t_lo.max((hi - base) / s);
                *t_hi = t_hi.min((lo - base) / s);
            }
        };
        apply(lo_a, hi_a, sign, theta_a, &mut t_lo, &mut t_hi);
        apply(lo_b, hi_b, -sign, theta_b, &mut t_lo, &mut t_hi);
        let (side, counts) = if on_p {
            (&mut *p, self.x)
        } else {
            (&mut *q, self.y)
        };
        t_lo = t_lo.max(low_bound(side[a], eta) - side[a]);
        t_hi = t_hi.min(side[b] - low_bound(side[b], eta));
        if t_hi <= t_lo {
            return false;
        }
        let obj = |t: f64| xlogy(counts[a], side[a] + t) + xlogy(counts[b], side[b] - t);
        let slope = |t: f64| ratio(counts[a], side[a] + t) - ratio(counts[b], side[b] - t);
        match maximize_1d(obj, slope, t_lo, t_hi) {
            Some(t) => {
                side[a] += t;
                side[b] -= t;
                true
            }
            None => false,
        }
    }

    /// Projected gradient ascent on the augmented objective at fixed
    /// multiplier and penalty.
    fn inner_ascent(&self, p: &mut Vec<f64>, q: &mut Vec<f64>, lambda: f64, rho: f64) {
        let cfg = self.cfg;
        let k = self.k;
        let eta = cfg.interior_floor;
        let mut f = self.objective(p, q, lambda, rho);
        let mut step = f64::NAN; // sized on the first iteration

        let mut gp = vec![0.0; k];
        let mut gq = vec![0.0; k];
        for _ in 0..cfg.max_inner {
            let diff: Vec<f64> = p.iter().zip(q.iter()).map(|(a, b)| a - b).collect();
            let d = norm_eval(self.kind, &diff);
            let mult = lambda + 2.0 * rho * (d - self.epsilon);
            let sub = norm_subgradient(self.kind, &diff);
            let mut g_inf = 0.0f64;
            for i in 0..k {
                let lp = if self.x[i] > 0 {
                    self.x[i] as f64 / p[i]
                } else {
                    0.0
                };
                let lq = if self.y[i] > 0 {
                    self.y[i] as f64 / q[i]
                } else {
                    0.0
                };
                gp[i] = lp - mult * sub[i];
                gq[i] = lq + mult * sub[i];
                g_inf = g_inf.max(gp[i].abs()).max(gq[i].abs());
            }
            if step.is_nan() {
                step = 1.0 / (1.0 + g_inf);
            }

            // Backtracking line search on the projected step.
            let mut accepted = false;
            let mut s = step;
            for _ in 0..60 {
                let p_new = project_floored(&add_scaled(p, &gp, s), eta);
                let q_new = project_floored(&add_scaled(q, &gq, s), eta);
                let f_new = self.objective(&p_new, &q_new, lambda, rho);
                if f_new > f + 1e-14 * (1.0 + f.abs()) {
                    let move_inf = inf_dist(p, &p_new).max(inf_dist(q, &q_new));
                    *p = p_new;
                    *q = q_new;
                    f = f_new;
                    accepted = true;
                    step = s * 2.0;
                    if move_inf <= cfg.grad_tol {
                        return;
                    }
                    break;
                }
                s *= 0.5;
                if s < 1e-18 {
                    break;
                }
            }
            if !accepted {
                return; // stationary (or stalled on a kink)
            }
        }
    }

    /// Polish onto the surface, then run the exact on-surface ascent.
    fn refined_candidate(&self, p: &[f64], q: &[f64]) -> Candidate {
        let cand = self.polished_candidate(p, q);
        if cand.residual > self.cfg.constraint_tol {
            return cand;
        }
        let mut p = cand.p.clone();
        let mut q = cand.q.clone();
        self.refine_on_surface(&mut p, &mut q);
        let refined = Candidate {
            log_lik: self.raw_log_lik(&p, &q),
            residual: (self.distance(&p, &q) - self.epsilon).abs(),
            p,
            q,
        };
        better_of(cand, refined, self.cfg.constraint_tol)
    }

    /// Nudge `(p, q)` exactly onto the constraint surface and evaluate it.
    /// Falls back to the unpolished point when no feasible move exists.
    fn polished_candidate(&self, p: &[f64], q: &[f64]) -> Candidate {
        let mut p = p.to_vec();
        let mut q = q.to_vec();
        for _ in 0..4 {
            let d = self.distance(&p, &q);
            if (d - self.epsilon).abs() <= 1e-13 {
                break;
            }
            if !self.polish_step(&mut p, &mut q, d) {
                break;
            }
        }
        let residual = (self.distance(&p, &q) - self.epsilon).abs();
        Candidate {
            log_lik: self.raw_log_lik(&p, &q),
            residual,
            p,
            q,
        }
    }

    /// One exact-feasibility move: radial rescale of the difference when no
    /// coordinate would go negative, otherwise a two-coordinate transfer on
    /// whichever of `p`, `q` has slack. Returns false if no move applies.
    fn polish_step(&self, p: &mut [f64], q: &mut [f64], d: f64) -> bool {
        let k = self.k;
        let c = self.epsilon - d;

        if d > 0.0 {
            let t = self.epsilon / d;
            let mut p_new = vec![0.0; k];
            let mut q_new = vec![0.0; k];
            let mut feasible = true;
            for i in 0..k {
                let m = 0.5 * (p[i] + q[i]);
                p_new[i] = m + t * (p[i] - m);
                q_new[i] = m + t * (q[i] - m);
                if p_new[i] < 0.0 || q_new[i] < 0.0 {
                    feasible = false;
                    break;
                }
            }
            if feasible && self.surface_error(&p_new, &q_new) <= 1e-9 {
                p.copy_from_slice(&p_new);
                q.copy_from_slice(&q_new);
                return true;
            }
        }

        // Pair transfer: moving mass from coordinate b to a on one side
        // changes the norm at first order by (u_a - u_b) per unit, exactly
        // so for L1/LInf while no kink flips.
        let diff: Vec<f64> = p.iter().zip(q.iter()).map(|(a, b)| a - b).collect();
        let u = norm_subgradient(self.kind, &diff);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&i, &j| u[j].total_cmp(&u[i]).then(i.cmp(&j)));
        for ai in 0..k.min(3) {
            for bi in (k.saturating_sub(3)..k).rev() {
                if ai >= bi {
                    continue;
                }
                let (a, b) = (order[ai], order[bi]);
                let du = u[a] - u[b];
                if du.abs() < 1e-9 {
                    continue;
                }
                let mu = c / du;
                // p side: p_a += mu, p_b -= mu
                if p[a] + mu >= 0.0 && p[a] + mu <= 1.0 && p[b] - mu >= 0.0 && p[b] - mu <= 1.0 {
                    let mut p_new = p.to_vec();
                    p_new[a] += mu;
                    p_new[b] -= mu;
                    if self.surface_error(&p_new, q) <= 1e-9 {
                        p.copy_from_slice(&p_new);
                        return true;
                    }
                }
                // q side: q_a -= mu, q_b += mu
                if q[a] - mu >= 0.0 && q[a] - mu <= 1.0 && q[b] + mu >= 0.0 && q[b] + mu <= 1.0 {
                    let mut q_new = q.to_vec();
                    q_new[a] -= mu;
                    q_new[b] += mu;
                    if self.surface_error(p, &q_new) <= 1e-9 {
                        q.copy_from_slice(&q_new);
                        return true;
                    }
                }
            }
        }
        false
    }

    fn surface_error(&self, p: &[f64], q: &[f64]) -> f64 {
        (self.distance(p, q) - self.epsilon).abs()
    }
}

fn better_of(a: Candidate, b: Candidate, tol: f64) -> Candidate {
    match (a.residual <= tol, b.residual <= tol) {
        (true, true) => pick_candidate(a, b),
        (true, false) => a,
        (false, true) => b,
        (false, false) => {
            if a.residual <= b.residual {
                a
            } else {
                b
            }
        }
    }
}

fn add_scaled(base: &[f64], dir: &[f64], s: f64) -> Vec<f64> {
    base.iter().zip(dir).map(|(b, d)| b + s * d).collect()
}

/// Lowest value a coordinate may take during refinement: the interior
/// floor, unless the point already sits below it.
fn low_bound(current: f64, eta: f64) -> f64 {
    eta.min(current)
}

/// Closed half-line a difference coordinate must stay in so its L1
/// contribution remains `sign * theta`.
fn sign_interval(theta: f64) -> (f64, f64) {
    if theta >= 0.0 {
        (0.0, f64::INFINITY)
    } else {
        (f64::NEG_INFINITY, 0.0)
    }
}

fn xlogy(count: u64, prob: f64) -> f64 {
    if count == 0 {
        0.0
    } else {
        count as f64 * prob.ln()
    }
}

fn ratio(count: u64, prob: f64) -> f64 {
    if count == 0 {
        0.0
    } else {
        count as f64 / prob
    }
}

/// Maximize a strictly concave 1-D objective on `[t_lo, t_hi]` by
/// bisecting its decreasing derivative. Returns the maximizer only when it
/// improves on `t = 0` by a meaningful margin (0 is always feasible here).
fn maximize_1d(
    obj: impl Fn(f64) -> f64,
    slope: impl Fn(f64) -> f64,
    t_lo: f64,
    t_hi: f64,
) -> Option<f64> {
    debug_assert!(t_lo <= 0.0 && t_hi >= 0.0, "current point must be feasible");
    let mut lo = t_lo;
    let mut hi = t_hi;
    let t_star = if slope(lo) <= 0.0 {
        lo
    } else if slope(hi) >= 0.0 {
        hi
    } else {
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if slope(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let base = obj(0.0);
    let value = obj(t_star);
    (value > base + 1e-13 * (1.0 + base.abs())).then_some(t_star)
}

fn inf_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Euclidean projection onto `{ p : p_i >= floor, sum p = 1 }`.
fn project_floored(v: &[f64], floor: f64) -> Vec<f64> {
    let k = v.len();
    let budget = 1.0 - floor * k as f64;
    debug_assert!(budget > 0.0);
    let mut shifted: Vec<f64> = v.iter().map(|x| x - floor).collect();
    let mut sorted = shifted.clone();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (j, &w) in sorted.iter().enumerate() {
        cumsum += w;
        let candidate = (cumsum - budget) / (j + 1) as f64;
        if w - candidate > 0.0 {
            tau = candidate;
        } else {
            break;
        }
    }
    for x in &mut shifted {
        *x = (*x - tau).max(0.0) + floor;
    }
    shifted
}

impl Problem<'_> {
    /// Deterministic starting points: a radial warm start that is exactly
    /// feasible whenever `d_hat > 0`, then the best of a pool of
    /// mode-targeted starts. Each pool candidate plants the separation
    /// budget on a coordinate pair or on a single coordinate against the
    /// rest (the two extreme-set structures of the optimum), and is scored
    /// by its log-likelihood after a short exact on-surface refinement.
    fn build_starts(&self, p_hat: &[f64], q_hat: &[f64], d_hat: f64) -> Vec<(Vec<f64>, Vec<f64>)> {
        let cfg = self.cfg;
        let k = self.k;
        let eta = cfg.interior_floor;
        let eps = self.epsilon;
        let mid: Vec<f64> = (0..k).map(|i| 0.5 * (p_hat[i] + q_hat[i])).collect();
        let mut starts = Vec::with_capacity(cfg.multistart_count);

        if d_hat > 1e-12 {
            let t = eps / d_hat;
            let mut p = vec![0.0; k];
            let mut q = vec![0.0; k];
            for i in 0..k {
                p[i] = mid[i] + t * (p_hat[i] - mid[i]);
                q[i] = mid[i] + t * (q_hat[i] - mid[i]);
            }
            starts.push((clamp_renorm(&p, eta), clamp_renorm(&q, eta)));
        }

        // Candidate separation directions, as difference vectors of norm
        // epsilon (before clamping).
        let mut directions: Vec<Vec<f64>> = Vec::new();
        for a in 0..k {
            for b in 0..k {
                if a == b {
                    continue;
                }
                let scale = match self.kind {
                    NormKind::LInf => eps,
                    NormKind::L1 => eps / 2.0,
                    NormKind::L2 => eps / std::f64::consts::SQRT_2,
                };
                let mut dir = vec![0.0; k];
                dir[a] = scale;
                dir[b] = -scale;
                directions.push(dir);
            }
        }
        if k >= 3 {
            // One coordinate against an even spread of the rest.
            let w = 1.0 / (k - 1) as f64;
            let scale = match self.kind {
                NormKind::LInf => eps,
                NormKind::L1 => eps / 2.0,
                NormKind::L2 => eps / (1.0 + w).sqrt(),
            };
            for a in 0..k {
                for sign in [1.0, -1.0] {
                    let mut dir = vec![-sign * scale * w; k];
                    dir[a] = sign * scale;
                    directions.push(dir);
                }
            }
        }

        let mut pool: Vec<(f64, usize, Vec<f64>, Vec<f64>)> = Vec::new();
        for (index, dir) in directions.iter().enumerate() {
            let p_raw: Vec<f64> = (0..k).map(|i| mid[i] + 0.5 * dir[i]).collect();
            let q_raw: Vec<f64> = (0..k).map(|i| mid[i] - 0.5 * dir[i]).collect();
            let mut p = clamp_renorm(&p_raw, eta);
            let mut q = clamp_renorm(&q_raw, eta);
            self.refine_on_surface_bounded(&mut p, &mut q, 4);
            let score = self.raw_log_lik(&p, &q);
            pool.push((score, index, p, q));
        }
        pool.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for (_, _, p, q) in pool {
            if starts.len() >= cfg.multistart_count {
                break;
            }
            if starts.iter().any(|(sp, sq)| sp == &p && sq == &q) {
                continue;
            }
            starts.push((p, q));
        }
        starts
    }
}

fn clamp_renorm(v: &[f64], floor: f64) -> Vec<f64> {
    let clamped: Vec<f64> = v.iter().map(|&x| x.max(floor).min(1.0)).collect();
    let sum: f64 = clamped.iter().sum();
    clamped.into_iter().map(|x| x / sum).collect()
}
