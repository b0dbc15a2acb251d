//! Cross-module invariants: estimator orderings, bootstrap structure,
//! distributional smoke tests and solver-vs-oracle spot checks.

mod common;

use common::{gen, grid_oracle_refined, oracle_norm};
use equivboot::asymptotics::{covariance_sigma, sample_limit_t};
use equivboot::bootstrap::{empirical_quantile, equivalence_test, TestConfig};
use equivboot::estimation::{constrained_mle, log_likelihood, mle, SolverConfig};
use equivboot::norms::{active_sets, directional_derivative, norm_eval, NormKind};
use equivboot::sampling::{multinomial_sample, RngStream};
use equivboot::simplex::{theta, CountVector, ProbVector};
use equivboot::simulation::{rejection_probability, BuiltinScenario, Scenario};
use proptest::prelude::*;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

const ALL_NORMS: [NormKind; 3] = [NormKind::L1, NormKind::LInf, NormKind::L2];

fn random_counts<R: Rng>(k: usize, max: u64, rng: &mut R) -> CountVector {
    loop {
        let counts: Vec<u64> = (0..k).map(|_| rng.random_range(0..=max)).collect();
        if counts.iter().sum::<u64>() > 0 {
            return CountVector::new(counts).unwrap();
        }
    }
}

#[test]
fn derivative_is_linear_where_fully_differentiable() {
    let mut rng = gen::rng_for("linear", 0);
    for kind in ALL_NORMS {
        for _ in 0..300 {
            let th = gen::separated_theta(5, &mut rng);
            if !active_sets(kind, &th, 1e-9).fully_differentiable {
                continue;
            }
            let v = gen::direction(5, &mut rng);
            let w = gen::direction(5, &mut rng);
            let vw: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a + b).collect();
            let lhs = directional_derivative(kind, &th, &vw, 1e-9).unwrap();
            let rhs = directional_derivative(kind, &th, &v, 1e-9).unwrap()
                + directional_derivative(kind, &th, &w, 1e-9).unwrap();
            assert!((lhs - rhs).abs() <= 1e-10, "{kind:?}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn constrained_log_likelihood_never_exceeds_the_mle() {
    let mut rng = gen::rng_for("ll-order", 0);
    let cfg = SolverConfig::default();
    for trial in 0..100 {
        let k = if trial % 2 == 0 { 2 } else { 3 };
        let x = random_counts(k, 30, &mut rng);
        let y = random_counts(k, 30, &mut rng);
        let kind = ALL_NORMS[trial % 3];
        let eps = [0.1, 0.2, 0.3][trial % 3];
        let fit = constrained_mle(&x, &y, eps, kind, &cfg).unwrap();
        let (p_hat, q_hat) = mle(&x, &y);
        let ll_hat = log_likelihood(&p_hat, &q_hat, &x, &y).unwrap();
        assert!(
            fit.log_likelihood <= ll_hat + 1e-9,
            "trial {trial}: constrained {} above unconstrained {}",
            fit.log_likelihood,
            ll_hat
        );
    }
}

/// Frozen instance of the k = 3 grid-oracle cross-check: solver and
/// exhaustive search agree on the constrained optimum.
#[test]
fn k3_constrained_fit_matches_grid_oracle() {
    let x = CountVector::new(vec![9, 14, 7]).unwrap();
    let y = CountVector::new(vec![12, 6, 11]).unwrap();
    let cfg = SolverConfig::default();
    let fit = constrained_mle(&x, &y, 0.3, NormKind::L1, &cfg).unwrap();
    let oracle = grid_oracle_refined(x.counts(), y.counts(), 0.3, NormKind::L1);
    assert!(fit.constraint_residual <= cfg.constraint_tol);
    assert!(
        (fit.log_likelihood - oracle.log_lik).abs() <= 1e-4,
        "solver {} vs oracle {}",
        fit.log_likelihood,
        oracle.log_lik
    );
}

#[test]
fn quantile_is_monotone_in_alpha_and_so_is_the_decision() {
    let mut rng = gen::rng_for("alpha-mono", 0);
    let x = random_counts(4, 60, &mut rng);
    let y = random_counts(4, 60, &mut rng);
    let mut config = TestConfig::new(NormKind::L1, 0.4);
    config.bootstrap_b = 400;
    config.seed = 21;
    let mut previous: Option<(f64, bool)> = None;
    for alpha in [0.02, 0.05, 0.1, 0.2, 0.3, 0.45] {
        config.alpha = alpha;
        let report = equivalence_test(&x, &y, &config).unwrap();
        if let Some((q_prev, reject_prev)) = previous {
            assert!(report.quantile_hat >= q_prev);
            if reject_prev {
                assert!(report.reject, "rejection must be monotone in alpha");
            }
        }
        previous = Some((report.quantile_hat, report.reject));
    }
}

#[test]
fn bootstrap_statistics_are_exchangeable() {
    let x = CountVector::new(vec![20, 30, 10]).unwrap();
    let y = CountVector::new(vec![25, 25, 10]).unwrap();
    let mut config = TestConfig::new(NormKind::LInf, 0.3);
    config.bootstrap_b = 257;
    config.seed = 5;
    let report = equivalence_test(&x, &y, &config).unwrap();
    let baseline = empirical_quantile(&report.bootstrap_stats, config.alpha).unwrap();
    let mut permuted = report.bootstrap_stats.clone();
    permuted.reverse();
    permuted.rotate_left(41);
    let from_permuted = empirical_quantile(&permuted, config.alpha).unwrap();
    assert_eq!(baseline, from_permuted);
    assert_eq!(report.reject, report.d_hat < baseline);
}

#[test]
fn pooled_multinomial_counts_pass_chi_square_smoke() {
    // 10^4 draws pooled against the generating distribution at
    // significance 1e-6.
    let p = ProbVector::new(vec![0.35, 0.1, 0.25, 0.05, 0.25]).unwrap();
    let mut rng = RngStream::from_seed(1234).derive("gof", 0).rng();
    let draws = 10_000usize;
    let trials_per_draw = 25u64;
    let mut pooled = vec![0u64; p.dim()];
    for _ in 0..draws {
        let x = multinomial_sample(trials_per_draw, &p, &mut rng);
        for (acc, &c) in pooled.iter_mut().zip(x.counts()) {
            *acc += c;
        }
    }
    let total = (draws as u64 * trials_per_draw) as f64;
    let mut stat = 0.0;
    for (i, &obs) in pooled.iter().enumerate() {
        let expected = total * p[i];
        stat += (obs as f64 - expected).powi(2) / expected;
    }
    let chi2 = ChiSquared::new((p.dim() - 1) as f64).unwrap();
    let critical = chi2.inverse_cdf(1.0 - 1e-6);
    assert!(stat <= critical, "chi-square {stat} above {critical}");
}

#[test]
fn limit_statistic_has_no_atoms_for_nondegenerate_sigma() {
    let p = ProbVector::new(vec![0.3, 0.2, 0.1, 0.4]).unwrap();
    let q = ProbVector::new(vec![0.25, 0.3, 0.15, 0.3]).unwrap();
    let sigma = covariance_sigma(&p, &q, 0.5, 0.5).unwrap();
    let th = theta(&p, &q).unwrap();
    let stream = RngStream::from_seed(77).derive("atoms", 0);
    for kind in ALL_NORMS {
        let mut draws = sample_limit_t(kind, &th, &sigma, 100_000, &stream);
        draws.sort_unstable_by(f64::total_cmp);
        let mut worst = 1usize;
        let mut run = 1usize;
        for w in draws.windows(2) {
            if w[0] == w[1] {
                run += 1;
                worst = worst.max(run);
            } else {
                run = 1;
            }
        }
        assert!(worst <= 3, "{kind:?}: repeated value of multiplicity {worst}");
    }
}

#[test]
fn two_coordinate_extreme_set_dominates_each_single_coordinate() {
    // det16-style difference: the sup norm maximum is attained twice. The
    // limit statistic is the max of two correlated coordinates, so its
    // alpha-quantile lies above the quantile of either coordinate alone.
    let (p, q) = equivboot::simulation::scenario_vectors(BuiltinScenario::Det16, 0.25, 6).unwrap();
    let sigma = covariance_sigma(&p, &q, 0.5, 0.5).unwrap();
    let th = theta(&p, &q).unwrap();
    let stream = RngStream::from_seed(99).derive("pair", 0);
    let m = 100_000;
    let draws_pair = sample_limit_t(NormKind::LInf, &th, &sigma, m, &stream);
    let q_pair = empirical_quantile(&draws_pair, 0.05).unwrap();
    for single in 0..2 {
        // Sub-case oracle: project Z onto one extreme coordinate.
        let singles: Vec<f64> = (0..m)
            .map(|i| {
                let mut rng = stream.derive("draw", i as u64).rng();
                let z = sigma.sample_z(&mut rng);
                z[single]
            })
            .collect();
        let q_single = empirical_quantile(&singles, 0.05).unwrap();
        assert!(
            q_pair > q_single + 0.05,
            "pair quantile {q_pair} vs single {q_single}"
        );
    }
}

#[test]
fn rejection_rate_grows_with_sample_size_in_the_alternative() {
    let scenario = Scenario::builtin(BuiltinScenario::Det15, 0.46).unwrap();
    let mut config = TestConfig::new(NormKind::LInf, 0.25);
    config.bootstrap_b = 200;
    let stream = RngStream::from_seed(2718).derive("power", 0);
    let reps = 400;
    let (rate_small, se_small) =
        rejection_probability(&scenario, 100, 100, reps, &config, &stream.derive("n", 100))
            .unwrap();
    let (rate_large, se_large) =
        rejection_probability(&scenario, 400, 400, reps, &config, &stream.derive("n", 400))
            .unwrap();
    let slack = 2.0 * (se_small + se_large);
    assert!(
        rate_large + slack >= rate_small,
        "power fell from {rate_small} to {rate_large}"
    );
}

#[test]
fn results_are_identical_across_thread_counts() {
    let x = CountVector::new(vec![40, 20, 25, 15]).unwrap();
    let y = CountVector::new(vec![30, 30, 20, 20]).unwrap();
    let mut config = TestConfig::new(NormKind::L1, 0.35);
    config.bootstrap_b = 300;
    config.seed = 31;
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let report_single = single.install(|| equivalence_test(&x, &y, &config).unwrap());
    let report_default = equivalence_test(&x, &y, &config).unwrap();
    assert_eq!(report_single, report_default);
}

#[test]
fn zero_count_classes_still_satisfy_the_resampling_guarantee() {
    let cfg = SolverConfig::default();
    let cases: [(&[u64], &[u64]); 3] = [
        (&[0, 10], &[5, 5]),
        (&[0, 15, 15], &[10, 10, 10]),
        (&[30, 0, 0], &[12, 9, 9]),
    ];
    for (xs, ys) in cases {
        let x = CountVector::new(xs.to_vec()).unwrap();
        let y = CountVector::new(ys.to_vec()).unwrap();
        for kind in ALL_NORMS {
            let params =
                equivboot::select_bootstrap_params(&x, &y, 0.45, kind, &cfg).unwrap();
            let d = norm_eval(kind, &theta(&params.p, &params.q).unwrap());
            assert!(
                d >= 0.45 - 1e-8,
                "{kind:?} {xs:?}/{ys:?}: generating distance {d}"
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn norm_triangle_inequality_and_homogeneity(
        a in prop::collection::vec(-1.0f64..1.0, 2..7),
        scale in 0.0f64..4.0,
    ) {
        let b: Vec<f64> = a.iter().rev().map(|x| 0.7 * x - 0.1).take(a.len()).collect();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let scaled: Vec<f64> = a.iter().map(|x| scale * x).collect();
        for kind in ALL_NORMS {
            let na = norm_eval(kind, &a);
            prop_assert!(norm_eval(kind, &sum) <= na + norm_eval(kind, &b) + 1e-12);
            prop_assert!((norm_eval(kind, &scaled) - scale * na).abs() <= 1e-12);
            prop_assert!((oracle_norm(kind, &a) - na).abs() <= 1e-12);
        }
    }

    #[test]
    fn theta_is_antisymmetric_and_sums_to_zero(
        raw_p in prop::collection::vec(0.05f64..1.0, 4),
        raw_q in prop::collection::vec(0.05f64..1.0, 4),
    ) {
        let norm_to_simplex = |raw: &[f64]| {
            let s: f64 = raw.iter().sum();
            ProbVector::new(raw.iter().map(|v| v / s).collect()).unwrap()
        };
        let p = norm_to_simplex(&raw_p);
        let q = norm_to_simplex(&raw_q);
        let forward = theta(&p, &q).unwrap();
        let backward = theta(&q, &p).unwrap();
        let mut sum = 0.0;
        for (f, b) in forward.iter().zip(&backward) {
            prop_assert!((f + b).abs() <= 1e-15);
            sum += f;
        }
        prop_assert!(sum.abs() <= 1e-12);
    }
}
