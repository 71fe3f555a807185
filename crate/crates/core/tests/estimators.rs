mod common;

use common::*;
use lcv_bandit::estimators::*;
use lcv_bandit::stats::{sample_bivariate_gaussian_additive, RngStream};
use lcv_bandit::Error;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn gaussian_pairs(rng: &mut RngStream, m: usize, mu_v: f64, mu_w: f64) -> Vec<(f64, Vec<f64>)> {
    (0..m)
        .map(|_| {
            let (x, w) = sample_bivariate_gaussian_additive(mu_v, 0.01, mu_w, 0.01, rng).unwrap();
            (x, vec![w])
        })
        .collect()
}

fn random_pairs(rng: &mut RngStream, m: usize, q: usize) -> Vec<(f64, Vec<f64>)> {
    (0..m)
        .map(|_| {
            let w: Vec<f64> = (0..q).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let noise: f64 = StandardNormal.sample(rng);
            let x = 1.0 + w.iter().enumerate().map(|(j, v)| (j as f64 + 0.5) * v).sum::<f64>() + 0.3 * noise;
            (x, w)
        })
        .collect()
}

fn mean_and_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

#[test]
fn no_cv_variance_is_unbiased() {
    let mut rng = RngStream::new(1, 0);
    let reps = 100_000;
    let a: Vec<f64> = (0..reps)
        .map(|_| {
            let xs: Vec<f64> = (0..20).map(|_| 0.3 + 0.1 * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)).collect();
            mean_no_cv(&ArmHistory::from_parts(1, xs, &[]).unwrap()).unwrap().variance.unwrap()
        })
        .collect();
    let (m, v) = mean_and_var(&a);
    let se = (v / reps as f64).sqrt();
    assert!((m - 5e-4).abs() < 3.0 * se, "mean A {m}, se {se}");
}

#[test]
fn beta_vanishes_for_independent_cv() {
    let mut rng = RngStream::new(2, 0);
    let m = 100_000;
    let pairs: Vec<(f64, Vec<f64>)> = (0..m)
        .map(|_| {
            let x: f64 = StandardNormal.sample(&mut rng);
            let w: f64 = StandardNormal.sample(&mut rng);
            (x, vec![w])
        })
        .collect();
    let beta = beta_star(&history(&pairs, 1), &[0.0]).unwrap().coefficients[0];
    let se = 1.0 / (m as f64).sqrt();
    assert!(beta.abs() < 3.0 * se, "beta {beta}");
}

#[test]
fn beta_matches_direct_formula() {
    let mut rng = RngStream::new(3, 0);
    for q in 1..=3 {
        let pairs = random_pairs(&mut rng, 25, q);
        let omega: Vec<f64> = (0..q).map(|j| 0.05 * j as f64).collect();
        let h = history(&pairs, q);
        let est = mean_cv(&h, &omega).unwrap();
        assert!(rel_close(est.mean, brute_cv_mean(&pairs, &omega), 1e-12));
        if q == 1 {
            let beta = beta_star(&h, &omega).unwrap().coefficients;
            assert!(rel_close(beta[0], brute_beta(&pairs, &omega)[0], 1e-12));
        }
    }
}

#[test]
fn cv_mean_and_variance_estimate_on_instance_arm() {
    let mut rng = RngStream::new(4, 0);
    let reps = 100_000;
    let m = 100;
    let mut means = Vec::with_capacity(reps);
    let mut bs = Vec::with_capacity(reps);
    for _ in 0..reps {
        let pairs = gaussian_pairs(&mut rng, m, 0.3, 0.3);
        let est = mean_cv(&history(&pairs, 1), &[0.3]).unwrap();
        means.push(est.mean);
        bs.push(est.variance);
    }
    let (mu, var) = mean_and_var(&means);
    let se = (var / reps as f64).sqrt();
    assert!((mu - 0.6).abs() < 3.0 * se, "mean {mu}");
    let (mean_b, _) = mean_and_var(&bs);
    assert!((mean_b / var - 1.0).abs() < 0.05, "E[B] {mean_b} vs Var {var}");
    // (1 - ρ²)σ²(M-2)/(M(M-3)) for the fitted-coefficient estimator
    let theory = 0.5 * 0.02 * (m as f64 - 2.0) / (m as f64 * (m as f64 - 3.0));
    assert!((var / theory - 1.0).abs() < 0.05, "Var {var} vs {theory}");
}

#[test]
fn resampling_means_are_unbiased() {
    let mut rng = RngStream::new(5, 0);
    let reps = 10_000;
    let mut jack = Vec::with_capacity(reps);
    let mut split = Vec::with_capacity(reps);
    for _ in 0..reps {
        let pairs = gaussian_pairs(&mut rng, 100, 0.3, 0.3);
        let h = history(&pairs, 1);
        jack.push(jackknife_mean_cv(&h, &[0.3]).unwrap().mean);
        split.push(splitting_mean_cv(&h, &[0.3]).unwrap().mean);
    }
    for (name, v) in [("jackknife", jack), ("splitting", split)] {
        let (mu, var) = mean_and_var(&v);
        let se = (var / reps as f64).sqrt();
        assert!((mu - 0.6).abs() < 3.0 * se, "{name} mean {mu}, se {se}");
    }
}

#[test]
fn resampling_matches_brute_force_on_random_datasets() {
    let mut rng = RngStream::new(6, 0);
    for case in 0..100 {
        let q = 1 + case % 2;
        let pairs = random_pairs(&mut rng, 10, q);
        let omega: Vec<f64> = (0..q).map(|j| 0.1 * j as f64 - 0.05).collect();
        let h = history(&pairs, q);
        let checks = [
            (jackknife_mean_cv(&h, &omega).unwrap(), brute_jackknife(&pairs, &omega)),
            (splitting_mean_cv(&h, &omega).unwrap(), brute_splitting(&pairs, &omega)),
            (batching_mean_cv(&h, &omega, 2).unwrap(), brute_batching(&pairs, &omega, 2)),
        ];
        for (i, (got, (mean, var))) in checks.iter().enumerate() {
            assert!(rel_close(got.mean, *mean, 1e-12), "case {case} variant {i}: {} vs {mean}", got.mean);
            assert!(rel_close(got.variance, *var, 1e-12), "case {case} variant {i}: {} vs {var}", got.variance);
        }
    }
}

#[test]
fn batching_twenty_pairs_four_batches() {
    let mut rng = RngStream::new(7, 0);
    let pairs = random_pairs(&mut rng, 20, 1);
    let got = batching_mean_cv(&history(&pairs, 1), &[0.0], 4).unwrap();
    let (mean, var) = brute_batching(&pairs, &[0.0], 4);
    assert!(rel_close(got.mean, mean, 1e-12) && rel_close(got.variance, var, 1e-12));
    // remainder joins the last batch
    let pairs = random_pairs(&mut rng, 23, 1);
    let got = batching_mean_cv(&history(&pairs, 1), &[0.0], 4).unwrap();
    let (mean, var) = brute_batching(&pairs, &[0.0], 4);
    assert!(rel_close(got.mean, mean, 1e-12) && rel_close(got.variance, var, 1e-12));
}

#[test]
fn combined_estimate_is_unbiased_with_estimated_weight() {
    let mut rng = RngStream::new(8, 0);
    let reps = 100_000;
    for (n, m) in [(10usize, 10usize), (50, 5), (5, 50)] {
        let mut values = Vec::with_capacity(reps);
        for _ in 0..reps {
            let xs: Vec<f64> = (0..n)
                .map(|_| sample_bivariate_gaussian_additive(0.3, 0.01, 0.3, 0.01, &mut rng).unwrap().0)
                .collect();
            let pairs = gaussian_pairs(&mut rng, m, 0.3, 0.3);
            let h = ArmHistory::from_parts(1, xs, &pairs).unwrap();
            let est = estimate_arm(&h, &[0.3], CvEstimator::Gaussian).unwrap();
            assert_eq!(est.forced, Forced::None);
            values.push(est.mu_hat);
        }
        let (mu, var) = mean_and_var(&values);
        let se = (var / reps as f64).sqrt();
        assert!((mu - 0.6).abs() < 3.0 * se, "(N, M) = ({n}, {m}): mean {mu}, se {se}");
    }
}

#[test]
fn optimal_weight_minimizes_variance() {
    let mut rng = RngStream::new(9, 0);
    let reps = 100_000;
    let (n, m) = (50usize, 50usize);
    // oracle weight B/(A+B) with A = σ²/n, B = (1-ρ²)σ²/m and the true β = 1
    let a = 0.02 / n as f64;
    let b = 0.01 / m as f64;
    let lambda = b / (a + b);
    let mut samples = Vec::with_capacity(reps);
    for _ in 0..reps {
        let nc: f64 = (0..n)
            .map(|_| sample_bivariate_gaussian_additive(0.3, 0.01, 0.3, 0.01, &mut rng).unwrap().0)
            .sum::<f64>()
            / n as f64;
        let c: f64 = (0..m)
            .map(|_| {
                let (x, w) = sample_bivariate_gaussian_additive(0.3, 0.01, 0.3, 0.01, &mut rng).unwrap();
                x - (w - 0.3)
            })
            .sum::<f64>()
            / m as f64;
        samples.push((nc, c));
    }
    let var_at = |l: f64| mean_and_var(&samples.iter().map(|&(x, y)| l * x + (1.0 - l) * y).collect::<Vec<_>>()).1;
    let best = var_at(lambda);
    assert!(var_at(lambda + 0.1) >= best);
    assert!(var_at(lambda - 0.1) >= best);
}

#[test]
fn degenerate_cv_forces_no_cv_side() {
    let xs = vec![1.0, 1.2, 0.9];
    let pairs: Vec<(f64, Vec<f64>)> = (0..5).map(|i| (1.0 + 0.1 * i as f64, vec![0.5])).collect();
    let h = ArmHistory::from_parts(1, xs, &pairs).unwrap();
    assert!(matches!(mean_cv(&h, &[0.5]), Err(Error::DegenerateCv(_))));
    let est = estimate_arm(&h, &[0.5], CvEstimator::Gaussian).unwrap();
    assert_eq!(est.forced, Forced::LambdaOne);
    assert_eq!(est.dof, 2);
}

#[test]
fn resampling_falls_back_to_gaussian_when_short() {
    let mut rng = RngStream::new(10, 0);
    let pairs = random_pairs(&mut rng, 3, 1);
    let h = ArmHistory::from_parts(1, vec![0.1, 0.4], &pairs).unwrap();
    let gaussian = estimate_arm(&h, &[0.0], CvEstimator::Gaussian).unwrap();
    for est in [CvEstimator::Jackknife, CvEstimator::Splitting, CvEstimator::Batching { batch_count: 5 }] {
        assert!(matches!(est.estimate(&h, &[0.0]), Err(Error::NoEstimate(_))));
        assert_eq!(estimate_arm(&h, &[0.0], est).unwrap(), gaussian);
    }
}

#[test]
fn single_precision_agrees_with_double() {
    let mut rng = RngStream::new(11, 0);
    let pairs = random_pairs(&mut rng, 30, 1);
    let pairs32: Vec<(f32, Vec<f32>)> = pairs.iter().map(|(x, w)| (*x as f32, vec![w[0] as f32])).collect();
    let h64 = history(&pairs, 1);
    let h32 = lcv_bandit::ArmHistory32::from_parts(1, vec![], &pairs32).unwrap();
    let e64 = mean_cv(&h64, &[0.0]).unwrap();
    let e32 = mean_cv(&h32, &[0.0f32]).unwrap();
    assert!((e32.mean as f64 - e64.mean).abs() < 1e-5);
    assert!(((e32.variance as f64) / e64.variance - 1.0).abs() < 1e-3);
}

fn pairs_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-2.0f64..2.0, -1.0f64..1.0), 10)
}

proptest! {
    #[test]
    fn combine_is_scale_consistent(
        data in pairs_strategy(),
        no_cv in prop::collection::vec(-2.0f64..2.0, 2..8),
        power in -3i32..4,
        omega in -0.5f64..0.5,
    ) {
        let c = 2f64.powi(power);
        let pairs: Vec<(f64, Vec<f64>)> = data.iter().map(|&(x, w)| (x + w, vec![w])).collect();
        let scaled: Vec<(f64, Vec<f64>)> = pairs.iter().map(|(x, w)| (c * x, vec![c * w[0]])).collect();
        let h = ArmHistory::from_parts(1, no_cv.clone(), &pairs).unwrap();
        let hs = ArmHistory::from_parts(1, no_cv.iter().map(|x| c * x).collect(), &scaled).unwrap();
        let e = estimate_arm(&h, &[omega], CvEstimator::Gaussian).unwrap();
        let es = estimate_arm(&hs, &[c * omega], CvEstimator::Gaussian).unwrap();
        prop_assert_eq!(es.mu_hat, c * e.mu_hat);
        prop_assert_eq!(es.nu_hat, c * c * e.nu_hat);
        prop_assert_eq!(es.lambda_hat, e.lambda_hat);
    }

    #[test]
    fn resampling_equals_brute_force(data in pairs_strategy(), omega in -0.5f64..0.5) {
        let pairs: Vec<(f64, Vec<f64>)> = data.iter().map(|&(x, w)| (x + 0.7 * w, vec![w])).collect();
        let h = history(&pairs, 1);
        let (jm, jv) = brute_jackknife(&pairs, &[omega]);
        let j = jackknife_mean_cv(&h, &[omega]).unwrap();
        prop_assert!(rel_close(j.mean, jm, 1e-12) && rel_close(j.variance, jv, 1e-10));
        let (sm, sv) = brute_splitting(&pairs, &[omega]);
        let s = splitting_mean_cv(&h, &[omega]).unwrap();
        prop_assert!(rel_close(s.mean, sm, 1e-12) && rel_close(s.variance, sv, 1e-10));
    }

    #[test]
    fn lambda_stays_in_unit_interval(data in pairs_strategy(), no_cv in prop::collection::vec(-2.0f64..2.0, 0..6)) {
        let pairs: Vec<(f64, Vec<f64>)> = data.iter().map(|&(x, w)| (x, vec![w])).collect();
        let h = ArmHistory::from_parts(1, no_cv, &pairs).unwrap();
        let e = estimate_arm(&h, &[0.0], CvEstimator::Gaussian).unwrap();
        prop_assert!((0.0..=1.0).contains(&e.lambda_hat));
        prop_assert!(e.nu_hat >= 0.0);
        match e.forced {
            Forced::None => prop_assert!(e.nu_hat <= e.a.unwrap().min(e.b.unwrap()) * (1.0 + 1e-12)),
            Forced::LambdaOne => prop_assert_eq!(Some(e.nu_hat), e.a),
            Forced::LambdaZero => prop_assert_eq!(Some(e.nu_hat), e.b),
        }
    }
}
