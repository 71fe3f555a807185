//! Convex combination of the no-CV and CV-adjusted estimators.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::Scalar;

use super::gaussian::{CvEstimate, NoCvEstimate};

/// Which side of the combination, if any, was forced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Forced {
    None,
    /// Only the no-CV estimator is used (`λ = 1`).
    LambdaOne,
    /// Only the CV-adjusted estimator is used (`λ = 0`).
    LambdaZero,
}

/// Sample counts of one arm: `N` rewards without CVs, `M` with, `q` CVs each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleCounts {
    pub n: usize,
    pub m: usize,
    pub q: usize,
}

impl SampleCounts {
    pub fn s(&self) -> usize {
        self.n + self.m
    }
}

/// Everything an index policy needs about one arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinedEstimate<S> {
    pub mu_hat: S,
    pub nu_hat: S,
    pub lambda_hat: S,
    pub a: Option<S>,
    pub b: Option<S>,
    /// Degrees of freedom of the t-quantile in the confidence bound.
    pub dof: i64,
    pub forced: Forced,
}

/// Combines the two component estimates with `λ = B/(A+B)`.
///
/// `no_cv` contributes only when its variance is available (`N >= 2`); `cv`
/// should be `None` whenever the CV side is below the pair threshold or
/// degenerate. With only one side the weight is forced to it. The degrees of
/// freedom are `N - 1` when forced to the no-CV side and `S - q - 2`
/// otherwise.
pub fn combine<S: Scalar>(
    no_cv: Option<NoCvEstimate<S>>,
    cv: Option<CvEstimate<S>>,
    counts: SampleCounts,
) -> Result<CombinedEstimate<S>> {
    let no_cv = no_cv.and_then(|e| e.variance.map(|a| (e.mean, a)));
    let pooled_dof = counts.s() as i64 - counts.q as i64 - 2;
    match (no_cv, cv) {
        (Some((mu_nc, a)), Some(c)) => {
            let b = c.variance;
            let total = a + b;
            let (lambda, nu) = if total > S::zero() {
                (b / total, a * b / total)
            } else {
                (S::half(), S::zero())
            };
            Ok(CombinedEstimate {
                mu_hat: lambda * mu_nc + (S::one() - lambda) * c.mean,
                nu_hat: nu,
                lambda_hat: lambda,
                a: Some(a),
                b: Some(b),
                dof: pooled_dof,
                forced: Forced::None,
            })
        }
        (Some((mu_nc, a)), None) => Ok(CombinedEstimate {
            mu_hat: mu_nc,
            nu_hat: a,
            lambda_hat: S::one(),
            a: Some(a),
            b: None,
            dof: counts.n as i64 - 1,
            forced: Forced::LambdaOne,
        }),
        (None, Some(c)) => Ok(CombinedEstimate {
            mu_hat: c.mean,
            nu_hat: c.variance,
            lambda_hat: S::zero(),
            a: None,
            b: Some(c.variance),
            dof: pooled_dof,
            forced: Forced::LambdaZero,
        }),
        (None, None) => Err(Error::NoEstimate("neither component estimate is available".into())),
    }
}

/// Variance of the combination under the optimal weight:
/// `(1 - ρ²)σ² / (m + n(1 - ρ²))`.
pub fn variance_combined_theoretical<S: Scalar>(sigma2: S, rho: S, m: usize, n: usize) -> Result<S> {
    if !(sigma2 > S::zero()) {
        return domain(format!("sigma2 must be positive, got {sigma2}"));
    }
    check_rho(rho)?;
    if m + n == 0 {
        return domain("m + n must be at least 1");
    }
    let k = S::one() - rho * rho;
    Ok(k * sigma2 / (S::count(m) + S::count(n) * k))
}

/// Ratio of the optimally combined variance to that of the pooled mean that
/// ignores CVs: `(m + n)(1 - ρ²) / (m + n(1 - ρ²))`.
pub fn variance_ratio<S: Scalar>(m: usize, n: usize, rho: S) -> Result<S> {
    check_rho(rho)?;
    if m + n == 0 {
        return domain("m + n must be at least 1");
    }
    let k = S::one() - rho * rho;
    Ok(S::count(m + n) * k / (S::count(m) + S::count(n) * k))
}

fn check_rho<S: Scalar>(rho: S) -> Result<()> {
    if !(rho.abs() < S::one()) {
        return domain(format!("|rho| must be below 1, got {rho}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const COUNTS: SampleCounts = SampleCounts { n: 10, m: 10, q: 1 };

    fn nc(mean: f64, a: f64) -> Option<NoCvEstimate<f64>> {
        Some(NoCvEstimate { mean, variance: Some(a) })
    }

    fn cv(mean: f64, b: f64) -> Option<CvEstimate<f64>> {
        Some(CvEstimate { mean, variance: b })
    }

    #[test]
    fn equal_variances_give_midpoint() {
        let e = combine(nc(1.0, 0.2), cv(2.0, 0.2), COUNTS).unwrap();
        assert_eq!(e.lambda_hat, 0.5);
        assert!((e.mu_hat - 1.5).abs() < 1e-15);
        assert!((e.nu_hat - 0.1).abs() < 1e-15);
        assert_eq!((e.dof, e.forced), (17, Forced::None));
    }

    #[test]
    fn perfect_cv_fit_takes_cv_side() {
        let e = combine(nc(1.0, 0.2), cv(2.0, 0.0), COUNTS).unwrap();
        assert_eq!((e.lambda_hat, e.mu_hat, e.nu_hat), (0.0, 2.0, 0.0));
    }

    #[test]
    fn forced_sides() {
        let e = combine(nc(1.0, 0.2), None, COUNTS).unwrap();
        assert_eq!((e.forced, e.mu_hat, e.nu_hat, e.dof), (Forced::LambdaOne, 1.0, 0.2, 9));
        let single = Some(NoCvEstimate { mean: 1.0, variance: None });
        let e = combine(single, cv(2.0, 0.3), SampleCounts { n: 1, m: 10, q: 1 }).unwrap();
        assert_eq!((e.forced, e.mu_hat, e.nu_hat, e.dof), (Forced::LambdaZero, 2.0, 0.3, 8));
        assert!(matches!(combine::<f64>(single, None, COUNTS), Err(Error::NoEstimate(_))));
    }

    #[test]
    fn zero_total_variance() {
        let e = combine(nc(1.0, 0.0), cv(3.0, 0.0), COUNTS).unwrap();
        assert_eq!((e.lambda_hat, e.mu_hat, e.nu_hat), (0.5, 2.0, 0.0));
    }

    #[test]
    fn theoretical_variance_cases() {
        let v = variance_combined_theoretical(0.02, 0.5f64.sqrt(), 50, 50).unwrap();
        assert!((v - 0.01 / 75.0).abs() < 1e-17);
        assert!((variance_combined_theoretical(2.0, 0.0, 3, 5).unwrap() - 0.25f64).abs() < 1e-15);
        let v = variance_combined_theoretical(2.0, 0.6f64, 4, 0).unwrap();
        assert!((v - 0.64 * 2.0 / 4.0).abs() < 1e-15);
        assert!(variance_combined_theoretical(2.0, 1.0f64, 4, 0).is_err());
        assert!(variance_combined_theoretical(0.0, 0.1f64, 4, 0).is_err());
    }

    #[test]
    fn ratio_cases() {
        assert_eq!(variance_ratio(30, 20, 0.0f64).unwrap(), 1.0);
        assert!((variance_ratio(0, 20, 0.7f64).unwrap() - 1.0).abs() < 1e-15);
        assert!((variance_ratio(50, 50, 0.5f64.sqrt()).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(variance_ratio(1, 1, -1.0f64).is_err());
    }
}
