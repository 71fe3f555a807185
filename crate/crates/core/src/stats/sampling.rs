use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Result};

/// Draws `(V + Y, Y)` with `V ~ N(mu_v, sigma_v2)` and `Y ~ N(mu_w, sigma_w2)`
/// independent.
pub fn sample_bivariate_gaussian_additive<R: Rng + ?Sized>(
    mu_v: f64,
    sigma_v2: f64,
    mu_w: f64,
    sigma_w2: f64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if !(sigma_v2 > 0.0 && sigma_w2 > 0.0) {
        return domain(format!("variances must be positive, got {sigma_v2} and {sigma_w2}"));
    }
    let v = normal(mu_v, sigma_v2, rng);
    let y = normal(mu_w, sigma_w2, rng);
    Ok((v + y, y))
}

/// Correlation between `V + Y` and `Y` in the additive construction.
pub fn additive_correlation(sigma_v2: f64, sigma_w2: f64) -> f64 {
    (sigma_w2 / (sigma_v2 + sigma_w2)).sqrt()
}

#[inline]
pub fn normal<R: Rng + ?Sized>(mean: f64, variance: f64, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    mean + variance.sqrt() * z
}

/// Log-normal parameters `(mu, sigma²)` of the underlying normal whose
/// exponential has the given mean and variance.
pub fn lognormal_params(mean: f64, variance: f64) -> Result<(f64, f64)> {
    if !(mean > 0.0 && variance > 0.0) {
        return domain(format!(
            "log-normal moment matching needs positive mean and variance, got {mean} and {variance}"
        ));
    }
    let s2 = (variance / (mean * mean)).ln_1p();
    Ok((mean.ln() - 0.5 * s2, s2))
}

#[inline]
pub fn lognormal<R: Rng + ?Sized>(mu: f64, sigma2: f64, rng: &mut R) -> f64 {
    normal(mu, sigma2, rng).exp()
}

#[inline]
pub fn bernoulli<R: Rng + ?Sized>(p: f64, rng: &mut R) -> bool {
    rng.random::<f64>() < p
}
