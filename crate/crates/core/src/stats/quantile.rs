//! Student-t distribution function and its inverse.
//!
//! The distribution function is evaluated through the regularized incomplete
//! beta representation
//!
//! ```text
//! P(T > x) = I_{ν/(ν+x²)}(ν/2, 1/2) / 2,   x >= 0
//! ```
//!
//! and inverted with a bracketed Newton iteration on `ln x`. Upper-tail
//! probabilities are carried directly so critical values at percentiles such
//! as `1 - 1/t²` keep full relative precision.

use crate::error::{domain, Result};
use crate::scalar::Scalar;

use super::special::{inc_beta, ln_gamma, normal_quantile};

/// Above this many degrees of freedom the normal quantile is returned.
pub const NORMAL_FALLBACK_DOF: u64 = 1_000_000;

/// Smallest upper-tail probability used for UCB critical values; larger
/// `t^alpha` saturate here.
pub const MIN_CRITICAL_TAIL: f64 = 1e-15;

/// A validated (percentile, degrees of freedom) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TQuantileQuery<S> {
    percentile: S,
    dof: u64,
}

impl<S: Scalar> TQuantileQuery<S> {
    pub fn new(percentile: S, dof: u64) -> Result<Self> {
        if !(percentile > S::zero() && percentile < S::one()) {
            return domain(format!("percentile {percentile} outside (0, 1)"));
        }
        if dof == 0 {
            return domain("degrees of freedom must be at least 1");
        }
        Ok(Self { percentile, dof })
    }

    pub fn percentile(&self) -> S {
        self.percentile
    }

    pub fn dof(&self) -> u64 {
        self.dof
    }
}

/// Inverse Student-t distribution function.
pub fn t_quantile<S: Scalar>(query: TQuantileQuery<S>) -> S {
    let p = query.percentile;
    let half = S::half();
    if p == half {
        S::zero()
    } else if p > half {
        upper_quantile(S::one() - p, query.dof)
    } else {
        -upper_quantile(p, query.dof)
    }
}

/// Value `x` with `P(T > x) = tail` for a t variable with `dof` degrees of
/// freedom.
pub fn t_upper_quantile<S: Scalar>(tail: S, dof: u64) -> Result<S> {
    if !(tail > S::zero() && tail < S::one()) {
        return domain(format!("tail probability {tail} outside (0, 1)"));
    }
    if dof == 0 {
        return domain("degrees of freedom must be at least 1");
    }
    let half = S::half();
    Ok(if tail == half {
        S::zero()
    } else if tail < half {
        upper_quantile(tail, dof)
    } else {
        -upper_quantile(S::one() - tail, dof)
    })
}

/// `P(T > x)`.
pub fn t_upper_tail<S: Scalar>(x: S, dof: u64) -> S {
    if x < S::zero() {
        return S::one() - t_upper_tail(-x, dof);
    }
    let nu = S::from_u64(dof).expect("dof representable");
    let x2 = x * x;
    let denom = nu + x2;
    S::half() * inc_beta(nu * S::half(), S::half(), nu / denom, x2 / denom)
}

/// Student-t distribution function `P(T <= x)`.
pub fn t_cdf<S: Scalar>(x: S, dof: u64) -> S {
    if x < S::zero() {
        t_upper_tail(-x, dof)
    } else {
        S::one() - t_upper_tail(x, dof)
    }
}

fn ln_density_const<S: Scalar>(nu: S) -> S {
    let half = S::half();
    ln_gamma((nu + S::one()) * half) - ln_gamma(nu * half) - half * (nu * S::PI()).ln()
}

pub fn t_pdf<S: Scalar>(x: S, dof: u64) -> S {
    let nu = S::from_u64(dof).expect("dof representable");
    pdf_with_const(x, nu, ln_density_const(nu))
}

fn pdf_with_const<S: Scalar>(x: S, nu: S, ln_k: S) -> S {
    (ln_k - (nu + S::one()) * S::half() * (x * x / nu).ln_1p()).exp()
}

/// Solves `P(T > x) = tail` for `0 < tail < 1/2`, returning `x > 0`.
fn upper_quantile<S: Scalar>(tail: S, dof: u64) -> S {
    let one = S::one();
    match dof {
        1 => return one / (S::PI() * tail).tan(),
        2 => {
            let two = S::two();
            return (one - two * tail) / (two * tail * (one - tail)).sqrt();
        }
        d if d > NORMAL_FALLBACK_DOF => return -normal_quantile(tail),
        _ => {}
    }
    let nu = S::from_u64(dof).expect("dof representable");
    let half = S::half();

    // The normal quantile is a lower bound. The power-law tail
    // k ν^{(ν-1)/2} x^{-ν} dominates the true tail for every x > 0, so the x
    // where it equals `tail` is an upper bound.
    let z = -normal_quantile(tail);
    let ln_k = ln_density_const(nu);
    let ln_x_tail = (ln_k + (nu - one) * half * nu.ln() - tail.ln()) / nu;
    let mut lo = z.ln();
    let mut hi = ln_x_tail.max(lo);

    // Cornish-Fisher start, kept inside the bracket.
    let z2 = z * z;
    let cf = z
        + (z2 * z + z) / (S::lit(4.0) * nu)
        + (S::lit(5.0) * z2 * z2 * z + S::lit(16.0) * z2 * z + S::lit(3.0) * z) / (S::lit(96.0) * nu * nu);
    let mut u = if cf > z { cf.ln().min(hi) } else { half * (lo + hi) };

    let ln_tail = tail.ln();
    let tol = S::lit(4.0) * S::epsilon();
    let mut hi_tried = false;
    for _ in 0..200 {
        let x = u.exp();
        let p = t_upper_tail(x, dof);
        let g = p.ln() - ln_tail;
        if g.abs() <= tol {
            break;
        }
        if g > S::zero() {
            lo = u;
        } else {
            hi = u;
        }
        // d ln P / d ln x = -x f(x) / P
        let slope = -x * pdf_with_const(x, nu, ln_k) / p;
        let mut next = u - g / slope;
        if next >= hi && !hi_tried {
            // the tail bound is tight for small tails
            next = hi;
            hi_tried = true;
        } else if !next.is_finite() || next <= lo || next >= hi {
            next = half * (lo + hi);
        }
        let step = (next - u).abs();
        u = next;
        if step <= tol * u.abs().max(one) || hi - lo <= tol * u.abs().max(one) {
            break;
        }
    }
    u.exp()
}

/// Critical value for the upper confidence bound at round `t`: the
/// `1 - 1/t^alpha` percentile of a t distribution with `dof` degrees of
/// freedom. The tail saturates at [`MIN_CRITICAL_TAIL`].
pub fn critical_value<S: Scalar>(t: u64, dof: i64, alpha: S) -> Result<S> {
    if t < 2 {
        return domain(format!("round index {t} must be at least 2"));
    }
    if !(alpha > S::one()) {
        return domain(format!("alpha {alpha} must exceed 1"));
    }
    if dof < 1 {
        return Err(crate::Error::WarmStartIncomplete(format!(
            "non-positive degrees of freedom {dof}"
        )));
    }
    let t = S::from_u64(t).expect("round representable");
    let tail = t.powf(-alpha).max(S::lit(MIN_CRITICAL_TAIL));
    t_upper_quantile(tail, dof as u64)
}

/// Critical value with `s - q - 2` degrees of freedom, `s` samples and `q`
/// control variates.
pub fn ucb_critical_value<S: Scalar>(t: u64, s: usize, q: usize, alpha: S) -> Result<S> {
    critical_value(t, s as i64 - q as i64 - 2, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_is_zero() {
        for dof in [1, 2, 3, 10, 1000, 10_000_000] {
            let q = TQuantileQuery::new(0.5f64, dof).unwrap();
            assert_eq!(t_quantile(q), 0.0);
        }
    }

    #[test]
    fn rejects_bad_queries() {
        assert!(TQuantileQuery::new(0.0f64, 3).is_err());
        assert!(TQuantileQuery::new(1.0f64, 3).is_err());
        assert!(TQuantileQuery::new(f64::NAN, 3).is_err());
        assert!(TQuantileQuery::new(0.3f64, 0).is_err());
    }

    #[test]
    fn inverts_cdf() {
        for dof in [3u64, 4, 7, 17, 50, 999, 20_000, 900_000] {
            for &p in &[0.6f64, 0.9, 0.975, 0.999, 1.0 - 1e-6, 1.0 - 2.5e-9] {
                let x = t_quantile(TQuantileQuery::new(p, dof).unwrap());
                let tail = t_upper_tail(x, dof);
                assert!((tail - (1.0 - p)).abs() < 1e-12, "dof={dof} p={p} tail={tail}");
                assert!((t_cdf(x, dof) - p).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn lower_half_is_antisymmetric() {
        let a = t_quantile(TQuantileQuery::new(0.025f64, 9).unwrap());
        let b = t_quantile(TQuantileQuery::new(0.975f64, 9).unwrap());
        assert!((a + b).abs() < 1e-12);
    }

    #[test]
    fn closed_form_small_dof() {
        // dof 1 is Cauchy: tan(π(p - 1/2))
        let p = 0.975f64;
        let x = t_quantile(TQuantileQuery::new(p, 1).unwrap());
        assert!((x - (std::f64::consts::PI * (p - 0.5)).tan()).abs() < 1e-10);
        assert!((x - 12.706_204_736_174_7).abs() < 1e-9);
        // dof 2 at 0.975
        let x = t_quantile(TQuantileQuery::new(p, 2).unwrap());
        assert!((x - 4.302_652_729_749_464).abs() < 1e-10);
    }

    #[test]
    fn normal_fallback_above_threshold() {
        let x = t_quantile(TQuantileQuery::new(0.975f64, NORMAL_FALLBACK_DOF + 1).unwrap());
        assert!((x - 1.959_963_984_540_054).abs() < 1e-12);
        let y = t_quantile(TQuantileQuery::new(0.975f64, NORMAL_FALLBACK_DOF).unwrap());
        assert!(y > x && y - x < 1e-5);
    }

    #[test]
    fn critical_value_composition() {
        let v: f64 = ucb_critical_value(2, 6, 1, 2.0).unwrap();
        let direct = t_quantile(TQuantileQuery::new(0.75f64, 3).unwrap());
        assert!((v - direct).abs() < 1e-13);
        assert!(matches!(
            ucb_critical_value::<f64>(10, 3, 1, 2.0),
            Err(crate::Error::WarmStartIncomplete(_))
        ));
    }

    #[test]
    fn saturated_tail_is_clamped() {
        // 10^8 squared exceeds 10^15: both rounds hit the same clamped tail
        let a: f64 = critical_value(100_000_000, 50, 2.0).unwrap();
        let b: f64 = critical_value(1_000_000_000, 50, 2.0).unwrap();
        assert_eq!(a, b);
        assert!(a.is_finite());
        let expected = t_upper_quantile(1e-15f64, 50).unwrap();
        assert_eq!(a, expected);
    }

    #[test]
    fn works_in_single_precision() {
        let x = t_quantile(TQuantileQuery::new(0.975f32, 10).unwrap());
        assert!((x - 2.228_139).abs() < 1e-4);
    }
}
