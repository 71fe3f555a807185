//! Sample-mean and control-variate estimators for normally distributed
//! rewards and CVs.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::history::ArmHistory;
use super::linalg::solve;

/// Mean of the rewards observed without CVs, with its variance estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoCvEstimate<S> {
    pub mean: S,
    /// `Σ(x - mean)² / (N(N-1))`; `None` when `N < 2`.
    pub variance: Option<S>,
}

/// A CV-side mean estimate with its variance estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvEstimate<S> {
    pub mean: S,
    pub variance: S,
}

/// Control-variate coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaStar<S> {
    pub coefficients: Vec<S>,
}

pub fn mean_no_cv<S: Scalar>(history: &ArmHistory<S>) -> Result<NoCvEstimate<S>> {
    let n = history.n();
    if n == 0 {
        return Err(Error::NoEstimate("no rewards without control variates".into()));
    }
    let running = history.running();
    let nf = S::count(n);
    let variance = (n >= 2).then(|| running.no_cv_m2 / (nf * (nf - S::one())));
    Ok(NoCvEstimate { mean: running.no_cv_mean, variance })
}

/// First and second moments of a set of (reward, CV) pairs, with CVs taken
/// relative to their known means `ω` (`d = w - ω`).
#[derive(Debug, Clone)]
pub(crate) struct CvMoments<S> {
    pub m: usize,
    pub q: usize,
    pub x_mean: S,
    /// mean of `d`
    pub d_mean: Vec<S>,
    /// `Σ(x - x̄)²`
    pub cxx: S,
    /// `Σ(x - x̄)(d - d̄)`
    pub cxd: Vec<S>,
    /// `Σ(d - d̄)(d - d̄)ᵀ`, row-major
    pub cdd: Vec<S>,
    /// `Σ d dᵀ`, row-major
    pub sdd: Vec<S>,
}

impl<S: Scalar> CvMoments<S> {
    pub fn compute(rewards: &[S], cvs: &[S], q: usize, omega: &[S]) -> Self {
        let m = rewards.len();
        debug_assert_eq!(cvs.len(), m * q);
        debug_assert_eq!(omega.len(), q);
        let mf = S::count(m);
        let x_mean = rewards.iter().copied().sum::<S>() / mf;
        let mut d_mean = vec![S::zero(); q];
        for row in cvs.chunks_exact(q) {
            for j in 0..q {
                d_mean[j] = d_mean[j] + (row[j] - omega[j]);
            }
        }
        d_mean.iter_mut().for_each(|v| *v = *v / mf);

        let mut cxx = S::zero();
        let mut cxd = vec![S::zero(); q];
        let mut cdd = vec![S::zero(); q * q];
        let mut sdd = vec![S::zero(); q * q];
        let mut d = vec![S::zero(); q];
        let mut dc = vec![S::zero(); q];
        for (&x, row) in rewards.iter().zip(cvs.chunks_exact(q)) {
            let rx = x - x_mean;
            cxx = cxx + rx * rx;
            for j in 0..q {
                d[j] = row[j] - omega[j];
                dc[j] = d[j] - d_mean[j];
                cxd[j] = cxd[j] + rx * dc[j];
            }
            for j in 0..q {
                for k in 0..q {
                    cdd[j * q + k] = cdd[j * q + k] + dc[j] * dc[k];
                    sdd[j * q + k] = sdd[j * q + k] + d[j] * d[k];
                }
            }
        }
        Self { m, q, x_mean, d_mean, cxx, cxd, cdd, sdd }
    }

    /// Same as [`CvMoments::compute`] on the history's pairs, from its
    /// running moments in O(q²).
    pub fn from_history(history: &ArmHistory<S>, omega: &[S]) -> Self {
        let r = history.running();
        let q = history.q();
        let m = history.m();
        let mf = S::count(m);
        let d_mean: Vec<S> = r.w_mean.iter().zip(omega).map(|(&w, &o)| w - o).collect();
        let mut sdd = r.cww.clone();
        for j in 0..q {
            for k in 0..q {
                sdd[j * q + k] = sdd[j * q + k] + mf * d_mean[j] * d_mean[k];
            }
        }
        Self {
            m,
            q,
            x_mean: r.x_mean,
            d_mean,
            cxx: r.cxx,
            cxd: r.cxw.clone(),
            cdd: r.cww.clone(),
            sdd,
        }
    }

    /// β*: `Σ(x - x̄)(w - ω) / Σ(w - ω)²` for one CV; for several, the
    /// solution of `Σ(w - ŵ)(w - ŵ)ᵀ β = Σ(w - ŵ)(x - x̄)`.
    pub fn beta(&self) -> Result<Vec<S>> {
        beta_from_parts(self.q, &self.cxd, &self.cdd, &self.sdd)
    }

    /// CV-adjusted mean `x̄ + βᵀ(ω - ŵ)`.
    pub fn cv_mean(&self, beta: &[S]) -> S {
        self.x_mean - dot(beta, &self.d_mean)
    }
}

pub(crate) fn beta_from_parts<S: Scalar>(q: usize, cxd: &[S], cdd: &[S], sdd: &[S]) -> Result<Vec<S>> {
    if q == 1 {
        let denom = sdd[0];
        if !(denom > S::zero()) {
            return Err(Error::DegenerateCv("control variates equal their mean".into()));
        }
        Ok(vec![cxd[0] / denom])
    } else {
        solve(cdd, cxd, q).ok_or_else(|| Error::DegenerateCv("singular CV covariance system".into()))
    }
}

pub(crate) fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (&u, &v)| acc + u * v)
}

fn check_omega<S>(history: &ArmHistory<S>, omega: &[S]) -> Result<()>
where
    S: Scalar,
{
    if omega.len() != history.q() {
        return Err(Error::Domain(format!(
            "omega has length {}, expected {}",
            omega.len(),
            history.q()
        )));
    }
    Ok(())
}

pub(crate) fn require_pairs<S: Scalar>(history: &ArmHistory<S>, omega: &[S], min: usize) -> Result<()> {
    check_omega(history, omega)?;
    if history.m() < min {
        return Err(Error::NoEstimate(format!(
            "{} reward/CV pairs, need at least {min}",
            history.m()
        )));
    }
    Ok(())
}

/// Optimal CV coefficients. Needs `M >= q + 2`.
pub fn beta_star<S: Scalar>(history: &ArmHistory<S>, omega: &[S]) -> Result<BetaStar<S>> {
    require_pairs(history, omega, history.q() + 2)?;
    let coefficients = CvMoments::from_history(history, omega).beta()?;
    Ok(BetaStar { coefficients })
}

/// Control-variate mean and its variance estimate under joint normality.
///
/// The variance estimate is `Z · Σ(x̄_m - μ_c)² / (M(M - q - 1))` with
/// `x̄_m = x_m + βᵀ(ω - w_m)` and `Z = (1 - sᵀ G⁻¹ s / M)⁻¹`,
/// `s = Σ(w - ω)`, `G = Σ(w - ω)(w - ω)ᵀ`. For one CV this is
/// `Z = (1 - (Σ(w-ω))² / (M Σ(w-ω)²))⁻¹` with denominator `M(M-2)`.
/// `Z` is evaluated in the equivalent form `1 + M d̄ᵀ C⁻¹ d̄` with `C` the
/// centered CV scatter matrix. Needs `M >= q + 2`.
pub fn mean_cv<S: Scalar>(history: &ArmHistory<S>, omega: &[S]) -> Result<CvEstimate<S>> {
    require_pairs(history, omega, history.q() + 2)?;
    let moments = CvMoments::from_history(history, omega);
    let beta = moments.beta()?;
    let mean = moments.cv_mean(&beta);
    let q = history.q();
    let m = history.m();
    let mf = S::count(m);

    // Σ((x - x̄) - βᵀ(d - d̄))²
    let mut fit = S::zero();
    for j in 0..q {
        let row = &moments.cdd[j * q..(j + 1) * q];
        fit = fit + beta[j] * (dot(row, &beta) - S::two() * moments.cxd[j]);
    }
    let ss = (moments.cxx + fit).max(S::zero());

    let c_inv_d = if q == 1 {
        (moments.cdd[0] > S::zero()).then(|| vec![moments.d_mean[0] / moments.cdd[0]])
    } else {
        solve(&moments.cdd, &moments.d_mean, q)
    }
    .ok_or_else(|| Error::DegenerateCv("control variates are constant".into()))?;
    let z = S::one() + mf * dot(&moments.d_mean, &c_inv_d);
    if !z.is_finite() {
        return Err(Error::DegenerateCv("control variates are constant".into()));
    }
    let dof = S::count(m - q - 1);
    Ok(CvEstimate { mean, variance: z * ss / (mf * dof) })
}
