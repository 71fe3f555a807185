//! Resampling variants of the control-variate estimator that avoid the
//! joint-normality assumption: jackknife, splitting and batching.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::gaussian::{beta_from_parts, dot, require_pairs, CvEstimate, CvMoments};
use super::history::ArmHistory;

/// Default number of batches for [`batching_mean_cv`].
pub const DEFAULT_BATCH_COUNT: usize = 5;

/// Moments of the sample with pair `j` removed, updated in O(q²).
struct LeaveOneOut<'a, S> {
    full: &'a CvMoments<S>,
    cxd: Vec<S>,
    cdd: Vec<S>,
    sdd: Vec<S>,
    d_mean: Vec<S>,
    d: Vec<S>,
    rd: Vec<S>,
}

impl<'a, S: Scalar> LeaveOneOut<'a, S> {
    fn new(full: &'a CvMoments<S>) -> Self {
        let q = full.q;
        Self {
            full,
            cxd: vec![S::zero(); q],
            cdd: vec![S::zero(); q * q],
            sdd: vec![S::zero(); q * q],
            d_mean: vec![S::zero(); q],
            d: vec![S::zero(); q],
            rd: vec![S::zero(); q],
        }
    }

    /// Returns `(β, x̄, d̄)` of the reduced sample; `d̄` is left in `self.d_mean`.
    fn remove(&mut self, x: S, w: &[S], omega: &[S]) -> Result<(Vec<S>, S)> {
        let f = self.full;
        let q = f.q;
        let m = S::count(f.m);
        let m1 = m - S::one();
        let scale = m / m1;
        let rx = x - f.x_mean;
        for j in 0..q {
            self.d[j] = w[j] - omega[j];
            self.rd[j] = self.d[j] - f.d_mean[j];
            self.cxd[j] = f.cxd[j] - scale * rx * self.rd[j];
            self.d_mean[j] = f.d_mean[j] - self.rd[j] / m1;
        }
        for j in 0..q {
            for k in 0..q {
                let i = j * q + k;
                self.cdd[i] = f.cdd[i] - scale * self.rd[j] * self.rd[k];
                self.sdd[i] = f.sdd[i] - self.d[j] * self.d[k];
            }
        }
        let beta = beta_from_parts(q, &self.cxd, &self.cdd, &self.sdd)?;
        Ok((beta, f.x_mean - rx / m1))
    }
}

/// Averages the `M` leave-one-out CV estimates; the variance is the
/// pseudo-value jackknife variance `(M-1)/M · Σ(θ_j - θ̄)²`. Needs `M >= q + 3`.
pub fn jackknife_mean_cv<S: Scalar>(history: &ArmHistory<S>, omega: &[S]) -> Result<CvEstimate<S>> {
    require_pairs(history, omega, history.q() + 3)?;
    let moments = CvMoments::from_history(history, omega);
    let mut loo = LeaveOneOut::new(&moments);
    let mut thetas = Vec::with_capacity(history.m());
    for (x, w) in history.cv_pairs() {
        let (beta, x_mean) = loo.remove(x, w, omega)?;
        thetas.push(x_mean - dot(&beta, &loo.d_mean));
    }
    let mf = S::count(thetas.len());
    let mean = thetas.iter().copied().sum::<S>() / mf;
    let ss: S = thetas.iter().map(|&t| (t - mean) * (t - mean)).sum();
    Ok(CvEstimate { mean, variance: ss * (mf - S::one()) / mf })
}

/// Adjusts each reward with the coefficient estimated without its own pair:
/// `x̄_n = x_n + β₋ₙᵀ(ω - w_n)`. Returns the mean of the adjusted samples and
/// their sample variance divided by `M`. Needs `M >= q + 3`.
pub fn splitting_mean_cv<S: Scalar>(history: &ArmHistory<S>, omega: &[S]) -> Result<CvEstimate<S>> {
    require_pairs(history, omega, history.q() + 3)?;
    let moments = CvMoments::from_history(history, omega);
    let mut loo = LeaveOneOut::new(&moments);
    let mut adjusted = Vec::with_capacity(history.m());
    for (x, w) in history.cv_pairs() {
        let (beta, _) = loo.remove(x, w, omega)?;
        adjusted.push(x - dot(&beta, &loo.d));
    }
    let mf = S::count(adjusted.len());
    let mean = adjusted.iter().copied().sum::<S>() / mf;
    let ss: S = adjusted.iter().map(|&t| (t - mean) * (t - mean)).sum();
    Ok(CvEstimate { mean, variance: ss / ((mf - S::one()) * mf) })
}

/// Splits the pairs into `batch_count` contiguous batches (remainder joins the
/// last one) and computes the CV estimate within each. Returns the average of
/// the batch estimates and their sample variance divided by `batch_count`.
/// Needs `batch_count >= 2` and `M >= batch_count · (q + 2)`.
pub fn batching_mean_cv<S: Scalar>(
    history: &ArmHistory<S>,
    omega: &[S],
    batch_count: usize,
) -> Result<CvEstimate<S>> {
    if batch_count < 2 {
        return Err(Error::Domain(format!("batch_count must be at least 2, got {batch_count}")));
    }
    let q = history.q();
    require_pairs(history, omega, batch_count * (q + 2))?;
    let m = history.m();
    let size = m / batch_count;
    let rewards = history.cv_rewards();
    let cvs = history.cv_matrix();
    let mut estimates = Vec::with_capacity(batch_count);
    for b in 0..batch_count {
        let start = b * size;
        let end = if b + 1 == batch_count { m } else { start + size };
        let moments = CvMoments::compute(&rewards[start..end], &cvs[start * q..end * q], q, omega);
        let beta = moments.beta()?;
        estimates.push(moments.cv_mean(&beta));
    }
    let bf = S::count(batch_count);
    let mean = estimates.iter().copied().sum::<S>() / bf;
    let ss: S = estimates.iter().map(|&t| (t - mean) * (t - mean)).sum();
    Ok(CvEstimate { mean, variance: ss / ((bf - S::one()) * bf) })
}
