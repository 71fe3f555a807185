//! Mean and variance estimators for a single arm.

mod combine;
mod gaussian;
mod history;
mod linalg;
mod resampling;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scalar::Scalar;

pub use combine::{
    combine, variance_combined_theoretical, variance_ratio, CombinedEstimate, Forced, SampleCounts,
};
pub use gaussian::{beta_star, mean_cv, mean_no_cv, BetaStar, CvEstimate, NoCvEstimate};
pub use history::ArmHistory;
pub use resampling::{batching_mean_cv, jackknife_mean_cv, splitting_mean_cv, DEFAULT_BATCH_COUNT};

/// How the CV-adjusted mean and its variance are estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvEstimator {
    #[default]
    Gaussian,
    Jackknife,
    Splitting,
    Batching { batch_count: usize },
}

impl CvEstimator {
    pub fn name(&self) -> &'static str {
        match self {
            CvEstimator::Gaussian => "gaussian",
            CvEstimator::Jackknife => "jackknife",
            CvEstimator::Splitting => "splitting",
            CvEstimator::Batching { .. } => "batching",
        }
    }

    /// Runs this estimator without any fallback.
    pub fn estimate<S: Scalar>(&self, history: &ArmHistory<S>, omega: &[S]) -> Result<CvEstimate<S>> {
        match *self {
            CvEstimator::Gaussian => mean_cv(history, omega),
            CvEstimator::Jackknife => jackknife_mean_cv(history, omega),
            CvEstimator::Splitting => splitting_mean_cv(history, omega),
            CvEstimator::Batching { batch_count } => batching_mean_cv(history, omega, batch_count),
        }
    }

    /// Runs this estimator, falling back to the Gaussian one when a resampling
    /// variant cannot be computed on the current sample.
    pub fn estimate_or_gaussian<S: Scalar>(
        &self,
        history: &ArmHistory<S>,
        omega: &[S],
    ) -> Result<CvEstimate<S>> {
        match self.estimate(history, omega) {
            Err(_) if *self != CvEstimator::Gaussian => mean_cv(history, omega),
            other => other,
        }
    }
}

/// Smallest number of reward/CV pairs for which the CV side is used.
pub fn cv_pair_threshold(q: usize) -> usize {
    q + 2
}

/// Builds the combined estimate for one arm. The CV side is used only when
/// `M >= q + 2` and the estimator succeeds; otherwise the weight is forced to
/// the no-CV side.
pub fn estimate_arm<S: Scalar>(
    history: &ArmHistory<S>,
    omega: &[S],
    estimator: CvEstimator,
) -> Result<CombinedEstimate<S>> {
    let counts = SampleCounts { n: history.n(), m: history.m(), q: history.q() };
    let no_cv = if counts.n > 0 { Some(mean_no_cv(history)?) } else { None };
    let cv = if counts.m >= cv_pair_threshold(counts.q) {
        estimator.estimate_or_gaussian(history, omega).ok()
    } else {
        None
    };
    combine(no_cv, cv, counts)
}
