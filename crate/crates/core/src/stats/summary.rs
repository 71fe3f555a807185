use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::scalar::Scalar;

use super::quantile::{t_quantile, TQuantileQuery};

/// Count, mean and unbiased variance of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSummary<S> {
    pub count: usize,
    /// `None` for an empty sample.
    pub mean: Option<S>,
    /// `None` when `count < 2`.
    pub variance_unbiased: Option<S>,
}

pub fn summarize<S: Scalar>(samples: &[S]) -> SampleSummary<S> {
    let count = samples.len();
    if count == 0 {
        return SampleSummary { count, mean: None, variance_unbiased: None };
    }
    let n = S::count(count);
    let mean = samples.iter().copied().sum::<S>() / n;
    let variance_unbiased = (count >= 2).then(|| {
        let ss: S = samples.iter().map(|&x| (x - mean) * (x - mean)).sum();
        ss / (n - S::one())
    });
    SampleSummary { count, mean: Some(mean), variance_unbiased }
}

/// Mean with a two-sided Student-t confidence band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band<S> {
    pub mean: S,
    pub low: S,
    pub high: S,
}

impl<S: Scalar> Band<S> {
    pub fn half_width(&self) -> S {
        self.high - self.mean
    }

    pub fn overlaps(&self, other: &Band<S>) -> bool {
        self.low <= other.high && other.low <= self.high
    }
}

/// `mean ± t_{(1+level)/2, n-1} · s/√n` over per-run values.
pub fn confidence_band<S: Scalar>(per_run_values: &[S], level: S) -> Result<Band<S>> {
    if per_run_values.len() < 2 {
        return domain(format!(
            "confidence band needs at least 2 runs, got {}",
            per_run_values.len()
        ));
    }
    if !(level > S::zero() && level < S::one()) {
        return domain(format!("confidence level {level} outside (0, 1)"));
    }
    let summary = summarize(per_run_values);
    let mean = summary.mean.expect("non-empty");
    let var = summary.variance_unbiased.expect("count >= 2");
    let n = S::count(summary.count);
    let crit = t_quantile(TQuantileQuery::new((S::one() + level) * S::half(), summary.count as u64 - 1)?);
    let half_width = crit * (var / n).sqrt();
    Ok(Band { mean, low: mean - half_width, high: mean + half_width })
}
