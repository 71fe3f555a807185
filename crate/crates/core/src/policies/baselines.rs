//! Reference policies that ignore control variates.

use rand_distr::{Distribution, StandardNormal};

use crate::environments::Observation;
use crate::error::{Error, Result};
use crate::stats::RngStream;

use super::{check_arm, round_robin, Policy};

/// Running count, mean and unbiased variance of one arm's rewards.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RewardStats {
    count: usize,
    mean: f64,
    m2: f64,
}

impl RewardStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; needs two samples.
    pub fn variance(&self) -> Result<f64> {
        if self.count < 2 {
            return Err(Error::WarmStartIncomplete(format!(
                "{} sample(s), need at least 2",
                self.count
            )));
        }
        Ok(self.m2 / (self.count - 1) as f64)
    }

    fn require(&self, n: usize) -> Result<()> {
        if self.count < n {
            return Err(Error::WarmStartIncomplete(format!(
                "{} sample(s), need at least {n}",
                self.count
            )));
        }
        Ok(())
    }
}

fn update_stats(stats: &mut [RewardStats], arm: usize, observation: &Observation) -> Result<()> {
    check_arm(arm, stats.len())?;
    stats[arm].push(observation.reward);
    Ok(())
}

fn ln_round(t: u64) -> f64 {
    (t as f64).ln()
}

/// UCB1: `mean + sqrt(2 ln t / s)`.
#[derive(Debug, Clone)]
pub struct Ucb1 {
    stats: Vec<RewardStats>,
}

impl Ucb1 {
    pub fn new(k: usize) -> Self {
        Self { stats: vec![RewardStats::default(); k] }
    }
}

impl Policy for Ucb1 {
    fn num_arms(&self) -> usize {
        self.stats.len()
    }

    fn warm_start_rounds(&self) -> u64 {
        self.stats.len() as u64
    }

    fn arm_index(&mut self, arm: usize, t: u64) -> Result<f64> {
        check_arm(arm, self.stats.len())?;
        let s = &self.stats[arm];
        s.require(1)?;
        Ok(s.mean() + (2.0 * ln_round(t) / s.count() as f64).sqrt())
    }

    fn update(&mut self, arm: usize, observation: &Observation) -> Result<()> {
        update_stats(&mut self.stats, arm, observation)
    }
}

/// UCB1-NORMAL: any arm with fewer than `8·⌈ln t⌉` pulls is played first
/// (lowest index); otherwise `mean + sqrt(16 v ln(t-1) / s)` with `v` the
/// unbiased variance.
#[derive(Debug, Clone)]
pub struct Ucb1Normal {
    stats: Vec<RewardStats>,
}

impl Ucb1Normal {
    pub fn new(k: usize) -> Self {
        Self { stats: vec![RewardStats::default(); k] }
    }

    /// Minimum pull count enforced at round `t`.
    pub fn forced_pulls(t: u64) -> usize {
        8 * ln_round(t).ceil() as usize
    }
}

impl Policy for Ucb1Normal {
    fn num_arms(&self) -> usize {
        self.stats.len()
    }

    fn warm_start_rounds(&self) -> u64 {
        2 * self.stats.len() as u64
    }

    fn arm_index(&mut self, arm: usize, t: u64) -> Result<f64> {
        check_arm(arm, self.stats.len())?;
        let s = &self.stats[arm];
        let v = s.variance()?;
        Ok(s.mean() + (16.0 * v * ln_round(t - 1) / s.count() as f64).sqrt())
    }

    fn update(&mut self, arm: usize, observation: &Observation) -> Result<()> {
        update_stats(&mut self.stats, arm, observation)
    }

    fn select_arm(&mut self, t: u64) -> Result<usize> {
        if t == 0 {
            return Err(Error::Domain("rounds are numbered from 1".into()));
        }
        if t <= self.warm_start_rounds() {
            return Ok(round_robin(t, self.num_arms()));
        }
        let need = Self::forced_pulls(t);
        if let Some(arm) = self.stats.iter().position(|s| s.count() < need) {
            return Ok(arm);
        }
        let mut best = 0;
        let mut best_value = f64::NEG_INFINITY;
        for arm in 0..self.num_arms() {
            let value = self.arm_index(arm, t)?;
            if value > best_value {
                best = arm;
                best_value = value;
            }
        }
        Ok(best)
    }
}

/// kl-UCB with the Gaussian divergence and a plug-in variance:
/// `mean + sqrt(2 v ln t / s)`.
#[derive(Debug, Clone)]
pub struct KlUcb {
    stats: Vec<RewardStats>,
}

impl KlUcb {
    pub fn new(k: usize) -> Self {
        Self { stats: vec![RewardStats::default(); k] }
    }
}

impl Policy for KlUcb {
    fn num_arms(&self) -> usize {
        self.stats.len()
    }

    fn warm_start_rounds(&self) -> u64 {
        2 * self.stats.len() as u64
    }

    fn arm_index(&mut self, arm: usize, t: u64) -> Result<f64> {
        check_arm(arm, self.stats.len())?;
        let s = &self.stats[arm];
        let v = s.variance()?;
        Ok(s.mean() + (2.0 * v * ln_round(t) / s.count() as f64).sqrt())
    }

    fn update(&mut self, arm: usize, observation: &Observation) -> Result<()> {
        update_stats(&mut self.stats, arm, observation)
    }
}

/// UCB-V: `mean + sqrt(2 v ln t / s) + 3 b ln t / s`.
///
/// Without a configured range `b`, it is set once after the warm-start to
/// four times the square root of the mean per-arm sample variance.
#[derive(Debug, Clone)]
pub struct UcbV {
    stats: Vec<RewardStats>,
    range: Option<f64>,
}

impl UcbV {
    pub fn new(k: usize, range: Option<f64>) -> Self {
        Self { stats: vec![RewardStats::default(); k], range }
    }

    pub fn range(&self) -> Option<f64> {
        self.range
    }

    fn resolve_range(&mut self) -> Result<f64> {
        if let Some(b) = self.range {
            return Ok(b);
        }
        let mut total = 0.0;
        for s in &self.stats {
            total += s.variance()?;
        }
        let b = 4.0 * (total / self.stats.len() as f64).sqrt();
        self.range = Some(b);
        Ok(b)
    }
}

impl Policy for UcbV {
    fn num_arms(&self) -> usize {
        self.stats.len()
    }

    fn warm_start_rounds(&self) -> u64 {
        2 * self.stats.len() as u64
    }

    fn arm_index(&mut self, arm: usize, t: u64) -> Result<f64> {
        check_arm(arm, self.stats.len())?;
        let b = self.resolve_range()?;
        let s = &self.stats[arm];
        let v = s.variance()?;
        let n = s.count() as f64;
        let lt = ln_round(t);
        Ok(s.mean() + (2.0 * v * lt / n).sqrt() + 3.0 * b * lt / n)
    }

    fn update(&mut self, arm: usize, observation: &Observation) -> Result<()> {
        update_stats(&mut self.stats, arm, observation)
    }
}

/// Gaussian Thompson sampling: the index is a draw from
/// `Normal(mean, v / s)`.
#[derive(Debug, Clone)]
pub struct Thompson {
    stats: Vec<RewardStats>,
    rng: RngStream,
}

impl Thompson {
    pub fn new(k: usize, seed: u64) -> Self {
        Self { stats: vec![RewardStats::default(); k], rng: RngStream::new(seed, 0) }
    }
}

impl Policy for Thompson {
    fn num_arms(&self) -> usize {
        self.stats.len()
    }

    fn warm_start_rounds(&self) -> u64 {
        2 * self.stats.len() as u64
    }

    fn arm_index(&mut self, arm: usize, _t: u64) -> Result<f64> {
        check_arm(arm, self.stats.len())?;
        let s = &self.stats[arm];
        let v = s.variance()?;
        let z: f64 = StandardNormal.sample(&mut self.rng);
        Ok(s.mean() + (v / s.count() as f64).sqrt() * z)
    }

    fn update(&mut self, arm: usize, observation: &Observation) -> Result<()> {
        update_stats(&mut self.stats, arm, observation)
    }
}
