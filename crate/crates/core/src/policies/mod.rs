//! Bandit policies behind a common interface.
//!
//! A round is numbered from 1. Every policy first plays each arm a fixed
//! number of times in round-robin order and afterwards plays the arm with the
//! largest index, ties going to the lowest arm index.

mod baselines;
mod ucb_lcv;

use serde::{Deserialize, Serialize};

use crate::environments::{InstanceSpec, Observation};
use crate::error::{Error, Result};
use crate::estimators::{CvEstimator, DEFAULT_BATCH_COUNT};

pub use baselines::{KlUcb, RewardStats, Thompson, Ucb1, Ucb1Normal, UcbV};
pub use ucb_lcv::{ucb_lcv_index, ucb_normal_index, UcbLcv, UcbNormal};

pub const DEFAULT_ALPHA: f64 = 2.0;
pub const DEFAULT_CV_COUNT: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    UcbLcv,
    UcbNormal,
    Ucb1,
    Ucb1Normal,
    KlUcb,
    UcbV,
    Thompson,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 7] = [
        Self::UcbLcv,
        Self::UcbNormal,
        Self::Ucb1,
        Self::Ucb1Normal,
        Self::KlUcb,
        Self::UcbV,
        Self::Thompson,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::UcbLcv => "ucb_lcv",
            Self::UcbNormal => "ucb_normal",
            Self::Ucb1 => "ucb1",
            Self::Ucb1Normal => "ucb1_normal",
            Self::KlUcb => "kl_ucb",
            Self::UcbV => "ucb_v",
            Self::Thompson => "thompson",
        }
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown policy kind '{s}'")))
    }
}

/// Estimator used for the CV side of UCB-LCV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorVariant {
    #[default]
    Gaussian,
    Jackknife,
    Splitting,
    Batching,
}

impl EstimatorVariant {
    pub fn name(self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Jackknife => "jackknife",
            Self::Splitting => "splitting",
            Self::Batching => "batching",
        }
    }
}

/// Resolved policy parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    /// Label used in outputs; unique within an experiment.
    pub name: String,
    pub kind: PolicyKind,
    pub alpha: f64,
    /// Number of CVs the policy expects per observation.
    pub q: usize,
    pub estimator: EstimatorVariant,
    pub batch_count: usize,
    /// Range parameter of UCB-V; `None` derives it from the warm-start sample.
    pub ucb_v_range: Option<f64>,
}

impl PolicyConfig {
    /// Defaults: α = 2, q = 1, Gaussian estimator, name equal to the kind.
    pub fn new(kind: PolicyKind) -> Self {
        Self {
            name: kind.name().to_owned(),
            kind,
            alpha: DEFAULT_ALPHA,
            q: DEFAULT_CV_COUNT,
            estimator: EstimatorVariant::Gaussian,
            batch_count: DEFAULT_BATCH_COUNT,
            ucb_v_range: None,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_estimator(mut self, estimator: EstimatorVariant) -> Self {
        self.estimator = estimator;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::Config("policy name must not be empty".into()));
        }
        if !(self.alpha > 1.0) || !self.alpha.is_finite() {
            return Err(Error::Config(format!("alpha must exceed 1, got {}", self.alpha)));
        }
        if self.q == 0 {
            return Err(Error::Config("q must be at least 1".into()));
        }
        if self.batch_count < 2 {
            return Err(Error::Config(format!("batch_count must be at least 2, got {}", self.batch_count)));
        }
        if let Some(b) = self.ucb_v_range {
            if !(b > 0.0) || !b.is_finite() {
                return Err(Error::Config(format!("ucb_v_range must be positive, got {b}")));
            }
        }
        Ok(())
    }

    pub fn cv_estimator(&self) -> CvEstimator {
        match self.estimator {
            EstimatorVariant::Gaussian => CvEstimator::Gaussian,
            EstimatorVariant::Jackknife => CvEstimator::Jackknife,
            EstimatorVariant::Splitting => CvEstimator::Splitting,
            EstimatorVariant::Batching => CvEstimator::Batching { batch_count: self.batch_count },
        }
    }

    /// Pulls per arm in the initial round-robin phase.
    pub fn warm_start_pulls(&self) -> usize {
        match self.kind {
            PolicyKind::UcbLcv | PolicyKind::UcbNormal => self.q + 4,
            PolicyKind::Ucb1 => 1,
            PolicyKind::Ucb1Normal | PolicyKind::KlUcb | PolicyKind::UcbV | PolicyKind::Thompson => 2,
        }
    }

    /// Instantiates the policy for `instance`; `seed` feeds randomized policies.
    pub fn build(&self, instance: &InstanceSpec, seed: u64) -> Result<Box<dyn Policy>> {
        self.validate()?;
        let k = instance.num_arms();
        Ok(match self.kind {
            PolicyKind::UcbLcv => {
                if self.q != instance.cv_count() {
                    return Err(Error::Config(format!(
                        "policy '{}' expects q = {} CVs but the instance has {}",
                        self.name,
                        self.q,
                        instance.cv_count()
                    )));
                }
                Box::new(UcbLcv::new(self.alpha, instance.omega_reported.clone(), self.cv_estimator())?)
            }
            PolicyKind::UcbNormal => Box::new(UcbNormal::new(k, self.alpha, self.warm_start_pulls())?),
            PolicyKind::Ucb1 => Box::new(Ucb1::new(k)),
            PolicyKind::Ucb1Normal => Box::new(Ucb1Normal::new(k)),
            PolicyKind::KlUcb => Box::new(KlUcb::new(k)),
            PolicyKind::UcbV => Box::new(UcbV::new(k, self.ucb_v_range)),
            PolicyKind::Thompson => Box::new(Thompson::new(k, seed)),
        })
    }
}

/// Index of one arm at one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmIndexValue {
    pub arm: usize,
    /// Upper confidence bound or posterior sample.
    pub index_value: f64,
}

pub trait Policy: Send {
    fn num_arms(&self) -> usize;

    /// Rounds spent in the initial round-robin phase.
    fn warm_start_rounds(&self) -> u64;

    /// Index of `arm` at round `t`, valid once the warm-start is over.
    fn arm_index(&mut self, arm: usize, t: u64) -> Result<f64>;

    fn update(&mut self, arm: usize, observation: &Observation) -> Result<()>;

    fn index_values(&mut self, t: u64) -> Result<Vec<ArmIndexValue>> {
        (0..self.num_arms())
            .map(|arm| Ok(ArmIndexValue { arm, index_value: self.arm_index(arm, t)? }))
            .collect()
    }

    fn select_arm(&mut self, t: u64) -> Result<usize> {
        if t == 0 {
            return Err(Error::Domain("rounds are numbered from 1".into()));
        }
        if t <= self.warm_start_rounds() {
            return Ok(round_robin(t, self.num_arms()));
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

pub(crate) fn warm_start_arm(t: u64, k: usize) -> Result<usize> {
    if t == 0 {
        return Err(Error::Domain("rounds are numbered from 1".into()));
    }
    Ok(round_robin(t, k))
}

pub(crate) fn round_robin(t: u64, k: usize) -> usize {
    ((t - 1) % k as u64) as usize
}

pub(crate) fn check_arm(arm: usize, k: usize) -> Result<()> {
    if arm >= k {
        return Err(Error::Domain(format!("arm {arm} out of range for {k} arms")));
    }
    Ok(())
}
