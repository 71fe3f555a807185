//! Full bandit runs, replication over seeds, and regret aggregation.
//!
//! Seeds are derived with [`derive_seed`]:
//! the environment of run `r` uses `derive_seed([base, r, ENV_ROLE])` with one
//! stream per arm, so every policy faces the same reward sequence per arm
//! within a run; the policy at position `p` uses
//! `derive_seed([base, r, p, POLICY_ROLE])`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::environments::{InstanceFamily, InstanceParams, InstanceSpec};
use crate::error::{Error, Result};
use crate::policies::{Policy, PolicyConfig};
use crate::stats::{confidence_band, derive_seed, Band, RngStream};

pub const ENV_ROLE: u64 = 0x454e_5649;
pub const POLICY_ROLE: u64 = 0x504f_4c49;
pub const SWEEP_ROLE: u64 = 0x5357_4550;
pub const CONFIDENCE_LEVEL: f64 = 0.95;

/// Instance family plus its resolved parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceConfig {
    pub family: InstanceFamily,
    pub params: InstanceParams,
}

impl InstanceConfig {
    pub fn new(family: InstanceFamily) -> Self {
        Self { family, params: InstanceParams::defaults(family) }
    }

    pub fn build(&self, horizon: usize) -> Result<InstanceSpec> {
        let params = InstanceParams { horizon, ..self.params.clone() };
        self.family.build(&params).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub instance: InstanceConfig,
    pub policies: Vec<PolicyConfig>,
    pub horizon: usize,
    pub runs: usize,
    pub base_seed: u64,
    pub record_stride: usize,
}

impl ExperimentConfig {
    pub fn new(instance: InstanceConfig, policies: Vec<PolicyConfig>) -> Self {
        Self {
            name: instance.family.name().to_owned(),
            instance,
            policies,
            horizon: crate::environments::DEFAULT_HORIZON,
            runs: 100,
            base_seed: 0,
            record_stride: 1,
        }
    }

    /// Checks every invariant and returns the built instance.
    pub fn validate(&self) -> Result<InstanceSpec> {
        let config = |msg: String| Err(Error::Config(msg));
        if self.horizon == 0 {
            return config("horizon must be positive".into());
        }
        if self.runs < 2 {
            return config(format!("runs must be at least 2, got {}", self.runs));
        }
        if self.record_stride == 0 {
            return config("record_stride must be positive".into());
        }
        if self.policies.is_empty() {
            return config("at least one policy is required".into());
        }
        let instance = self.instance.build(self.horizon)?;
        let k = instance.num_arms();
        for (i, p) in self.policies.iter().enumerate() {
            if self.policies[..i].iter().any(|o| o.name == p.name) {
                return config(format!("duplicate policy name '{}'", p.name));
            }
            p.validate()?;
            let warm = p.warm_start_pulls() * k;
            if self.horizon < warm {
                return config(format!(
                    "horizon {} is shorter than the {warm}-round warm-start of policy '{}'",
                    self.horizon, p.name
                ));
            }
            p.build(&instance, 0)?;
        }
        Ok(instance)
    }

    pub fn env_seed(&self, run_index: usize) -> u64 {
        derive_seed(&[self.base_seed, run_index as u64, ENV_ROLE])
    }

    pub fn policy_seed(&self, run_index: usize, policy_index: usize) -> u64 {
        derive_seed(&[self.base_seed, run_index as u64, policy_index as u64, POLICY_ROLE])
    }

    /// Recorded rounds: every `record_stride`-th round plus the horizon.
    pub fn recorded_rounds(&self) -> Vec<u64> {
        recorded_rounds(self.horizon, self.record_stride)
    }
}

pub fn recorded_rounds(horizon: usize, stride: usize) -> Vec<u64> {
    let mut rounds: Vec<u64> = (stride..=horizon).step_by(stride.max(1)).map(|t| t as u64).collect();
    if rounds.last() != Some(&(horizon as u64)) {
        rounds.push(horizon as u64);
    }
    rounds
}

/// Outcome of one policy on one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrajectory {
    /// Cumulative pseudo-regret at each recorded round.
    pub cumulative_pseudo_regret: Vec<f64>,
    pub arm_counts: Vec<usize>,
    /// Rounds in which the CVs were revealed.
    pub cv_observed_count: usize,
}

impl RunTrajectory {
    pub fn final_regret(&self) -> f64 {
        *self.cumulative_pseudo_regret.last().expect("horizon is positive")
    }
}

/// Per-arm environment streams of one run.
pub struct Environment<'a> {
    instance: &'a InstanceSpec,
    streams: Vec<RngStream>,
}

impl<'a> Environment<'a> {
    pub fn new(instance: &'a InstanceSpec, seed: u64) -> Self {
        let streams = (0..instance.num_arms() as u64).map(|arm| RngStream::new(seed, arm)).collect();
        Self { instance, streams }
    }

    pub fn pull(&mut self, arm: usize) -> Result<crate::environments::Observation> {
        let stream = self
            .streams
            .get_mut(arm)
            .ok_or_else(|| Error::Domain(format!("arm {arm} out of range")))?;
        self.instance.pull(arm, stream)
    }
}

/// Plays `policy` for `horizon` rounds, calling `on_round(t, arm)` after each
/// pull, and records the cumulative pseudo-regret at `recorded` rounds.
pub fn play<F>(
    instance: &InstanceSpec,
    policy: &mut dyn Policy,
    horizon: usize,
    recorded: &[u64],
    env_seed: u64,
    mut on_round: F,
) -> Result<RunTrajectory>
where
    F: FnMut(u64, usize),
{
    let k = instance.num_arms();
    if policy.num_arms() != k {
        return Err(Error::Config(format!(
            "policy has {} arms, instance has {k}",
            policy.num_arms()
        )));
    }
    let gaps = instance.gaps();
    let mut env = Environment::new(instance, env_seed);
    let mut counts = vec![0usize; k];
    let mut cv_observed = 0;
    let mut regret = Vec::with_capacity(recorded.len());
    let mut next = recorded.iter().peekable();
    for t in 1..=horizon as u64 {
        let arm = policy.select_arm(t)?;
        let obs = env.pull(arm)?;
        cv_observed += usize::from(obs.cv.is_some());
        policy.update(arm, &obs)?;
        counts[arm] += 1;
        on_round(t, arm);
        if next.peek() == Some(&&t) {
            next.next();
            regret.push(pseudo_regret(&counts, &gaps));
        }
    }
    Ok(RunTrajectory { cumulative_pseudo_regret: regret, arm_counts: counts, cv_observed_count: cv_observed })
}

/// `Σ_i counts_i · Δ_i`, summed in arm order.
pub fn pseudo_regret(counts: &[usize], gaps: &[f64]) -> f64 {
    counts.iter().zip(gaps).fold(0.0, |acc, (&c, &g)| acc + c as f64 * g)
}

/// One run of the policy at `policy_index`.
pub fn run_single(config: &ExperimentConfig, policy_index: usize, run_index: usize) -> Result<RunTrajectory> {
    let instance = config.validate()?;
    run_prepared(config, &instance, &config.recorded_rounds(), policy_index, run_index)
}

fn run_prepared(
    config: &ExperimentConfig,
    instance: &InstanceSpec,
    recorded: &[u64],
    policy_index: usize,
    run_index: usize,
) -> Result<RunTrajectory> {
    let pc = config
        .policies
        .get(policy_index)
        .ok_or_else(|| Error::Config(format!("no policy at position {policy_index}")))?;
    let mut policy = pc.build(instance, config.policy_seed(run_index, policy_index))?;
    play(instance, policy.as_mut(), config.horizon, recorded, config.env_seed(run_index), |_, _| {})
        .map_err(|e| Error::Config(format!("policy '{}', run {run_index}: {e}", pc.name)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub name: String,
    /// 95% band over runs at each recorded round.
    pub bands: Vec<Band<f64>>,
    pub runs: Vec<RunTrajectory>,
}

impl PolicySummary {
    pub fn final_band(&self) -> Band<f64> {
        *self.bands.last().expect("horizon is positive")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretSummary {
    pub config: ExperimentConfig,
    pub rounds: Vec<u64>,
    pub policies: Vec<PolicySummary>,
}

impl RegretSummary {
    pub fn policy(&self, name: &str) -> Option<&PolicySummary> {
        self.policies.iter().find(|p| p.name == name)
    }
}

/// Runs every policy `runs` times on a pool of `workers` threads. The result
/// does not depend on `workers`.
pub fn run_batch(config: &ExperimentConfig, workers: usize) -> Result<RegretSummary> {
    let instance = config.validate()?;
    let rounds = config.recorded_rounds();
    let jobs: Vec<(usize, usize)> = (0..config.policies.len())
        .flat_map(|p| (0..config.runs).map(move |r| (p, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<RunTrajectory>> = pool.install(|| {
        jobs.par_iter().map(|&(p, r)| run_prepared(config, &instance, &rounds, p, r)).collect()
    });
    let mut results = results.into_iter();

    let mut policies = Vec::with_capacity(config.policies.len());
    for pc in &config.policies {
        let runs = results.by_ref().take(config.runs).collect::<Result<Vec<_>>>()?;
        let mut bands = Vec::with_capacity(rounds.len());
        let mut column = vec![0.0; runs.len()];
        for i in 0..rounds.len() {
            for (v, run) in column.iter_mut().zip(&runs) {
                *v = run.cumulative_pseudo_regret[i];
            }
            bands.push(confidence_band(&column, CONFIDENCE_LEVEL)?);
        }
        policies.push(PolicySummary { name: pc.name.clone(), bands, runs });
    }
    Ok(RegretSummary { config: config.clone(), rounds, policies })
}

/// Instance parameter varied by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Epsilon,
    CvMeanError,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            Self::Epsilon => "epsilon",
            Self::CvMeanError => "cv_mean_error",
        }
    }

    /// Copy of `config` with the parameter set to `value` and a value-derived
    /// seed.
    pub fn apply(self, config: &ExperimentConfig, value: f64) -> Result<ExperimentConfig> {
        if !value.is_finite() {
            return Err(Error::Config(format!("{} value {value} is not finite", self.name())));
        }
        let mut c = config.clone();
        match self {
            Self::Epsilon => {
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::Config(format!("epsilon {value} outside [0, 1]")));
                }
                c.instance.params.epsilon = value;
            }
            Self::CvMeanError => c.instance.params.cv_mean_error = value,
        }
        c.base_seed = derive_seed(&[config.base_seed, SWEEP_ROLE, value.to_bits()]);
        Ok(c)
    }
}

impl std::str::FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "epsilon" => Ok(Self::Epsilon),
            "cv_mean_error" => Ok(Self::CvMeanError),
            _ => Err(Error::Config(format!("unknown sweep parameter '{s}'"))),
        }
    }
}

/// One [`run_batch`] per value, in the order given.
pub fn sweep(
    config: &ExperimentConfig,
    parameter: SweepParameter,
    values: &[f64],
    workers: usize,
) -> Result<Vec<(f64, RegretSummary)>> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    let configs = values
        .iter()
        .map(|&v| parameter.apply(config, v))
        .collect::<Result<Vec<_>>>()?;
    configs
        .iter()
        .zip(values)
        .map(|(c, &v)| Ok((v, run_batch(c, workers)?)))
        .collect()
}
