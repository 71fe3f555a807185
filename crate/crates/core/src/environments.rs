//! Synthetic MAB-LCV environments.
//!
//! Every arm draws a reward together with `q` control variates (CVs) whose
//! means are known to the learner. Each round, an independent
//! Bernoulli(ε) draw decides whether the CVs are revealed alongside the
//! reward.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::stats::sampling::{bernoulli, lognormal, lognormal_params, normal};

pub const DEFAULT_ARMS: usize = 10;
pub const DEFAULT_HORIZON: usize = 10_000;
pub const DEFAULT_EPSILON: f64 = 0.5;
/// CV availability for the general-distribution instances.
pub const GENERAL_EPSILON: f64 = 0.2;
pub const COMPONENT_VARIANCE: f64 = 0.01;
pub const MODAL_SHIFT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArmKind {
    /// `X = V + ΣY_j`, `W_j = Y_j`, all components Gaussian.
    GaussianAdditive,
    /// Gaussian additive reward shifted by `±modal_shift` with equal
    /// probability; CVs are left unshifted.
    MultiModal,
    /// Log-normal components moment-matched to the Gaussian ones, combined
    /// additively.
    LogNormal,
}

/// Generative model of one arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmModel {
    pub kind: ArmKind,
    pub mu_v: f64,
    pub sigma_v2: f64,
    pub mu_w: f64,
    pub sigma_w2: f64,
    pub modal_shift: f64,
    /// Number of CVs per observation.
    pub q: usize,
}

impl ArmModel {
    pub fn gaussian_additive(mu_v: f64, sigma_v2: f64, mu_w: f64, sigma_w2: f64) -> Self {
        Self { kind: ArmKind::GaussianAdditive, mu_v, sigma_v2, mu_w, sigma_w2, modal_shift: 0.0, q: 1 }
    }

    pub fn with_kind(mut self, kind: ArmKind) -> Self {
        self.kind = kind;
        if kind == ArmKind::MultiModal && self.modal_shift == 0.0 {
            self.modal_shift = MODAL_SHIFT;
        }
        self
    }

    pub fn with_cv_count(mut self, q: usize) -> Self {
        self.q = q;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_v2 > 0.0 && self.sigma_w2 > 0.0) {
            return domain("arm variances must be positive");
        }
        if self.modal_shift < 0.0 {
            return domain("modal shift must be non-negative");
        }
        if self.kind == ArmKind::LogNormal {
            lognormal_params(self.mu_v, self.sigma_v2)?;
            lognormal_params(self.mu_w, self.sigma_w2)?;
        }
        Ok(())
    }

    /// Analytic mean of the reward. The symmetric modal shift leaves it
    /// unchanged.
    pub fn true_mean(&self) -> f64 {
        self.mu_v + self.q as f64 * self.mu_w
    }

    /// Analytic mean of each CV.
    pub fn true_cv_mean(&self) -> f64 {
        self.mu_w
    }

    pub fn reward_variance(&self) -> f64 {
        let base = self.sigma_v2 + self.q as f64 * self.sigma_w2;
        match self.kind {
            ArmKind::MultiModal => base + self.modal_shift * self.modal_shift,
            _ => base,
        }
    }

    /// Correlation between the reward and any single CV.
    pub fn correlation(&self) -> f64 {
        self.sigma_w2 / (self.reward_variance() * self.sigma_w2).sqrt()
    }

    /// Draws one joint (reward, CVs) sample. The number of random draws
    /// consumed per call is fixed for a given arm kind.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, cvs: &mut Vec<f64>) -> f64 {
        cvs.clear();
        match self.kind {
            ArmKind::GaussianAdditive | ArmKind::MultiModal => {
                let mut reward = normal(self.mu_v, self.sigma_v2, rng);
                for _ in 0..self.q {
                    let y = normal(self.mu_w, self.sigma_w2, rng);
                    reward += y;
                    cvs.push(y);
                }
                if self.kind == ArmKind::MultiModal {
                    if bernoulli(0.5, rng) {
                        reward += self.modal_shift;
                    } else {
                        reward -= self.modal_shift;
                    }
                }
                reward
            }
            ArmKind::LogNormal => {
                let (mv, sv) = lognormal_params(self.mu_v, self.sigma_v2).expect("validated");
                let (mw, sw) = lognormal_params(self.mu_w, self.sigma_w2).expect("validated");
                let mut reward = lognormal(mv, sv, rng);
                for _ in 0..self.q {
                    let y = lognormal(mw, sw, rng);
                    reward += y;
                    cvs.push(y);
                }
                reward
            }
        }
    }
}

/// Bernoulli availability of the CVs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvAvailability {
    epsilon: f64,
}

impl CvAvailability {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return domain(format!("epsilon {epsilon} outside [0, 1]"));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// What the learner sees after pulling an arm.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub reward: f64,
    /// Present only when the availability draw succeeds; length `q`.
    pub cv: Option<Vec<f64>>,
}

/// A full problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub name: String,
    pub arms: Vec<ArmModel>,
    pub availability: CvAvailability,
    /// CV means handed to the learner: the true means plus any injected error.
    pub omega_reported: Vec<Vec<f64>>,
    pub horizon: usize,
}

impl InstanceSpec {
    fn from_arms(name: &str, arms: Vec<ArmModel>, epsilon: f64) -> Result<Self> {
        if arms.len() < 2 {
            return domain(format!("an instance needs at least 2 arms, got {}", arms.len()));
        }
        for arm in &arms {
            arm.validate()?;
        }
        let omega_reported = arms.iter().map(|a| vec![a.true_cv_mean(); a.q]).collect();
        Ok(Self {
            name: name.to_owned(),
            arms,
            availability: CvAvailability::new(epsilon)?,
            omega_reported,
            horizon: DEFAULT_HORIZON,
        })
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    /// CV dimension shared by all arms.
    pub fn cv_count(&self) -> usize {
        self.arms[0].q
    }

    pub fn true_means(&self) -> Vec<f64> {
        self.arms.iter().map(ArmModel::true_mean).collect()
    }

    /// Index of the best arm, lowest index on ties.
    pub fn optimal_arm(&self) -> usize {
        let means = self.true_means();
        let mut best = 0;
        for (i, &m) in means.iter().enumerate() {
            if m > means[best] {
                best = i;
            }
        }
        best
    }

    /// Sub-optimality gaps `μ* - μ_i`.
    pub fn gaps(&self) -> Vec<f64> {
        let means = self.true_means();
        let best = means[self.optimal_arm()];
        means.iter().map(|m| best - m).collect()
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.availability = CvAvailability::new(epsilon)?;
        Ok(self)
    }

    /// Shifts every reported CV mean by `error`.
    pub fn with_cv_mean_error(mut self, error: f64) -> Self {
        for (omega, arm) in self.omega_reported.iter_mut().zip(&self.arms) {
            omega.iter_mut().for_each(|w| *w = arm.true_cv_mean() + error);
        }
        self
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }

    /// Draws the reward of `arm` and, with probability ε, reveals its CVs.
    pub fn pull<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R) -> Result<Observation> {
        let model = match self.arms.get(arm) {
            Some(m) => m,
            None => return domain(format!("arm {arm} out of range for {} arms", self.arms.len())),
        };
        let mut cvs = Vec::with_capacity(model.q);
        let reward = model.sample(rng, &mut cvs);
        let available = bernoulli(self.availability.epsilon(), rng);
        Ok(Observation { reward, cv: available.then_some(cvs) })
    }
}

fn instance_1_arms(k: usize) -> Vec<ArmModel> {
    (1..=k)
        .map(|i| {
            let m = 0.1 * i as f64;
            ArmModel::gaussian_additive(m, COMPONENT_VARIANCE, m, COMPONENT_VARIANCE)
        })
        .collect()
}

/// Ten Gaussian-additive arms with `μ_v,i = μ_w,i = 0.1·i`, ε = 0.5.
pub fn make_instance_1() -> InstanceSpec {
    make_instance_1_with(DEFAULT_ARMS, DEFAULT_EPSILON).expect("static parameters")
}

pub fn make_instance_1_with(arms: usize, epsilon: f64) -> Result<InstanceSpec> {
    InstanceSpec::from_arms("instance1", instance_1_arms(arms), epsilon)
}

/// Instance 1 with every CV mean fixed at 0.5.
pub fn make_instance_2() -> InstanceSpec {
    make_instance_2_with(DEFAULT_ARMS, DEFAULT_EPSILON).expect("static parameters")
}

pub fn make_instance_2_with(arms: usize, epsilon: f64) -> Result<InstanceSpec> {
    let arms = instance_1_arms(arms)
        .into_iter()
        .map(|a| ArmModel { mu_w: 0.5, ..a })
        .collect();
    InstanceSpec::from_arms("instance2", arms, epsilon)
}

/// Instance 1 with a custom CV availability.
pub fn make_instance_3(epsilon: f64) -> Result<InstanceSpec> {
    let mut spec = make_instance_1_with(DEFAULT_ARMS, epsilon)?;
    spec.name = "instance3".into();
    Ok(spec)
}

/// Instance 1 with every reported CV mean off by `cv_mean_error`.
pub fn make_instance_4(cv_mean_error: f64) -> InstanceSpec {
    let mut spec = make_instance_1().with_cv_mean_error(cv_mean_error);
    spec.name = "instance4".into();
    spec
}

fn general_arms(k: usize, kind: ArmKind) -> Vec<ArmModel> {
    (1..=k)
        .map(|i| {
            let step = 0.01 * (i - 1) as f64;
            ArmModel::gaussian_additive(0.6 - step, COMPONENT_VARIANCE, 0.8 - step, COMPONENT_VARIANCE)
                .with_kind(kind)
        })
        .collect()
}

pub fn make_general_instance(kind: ArmKind, arms: usize, epsilon: f64) -> Result<InstanceSpec> {
    let name = match kind {
        ArmKind::GaussianAdditive => "general_normal",
        ArmKind::MultiModal => "general_multimodal",
        ArmKind::LogNormal => "general_lognormal",
    };
    InstanceSpec::from_arms(name, general_arms(arms, kind), epsilon)
}

/// Normal, multi-modal and log-normal instances with
/// `μ_v,i = 0.6 - 0.01(i-1)`, `μ_w,i = 0.8 - 0.01(i-1)` and ε = 0.2.
pub fn make_general_instances() -> (InstanceSpec, InstanceSpec, InstanceSpec) {
    let build = |kind| make_general_instance(kind, DEFAULT_ARMS, GENERAL_EPSILON).expect("static parameters");
    (
        build(ArmKind::GaussianAdditive),
        build(ArmKind::MultiModal),
        build(ArmKind::LogNormal),
    )
}

/// Instance families addressable by name from configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceFamily {
    Instance1,
    Instance2,
    Instance3,
    Instance4,
    GeneralNormal,
    GeneralMultimodal,
    GeneralLognormal,
}

impl InstanceFamily {
    pub const ALL: [InstanceFamily; 7] = [
        Self::Instance1,
        Self::Instance2,
        Self::Instance3,
        Self::Instance4,
        Self::GeneralNormal,
        Self::GeneralMultimodal,
        Self::GeneralLognormal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Instance1 => "instance1",
            Self::Instance2 => "instance2",
            Self::Instance3 => "instance3",
            Self::Instance4 => "instance4",
            Self::GeneralNormal => "general_normal",
            Self::GeneralMultimodal => "general_multimodal",
            Self::GeneralLognormal => "general_lognormal",
        }
    }

    pub fn default_epsilon(self) -> f64 {
        match self {
            Self::GeneralNormal | Self::GeneralMultimodal | Self::GeneralLognormal => GENERAL_EPSILON,
            _ => DEFAULT_EPSILON,
        }
    }

    /// Builds the instance from resolved parameters.
    pub fn build(self, params: &InstanceParams) -> Result<InstanceSpec> {
        let mut spec = match self {
            Self::Instance1 | Self::Instance3 | Self::Instance4 => {
                let mut s = make_instance_1_with(params.arms, params.epsilon)?;
                s.name = self.name().into();
                s
            }
            Self::Instance2 => make_instance_2_with(params.arms, params.epsilon)?,
            Self::GeneralNormal => make_general_instance(ArmKind::GaussianAdditive, params.arms, params.epsilon)?,
            Self::GeneralMultimodal => make_general_instance(ArmKind::MultiModal, params.arms, params.epsilon)?,
            Self::GeneralLognormal => make_general_instance(ArmKind::LogNormal, params.arms, params.epsilon)?,
        };
        if params.cv_count != 1 {
            if params.cv_count == 0 {
                return domain("cv_count must be at least 1");
            }
            spec.arms = spec.arms.into_iter().map(|a| a.with_cv_count(params.cv_count)).collect();
            spec.omega_reported = spec.arms.iter().map(|a| vec![a.true_cv_mean(); a.q]).collect();
        }
        Ok(spec.with_cv_mean_error(params.cv_mean_error).with_horizon(params.horizon))
    }
}

impl std::str::FromStr for InstanceFamily {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| crate::Error::Config(format!("unknown instance '{s}'")))
    }
}

/// Overridable instance parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceParams {
    pub arms: usize,
    pub epsilon: f64,
    pub cv_mean_error: f64,
    pub cv_count: usize,
    pub horizon: usize,
}

impl InstanceParams {
    pub fn defaults(family: InstanceFamily) -> Self {
        Self {
            arms: DEFAULT_ARMS,
            epsilon: family.default_epsilon(),
            cv_mean_error: 0.0,
            cv_count: 1,
            horizon: DEFAULT_HORIZON,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::RngStream;

    #[test]
    fn instance_1_layout() {
        let inst = make_instance_1();
        assert_eq!(inst.num_arms(), 10);
        assert!((inst.arms[9].true_mean() - 2.0).abs() < 1e-12);
        assert_eq!(inst.optimal_arm(), 9);
        for arm in &inst.arms {
            assert!((arm.correlation() - 0.5f64.sqrt()).abs() < 1e-15);
        }
        assert_eq!(inst.availability.epsilon(), 0.5);
        assert_eq!(inst.omega_reported[2], vec![0.30000000000000004]);
    }

    #[test]
    fn instance_2_layout() {
        let inst = make_instance_2();
        assert!((inst.arms[0].true_mean() - 0.6).abs() < 1e-12);
        let gaps = inst.gaps();
        assert!((gaps[8] - 0.1).abs() < 1e-12);
        assert!((inst.arms[4].correlation() - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn instance_3_epsilon_range() {
        assert!(make_instance_3(-0.1).is_err());
        assert!(make_instance_3(1.1).is_err());
        let inst = make_instance_3(0.45).unwrap();
        assert_eq!(inst.availability.epsilon(), 0.45);
    }

    #[test]
    fn instance_4_reported_means() {
        let inst = make_instance_4(0.5);
        assert!((inst.omega_reported[0][0] - 0.6).abs() < 1e-12);
        let inst = make_instance_4(0.1);
        assert!((inst.omega_reported[2][0] - 0.4).abs() < 1e-12);
        assert_eq!(make_instance_4(0.0).omega_reported, make_instance_1().omega_reported);
    }

    #[test]
    fn general_instances() {
        let (normal, multi, logn) = make_general_instances();
        for inst in [&normal, &multi, &logn] {
            assert_eq!(inst.optimal_arm(), 0);
            assert_eq!(inst.availability.epsilon(), 0.2);
            assert!((inst.arms[0].true_mean() - 1.4).abs() < 1e-12);
        }
        assert_eq!(multi.arms[0].modal_shift, 0.5);
        assert_eq!(logn.arms[3].kind, ArmKind::LogNormal);
    }

    #[test]
    fn pull_rejects_bad_arm() {
        let inst = make_instance_1();
        let mut rng = RngStream::new(0, 0);
        assert!(inst.pull(10, &mut rng).is_err());
    }

    #[test]
    fn availability_extremes() {
        let mut rng = RngStream::new(3, 1);
        let never = make_instance_3(0.0).unwrap();
        let always = make_instance_3(1.0).unwrap();
        for _ in 0..1000 {
            assert!(never.pull(2, &mut rng).unwrap().cv.is_none());
            let obs = always.pull(2, &mut rng).unwrap();
            assert_eq!(obs.cv.map(|c| c.len()), Some(1));
        }
    }

    #[test]
    fn pull_is_replayable() {
        let inst = make_instance_1();
        let mut a = RngStream::new(11, 4);
        let mut b = RngStream::new(11, 4);
        for arm in (0..10).cycle().take(200) {
            assert_eq!(inst.pull(arm, &mut a).unwrap(), inst.pull(arm, &mut b).unwrap());
        }
    }

    #[test]
    fn family_names_parse() {
        for f in InstanceFamily::ALL {
            assert_eq!(f.name().parse::<InstanceFamily>().unwrap(), f);
        }
        assert!("instance9".parse::<InstanceFamily>().is_err());
    }
}
