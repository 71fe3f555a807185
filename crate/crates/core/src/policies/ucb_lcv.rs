use crate::environments::Observation;
use crate::error::{Error, Result};
use crate::estimators::{
    cv_pair_threshold, estimate_arm, mean_no_cv, ArmHistory, CombinedEstimate, CvEstimator,
};
use crate::stats::critical_value;

use super::{check_arm, Policy};

/// `μ̂ + c·sqrt(ν̂)` with `c` the `1 - 1/t^α` percentile of a t distribution
/// with the estimate's degrees of freedom.
pub fn ucb_lcv_index(estimate: &CombinedEstimate<f64>, t: u64, alpha: f64) -> Result<f64> {
    if estimate.dof < 1 {
        return Err(Error::WarmStartIncomplete(format!(
            "non-positive degrees of freedom {}",
            estimate.dof
        )));
    }
    if estimate.nu_hat == 0.0 {
        return Ok(estimate.mu_hat);
    }
    Ok(estimate.mu_hat + critical_value(t, estimate.dof, alpha)? * estimate.nu_hat.sqrt())
}

/// UCB-NORMAL index from the rewards stored without CVs, using `N - 1`
/// degrees of freedom.
pub fn ucb_normal_index(history: &ArmHistory<f64>, t: u64, alpha: f64) -> Result<f64> {
    let est = mean_no_cv(history)?;
    let a = est.variance.ok_or_else(|| {
        Error::WarmStartIncomplete(format!("{} reward(s), need at least 2", history.n()))
    })?;
    if a == 0.0 {
        return Ok(est.mean);
    }
    Ok(est.mean + critical_value(t, history.n() as i64 - 1, alpha)? * a.sqrt())
}

/// Location, spread and degrees of freedom of one arm's index.
#[derive(Debug, Clone, Copy)]
struct IndexInputs {
    mu: f64,
    nu: f64,
    dof: i64,
}

#[derive(Debug, Clone, Copy)]
struct CachedBound {
    dof: i64,
    /// last round at which `critical` bounds the critical value
    until: u64,
    critical: f64,
}

/// Exact argmax of the t-quantile indices that skips arms whose index is
/// provably below the best one.
///
/// The critical value grows with `t`, so its value at a later round bounds it
/// from above until then. Only arms whose bound reaches the best exact index
/// found so far are evaluated exactly, which gives the same arm as evaluating
/// every index.
#[derive(Debug, Clone, Default)]
struct PrunedArgmax {
    bounds: Vec<Option<CachedBound>>,
    candidates: Vec<(usize, f64)>,
}

impl PrunedArgmax {
    fn new(k: usize) -> Self {
        Self { bounds: vec![None; k], candidates: Vec::with_capacity(k) }
    }

    fn select<F>(&mut self, t: u64, alpha: f64, mut inputs: F) -> Result<usize>
    where
        F: FnMut(usize) -> Result<Option<IndexInputs>>,
    {
        let mut best: Option<(usize, f64)> = None;
        let consider = |best: &mut Option<(usize, f64)>, arm: usize, value: f64| match *best {
            Some((b, v)) if value < v || (value == v && arm > b) => {}
            _ => *best = Some((arm, value)),
        };
        self.candidates.clear();
        for arm in 0..self.bounds.len() {
            let Some(IndexInputs { mu, nu, dof }) = inputs(arm)? else {
                consider(&mut best, arm, f64::INFINITY);
                continue;
            };
            if dof < 1 {
                return Err(Error::WarmStartIncomplete(format!("non-positive degrees of freedom {dof}")));
            }
            if nu == 0.0 {
                consider(&mut best, arm, mu);
                continue;
            }
            match self.bounds[arm] {
                Some(b) if b.dof == dof && t <= b.until => {
                    self.candidates.push((arm, mu + b.critical * nu.sqrt()));
                }
                Some(b) if b.dof == dof => {
                    let until = t + t / 8 + 1;
                    let critical = critical_value(until, dof, alpha)?;
                    self.bounds[arm] = Some(CachedBound { dof, until, critical });
                    self.candidates.push((arm, mu + critical * nu.sqrt()));
                }
                _ => {
                    // freshly updated arm: evaluate exactly, bound it next round
                    self.bounds[arm] = Some(CachedBound { dof, until: 0, critical: f64::NAN });
                    consider(&mut best, arm, mu + critical_value(t, dof, alpha)? * nu.sqrt());
                }
            }
        }
        self.candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for i in 0..self.candidates.len() {
            let (arm, upper) = self.candidates[i];
            if let Some((_, v)) = best {
                if upper < v {
                    break;
                }
            }
            let IndexInputs { mu, nu, dof } = inputs(arm)?.expect("candidate has an estimate");
            consider(&mut best, arm, mu + critical_value(t, dof, alpha)? * nu.sqrt());
        }
        Ok(best.expect("at least one arm").0)
    }
}

/// UCB with limited control variates.
///
/// Each arm is first played `q + 4` times; during that phase every
/// observation is filed by whether its CVs were revealed. Afterwards a
/// revealed CV is kept only if the arm already holds at least `q + 2` pairs,
/// otherwise the reward joins the no-CV set and the CV is dropped.
#[derive(Debug, Clone)]
pub struct UcbLcv {
    alpha: f64,
    q: usize,
    estimator: CvEstimator,
    omega: Vec<Vec<f64>>,
    histories: Vec<ArmHistory<f64>>,
    estimates: Vec<Option<CombinedEstimate<f64>>>,
    cv_observed: usize,
    argmax: PrunedArgmax,
}

impl UcbLcv {
    /// `omega[i]` holds the known CV means of arm `i`.
    pub fn new(alpha: f64, omega: Vec<Vec<f64>>, estimator: CvEstimator) -> Result<Self> {
        let q = omega.first().map_or(0, Vec::len);
        if omega.is_empty() || q == 0 || omega.iter().any(|w| w.len() != q) {
            return Err(Error::Config("every arm needs the same positive number of CV means".into()));
        }
        if !(alpha > 1.0) {
            return Err(Error::Config(format!("alpha must exceed 1, got {alpha}")));
        }
        let k = omega.len();
        Ok(Self {
            alpha,
            q,
            estimator,
            omega,
            histories: vec![ArmHistory::new(q); k],
            estimates: vec![None; k],
            cv_observed: 0,
            argmax: PrunedArgmax::new(k),
        })
    }

    pub fn warm_start_pulls(&self) -> usize {
        self.q + 4
    }

    pub fn history(&self, arm: usize) -> &ArmHistory<f64> {
        &self.histories[arm]
    }

    pub fn estimate(&self, arm: usize) -> Option<&CombinedEstimate<f64>> {
        self.estimates[arm].as_ref()
    }

    /// Observations whose CVs were revealed, whether kept or dropped.
    pub fn cv_observed(&self) -> usize {
        self.cv_observed
    }
}

impl Policy for UcbLcv {
    fn num_arms(&self) -> usize {
        self.histories.len()
    }

    fn warm_start_rounds(&self) -> u64 {
        (self.warm_start_pulls() * self.num_arms()) as u64
    }

    fn arm_index(&mut self, arm: usize, t: u64) -> Result<f64> {
        check_arm(arm, self.num_arms())?;
        match &self.estimates[arm] {
            Some(est) => ucb_lcv_index(est, t, self.alpha),
            None => Ok(f64::INFINITY),
        }
    }

    fn select_arm(&mut self, t: u64) -> Result<usize> {
        if t == 0 || t <= self.warm_start_rounds() {
            return super::warm_start_arm(t, self.num_arms());
        }
        let estimates = &self.estimates;
        self.argmax.select(t, self.alpha, |arm| {
            Ok(estimates[arm].map(|e| IndexInputs { mu: e.mu_hat, nu: e.nu_hat, dof: e.dof }))
        })
    }

    fn update(&mut self, arm: usize, observation: &Observation) -> Result<()> {
        check_arm(arm, self.num_arms())?;
        let warm = self.histories[arm].s() < self.warm_start_pulls();
        let history = &mut self.histories[arm];
        match &observation.cv {
            Some(cv) => {
                self.cv_observed += 1;
                if warm || history.m() >= cv_pair_threshold(self.q) {
                    history.push_cv(observation.reward, cv)?;
                } else {
                    history.push_no_cv(observation.reward);
                }
            }
            None => history.push_no_cv(observation.reward),
        }
        self.estimates[arm] = match estimate_arm(history, &self.omega[arm], self.estimator) {
            Ok(est) => Some(est),
            Err(Error::NoEstimate(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(())
    }
}

/// UCB-NORMAL: UCB-LCV without control variates.
#[derive(Debug, Clone)]
pub struct UcbNormal {
    alpha: f64,
    warm_start_pulls: usize,
    histories: Vec<ArmHistory<f64>>,
    argmax: PrunedArgmax,
}

impl UcbNormal {
    pub fn new(k: usize, alpha: f64, warm_start_pulls: usize) -> Result<Self> {
        if warm_start_pulls < 2 {
            return Err(Error::Config("UCB-NORMAL needs at least 2 warm-start pulls per arm".into()));
        }
        if !(alpha > 1.0) {
            return Err(Error::Config(format!("alpha must exceed 1, got {alpha}")));
        }
        Ok(Self { alpha, warm_start_pulls, histories: vec![ArmHistory::new(1); k], argmax: PrunedArgmax::new(k) })
    }

    pub fn history(&self, arm: usize) -> &ArmHistory<f64> {
        &self.histories[arm]
    }
}

impl Policy for UcbNormal {
    fn num_arms(&self) -> usize {
        self.histories.len()
    }

    fn warm_start_rounds(&self) -> u64 {
        (self.warm_start_pulls * self.num_arms()) as u64
    }

    fn arm_index(&mut self, arm: usize, t: u64) -> Result<f64> {
        check_arm(arm, self.num_arms())?;
        ucb_normal_index(&self.histories[arm], t, self.alpha)
    }

    fn select_arm(&mut self, t: u64) -> Result<usize> {
        if t == 0 || t <= self.warm_start_rounds() {
            return super::warm_start_arm(t, self.num_arms());
        }
        let histories = &self.histories;
        self.argmax.select(t, self.alpha, |arm| {
            let h = &histories[arm];
            let est = mean_no_cv(h)?;
            let nu = est.variance.ok_or_else(|| {
                Error::WarmStartIncomplete(format!("{} reward(s), need at least 2", h.n()))
            })?;
            Ok(Some(IndexInputs { mu: est.mean, nu, dof: h.n() as i64 - 1 }))
        })
    }

    fn update(&mut self, arm: usize, observation: &Observation) -> Result<()> {
        check_arm(arm, self.num_arms())?;
        self.histories[arm].push_no_cv(observation.reward);
        Ok(())
    }
}
