use crate::error::{domain, Result};
use crate::scalar::Scalar;

/// Per-arm observation log, split by whether the CVs were observed.
///
/// `N`, `M` and `S = N + M` are derived from the stored vectors. CV vectors
/// are stored row-major, `q` values per retained pair. Running centered
/// moments are updated on every push so that the Gaussian estimators cost
/// O(q²) regardless of the sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmHistory<S> {
    q: usize,
    no_cv_rewards: Vec<S>,
    cv_rewards: Vec<S>,
    cvs: Vec<S>,
    running: RunningMoments<S>,
}

/// Welford-style running means and centered (co)moment sums.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RunningMoments<S> {
    pub no_cv_mean: S,
    pub no_cv_m2: S,
    pub x_mean: S,
    pub w_mean: Vec<S>,
    pub cxx: S,
    pub cxw: Vec<S>,
    /// row-major `q×q`
    pub cww: Vec<S>,
}

impl<S: Scalar> ArmHistory<S> {
    pub fn new(q: usize) -> Self {
        Self {
            q,
            no_cv_rewards: Vec::new(),
            cv_rewards: Vec::new(),
            cvs: Vec::new(),
            running: RunningMoments {
                no_cv_mean: S::zero(),
                no_cv_m2: S::zero(),
                x_mean: S::zero(),
                w_mean: vec![S::zero(); q],
                cxx: S::zero(),
                cxw: vec![S::zero(); q],
                cww: vec![S::zero(); q * q],
            },
        }
    }

    /// Builds a history from explicit samples; every CV row must have length `q`.
    pub fn from_parts(q: usize, no_cv_rewards: Vec<S>, cv_pairs: &[(S, Vec<S>)]) -> Result<Self> {
        let mut h = Self::new(q);
        for x in no_cv_rewards {
            h.push_no_cv(x);
        }
        for (x, w) in cv_pairs {
            h.push_cv(*x, w)?;
        }
        Ok(h)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Number of rewards observed without CVs.
    pub fn n(&self) -> usize {
        self.no_cv_rewards.len()
    }

    /// Number of retained (reward, CV) pairs.
    pub fn m(&self) -> usize {
        self.cv_rewards.len()
    }

    pub fn s(&self) -> usize {
        self.n() + self.m()
    }

    pub fn push_no_cv(&mut self, reward: S) {
        self.no_cv_rewards.push(reward);
        let r = &mut self.running;
        let delta = reward - r.no_cv_mean;
        r.no_cv_mean = r.no_cv_mean + delta / S::count(self.no_cv_rewards.len());
        r.no_cv_m2 = r.no_cv_m2 + delta * (reward - r.no_cv_mean);
    }

    pub fn push_cv(&mut self, reward: S, cv: &[S]) -> Result<()> {
        let q = self.q;
        if cv.len() != q {
            return domain(format!("CV vector has length {}, expected {q}", cv.len()));
        }
        self.cv_rewards.push(reward);
        self.cvs.extend_from_slice(cv);
        let mf = S::count(self.cv_rewards.len());
        let r = &mut self.running;
        let dx = reward - r.x_mean;
        r.x_mean = r.x_mean + dx / mf;
        r.cxx = r.cxx + dx * (reward - r.x_mean);
        let old: Vec<S> = r.w_mean.clone();
        for j in 0..q {
            r.w_mean[j] = old[j] + (cv[j] - old[j]) / mf;
        }
        for j in 0..q {
            let after = cv[j] - r.w_mean[j];
            r.cxw[j] = r.cxw[j] + dx * after;
            for k in 0..q {
                r.cww[k * q + j] = r.cww[k * q + j] + (cv[k] - old[k]) * after;
            }
        }
        Ok(())
    }

    pub(crate) fn running(&self) -> &RunningMoments<S> {
        &self.running
    }

    pub fn no_cv_rewards(&self) -> &[S] {
        &self.no_cv_rewards
    }

    pub fn cv_rewards(&self) -> &[S] {
        &self.cv_rewards
    }

    /// Row-major `M×q` CV matrix.
    pub fn cv_matrix(&self) -> &[S] {
        &self.cvs
    }

    pub fn cv_row(&self, m: usize) -> &[S] {
        &self.cvs[m * self.q..(m + 1) * self.q]
    }

    pub fn cv_pairs(&self) -> impl Iterator<Item = (S, &[S])> + '_ {
        self.cv_rewards.iter().copied().zip(self.cvs.chunks_exact(self.q.max(1)))
    }

    /// Every reward, with or without CVs, in storage order.
    pub fn all_rewards(&self) -> impl Iterator<Item = S> + '_ {
        self.no_cv_rewards.iter().chain(self.cv_rewards.iter()).copied()
    }
}
