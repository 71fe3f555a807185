//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use lcv_bandit::environments::Observation;
use lcv_bandit::estimators::{mean_cv, ArmHistory};
use lcv_bandit::policies::Policy;
use lcv_bandit::stats::critical_value;
use lcv_bandit::Result;

/// Adaptive Simpson quadrature.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 50)
}

/// Student-t quantile from numerically integrating the unnormalized density
/// `(1 + x²/ν)^(-(ν+1)/2)`; the normalizer is integrated too.
pub fn t_quantile_by_integration(p: f64, dof: u64) -> f64 {
    let nu = dof as f64;
    let g = move |t: f64| (1.0 + t * t / nu).powf(-(nu + 1.0) / 2.0);
    // ∫_0^∞ g with t = s/(1-s)
    let mapped = |s: f64| if s >= 1.0 { 0.0 } else { g(s / (1.0 - s)) / ((1.0 - s) * (1.0 - s)) };
    let half_mass = integrate(&mapped, 0.0, 1.0, 1e-14);
    let target = (p - 0.5) * 2.0 * half_mass;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while integrate(&g, 0.0, hi, 1e-14) < target {
        hi *= 2.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if integrate(&g, 0.0, mid, 1e-14) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves a small dense system by Gauss-Jordan elimination with full rows.
#[allow(clippy::needless_range_loop)]
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    (0..n).map(|i| b[i] / a[i][i]).collect()
}

/// Direct control-variate mean: β from its defining formula, then
/// `x̄ + βᵀ(ω - w̄)`.
pub fn brute_cv_mean(pairs: &[(f64, Vec<f64>)], omega: &[f64]) -> f64 {
    let m = pairs.len() as f64;
    let q = omega.len();
    let xbar = pairs.iter().map(|p| p.0).sum::<f64>() / m;
    let wbar: Vec<f64> = (0..q).map(|j| pairs.iter().map(|p| p.1[j]).sum::<f64>() / m).collect();
    let beta: Vec<f64> = if q == 1 {
        let num: f64 = pairs.iter().map(|p| (p.0 - xbar) * (p.1[0] - omega[0])).sum();
        let den: f64 = pairs.iter().map(|p| (p.1[0] - omega[0]).powi(2)).sum();
        vec![num / den]
    } else {
        let a = (0..q)
            .map(|j| {
                (0..q)
                    .map(|k| pairs.iter().map(|p| (p.1[j] - wbar[j]) * (p.1[k] - wbar[k])).sum())
                    .collect()
            })
            .collect();
        let b = (0..q).map(|j| pairs.iter().map(|p| (p.1[j] - wbar[j]) * (p.0 - xbar)).sum()).collect();
        gauss_solve(a, b)
    };
    xbar + (0..q).map(|j| beta[j] * (omega[j] - wbar[j])).sum::<f64>()
}

pub fn brute_beta(pairs: &[(f64, Vec<f64>)], omega: &[f64]) -> Vec<f64> {
    let m = pairs.len() as f64;
    let xbar = pairs.iter().map(|p| p.0).sum::<f64>() / m;
    assert_eq!(omega.len(), 1);
    let num: f64 = pairs.iter().map(|p| (p.0 - xbar) * (p.1[0] - omega[0])).sum();
    let den: f64 = pairs.iter().map(|p| (p.1[0] - omega[0]).powi(2)).sum();
    vec![num / den]
}

fn without(pairs: &[(f64, Vec<f64>)], j: usize) -> Vec<(f64, Vec<f64>)> {
    pairs.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, p)| p.clone()).collect()
}

fn mean_and_ss(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (mean, values.iter().map(|v| (v - mean).powi(2)).sum())
}

/// Leave-one-out average and pseudo-value jackknife variance.
pub fn brute_jackknife(pairs: &[(f64, Vec<f64>)], omega: &[f64]) -> (f64, f64) {
    let thetas: Vec<f64> = (0..pairs.len()).map(|j| brute_cv_mean(&without(pairs, j), omega)).collect();
    let (mean, ss) = mean_and_ss(&thetas);
    let m = pairs.len() as f64;
    (mean, (m - 1.0) / m * ss)
}

/// Each reward adjusted with the coefficient fitted without it.
pub fn brute_splitting(pairs: &[(f64, Vec<f64>)], omega: &[f64]) -> (f64, f64) {
    let q = omega.len();
    let adjusted: Vec<f64> = (0..pairs.len())
        .map(|n| {
            let rest = without(pairs, n);
            let m = rest.len() as f64;
            let xbar = rest.iter().map(|p| p.0).sum::<f64>() / m;
            let wbar: Vec<f64> = (0..q).map(|j| rest.iter().map(|p| p.1[j]).sum::<f64>() / m).collect();
            let beta = if q == 1 {
                brute_beta(&rest, omega)
            } else {
                let a = (0..q)
                    .map(|j| {
                        (0..q)
                            .map(|k| rest.iter().map(|p| (p.1[j] - wbar[j]) * (p.1[k] - wbar[k])).sum())
                            .collect()
                    })
                    .collect();
                let b = (0..q).map(|j| rest.iter().map(|p| (p.1[j] - wbar[j]) * (p.0 - xbar)).sum()).collect();
                gauss_solve(a, b)
            };
            pairs[n].0 + (0..q).map(|j| beta[j] * (omega[j] - pairs[n].1[j])).sum::<f64>()
        })
        .collect();
    let (mean, ss) = mean_and_ss(&adjusted);
    let m = pairs.len() as f64;
    (mean, ss / (m - 1.0) / m)
}

/// Contiguous batches, remainder in the last one.
pub fn brute_batching(pairs: &[(f64, Vec<f64>)], omega: &[f64], b: usize) -> (f64, f64) {
    let size = pairs.len() / b;
    let estimates: Vec<f64> = (0..b)
        .map(|i| {
            let end = if i + 1 == b { pairs.len() } else { (i + 1) * size };
            brute_cv_mean(&pairs[i * size..end], omega)
        })
        .collect();
    let (mean, ss) = mean_and_ss(&estimates);
    (mean, ss / (b as f64 - 1.0) / b as f64)
}

pub fn history(pairs: &[(f64, Vec<f64>)], q: usize) -> ArmHistory<f64> {
    ArmHistory::from_parts(q, vec![], pairs).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

/// UCB with control variates observed every round: the index is always the
/// CV-adjusted mean plus a t critical value with `M - q - 2` degrees of
/// freedom times `sqrt(B)`.
pub struct ReferenceUcbCv {
    alpha: f64,
    q: usize,
    omega: Vec<Vec<f64>>,
    histories: Vec<ArmHistory<f64>>,
}

impl ReferenceUcbCv {
    pub fn new(alpha: f64, omega: Vec<Vec<f64>>) -> Self {
        let q = omega[0].len();
        let k = omega.len();
        Self { alpha, q, omega, histories: vec![ArmHistory::new(q); k] }
    }
}

impl Policy for ReferenceUcbCv {
    fn num_arms(&self) -> usize {
        self.histories.len()
    }

    fn warm_start_rounds(&self) -> u64 {
        ((self.q + 4) * self.histories.len()) as u64
    }

    fn arm_index(&mut self, arm: usize, t: u64) -> Result<f64> {
        let h = &self.histories[arm];
        let est = mean_cv(h, &self.omega[arm])?;
        if est.variance == 0.0 {
            return Ok(est.mean);
        }
        Ok(est.mean + critical_value(t, (h.m() - self.q - 2) as i64, self.alpha)? * est.variance.sqrt())
    }

    fn update(&mut self, arm: usize, observation: &Observation) -> Result<()> {
        let cv = observation.cv.as_ref().expect("CVs are observed every round");
        self.histories[arm].push_cv(observation.reward, cv)
    }
}

/// Plays the arm with the largest true mean.
pub struct OraclePolicy {
    pub k: usize,
    pub best: usize,
}

impl Policy for OraclePolicy {
    fn num_arms(&self) -> usize {
        self.k
    }
    fn warm_start_rounds(&self) -> u64 {
        0
    }
    fn arm_index(&mut self, arm: usize, _t: u64) -> Result<f64> {
        Ok(if arm == self.best { 1.0 } else { 0.0 })
    }
    fn update(&mut self, _arm: usize, _observation: &Observation) -> Result<()> {
        Ok(())
    }
}

/// Plays uniformly at random.
pub struct UniformPolicy {
    pub k: usize,
    pub rng: lcv_bandit::stats::RngStream,
}

impl Policy for UniformPolicy {
    fn num_arms(&self) -> usize {
        self.k
    }
    fn warm_start_rounds(&self) -> u64 {
        0
    }
    fn arm_index(&mut self, _arm: usize, _t: u64) -> Result<f64> {
        use rand::Rng;
        Ok(self.rng.random::<f64>())
    }
    fn update(&mut self, _arm: usize, _observation: &Observation) -> Result<()> {
        Ok(())
    }
}
