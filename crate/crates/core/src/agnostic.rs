//! Agnostic multi-distribution learning with lazily sampled Hedge.
//!
//! Each distribution `i` owns a persistent ERM dataset `S_i` and one fresh
//! reward dataset `S_{i,t}` per iteration. Whenever the Hedge iterate leaves
//! the observable region of the current cap, the cap is raised and a single
//! sampling round tops every dataset up to its cap-proportional size. The
//! ERM step minimises the `w`-weighted empirical error over the `S_i`; the
//! Hedge step rewards distributions on which the ERM hypothesis errs,
//! measured on the reward set reserved for that iteration.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{
    empirical_error, minimax_opt, population_error, Environment, FiniteDistribution, Predictor, Sample, SampleRequest,
};
use crate::error::{Error, Result};
use crate::hedge::{hedge_step, regret_certificate, HedgeHistory, SimplexWeights};
use crate::hypothesis::{ErmLearner, HypothesisClass};
use crate::oods::{CapUpdate, CapVector, LazyCap, LazyHedgeConfig, RegionKind};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgnosticConfig {
    /// `N_erm = ceil(n_erm_coeff (d + k) ln(k / (ε δ)) / ε²)`.
    pub n_erm_coeff: f64,
    /// `N_rwd = ceil(n_rwd_coeff k)`.
    pub n_rwd_coeff: f64,
    pub delta: f64,
    pub lazy: LazyHedgeConfig,
    /// A run succeeds when `max_i err − OPT <= success_factor · ε`.
    pub success_factor: f64,
}

impl Default for AgnosticConfig {
    fn default() -> Self {
        AgnosticConfig {
            n_erm_coeff: 1.0,
            n_rwd_coeff: 4.0,
            delta: 0.1,
            lazy: LazyHedgeConfig::default(),
            success_factor: 3.0,
        }
    }
}

impl AgnosticConfig {
    pub fn n_erm(&self, d: usize, k: usize, eps: f64) -> u64 {
        let kf = k as f64;
        (self.n_erm_coeff * (d as f64 + kf) * (kf / (eps * self.delta)).ln() / (eps * eps)).ceil() as u64
    }

    pub fn n_rwd(&self, k: usize) -> u64 {
        (self.n_rwd_coeff * k as f64).ceil() as u64
    }
}

/// Uniform mixture over `T` hypotheses.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomizedClassifier<H> {
    pub hypotheses: Vec<H>,
}

impl<H> RandomizedClassifier<H> {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &H {
        &self.hypotheses[rng.random_range(0..self.hypotheses.len())]
    }
}

/// Expected error of a uniformly drawn member, computed exactly.
pub fn randomized_error<X, H: Predictor<X> + PartialEq>(
    c: &RandomizedClassifier<H>,
    dist: &FiniteDistribution<X>,
) -> Result<f64> {
    if c.hypotheses.is_empty() {
        return Err(Error::EmptyClass);
    }
    // Many iterations repeat the same hypothesis; evaluate each distinct one once.
    let mut distinct: Vec<(&H, f64, usize)> = Vec::new();
    for h in &c.hypotheses {
        match distinct.iter_mut().find(|(g, _, _)| *g == h) {
            Some(entry) => entry.2 += 1,
            None => distinct.push((h, population_error(h, dist), 1)),
        }
    }
    let total: f64 = distinct.iter().map(|(_, e, n)| e * *n as f64).sum();
    Ok(total / c.hypotheses.len() as f64)
}

/// `argmin_h Σ_i w_i err(h, S_i)`, smallest index on ties.
pub fn erm_weighted<X, C: HypothesisClass<X>>(
    class: &C,
    erm_sets: &[Sample<X>],
    w: &SimplexWeights,
) -> Result<C::Hypothesis> {
    let mut l = class.learner(erm_sets.len())?;
    for (i, s) in erm_sets.iter().enumerate() {
        l.observe(i, s)?;
    }
    l.argmin(w.as_slice())
}

/// Persistent ERM data (inside the learner) and the per-iteration reward
/// sets.
pub struct DatasetBank<X, L> {
    learner: L,
    erm_sizes: Vec<u64>,
    reward_sets: Vec<Vec<Option<Sample<X>>>>,
    reward_sizes: Vec<Vec<u64>>,
    consumed: Vec<bool>,
}

impl<X: Clone, L: ErmLearner<X>> DatasetBank<X, L> {
    pub fn new(learner: L, k: usize, horizon: usize) -> Self {
        DatasetBank {
            learner,
            erm_sizes: vec![0; k],
            reward_sets: vec![(0..k).map(|_| Some(Sample::new())).collect(); horizon],
            reward_sizes: vec![vec![0; k]; horizon],
            consumed: vec![false; horizon],
        }
    }

    pub fn erm_size(&self, i: usize) -> u64 {
        self.erm_sizes[i]
    }

    pub fn reward_size(&self, t: usize, i: usize) -> u64 {
        self.reward_sizes[t][i]
    }

    pub fn learner(&self) -> &L {
        &self.learner
    }

    /// One round topping `S_i` up to `ceil(cap_i N_erm)` and every
    /// `S_{i,t'}`, `t' >= t`, up to `ceil(cap_i N_rwd)`.
    pub fn top_up<R: Rng + ?Sized>(
        &mut self,
        env: &mut Environment<X>,
        cap: &CapVector,
        t: usize,
        n_erm: u64,
        n_rwd: u64,
        rng: &mut R,
    ) -> Result<()> {
        let k = self.erm_sizes.len();
        let horizon = self.reward_sets.len();
        let erm_target: Vec<u64> = cap
            .as_slice()
            .iter()
            .map(|c| (c * n_erm as f64).ceil() as u64)
            .collect();
        let rwd_target: Vec<u64> = cap
            .as_slice()
            .iter()
            .map(|c| (c * n_rwd as f64).ceil() as u64)
            .collect();
        let mut requests = Vec::with_capacity(k * (1 + horizon - t));
        for i in 0..k {
            requests.push(SampleRequest::pure(i, erm_target[i].saturating_sub(self.erm_sizes[i])));
        }
        for tp in t..horizon {
            for i in 0..k {
                requests.push(SampleRequest::pure(
                    i,
                    rwd_target[i].saturating_sub(self.reward_sizes[tp][i]),
                ));
            }
        }
        let mut samples = env.request_round(&requests, rng)?.into_iter();
        for i in 0..k {
            let s = samples.next().unwrap();
            self.erm_sizes[i] += s.len();
            self.learner.observe(i, &s)?;
        }
        for tp in t..horizon {
            for i in 0..k {
                let s = samples.next().unwrap();
                self.reward_sizes[tp][i] += s.len();
                self.reward_sets[tp][i]
                    .as_mut()
                    .expect("reward sets ahead of the current iteration are unused")
                    .extend(s);
            }
        }
        for i in 0..k {
            assert!(self.erm_sizes[i] >= erm_target[i]);
            assert!((t..horizon).all(|tp| self.reward_sizes[tp][i] >= rwd_target[i]));
        }
        Ok(())
    }

    /// Hands out the reward sets of iteration `t`; each may be taken once.
    pub fn take_rewards(&mut self, t: usize) -> Vec<Sample<X>> {
        assert!(!self.consumed[t], "reward sets of iteration {t} reused");
        self.consumed[t] = true;
        self.reward_sets[t]
            .iter_mut()
            .map(|s| s.take().expect("reward set present"))
            .collect()
    }

    /// `Σ_i |S_i| + Σ_{i,t} |S_{i,t}|`.
    pub fn total_size(&self) -> u64 {
        self.erm_sizes.iter().sum::<u64>() + self.reward_sizes.iter().flatten().sum::<u64>()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AgnosticReport {
    pub k: usize,
    pub d_proxy: usize,
    pub eps: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub region: RegionKind,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub rounds: usize,
    pub samples_total: u64,
    pub samples_per_dist: Vec<u64>,
    pub rounds_used: u64,
    pub n_erm: u64,
    pub n_rwd: u64,
    pub opt: f64,
    pub max_err: f64,
    pub excess: f64,
    pub success: bool,
    pub per_dist_errors: Vec<f64>,
    pub overhead: f64,
    pub trajectory_sum_max: f64,
    pub regret_slack: f64,
    pub culprit_counts: Vec<usize>,
    pub cap_updates: Vec<CapUpdate>,
    pub history: HedgeHistory,
}

/// Runs lazy Hedge against `env`.
///
/// `opt` is the minimax error if known; otherwise it is computed by
/// enumerating the class.
pub fn run_lazy_hedge_mdl<X, C, R>(
    env: &mut Environment<X>,
    class: &C,
    eps: f64,
    kind: RegionKind,
    cfg: &AgnosticConfig,
    opt: Option<f64>,
    rng: &mut R,
) -> Result<(RandomizedClassifier<C::Hypothesis>, AgnosticReport)>
where
    X: Clone,
    C: HypothesisClass<X>,
    R: Rng + ?Sized,
{
    let k = env.k();
    cfg.lazy.validate(k, eps)?;
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) || !(cfg.n_erm_coeff > 0.0) || !(cfg.n_rwd_coeff > 0.0) {
        return Err(Error::InvalidParameter(
            "need δ in (0, 1) and positive size coefficients".into(),
        ));
    }
    let opt = match opt {
        Some(v) => v,
        None => minimax_opt(&class.enumerate()?, env.dists())?,
    };
    let d = class.capacity();
    let horizon = cfg.lazy.horizon(k, eps);
    let eta = cfg.lazy.eta(eps);
    let n_erm = cfg.n_erm(d, k, eps);
    let n_rwd = cfg.n_rwd(k);
    let start = env.ledger().snapshot();

    let mut bank = DatasetBank::new(class.learner(k)?, k, horizon);
    let mut caps = LazyCap::new(kind, k, cfg.lazy.c)?;
    let mut history = HedgeHistory::new(eta);
    let mut hypotheses = Vec::with_capacity(horizon);
    let mut w = SimplexWeights::uniform(k);
    for t in 0..horizon {
        if let Some(cap) = caps.observe(&w)? {
            let cap = cap.clone();
            bank.top_up(env, &cap, t, n_erm, n_rwd, rng)?;
        }
        let h = bank.learner.argmin(w.as_slice())?;
        let rewards = bank
            .take_rewards(t)
            .iter()
            .map(|s| empirical_error(&h, s))
            .collect::<Result<Vec<f64>>>()?;
        let next = hedge_step(&w, &rewards, eta)?;
        history.push(w, rewards);
        hypotheses.push(h);
        w = next;
    }

    let end = env.ledger().snapshot();
    let rounds_used = end.rounds_used - start.rounds_used;
    if rounds_used != caps.rounds() as u64 {
        return Err(Error::Malformed(format!(
            "{rounds_used} sampling rounds for {} cap updates",
            caps.rounds()
        )));
    }
    let samples_per_dist: Vec<u64> = end
        .samples_per_dist
        .iter()
        .zip(&start.samples_per_dist)
        .map(|(a, b)| a - b)
        .collect();
    let samples_total: u64 = samples_per_dist.iter().sum();
    if samples_total != bank.total_size() {
        return Err(Error::Malformed("ledger disagrees with dataset sizes".into()));
    }

    let classifier = RandomizedClassifier { hypotheses };
    let per_dist_errors = env
        .dists()
        .iter()
        .map(|dist| randomized_error(&classifier, dist))
        .collect::<Result<Vec<f64>>>()?;
    let max_err = per_dist_errors.iter().copied().fold(0.0, f64::max);
    let excess = max_err - opt;
    let mut culprit_counts = vec![0; k];
    for u in caps.updates() {
        if let Some(i) = u.culprit {
            culprit_counts[i] += 1;
        }
    }
    let report = AgnosticReport {
        k,
        d_proxy: d,
        eps,
        c: cfg.lazy.c,
        region: kind,
        horizon,
        rounds: caps.rounds(),
        samples_total,
        samples_per_dist,
        rounds_used,
        n_erm,
        n_rwd,
        opt,
        max_err,
        excess,
        success: excess <= cfg.success_factor * eps,
        per_dist_errors,
        overhead: caps.cap().sum(),
        trajectory_sum_max: caps.running_max().iter().sum(),
        regret_slack: regret_certificate(&history)?,
        culprit_counts,
        cap_updates: caps.updates().to_vec(),
        history,
    };
    Ok((classifier, report))
}
