//! Realizable multi-distribution learning by margin boosting.
//!
//! Each of `r` iterations draws one batch: `m` examples from the current
//! mixture `q_t` for the PAC learner and `n` examples from every
//! distribution to test the learned hypothesis. Distributions where the
//! hypothesis tests well are down-weighted by `e^{-α}`, the rest up-weighted
//! by `e^{α}`. The output is the unweighted majority vote of the `r`
//! hypotheses.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{
    empirical_error, population_error, Environment, FiniteDistribution, Predictor, Sample, SampleRequest,
};
use crate::error::{Error, Result};
use crate::hedge::SimplexWeights;
use crate::hypothesis::{ErmLearner, HypothesisClass};

/// Number of bootstrap bags used by default in bagging mode.
pub const DEFAULT_BAGS: usize = 21;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum LearnerMode {
    Erm,
    Bagging { bags: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RealizableConfig {
    /// Constant in the learner sample size `m`.
    pub c_m: f64,
    /// Base of the logarithm in the margin `θ = r / (2 log k)`.
    pub log_base: f64,
    pub learner: LearnerMode,
}

impl Default for RealizableConfig {
    fn default() -> Self {
        RealizableConfig {
            c_m: 4.0,
            log_base: 2.0,
            learner: LearnerMode::Erm,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffParams {
    pub k: usize,
    pub r: usize,
    pub eps: f64,
    pub delta: f64,
    pub theta: f64,
    pub p: f64,
    pub tau: f64,
    pub alpha: f64,
    pub eps_learner: f64,
    pub delta_learner: f64,
    pub m: u64,
    pub n: u64,
}

impl TradeoffParams {
    /// Draws consumed by a full run: `r (m + k n)`.
    pub fn samples_total(&self) -> u64 {
        self.r as u64 * (self.m + self.k as u64 * self.n)
    }
}

/// `ceil((12 / τ) ln(2 r k / δ))`.
pub fn test_sample_size(tau: f64, r: usize, k: usize, delta: f64) -> u64 {
    (12.0 / tau * (2.0 * r as f64 * k as f64 / delta).ln()).ceil() as u64
}

/// Derives every constant of the boosting schedule; `d` is the capacity of
/// the hypothesis class.
pub fn tradeoff_params(
    k: usize,
    r: usize,
    eps: f64,
    delta: f64,
    d: usize,
    cfg: &RealizableConfig,
) -> Result<TradeoffParams> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("need k >= 2, got {k}")));
    }
    if !(eps > 0.0 && eps < 0.5) || !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "eps and delta must lie in (0, 1/2), got {eps}, {delta}"
        )));
    }
    if !(cfg.log_base > 1.0) || !(cfg.c_m > 0.0) {
        return Err(Error::InvalidParameter(
            "log base must exceed 1 and c_m be positive".into(),
        ));
    }
    let log_k = (k as f64).ln() / cfg.log_base.ln();
    if r == 0 || r as f64 > log_k + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= r <= log k = {log_k:.4}, got r = {r}"
        )));
    }
    let theta = r as f64 / (2.0 * log_k);
    let p = 0.5 * (4.0 * (k as f64).powf(2.0 / r as f64)).powf(-1.0 / (1.0 - theta));
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::InvalidParameter(format!("p = {p} outside (0, 1/2)")));
    }
    let tau = eps / (1.0 + 1.0 / theta);
    let alpha = 0.5 * ((1.0 - p) / p).ln();
    let eps_learner = tau * p / 4.0;
    let delta_learner = delta / (2.0 * r as f64);
    let m = (cfg.c_m * (d as f64 + (1.0 / delta_learner).ln()) / eps_learner).ceil() as u64;
    let n = test_sample_size(tau, r, k, delta);
    Ok(TradeoffParams {
        k,
        r,
        eps,
        delta,
        theta,
        p,
        tau,
        alpha,
        eps_learner,
        delta_learner,
        m,
        n,
    })
}

/// Output of the PAC learner.
#[derive(Clone, Debug, PartialEq)]
pub enum Learned<H> {
    Single(H),
    /// Majority vote over bagged ERMs, ties to 1.
    Bagged(Vec<H>),
}

impl<X, H: Predictor<X>> Predictor<X> for Learned<H> {
    fn predict(&self, x: &X) -> bool {
        match self {
            Learned::Single(h) => h.predict(x),
            Learned::Bagged(hs) => {
                let votes = hs.iter().filter(|h| h.predict(x)).count();
                2 * votes >= hs.len()
            }
        }
    }
}

fn erm<X, C: HypothesisClass<X>>(class: &C, sample: &Sample<X>) -> Result<C::Hypothesis> {
    let mut l = class.learner(1)?;
    l.observe(0, sample)?;
    l.argmin(&[1.0])
}

pub fn pac_learn<X: Clone, C: HypothesisClass<X>, R: Rng + ?Sized>(
    sample: &Sample<X>,
    class: &C,
    mode: LearnerMode,
    rng: &mut R,
) -> Result<Learned<C::Hypothesis>> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    match mode {
        LearnerMode::Erm => Ok(Learned::Single(erm(class, sample)?)),
        LearnerMode::Bagging { bags } => {
            if bags == 0 {
                return Err(Error::InvalidParameter("bagging needs at least one bag".into()));
            }
            let hs = (0..bags)
                .map(|_| erm(class, &sample.bootstrap(rng)))
                .collect::<Result<_>>()?;
            Ok(Learned::Bagged(hs))
        }
    }
}

/// Unweighted majority vote, ties to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble<H> {
    pub hypotheses: Vec<H>,
}

impl<H> Ensemble<H> {
    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }
}

pub fn majority_predict<X, H: Predictor<X>>(e: &Ensemble<H>, x: &X) -> bool {
    let votes = e.hypotheses.iter().filter(|h| h.predict(x)).count();
    2 * votes >= e.hypotheses.len()
}

impl<X, H: Predictor<X>> Predictor<X> for Ensemble<H> {
    fn predict(&self, x: &X) -> bool {
        majority_predict(self, x)
    }
}

/// Test outcome for one (iteration, distribution) pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub empirical_error: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffReport {
    pub k: usize,
    pub r: usize,
    pub eps: f64,
    pub delta: f64,
    pub params: TradeoffParams,
    pub samples_total: u64,
    pub samples_per_dist: Vec<u64>,
    pub rounds_used: u64,
    pub max_pop_error: f64,
    pub success: bool,
    pub per_dist_errors: Vec<f64>,
    /// `q_1, .., q_{r+1}`.
    pub weights: Vec<Vec<f64>>,
    pub tests: Vec<Vec<TestOutcome>>,
}

/// Runs the boosting schedule against `env`.
pub fn run_tradeoff_mdl<X, C, R>(
    env: &mut Environment<X>,
    class: &C,
    params: &TradeoffParams,
    cfg: &RealizableConfig,
    rng: &mut R,
) -> Result<(Ensemble<Learned<C::Hypothesis>>, TradeoffReport)>
where
    X: Clone,
    C: HypothesisClass<X>,
    R: Rng + ?Sized,
{
    let k = env.k();
    if k != params.k {
        return Err(Error::DimensionMismatch {
            expected: params.k,
            found: k,
        });
    }
    let start = env.ledger().snapshot();
    let mut q = SimplexWeights::uniform(k);
    let mut weights = vec![q.as_slice().to_vec()];
    let mut tests = Vec::with_capacity(params.r);
    let mut hypotheses = Vec::with_capacity(params.r);
    for _ in 0..params.r {
        let mut requests = vec![SampleRequest::mixture(q.clone(), params.m)];
        requests.extend((0..k).map(|j| SampleRequest::pure(j, params.n)));
        let samples = env.request_round(&requests, rng)?;
        let h = pac_learn(&samples[0], class, cfg.learner, rng)?;
        let mut outcomes = Vec::with_capacity(k);
        let mut logits = Vec::with_capacity(k);
        for (j, s) in samples[1..].iter().enumerate() {
            let e = empirical_error(&h, s)?;
            let passed = e <= params.tau / 2.0;
            outcomes.push(TestOutcome {
                empirical_error: e,
                passed,
            });
            let sign = if passed { -1.0 } else { 1.0 };
            logits.push(q[j].ln() + sign * params.alpha);
        }
        let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        q = SimplexWeights::normalized(logits.iter().map(|l| (l - top).exp()).collect())?;
        weights.push(q.as_slice().to_vec());
        tests.push(outcomes);
        hypotheses.push(h);
    }
    let ensemble = Ensemble { hypotheses };
    let per_dist_errors: Vec<f64> = env.dists().iter().map(|d| population_error(&ensemble, d)).collect();
    let max_pop_error = per_dist_errors.iter().copied().fold(0.0, f64::max);
    let end = env.ledger().snapshot();
    let samples_per_dist: Vec<u64> = end
        .samples_per_dist
        .iter()
        .zip(&start.samples_per_dist)
        .map(|(a, b)| a - b)
        .collect();
    let report = TradeoffReport {
        k,
        r: params.r,
        eps: params.eps,
        delta: params.delta,
        params: *params,
        samples_total: samples_per_dist.iter().sum(),
        samples_per_dist,
        rounds_used: end.rounds_used - start.rounds_used,
        max_pop_error,
        success: max_pop_error <= params.eps,
        per_dist_errors,
        weights,
        tests,
    };
    Ok((ensemble, report))
}

/// Both sides of the weighted-majority error bound on one distribution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginCheck {
    /// Weighted fraction of τ-good hypotheses minus τ-bad ones is `>= θ`.
    pub premise: bool,
    pub majority_error: f64,
    /// `(1 + 1/θ) τ`.
    pub bound: f64,
}

impl MarginCheck {
    /// The bound holds, or its premise fails.
    pub fn holds(&self) -> bool {
        !self.premise || self.majority_error <= self.bound + 1e-12
    }
}

/// Weighted vote `1[Σ α_t h_t(x) >= ½ Σ α_t]`.
pub struct WeightedMajority<'a, H> {
    pub hypotheses: &'a [H],
    pub weights: &'a [f64],
}

impl<X, H: Predictor<X>> Predictor<X> for WeightedMajority<'_, H> {
    fn predict(&self, x: &X) -> bool {
        let total: f64 = self.weights.iter().sum();
        let yes: f64 = self
            .hypotheses
            .iter()
            .zip(self.weights)
            .filter(|(h, _)| h.predict(x))
            .map(|(_, w)| w)
            .sum();
        yes >= 0.5 * total
    }
}

pub fn check_majority_margin_bound<X, H: Predictor<X>>(
    hypotheses: &[H],
    weights: &[f64],
    dist: &FiniteDistribution<X>,
    tau: f64,
    theta: f64,
) -> Result<MarginCheck> {
    if hypotheses.len() != weights.len() || hypotheses.is_empty() {
        return Err(Error::InvalidParameter("need one weight per hypothesis".into()));
    }
    if weights.iter().any(|&w| !(w >= 0.0)) || weights.iter().sum::<f64>() <= 0.0 {
        return Err(Error::InvalidWeights(
            "weights must be nonnegative, not all zero".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    let margin: f64 = hypotheses
        .iter()
        .zip(weights)
        .map(|(h, w)| if population_error(h, dist) <= tau { *w } else { -*w })
        .sum();
    let vote = WeightedMajority { hypotheses, weights };
    Ok(MarginCheck {
        premise: margin >= theta * total,
        majority_error: population_error(&vote, dist),
        bound: (1.0 + 1.0 / theta) * tau,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestingClause {
    /// Population error above τ must test above τ/2.
    Detect,
    /// Population error at most τ/4 must test at most τ/2.
    Accept,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestingCalibration {
    pub clause: TestingClause,
    pub pop_error: f64,
    pub n: u64,
    pub trials: u64,
    pub misses: u64,
}

impl TestingCalibration {
    pub fn miss_rate(&self) -> f64 {
        self.misses as f64 / self.trials as f64
    }
}

/// Monte Carlo frequency with which the empirical test on
/// `n = ceil((12/τ) ln(1/δ))` draws gets `h` wrong.
///
/// Errors when the population error lies in `(τ/4, τ]`, where neither
/// clause applies.
pub fn calibrate_testing_rule<X, P: Predictor<X>, R: Rng + ?Sized>(
    h: &P,
    dist: &FiniteDistribution<X>,
    tau: f64,
    delta: f64,
    trials: u64,
    rng: &mut R,
) -> Result<TestingCalibration> {
    if !(tau > 0.0 && tau < 0.5) || !(delta > 0.0 && delta < 1.0) || trials == 0 {
        return Err(Error::InvalidParameter(
            "need τ in (0, 1/2), δ in (0, 1), trials > 0".into(),
        ));
    }
    let pop_error = population_error(h, dist);
    let clause = if pop_error > tau {
        TestingClause::Detect
    } else if pop_error <= tau / 4.0 {
        TestingClause::Accept
    } else {
        return Err(Error::Inconclusive(format!(
            "population error {pop_error} lies between τ/4 and τ"
        )));
    };
    let n = (12.0 / tau * (1.0 / delta).ln()).ceil() as u64;
    let wrong: Vec<bool> = dist.support().iter().map(|e| h.predict(&e.x) != e.y).collect();
    let mut misses = 0;
    for _ in 0..trials {
        let mistakes: u64 = dist
            .sample_counts(n, rng)
            .into_iter()
            .filter(|(i, _)| wrong[*i])
            .map(|(_, c)| c)
            .sum();
        let high = mistakes as f64 / n as f64 > tau / 2.0;
        let miss = match clause {
            TestingClause::Detect => !high,
            TestingClause::Accept => high,
        };
        misses += miss as u64;
    }
    Ok(TestingCalibration {
        clause,
        pop_error,
        n,
        trials,
        misses,
    })
}
