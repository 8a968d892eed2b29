//! Multiplicative-weights (Hedge) dynamics over the probability simplex.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `sum(w) = 1` for a valid simplex vector.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// A point of the probability simplex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexWeights(Vec<f64>);

impl SimplexWeights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        if let Some((i, x)) = w.iter().enumerate().find(|(_, x)| !(**x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidWeights(format!("entry {i} is {x}")));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidWeights(format!("entries sum to {sum}")));
        }
        Ok(SimplexWeights(w))
    }

    /// Normalizes a nonnegative vector with positive mass.
    pub fn normalized(w: Vec<f64>) -> Result<Self> {
        let sum: f64 = w.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::InvalidWeights(format!("cannot normalize total {sum}")));
        }
        Self::new(w.into_iter().map(|x| x / sum).collect())
    }

    pub fn uniform(k: usize) -> Self {
        assert!(k > 0);
        SimplexWeights(vec![1.0 / k as f64; k])
    }

    pub fn vertex(k: usize, i: usize) -> Self {
        let mut w = vec![0.0; k];
        w[i] = 1.0;
        SimplexWeights(w)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        self.0.iter().zip(other).map(|(a, b)| a * b).sum()
    }
}

impl std::ops::Index<usize> for SimplexWeights {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for SimplexWeights {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SimplexWeights> for Vec<f64> {
    fn from(w: SimplexWeights) -> Vec<f64> {
        w.0
    }
}

fn check_rewards(reward: &[f64]) -> Result<()> {
    for (index, &value) in reward.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::RewardOutOfRange { index, value });
        }
    }
    Ok(())
}

/// One Hedge step: `w'_i ∝ w_i exp(eta r_i)`, evaluated in log space.
pub fn hedge_step(w: &SimplexWeights, reward: &[f64], eta: f64) -> Result<SimplexWeights> {
    if reward.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            found: reward.len(),
        });
    }
    check_rewards(reward)?;
    if !(eta >= 0.0) || !eta.is_finite() {
        return Err(Error::InvalidParameter(format!("step size {eta}")));
    }
    if eta == 0.0 {
        return Ok(w.clone());
    }
    let logits: Vec<f64> = w
        .as_slice()
        .iter()
        .zip(reward)
        .map(|(&wi, &ri)| {
            if wi > 0.0 {
                wi.ln() + eta * ri
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let unnorm: Vec<f64> = logits.iter().map(|&l| (l - top).exp()).collect();
    SimplexWeights::normalized(unnorm)
}

/// Iterates and rewards of a Hedge run; `weights[t]` is the iterate that
/// received `rewards[t]`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct HedgeHistory {
    pub eta: f64,
    pub weights: Vec<SimplexWeights>,
    pub rewards: Vec<Vec<f64>>,
}

impl HedgeHistory {
    pub fn new(eta: f64) -> Self {
        HedgeHistory {
            eta,
            weights: Vec::new(),
            rewards: Vec::new(),
        }
    }

    pub fn push(&mut self, w: SimplexWeights, reward: Vec<f64>) {
        self.weights.push(w);
        self.rewards.push(reward);
    }

    /// Number of recorded steps.
    pub fn horizon(&self) -> usize {
        self.weights.len()
    }

    pub fn k(&self) -> usize {
        self.weights.first().map_or(0, SimplexWeights::len)
    }

    fn validate(&self) -> Result<()> {
        if self.weights.is_empty() {
            return Err(Error::Malformed("empty history".into()));
        }
        if self.weights.len() != self.rewards.len() {
            return Err(Error::Malformed(format!(
                "{} iterates but {} reward vectors",
                self.weights.len(),
                self.rewards.len()
            )));
        }
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(Error::Malformed(format!("step size {}", self.eta)));
        }
        let k = self.k();
        for (w, r) in self.weights.iter().zip(&self.rewards) {
            if w.len() != k || r.len() != k {
                return Err(Error::Malformed("ragged history".into()));
            }
            check_rewards(r)?;
        }
        Ok(())
    }

    /// Checks that each iterate follows from its predecessor by `hedge_step`.
    pub fn is_hedge_trajectory(&self, tol: f64) -> bool {
        self.weights.windows(2).zip(&self.rewards).all(|(pair, r)| {
            hedge_step(&pair[0], r, self.eta).is_ok_and(|next| {
                next.as_slice()
                    .iter()
                    .zip(pair[1].as_slice())
                    .all(|(a, b)| (a - b).abs() <= tol)
            })
        })
    }
}

/// Regret bound `R = ln k / eta + eta T / 8` for Hedge with rewards in [0, 1].
pub fn regret_bound(k: usize, eta: f64, horizon: usize) -> f64 {
    (k as f64).ln() / eta + eta * horizon as f64 / 8.0
}

/// Slack in the Hedge regret inequality:
/// `sum_t <r_t, w_t> - (max_i sum_t r_t,i - R)`, nonnegative for genuine
/// Hedge trajectories.
pub fn regret_certificate(h: &HedgeHistory) -> Result<f64> {
    h.validate()?;
    let k = h.k();
    let earned: f64 = h.weights.iter().zip(&h.rewards).map(|(w, r)| w.dot(r)).sum();
    let mut totals = vec![0.0; k];
    for r in &h.rewards {
        for (t, x) in totals.iter_mut().zip(r) {
            *t += x;
        }
    }
    let best = totals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(earned - (best - regret_bound(k, h.eta, h.horizon())))
}

/// `sum_i max_t w_i^(t)`, the trajectory mass that governs lazy-update overhead.
pub fn trajectory_sum_max(h: &HedgeHistory) -> f64 {
    running_max(&h.weights).iter().sum()
}

pub(crate) fn running_max(weights: &[SimplexWeights]) -> Vec<f64> {
    let k = weights.first().map_or(0, SimplexWeights::len);
    let mut m = vec![0.0f64; k];
    for w in weights {
        for (mi, &wi) in m.iter_mut().zip(w.as_slice()) {
            *mi = mi.max(wi);
        }
    }
    m
}

/// Default trajectory threshold `c ln^8(k / eps)`.
pub fn trajectory_threshold(c: f64, k: usize, eps: f64) -> f64 {
    c * (k as f64 / eps).ln().powi(8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn run(k: usize, eta: f64, rewards: &[Vec<f64>]) -> HedgeHistory {
        let mut h = HedgeHistory::new(eta);
        let mut w = SimplexWeights::uniform(k);
        for r in rewards {
            let next = hedge_step(&w, r, eta).unwrap();
            h.push(w, r.clone());
            w = next;
        }
        h
    }

    #[test]
    fn step_examples() {
        let w = SimplexWeights::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert_eq!(hedge_step(&w, &[0.1, 0.9, 0.4], 0.0).unwrap(), w);

        let half = SimplexWeights::uniform(2);
        let next = hedge_step(&half, &[1.0, 0.0], 2f64.ln()).unwrap();
        assert!((next[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((next[1] - 1.0 / 3.0).abs() < 1e-12);

        let same = hedge_step(&w, &[0.7, 0.7, 0.7], 3.0).unwrap();
        for i in 0..3 {
            assert!((same[i] - w[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn step_rejects_out_of_range_rewards() {
        let w = SimplexWeights::uniform(2);
        assert_eq!(
            hedge_step(&w, &[0.5, 1.5], 0.1),
            Err(Error::RewardOutOfRange { index: 1, value: 1.5 })
        );
        assert!(hedge_step(&w, &[-0.1, 0.0], 0.1).is_err());
        assert!(hedge_step(&w, &[0.1], 0.1).is_err());
    }

    #[test]
    fn step_survives_extreme_exponents() {
        let w = SimplexWeights::new(vec![1e-300, 1.0 - 1e-300]).unwrap();
        let next = hedge_step(&w, &[1.0, 0.0], 1000.0).unwrap();
        assert!(next[0] > 0.99);
    }

    #[test]
    fn simplex_validation() {
        assert!(SimplexWeights::new(vec![0.5, 0.6]).is_err());
        assert!(SimplexWeights::new(vec![1.5, -0.5]).is_err());
        assert!(SimplexWeights::new(vec![]).is_err());
        assert!(SimplexWeights::new(vec![f64::NAN, 1.0]).is_err());
        let w: SimplexWeights = serde_json::from_str("[0.25,0.75]").unwrap();
        assert_eq!(w[1], 0.75);
        assert!(serde_json::from_str::<SimplexWeights>("[0.25,0.25]").is_err());
    }

    #[test]
    fn certificate_examples() {
        let h = run(3, 0.5, &[vec![1.0, 0.0, 0.3]]);
        assert!(regret_certificate(&h).unwrap() >= 0.0);

        let alternating: Vec<Vec<f64>> = (0..100)
            .map(|t| if t % 2 == 0 { vec![1.0, 0.0] } else { vec![0.0, 1.0] })
            .collect();
        let h = run(2, 0.1, &alternating);
        assert!(regret_certificate(&h).unwrap() >= 0.0);

        let zeros = vec![vec![0.0; 4]; 10];
        let h = run(4, 0.2, &zeros);
        let slack = regret_certificate(&h).unwrap();
        assert!((slack - regret_bound(4, 0.2, 10)).abs() < 1e-12);
        assert!(slack > 0.0);

        assert!(regret_certificate(&HedgeHistory::new(0.1)).is_err());
    }

    #[test]
    fn trajectory_examples() {
        let mut h = HedgeHistory::new(0.1);
        for _ in 0..5 {
            h.push(SimplexWeights::uniform(4), vec![0.5; 4]);
        }
        assert!((trajectory_sum_max(&h) - 1.0).abs() < 1e-12);

        let h = run(3, 0.3, &[vec![0.2, 0.5, 0.9]]);
        assert!((trajectory_sum_max(&h) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_histories_certify() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let k = rng.random_range(1..=12);
            let eta = rng.random_range(0.01..=1.0);
            let horizon = rng.random_range(1..=500);
            let rewards: Vec<Vec<f64>> = (0..horizon)
                .map(|_| (0..k).map(|_| rng.random::<f64>()).collect())
                .collect();
            let h = run(k, eta, &rewards);
            assert!(h.is_hedge_trajectory(1e-12));
            assert!(regret_certificate(&h).unwrap() >= -1e-6);
            let s = trajectory_sum_max(&h);
            assert!(s >= 1.0 - 1e-9 && s <= k as f64 + 1e-9);
        }
    }

    proptest! {
        #[test]
        fn step_preserves_simplex_and_order(
            raw in prop::collection::vec(0.01f64..1.0, 2..10),
            rewards in prop::collection::vec(0.0f64..=1.0, 10),
            eta in 0.0f64..5.0,
        ) {
            let k = raw.len();
            let w = SimplexWeights::normalized(raw).unwrap();
            let r = &rewards[..k];
            let next = hedge_step(&w, r, eta).unwrap();
            let sum: f64 = next.as_slice().iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9);
            prop_assert!(next.as_slice().iter().all(|&x| x >= 0.0));
            if eta > 1e-3 {
                for i in 0..k {
                    for j in 0..k {
                        if r[i] > r[j] + 1e-6 && w[i] >= w[j] {
                            prop_assert!(next[i] / next[j] > w[i] / w[j]);
                        }
                    }
                }
            }
        }
    }
}
