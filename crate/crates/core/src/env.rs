//! The multi-distribution learning environment.
//!
//! `k` finite-support distributions over labelled examples, sampled in
//! batches ("rounds"). Every draw is charged to a [`SampleLedger`]; a round
//! is consumed per [`Environment::request_round`] call and the whole batch
//! is returned at once.
//!
//! Samples are run-length encoded: a [`Sample`] stores each distinct support
//! point once with its multiplicity. This is an exact representation of the
//! drawn multiset, and keeps batches of millions of draws cheap.

use std::collections::HashSet;
use std::hash::Hash;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{Gf2Vector, LinearHypothesis};
use crate::hedge::SimplexWeights;

/// Mass tolerance for a valid distribution.
pub const MASS_TOL: f64 = 1e-12;

/// A total binary predictor over instances of type `X`.
pub trait Predictor<X> {
    fn predict(&self, x: &X) -> bool;
}

impl<X, P: Predictor<X> + ?Sized> Predictor<X> for &P {
    fn predict(&self, x: &X) -> bool {
        (**self).predict(x)
    }
}

impl<X, P: Predictor<X> + ?Sized> Predictor<X> for Box<P> {
    fn predict(&self, x: &X) -> bool {
        (**self).predict(x)
    }
}

/// Predicts the same bit everywhere.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Constant(pub bool);

impl<X> Predictor<X> for Constant {
    fn predict(&self, _: &X) -> bool {
        self.0
    }
}

impl Predictor<Gf2Vector> for LinearHypothesis {
    fn predict(&self, x: &Gf2Vector) -> bool {
        self.eval(x)
    }
}

/// Wraps a closure as a predictor.
pub struct FnPredictor<F>(pub F);

impl<X, F: Fn(&X) -> bool> Predictor<X> for FnPredictor<F> {
    fn predict(&self, x: &X) -> bool {
        (self.0)(x)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabeledExample<X> {
    pub x: X,
    pub y: bool,
}

impl<X> LabeledExample<X> {
    pub fn new(x: X, y: bool) -> Self {
        LabeledExample { x, y }
    }
}

/// A distribution with finite support over labelled examples.
#[derive(Clone, Debug)]
pub struct FiniteDistribution<X> {
    support: Vec<LabeledExample<X>>,
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl<X: Clone + Eq + Hash> FiniteDistribution<X> {
    pub fn new(entries: Vec<(LabeledExample<X>, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        let mut seen = HashSet::with_capacity(entries.len());
        for (e, p) in &entries {
            if !(*p >= 0.0) || !p.is_finite() {
                return Err(Error::InvalidDistribution(format!("mass {p}")));
            }
            if !seen.insert(e) {
                return Err(Error::InvalidDistribution("duplicate support entry".into()));
            }
        }
        let (support, probs): (Vec<_>, Vec<_>) = entries.into_iter().unzip();
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution(format!("masses sum to {total}")));
        }
        let cdf = probs
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        Ok(FiniteDistribution { support, probs, cdf })
    }

    /// Uniform distribution over distinct examples.
    pub fn uniform(support: Vec<LabeledExample<X>>) -> Result<Self> {
        let p = 1.0 / support.len().max(1) as f64;
        Self::new(support.into_iter().map(|e| (e, p)).collect())
    }
}

impl<X> FiniteDistribution<X> {
    pub fn support(&self) -> &[LabeledExample<X>] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LabeledExample<X>, f64)> {
        self.support.iter().zip(self.probs.iter().copied())
    }

    /// Multinomial counts of `n` draws, as `(support index, count)` pairs
    /// sorted by index.
    pub fn sample_counts<R: Rng + ?Sized>(&self, n: u64, rng: &mut R) -> Vec<(usize, u64)> {
        multinomial(&self.probs, &self.cdf, n, rng)
    }
}

/// Exact multinomial sampling.
///
/// Small batches draw one index at a time by inverse CDF; batches larger
/// than the support use the conditional-binomial decomposition, whose cost
/// is linear in the support size regardless of `n`.
pub(crate) fn multinomial<R: Rng + ?Sized>(probs: &[f64], cdf: &[f64], n: u64, rng: &mut R) -> Vec<(usize, u64)> {
    if n == 0 || probs.is_empty() {
        return Vec::new();
    }
    let total = *cdf.last().unwrap();
    if (n as f64) < 2.0 * probs.len() as f64 {
        let mut idx: Vec<usize> = (0..n)
            .map(|_| {
                let u = rng.random::<f64>() * total;
                cdf.partition_point(|&c| c <= u).min(probs.len() - 1)
            })
            .collect();
        idx.sort_unstable();
        let mut out: Vec<(usize, u64)> = Vec::new();
        for i in idx {
            match out.last_mut() {
                Some((j, c)) if *j == i => *c += 1,
                _ => out.push((i, 1)),
            }
        }
        return out;
    }
    let last_positive = probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1);
    let mut out = Vec::new();
    let mut remaining = n;
    let mut mass = total;
    for (j, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let c = if j >= last_positive || p >= mass {
            remaining
        } else if p <= 0.0 {
            0
        } else {
            Binomial::new(remaining, (p / mass).clamp(0.0, 1.0))
                .expect("valid binomial parameters")
                .sample(rng)
        };
        if c > 0 {
            out.push((j, c));
            remaining -= c;
        }
        mass -= p;
    }
    out
}

/// One distinct example within a sample, with its multiplicity and the
/// index of the distribution it was drawn from.
#[derive(Clone, Debug, PartialEq)]
pub struct Draw<X> {
    pub source: usize,
    pub example: LabeledExample<X>,
    pub count: u64,
}

/// A multiset of labelled examples, run-length encoded.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample<X> {
    draws: Vec<Draw<X>>,
    len: u64,
}

impl<X> Default for Sample<X> {
    fn default() -> Self {
        Sample {
            draws: Vec::new(),
            len: 0,
        }
    }
}

impl<X: Clone> Sample<X> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Each example once, attributed to `source`.
    pub fn from_examples(source: usize, examples: impl IntoIterator<Item = LabeledExample<X>>) -> Self {
        let mut s = Self::new();
        for example in examples {
            s.push(Draw {
                source,
                example,
                count: 1,
            });
        }
        s
    }

    pub fn push(&mut self, draw: Draw<X>) {
        if draw.count > 0 {
            self.len += draw.count;
            self.draws.push(draw);
        }
    }
}

impl<X> Sample<X> {
    pub fn extend(&mut self, other: Sample<X>) {
        self.len += other.len;
        self.draws.extend(other.draws);
    }

    /// Number of draws, counting multiplicity.
    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn draws(&self) -> &[Draw<X>] {
        &self.draws
    }

    /// Every draw individually, multiplicities expanded.
    pub fn examples(&self) -> impl Iterator<Item = &LabeledExample<X>> {
        self.draws
            .iter()
            .flat_map(|d| std::iter::repeat_n(&d.example, d.count as usize))
    }
}

impl<X: Clone> Sample<X> {
    pub fn per_source_counts(&self, k: usize) -> Vec<u64> {
        let mut c = vec![0; k];
        for d in &self.draws {
            c[d.source] += d.count;
        }
        c
    }

    /// A bootstrap resample of the same size.
    pub fn bootstrap<R: Rng + ?Sized>(&self, rng: &mut R) -> Self {
        let probs: Vec<f64> = self.draws.iter().map(|d| d.count as f64 / self.len as f64).collect();
        let cdf: Vec<f64> = probs
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        let mut out = Self::new();
        for (i, count) in multinomial(&probs, &cdf, self.len, rng) {
            let d = &self.draws[i];
            out.push(Draw {
                source: d.source,
                example: d.example.clone(),
                count,
            });
        }
        out
    }
}

/// Where a batch of draws comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum SampleSource {
    Pure(usize),
    /// Draw an index from the weights, then an example from that distribution.
    Mixture(SimplexWeights),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleRequest {
    pub source: SampleSource,
    pub count: u64,
}

impl SampleRequest {
    pub fn pure(dist: usize, count: u64) -> Self {
        SampleRequest {
            source: SampleSource::Pure(dist),
            count,
        }
    }

    pub fn mixture(weights: SimplexWeights, count: u64) -> Self {
        SampleRequest {
            source: SampleSource::Mixture(weights),
            count,
        }
    }
}

/// Per-distribution draw counts and the number of rounds consumed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleLedger {
    per_dist_counts: Vec<u64>,
    rounds_used: u64,
    round_open: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerSnapshot {
    pub samples_total: u64,
    pub samples_per_dist: Vec<u64>,
    pub rounds_used: u64,
}

impl SampleLedger {
    pub fn new(k: usize) -> Self {
        SampleLedger {
            per_dist_counts: vec![0; k],
            rounds_used: 0,
            round_open: false,
        }
    }

    fn open_round(&mut self) {
        assert!(!self.round_open, "sampling round already open");
        self.round_open = true;
    }

    fn record(&mut self, dist: usize, n: u64) {
        assert!(self.round_open, "draws recorded outside a round");
        self.per_dist_counts[dist] += n;
    }

    fn close_round(&mut self) {
        assert!(self.round_open);
        self.round_open = false;
        self.rounds_used += 1;
    }

    pub fn per_dist_counts(&self) -> &[u64] {
        &self.per_dist_counts
    }

    pub fn rounds_used(&self) -> u64 {
        self.rounds_used
    }

    pub fn samples_total(&self) -> u64 {
        self.per_dist_counts.iter().sum()
    }

    pub fn snapshot(&self) -> LedgerSnapshot {
        LedgerSnapshot {
            samples_total: self.samples_total(),
            samples_per_dist: self.per_dist_counts.clone(),
            rounds_used: self.rounds_used,
        }
    }
}

/// `k` distributions behind a sampling interface that charges a ledger.
#[derive(Clone, Debug)]
pub struct Environment<X> {
    dists: Vec<FiniteDistribution<X>>,
    ledger: SampleLedger,
}

impl<X: Clone> Environment<X> {
    pub fn new(dists: Vec<FiniteDistribution<X>>) -> Result<Self> {
        if dists.is_empty() {
            return Err(Error::InvalidParameter("environment needs k >= 1".into()));
        }
        let k = dists.len();
        Ok(Environment {
            dists,
            ledger: SampleLedger::new(k),
        })
    }

    pub fn k(&self) -> usize {
        self.dists.len()
    }

    pub fn dists(&self) -> &[FiniteDistribution<X>] {
        &self.dists
    }

    pub fn ledger(&self) -> &SampleLedger {
        &self.ledger
    }

    fn validate(&self, requests: &[SampleRequest]) -> Result<()> {
        if requests.is_empty() {
            return Err(Error::EmptyBatch);
        }
        for r in requests {
            match &r.source {
                SampleSource::Pure(i) if *i >= self.k() => {
                    return Err(Error::InvalidParameter(format!(
                        "distribution index {i} out of range for k = {}",
                        self.k()
                    )))
                }
                SampleSource::Mixture(w) if w.len() != self.k() => {
                    return Err(Error::InvalidWeights(format!(
                        "mixture over {} distributions, environment has {}",
                        w.len(),
                        self.k()
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn draw_from<R: Rng + ?Sized>(&self, dist: usize, n: u64, rng: &mut R, out: &mut Sample<X>) {
        let d = &self.dists[dist];
        for (i, count) in d.sample_counts(n, rng) {
            out.push(Draw {
                source: dist,
                example: d.support[i].clone(),
                count,
            });
        }
    }

    /// Fulfils one batch of requests; consumes exactly one round.
    ///
    /// A batch whose counts are all zero still consumes a round.
    pub fn request_round<R: Rng + ?Sized>(
        &mut self,
        requests: &[SampleRequest],
        rng: &mut R,
    ) -> Result<Vec<Sample<X>>> {
        self.validate(requests)?;
        if requests.iter().all(|r| r.count == 0) {
            log::warn!("sampling round with no draws requested");
        }
        self.ledger.open_round();
        let mut out = Vec::with_capacity(requests.len());
        for r in requests {
            let mut s = Sample::new();
            match &r.source {
                SampleSource::Pure(i) => {
                    self.draw_from(*i, r.count, rng, &mut s);
                    self.ledger.record(*i, r.count);
                }
                SampleSource::Mixture(w) => {
                    let probs = w.as_slice();
                    let cdf: Vec<f64> = probs
                        .iter()
                        .scan(0.0, |acc, p| {
                            *acc += p;
                            Some(*acc)
                        })
                        .collect();
                    for (i, n) in multinomial(probs, &cdf, r.count, rng) {
                        self.draw_from(i, n, rng, &mut s);
                        self.ledger.record(i, n);
                    }
                }
            }
            out.push(s);
        }
        self.ledger.close_round();
        Ok(out)
    }
}

/// Exact `Pr[h(x) != y]` under `dist`.
pub fn population_error<X, P: Predictor<X> + ?Sized>(h: &P, dist: &FiniteDistribution<X>) -> f64 {
    dist.iter()
        .filter(|(e, _)| h.predict(&e.x) != e.y)
        .fold(0.0, |acc, (_, p)| acc + p)
}

/// Fraction of draws (with multiplicity) that `h` gets wrong.
pub fn empirical_error<X, P: Predictor<X> + ?Sized>(h: &P, sample: &Sample<X>) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let wrong: u64 = sample
        .draws
        .iter()
        .filter(|d| h.predict(&d.example.x) != d.example.y)
        .map(|d| d.count)
        .sum();
    Ok(wrong as f64 / sample.len as f64)
}

/// `min_h max_i err(h, D_i)` by enumeration of a finite class.
pub fn minimax_opt<X, P: Predictor<X>>(class: &[P], dists: &[FiniteDistribution<X>]) -> Result<f64> {
    if class.is_empty() {
        return Err(Error::EmptyClass);
    }
    Ok(class
        .iter()
        .map(|h| worst_case_error(h, dists))
        .fold(f64::INFINITY, f64::min))
}

/// `max_i err(h, D_i)`.
pub fn worst_case_error<X, P: Predictor<X> + ?Sized>(h: &P, dists: &[FiniteDistribution<X>]) -> f64 {
    dists.iter().map(|d| population_error(h, d)).fold(0.0, f64::max)
}
