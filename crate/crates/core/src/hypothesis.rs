//! Finite hypothesis classes and incremental ERM learners.
//!
//! A learner holds one or more labelled datasets and returns the hypothesis
//! minimising a weighted sum of per-set empirical errors, breaking ties by
//! smallest enumeration index.

use std::fmt::Debug;

use crate::env::{Predictor, Sample};
use crate::error::{Error, Result};
use crate::gf2::{Gf2Vector, LabeledSpan, LinearHypothesis};

/// Largest dimension for which the linear class is enumerated explicitly.
pub const LINEAR_ENUMERATION_LIMIT: usize = 14;

pub trait HypothesisClass<X> {
    type Hypothesis: Predictor<X> + Clone + PartialEq + Debug;
    type Learner: ErmLearner<X, Hypothesis = Self::Hypothesis>;

    /// Capacity proxy used in sample-size formulas (VC dimension, or
    /// `ceil(log2 |H|)` when none is known).
    fn capacity(&self) -> usize;

    /// All members in tie-break order.
    fn enumerate(&self) -> Result<Vec<Self::Hypothesis>>;

    /// A learner over `sets` initially empty datasets.
    fn learner(&self, sets: usize) -> Result<Self::Learner>;
}

pub trait ErmLearner<X> {
    type Hypothesis;

    fn num_sets(&self) -> usize;

    /// Appends `sample` to dataset `set`.
    fn observe(&mut self, set: usize, sample: &Sample<X>) -> Result<()>;

    fn set_size(&self, set: usize) -> u64;

    /// `argmin_h Σ_i w_i · err(h, S_i)`, smallest index on ties.
    fn argmin(&self, weights: &[f64]) -> Result<Self::Hypothesis>;
}

fn check_weights<X, L: ErmLearner<X> + ?Sized>(l: &L, weights: &[f64]) -> Result<()> {
    if weights.len() != l.num_sets() {
        return Err(Error::DimensionMismatch {
            expected: l.num_sets(),
            found: weights.len(),
        });
    }
    for (i, &w) in weights.iter().enumerate() {
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::InvalidWeights(format!("weight {w} at {i}")));
        }
        if w > 0.0 && l.set_size(i) == 0 {
            return Err(Error::MissingData { dist: i });
        }
    }
    Ok(())
}

/// An explicitly listed class.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteClass<H> {
    hypotheses: Vec<H>,
    vc_dim: Option<usize>,
}

impl<H> FiniteClass<H> {
    pub fn new(hypotheses: Vec<H>) -> Result<Self> {
        if hypotheses.is_empty() {
            return Err(Error::EmptyClass);
        }
        Ok(FiniteClass {
            hypotheses,
            vc_dim: None,
        })
    }

    pub fn with_vc_dim(mut self, d: usize) -> Self {
        self.vc_dim = Some(d);
        self
    }

    pub fn hypotheses(&self) -> &[H] {
        &self.hypotheses
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }
}

/// `ceil(log2 n)`.
pub fn log2_ceil(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

impl<X, H> HypothesisClass<X> for FiniteClass<H>
where
    H: Predictor<X> + Clone + PartialEq + Debug,
{
    type Hypothesis = H;
    type Learner = EnumerativeLearner<H>;

    fn capacity(&self) -> usize {
        self.vc_dim.unwrap_or_else(|| log2_ceil(self.hypotheses.len()))
    }

    fn enumerate(&self) -> Result<Vec<H>> {
        Ok(self.hypotheses.clone())
    }

    fn learner(&self, sets: usize) -> Result<EnumerativeLearner<H>> {
        Ok(EnumerativeLearner::new(self.hypotheses.clone(), sets))
    }
}

/// Keeps a mistake count per (set, hypothesis).
#[derive(Clone, Debug)]
pub struct EnumerativeLearner<H> {
    hypotheses: Vec<H>,
    mistakes: Vec<Vec<u64>>,
    sizes: Vec<u64>,
}

impl<H> EnumerativeLearner<H> {
    pub fn new(hypotheses: Vec<H>, sets: usize) -> Self {
        let n = hypotheses.len();
        EnumerativeLearner {
            hypotheses,
            mistakes: vec![vec![0; n]; sets],
            sizes: vec![0; sets],
        }
    }

    /// Index of the weighted-ERM hypothesis.
    pub fn argmin_index(&self, weights: &[f64]) -> usize {
        let mut best = 0;
        let mut best_loss = f64::INFINITY;
        for h in 0..self.hypotheses.len() {
            let loss: f64 = weights
                .iter()
                .zip(&self.mistakes)
                .zip(&self.sizes)
                .filter(|((&w, _), _)| w > 0.0)
                .map(|((&w, m), &n)| w * m[h] as f64 / n as f64)
                .sum();
            if loss < best_loss {
                best_loss = loss;
                best = h;
            }
        }
        best
    }
}

impl<X, H: Predictor<X> + Clone> ErmLearner<X> for EnumerativeLearner<H> {
    type Hypothesis = H;

    fn num_sets(&self) -> usize {
        self.sizes.len()
    }

    fn observe(&mut self, set: usize, sample: &Sample<X>) -> Result<()> {
        let counts = self
            .mistakes
            .get_mut(set)
            .ok_or_else(|| Error::InvalidParameter(format!("no dataset {set}")))?;
        for d in sample.draws() {
            for (h, c) in self.hypotheses.iter().zip(counts.iter_mut()) {
                if h.predict(&d.example.x) != d.example.y {
                    *c += d.count;
                }
            }
        }
        self.sizes[set] += sample.len();
        Ok(())
    }

    fn set_size(&self, set: usize) -> u64 {
        self.sizes[set]
    }

    fn argmin(&self, weights: &[f64]) -> Result<H> {
        check_weights::<X, _>(self, weights)?;
        Ok(self.hypotheses[self.argmin_index(weights)].clone())
    }
}

/// All `2^d` linear functionals over `F_2^d`, indexed by their coefficient
/// vector read as an integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LinearClass {
    pub d: usize,
    pub enumeration_limit: usize,
}

impl LinearClass {
    pub fn new(d: usize) -> Self {
        LinearClass {
            d,
            enumeration_limit: LINEAR_ENUMERATION_LIMIT,
        }
    }

    pub fn is_enumerable(&self) -> bool {
        self.d <= self.enumeration_limit
    }
}

impl HypothesisClass<Gf2Vector> for LinearClass {
    type Hypothesis = LinearHypothesis;
    type Learner = LinearLearner;

    fn capacity(&self) -> usize {
        self.d
    }

    fn enumerate(&self) -> Result<Vec<LinearHypothesis>> {
        if !self.is_enumerable() {
            return Err(Error::ClassTooLarge { log2_size: self.d });
        }
        Ok((0..1u64 << self.d)
            .map(|i| LinearHypothesis::new(Gf2Vector::from_index(self.d, i)))
            .collect())
    }

    fn learner(&self, sets: usize) -> Result<LinearLearner> {
        Ok(if self.is_enumerable() {
            LinearLearner::Enumerative(EnumerativeLearner::new(self.enumerate()?, sets))
        } else {
            LinearLearner::Consistency(ConsistencyLearner::new(self.d, sets))
        })
    }
}

/// Realizable-only ERM by Gaussian elimination.
///
/// Under realizability every minimiser has zero weighted error, so ERM with
/// smallest-index tie-break is the smallest-index functional consistent with
/// every positively weighted set. Contradictory data is an error.
#[derive(Clone, Debug)]
pub struct ConsistencyLearner {
    d: usize,
    spans: Vec<LabeledSpan>,
    sizes: Vec<u64>,
}

impl ConsistencyLearner {
    pub fn new(d: usize, sets: usize) -> Self {
        ConsistencyLearner {
            d,
            spans: vec![LabeledSpan::new(d); sets],
            sizes: vec![0; sets],
        }
    }
}

impl ErmLearner<Gf2Vector> for ConsistencyLearner {
    type Hypothesis = LinearHypothesis;

    fn num_sets(&self) -> usize {
        self.sizes.len()
    }

    fn observe(&mut self, set: usize, sample: &Sample<Gf2Vector>) -> Result<()> {
        let span = self
            .spans
            .get_mut(set)
            .ok_or_else(|| Error::InvalidParameter(format!("no dataset {set}")))?;
        for d in sample.draws() {
            span.insert(&d.example.x, d.example.y)?;
        }
        self.sizes[set] += sample.len();
        Ok(())
    }

    fn set_size(&self, set: usize) -> u64 {
        self.sizes[set]
    }

    fn argmin(&self, weights: &[f64]) -> Result<LinearHypothesis> {
        check_weights::<Gf2Vector, _>(self, weights)?;
        let mut union = LabeledSpan::new(self.d);
        for (span, &w) in self.spans.iter().zip(weights) {
            if w > 0.0 {
                for (row, label) in span.labeled_rows() {
                    union.insert(row, label)?;
                }
            }
        }
        Ok(union.min_index_solution())
    }
}

#[derive(Clone, Debug)]
pub enum LinearLearner {
    Enumerative(EnumerativeLearner<LinearHypothesis>),
    Consistency(ConsistencyLearner),
}

impl ErmLearner<Gf2Vector> for LinearLearner {
    type Hypothesis = LinearHypothesis;

    fn num_sets(&self) -> usize {
        match self {
            LinearLearner::Enumerative(l) => ErmLearner::<Gf2Vector>::num_sets(l),
            LinearLearner::Consistency(l) => l.num_sets(),
        }
    }

    fn observe(&mut self, set: usize, sample: &Sample<Gf2Vector>) -> Result<()> {
        match self {
            LinearLearner::Enumerative(l) => l.observe(set, sample),
            LinearLearner::Consistency(l) => l.observe(set, sample),
        }
    }

    fn set_size(&self, set: usize) -> u64 {
        match self {
            LinearLearner::Enumerative(l) => ErmLearner::<Gf2Vector>::set_size(l, set),
            LinearLearner::Consistency(l) => l.set_size(set),
        }
    }

    fn argmin(&self, weights: &[f64]) -> Result<LinearHypothesis> {
        match self {
            LinearLearner::Enumerative(l) => l.argmin(weights),
            LinearLearner::Consistency(l) => l.argmin(weights),
        }
    }
}

/// `x ↦ polarity` if `x >= cut`, else `!polarity`, on `{0, .., n-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Threshold {
    pub cut: usize,
    pub polarity: bool,
}

impl Predictor<usize> for Threshold {
    fn predict(&self, x: &usize) -> bool {
        (*x >= self.cut) == self.polarity
    }
}

/// Two-sided thresholds over an ordered domain of size `n`.
pub fn threshold_class(n: usize) -> FiniteClass<Threshold> {
    let hs = (0..=n)
        .flat_map(|cut| [true, false].map(|polarity| Threshold { cut, polarity }))
        .collect();
    FiniteClass {
        hypotheses: hs,
        vc_dim: Some(2),
    }
}
