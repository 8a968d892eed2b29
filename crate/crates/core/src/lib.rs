//! On-demand sampling algorithms for multi-distribution learning.
//!
//! - [`gf2`]: linear algebra over GF(2) and random subspaces.
//! - [`env`]: finite distributions, batched sampling and error oracles.
//! - [`hypothesis`]: finite classes and incremental ERM learners.
//! - [`instances`]: planted and adversarial instance generators.
//! - [`realizable`]: margin boosting with a configurable number of rounds.
//! - [`hedge`]: multiplicative weights and regret certificates.
//! - [`oods`]: lazily capped Hedge over observable regions.
//! - [`agnostic`]: lazy Hedge for agnostic multi-distribution learning.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod agnostic;
pub mod env;
pub mod error;
pub mod gf2;
pub mod hedge;
pub mod hypothesis;
pub mod instances;
pub mod oods;
pub mod realizable;

pub use env::{
    empirical_error, minimax_opt, population_error, Constant, Environment, FiniteDistribution, LabeledExample,
    LedgerSnapshot, Predictor, Sample, SampleLedger, SampleRequest, SampleSource,
};
pub use error::{Error, Result};
pub use gf2::{Gf2Basis, Gf2Vector, LinearHypothesis};
pub use hedge::{HedgeHistory, SimplexWeights};
pub use hypothesis::{ErmLearner, FiniteClass, HypothesisClass, LinearClass};
