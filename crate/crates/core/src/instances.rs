//! Planted instance generators.
//!
//! The realizable family draws a difficulty level per distribution, samples
//! independent random subspaces of those dimensions and labels every point
//! with a uniformly random linear functional. Each distribution is uniform
//! over its subspace, the zero vector included.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{minimax_opt, Environment, FiniteDistribution, LabeledExample, Predictor};
use crate::error::{Error, Result};
use crate::gf2::{sample_independent_subspaces, Gf2Basis, Gf2Vector, LinearHypothesis};
use crate::hypothesis::{threshold_class, FiniteClass, Threshold};

/// Default cap on the number of difficulty draws before giving up.
pub const DEFAULT_MAX_ATTEMPTS: usize = 1000;

/// Default constant `c` in `d = ceil(c · d0 · ln k)`.
pub const DEFAULT_DIM_FACTOR: f64 = 2.0;

/// Largest ordered domain accepted by [`gen_agnostic_finite`].
pub const MAX_AGNOSTIC_DOMAIN: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifficultyLevel {
    pub diff: usize,
    pub prob: f64,
}

/// The difficulty distribution: level `d0` has mass `1/k`, and level
/// `d0 / α^i` has mass `(α^i − α^{i−1}) / k` for `i = 1..=r`, `α = k^{1/r}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifficultySpec {
    pub k: usize,
    pub r: usize,
    pub d0: usize,
    pub alpha: f64,
    pub levels: Vec<DifficultyLevel>,
}

pub fn build_difficulty_spec(k: usize, r: usize, d0: usize) -> Result<DifficultySpec> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "difficulty spec needs k >= 2, got {k}"
        )));
    }
    if r == 0 || r as f64 > (k as f64).log2() + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= r <= log2 k, got r = {r}, k = {k}"
        )));
    }
    if d0 < k {
        return Err(Error::InvalidParameter(format!("need d0 >= k, got d0 = {d0}, k = {k}")));
    }
    let kf = k as f64;
    let alpha = kf.powf(1.0 / r as f64);
    let mut levels = vec![DifficultyLevel {
        diff: d0,
        prob: 1.0 / kf,
    }];
    for i in 1..=r {
        let diff = ((d0 as f64 / alpha.powi(i as i32)).round() as usize).max(1);
        if diff >= levels[i - 1].diff {
            return Err(Error::InvalidParameter(format!(
                "difficulty levels collide after rounding at i = {i}"
            )));
        }
        levels.push(DifficultyLevel {
            diff,
            prob: (alpha.powi(i as i32) - alpha.powi(i as i32 - 1)) / kf,
        });
    }
    let total: f64 = levels.iter().map(|l| l.prob).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("difficulty masses sum to {total}")));
    }
    Ok(DifficultySpec {
        k,
        r,
        d0,
        alpha,
        levels,
    })
}

impl DifficultySpec {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total: f64 = self.levels.iter().map(|l| l.prob).sum();
        let mut u = rng.random::<f64>() * total;
        for l in &self.levels {
            if u < l.prob {
                return l.diff;
            }
            u -= l.prob;
        }
        self.levels.last().unwrap().diff
    }

    pub fn mean(&self) -> f64 {
        self.levels.iter().map(|l| l.diff as f64 * l.prob).sum()
    }

    pub fn mass_of(&self, diff: usize) -> f64 {
        self.levels.iter().filter(|l| l.diff == diff).map(|l| l.prob).sum()
    }
}

/// `ceil(c · d0 · ln k)`, at least `d0`.
pub fn default_dimension(d0: usize, k: usize, c: f64) -> usize {
    ((c * d0 as f64 * (k as f64).ln()).ceil() as usize).max(d0)
}

/// A realizable multi-distribution instance over `F_2^d`.
#[derive(Clone, Debug)]
pub struct PlantedMdlInstance {
    pub d: usize,
    pub hstar: LinearHypothesis,
    pub diffs: Vec<usize>,
    pub bases: Vec<Gf2Basis>,
    pub dists: Vec<FiniteDistribution<Gf2Vector>>,
    /// Difficulty tuples rejected because their sum exceeded `d`.
    pub rejections: usize,
    pub seed: Option<u64>,
}

/// Replayable description of a planted instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub d: usize,
    pub diffs: Vec<usize>,
    pub bases: Vec<Vec<String>>,
    pub hstar: String,
    pub seed: Option<u64>,
}

fn subspace_distribution(basis: &Gf2Basis, hstar: &LinearHypothesis) -> Result<FiniteDistribution<Gf2Vector>> {
    let support = basis
        .span_elements()
        .into_iter()
        .map(|x| {
            let y = hstar.eval(&x);
            LabeledExample::new(x, y)
        })
        .collect();
    FiniteDistribution::uniform(support)
}

impl PlantedMdlInstance {
    fn assemble(d: usize, hstar: LinearHypothesis, bases: Vec<Gf2Basis>) -> Result<Self> {
        let diffs = bases.iter().map(Gf2Basis::rank).collect();
        let dists = bases
            .iter()
            .map(|b| subspace_distribution(b, &hstar))
            .collect::<Result<_>>()?;
        Ok(PlantedMdlInstance {
            d,
            hstar,
            diffs,
            bases,
            dists,
            rejections: 0,
            seed: None,
        })
    }

    pub fn k(&self) -> usize {
        self.dists.len()
    }

    pub fn environment(&self) -> Environment<Gf2Vector> {
        Environment::new(self.dists.clone()).expect("instance has k >= 1")
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn to_record(&self) -> InstanceRecord {
        InstanceRecord {
            d: self.d,
            diffs: self.diffs.clone(),
            bases: self.bases.iter().map(Gf2Basis::to_hex_rows).collect(),
            hstar: self.hstar.w.to_hex(),
            seed: self.seed,
        }
    }

    pub fn from_record(rec: &InstanceRecord) -> Result<Self> {
        let bases = rec
            .bases
            .iter()
            .map(|rows| Gf2Basis::from_hex_rows(rec.d, rows))
            .collect::<Result<Vec<_>>>()?;
        let all: Vec<Gf2Vector> = bases.iter().flat_map(|b| b.rows().iter().cloned()).collect();
        if crate::gf2::gf2_rank(&all)? != all.len() {
            return Err(Error::Malformed("subspaces are not independent".into()));
        }
        let hstar = LinearHypothesis::new(Gf2Vector::from_hex(rec.d, &rec.hstar)?);
        let mut inst = Self::assemble(rec.d, hstar, bases)?;
        if inst.diffs != rec.diffs {
            return Err(Error::Malformed("recorded difficulties disagree with bases".into()));
        }
        inst.seed = rec.seed;
        Ok(inst)
    }
}

pub fn gen_planted_mdl<R: Rng + ?Sized>(d: usize, spec: &DifficultySpec, rng: &mut R) -> Result<PlantedMdlInstance> {
    gen_planted_mdl_capped(d, spec, DEFAULT_MAX_ATTEMPTS, rng)
}

/// As [`gen_planted_mdl`], giving up after `max_attempts` difficulty draws.
pub fn gen_planted_mdl_capped<R: Rng + ?Sized>(
    d: usize,
    spec: &DifficultySpec,
    max_attempts: usize,
    rng: &mut R,
) -> Result<PlantedMdlInstance> {
    let mut rejections = 0;
    let diffs = loop {
        if rejections >= max_attempts {
            return Err(Error::GenerationFailed { attempts: max_attempts });
        }
        let diffs: Vec<usize> = (0..spec.k).map(|_| spec.sample(rng)).collect();
        if diffs.iter().sum::<usize>() <= d {
            break diffs;
        }
        rejections += 1;
    };
    let hstar = LinearHypothesis::new(Gf2Vector::random(d, rng));
    let bases = sample_independent_subspaces(d, &diffs, rng)?;
    let mut inst = PlantedMdlInstance::assemble(d, hstar, bases)?;
    inst.rejections = rejections;
    Ok(inst)
}

/// One distribution: a single difficulty draw, no rejection.
pub fn gen_single_planted<R: Rng + ?Sized>(d: usize, spec: &DifficultySpec, rng: &mut R) -> Result<PlantedMdlInstance> {
    let diff = spec.sample(rng);
    let hstar = LinearHypothesis::new(Gf2Vector::random(d, rng));
    let bases = sample_independent_subspaces(d, &[diff], rng)?;
    PlantedMdlInstance::assemble(d, hstar, bases)
}

/// A small agnostic test bed: thresholds over `{0, .., n-1}` and `k`
/// distributions with label noise relative to a planted threshold.
#[derive(Clone, Debug)]
pub struct AgnosticFinite {
    pub class: FiniteClass<Threshold>,
    pub dists: Vec<FiniteDistribution<usize>>,
    pub planted: Threshold,
}

impl AgnosticFinite {
    pub fn opt(&self) -> f64 {
        minimax_opt(self.class.hypotheses(), &self.dists).expect("class is nonempty")
    }

    pub fn environment(&self) -> Environment<usize> {
        Environment::new(self.dists.clone()).expect("k >= 1")
    }
}

/// Each distribution puts random mass on a random subset of the domain;
/// at each point a fraction drawn uniformly from `[0, noise]` of that mass
/// carries the flipped label.
pub fn gen_agnostic_finite<R: Rng + ?Sized>(
    k: usize,
    domain_size: usize,
    noise: f64,
    rng: &mut R,
) -> Result<AgnosticFinite> {
    if k == 0 || domain_size == 0 {
        return Err(Error::InvalidParameter("need k >= 1 and a nonempty domain".into()));
    }
    if domain_size > MAX_AGNOSTIC_DOMAIN {
        return Err(Error::ClassTooLarge {
            log2_size: crate::hypothesis::log2_ceil(2 * (domain_size + 1)),
        });
    }
    if !(0.0..=0.5).contains(&noise) {
        return Err(Error::InvalidParameter(format!("noise {noise} outside [0, 1/2]")));
    }
    let class = threshold_class(domain_size);
    let planted = class.hypotheses()[rng.random_range(0..class.len())];
    let mut dists = Vec::with_capacity(k);
    for _ in 0..k {
        let raw: Vec<f64> = (0..domain_size)
            .map(|_| {
                if rng.random::<f64>() < 0.5 {
                    0.0
                } else {
                    rng.random::<f64>()
                }
            })
            .collect();
        let mut raw = raw;
        if raw.iter().all(|&m| m == 0.0) {
            let i = rng.random_range(0..domain_size);
            raw[i] = 1.0;
        }
        let total: f64 = raw.iter().sum();
        let mut entries = Vec::new();
        for (x, m) in raw.into_iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let p = m / total;
            let flip = if noise > 0.0 { rng.random::<f64>() * noise } else { 0.0 };
            let y = planted.predict(&x);
            entries.push((LabeledExample::new(x, y), p * (1.0 - flip)));
            if flip > 0.0 {
                entries.push((LabeledExample::new(x, !y), p * flip));
            }
        }
        dists.push(renormalized(entries)?);
    }
    Ok(AgnosticFinite { class, dists, planted })
}

fn renormalized<X: Clone + Eq + std::hash::Hash>(
    mut entries: Vec<(LabeledExample<X>, f64)>,
) -> Result<FiniteDistribution<X>> {
    let total: f64 = entries.iter().map(|e| e.1).sum();
    for e in &mut entries {
        e.1 /= total;
    }
    let total: f64 = entries.iter().map(|e| e.1).sum();
    if let Some(last) = entries.last_mut() {
        last.1 += 1.0 - total;
    }
    FiniteDistribution::new(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{population_error, Constant};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn levels(spec: &DifficultySpec) -> Vec<(usize, f64)> {
        spec.levels.iter().map(|l| (l.diff, l.prob)).collect()
    }

    #[test]
    fn difficulty_spec_examples() {
        let s = build_difficulty_spec(4, 2, 16).unwrap();
        assert_eq!(levels(&s), vec![(16, 0.25), (8, 0.25), (4, 0.5)]);
        let s = build_difficulty_spec(2, 1, 8).unwrap();
        assert_eq!(levels(&s), vec![(8, 0.5), (4, 0.5)]);
        let s = build_difficulty_spec(8, 3, 16).unwrap();
        assert_eq!(levels(&s), vec![(16, 0.125), (8, 0.125), (4, 0.25), (2, 0.5)]);
    }

    #[test]
    fn difficulty_masses_telescope() {
        for (k, r, d0) in [(8, 1, 8), (8, 2, 16), (16, 4, 16), (64, 3, 100), (10, 3, 40)] {
            let s = build_difficulty_spec(k, r, d0).unwrap();
            let total: f64 = s.levels.iter().map(|l| l.prob).sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!(s.levels.windows(2).all(|w| w[0].diff > w[1].diff));
            assert!(s.levels.iter().all(|l| l.diff >= 1));
        }
    }

    #[test]
    fn difficulty_spec_errors() {
        assert!(build_difficulty_spec(1, 1, 8).is_err());
        assert!(build_difficulty_spec(8, 4, 16).is_err());
        assert!(build_difficulty_spec(8, 0, 16).is_err());
        assert!(build_difficulty_spec(8, 2, 4).is_err());
    }

    #[test]
    fn default_dimension_values() {
        assert_eq!(default_dimension(16, 8, 2.0), 67);
        assert_eq!(default_dimension(16, 16, 2.0), 89);
    }

    #[test]
    fn planted_instance_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let spec = build_difficulty_spec(4, 2, 16).unwrap();
        for _ in 0..5 {
            let inst = gen_planted_mdl(64, &spec, &mut rng).unwrap();
            let rows: Vec<Gf2Vector> = inst.bases.iter().flat_map(|b| b.rows().iter().cloned()).collect();
            assert_eq!(crate::gf2::gf2_rank(&rows).unwrap(), inst.diffs.iter().sum::<usize>());
            for (dist, &diff) in inst.dists.iter().zip(&inst.diffs) {
                assert_eq!(dist.len(), 1 << diff);
                assert_eq!(population_error(&inst.hstar, dist), 0.0);
                assert!(dist.support().iter().any(|e| e.x.is_zero() && !e.y));
            }
        }
    }

    #[test]
    fn generation_cap() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let spec = build_difficulty_spec(4, 2, 16).unwrap();
        // Every difficulty is at least 4, so k = 4 needs d >= 16.
        assert_eq!(
            gen_planted_mdl_capped(15, &spec, 10, &mut rng).unwrap_err(),
            Error::GenerationFailed { attempts: 10 }
        );
    }

    #[test]
    fn difficulty_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spec = build_difficulty_spec(8, 3, 16).unwrap();
        let n = 1000.0;
        let hits = (0..1000).filter(|_| spec.sample(&mut rng) == 16).count() as f64;
        let sd = (n * 0.125 * 0.875f64).sqrt();
        assert!((hits - n * 0.125).abs() <= 3.0 * sd, "{hits}");
    }

    #[test]
    fn single_planted_labels_by_linearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let spec = build_difficulty_spec(16, 2, 16).unwrap();
        for _ in 0..10 {
            let inst = gen_single_planted(16, &spec, &mut rng).unwrap();
            assert_eq!(inst.k(), 1);
            let b = &inst.bases[0];
            for e in inst.dists[0].support() {
                // Label = XOR of h* on the basis rows that compose x.
                let mut y = false;
                let mut rest = e.x.clone();
                for (row, &p) in b.rows().iter().zip(b.pivots()) {
                    if rest.get(p) {
                        rest.xor_assign(row);
                        y ^= inst.hstar.eval(row);
                    }
                }
                assert!(rest.is_zero());
                assert_eq!(y, e.y);
            }
        }
    }

    #[test]
    fn record_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let spec = build_difficulty_spec(4, 2, 8).unwrap();
        let inst = gen_planted_mdl(20, &spec, &mut rng).unwrap().with_seed(4);
        let rec = inst.to_record();
        let back = PlantedMdlInstance::from_record(&rec).unwrap();
        assert_eq!(back.to_record(), rec);
        assert_eq!(back.hstar, inst.hstar);
        for (a, b) in back.dists.iter().zip(&inst.dists) {
            assert_eq!(a.support(), b.support());
        }
    }

    #[test]
    fn agnostic_opt_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let clean = gen_agnostic_finite(3, 12, 0.0, &mut rng).unwrap();
        assert_eq!(clean.opt(), 0.0);

        let noisy = gen_agnostic_finite(4, 10, 0.3, &mut rng).unwrap();
        let opt = noisy.opt();
        let mut permuted = noisy.dists.clone();
        permuted.reverse();
        assert_eq!(minimax_opt(noisy.class.hypotheses(), &permuted).unwrap(), opt);
        assert!(opt <= 0.3 + 1e-12);

        let d = FiniteDistribution::uniform(vec![LabeledExample::new(0usize, true), LabeledExample::new(1, false)])
            .unwrap();
        assert_eq!(minimax_opt(&[Constant(false), Constant(true)], &[d]).unwrap(), 0.5);
    }
}
