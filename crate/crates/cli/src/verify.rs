//! Property suites behind `ondemand verify`.

use std::collections::HashSet;

use ondemand_core::agnostic::{run_lazy_hedge_mdl, AgnosticConfig};
use ondemand_core::gf2::{gf2_rank, gf2_solve_label, Label};
use ondemand_core::hedge::{hedge_step, regret_certificate};
use ondemand_core::instances::{build_difficulty_spec, gen_agnostic_finite, gen_planted_mdl};
use ondemand_core::oods::{
    culprit_limit, lazy_hedge_oods, make_adversarial, verify_approx_max_characterization, verify_oracle_locality,
    AdversarialKind, LazyHedgeConfig, RegionKind,
};
use ondemand_core::realizable::{
    calibrate_testing_rule, check_majority_margin_bound, run_tradeoff_mdl, tradeoff_params, RealizableConfig,
};
use ondemand_core::{
    population_error, Constant, FiniteDistribution, Gf2Vector, HedgeHistory, LabeledExample, LinearClass, Predictor,
    SimplexWeights,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

const KINDS: [AdversarialKind; 2] = [AdversarialKind::LargeEps, AdversarialKind::SmallEps];
const REGIONS: [RegionKind; 2] = [RegionKind::Box, RegionKind::Ellipsoid];

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

/// Runs every suite with `cases` random cases where a suite is randomized.
pub fn run_all(seed: u64, cases: usize) -> Vec<Check> {
    let cases = cases.max(1);
    let suites: [fn(&mut ChaCha8Rng, usize) -> Check; 10] = [
        gf2_oracles,
        hedge_regret,
        testing_calibration,
        margin_bound,
        planted_instances,
        realizable_accounting,
        lazy_hedge_runs,
        characterization,
        locality,
        agnostic_bookkeeping,
    ];
    suites
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            f(&mut rng, cases)
        })
        .collect()
}

fn rank_by_enumeration(vs: &[Gf2Vector]) -> usize {
    let mut span = HashSet::new();
    for mask in 0u64..(1 << vs.len()) {
        let mut acc = 0u64;
        for (i, v) in vs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                acc ^= v.to_index().expect("small vector");
            }
        }
        span.insert(acc);
    }
    span.len().trailing_zeros() as usize
}

fn label_by_enumeration(d: usize, observed: &[(Gf2Vector, bool)], q: &Gf2Vector) -> Option<Label> {
    let mut seen = [false; 2];
    for w in 0u64..(1 << d) {
        let h = Gf2Vector::from_index(d, w);
        if observed.iter().all(|(x, y)| h.dot(x) == *y) {
            seen[h.dot(q) as usize] = true;
        }
    }
    match seen {
        [false, false] => None,
        [true, true] => Some(Label::Undetermined),
        [_, one] => Some(Label::Determined(one)),
    }
}

fn gf2_oracles(rng: &mut ChaCha8Rng, cases: usize) -> Check {
    let mut bad = 0;
    for _ in 0..cases {
        let d = rng.random_range(1..=8);
        let n = rng.random_range(0..=10);
        let vs: Vec<Gf2Vector> = (0..n).map(|_| Gf2Vector::random(d, rng)).collect();
        if gf2_rank(&vs).ok() != Some(rank_by_enumeration(&vs)) {
            bad += 1;
        }
        let planted = Gf2Vector::random(d, rng);
        let noisy = rng.random_range(0..4) == 0;
        let observed: Vec<_> = vs
            .iter()
            .map(|x| (x.clone(), planted.dot(x) ^ (noisy && rng.random::<bool>())))
            .collect();
        let q = Gf2Vector::random(d, rng);
        if gf2_solve_label(&observed, &q).ok() != label_by_enumeration(d, &observed, &q) {
            bad += 1;
        }
    }
    check("gf2_oracles", bad == 0, format!("{bad} disagreements in {cases} cases"))
}

fn hedge_regret(rng: &mut ChaCha8Rng, cases: usize) -> Check {
    let mut worst = f64::INFINITY;
    let mut replay = true;
    for _ in 0..cases {
        let k = rng.random_range(1..16);
        let eta = rng.random_range(0.01..1.0);
        let mut h = HedgeHistory::new(eta);
        let mut w = SimplexWeights::uniform(k);
        for _ in 0..rng.random_range(1..=500) {
            let reward: Vec<f64> = (0..k).map(|_| rng.random()).collect();
            let next = hedge_step(&w, &reward, eta).expect("rewards in range");
            h.push(w, reward);
            w = next;
        }
        worst = worst.min(regret_certificate(&h).unwrap_or(f64::NEG_INFINITY));
        replay &= h.is_hedge_trajectory(1e-12);
    }
    check(
        "hedge_regret",
        worst >= -1e-6 && replay,
        format!("min slack {worst:.4}, replayable {replay}"),
    )
}

fn testing_calibration(rng: &mut ChaCha8Rng, cases: usize) -> Check {
    let delta = 0.05;
    let draws = 2000;
    let mut worst: f64 = 0.0;
    let mut ran = 0;
    for _ in 0..cases.min(20) {
        let tau = rng.random_range(0.05..0.3);
        let pos = if rng.random() {
            rng.random_range(0.35..0.9)
        } else {
            rng.random_range(0.0..tau / 5.0)
        };
        let s = rng.random_range(4..30);
        let entries = (0..s)
            .map(|x| (LabeledExample::new(x, rng.random::<f64>() < pos), 1.0 / s as f64))
            .collect();
        let Ok(dist) = FiniteDistribution::new(entries) else {
            continue;
        };
        if let Ok(cal) = calibrate_testing_rule(&Constant(false), &dist, tau, delta, draws, rng) {
            worst = worst.max(cal.miss_rate());
            ran += 1;
        }
    }
    check(
        "testing_calibration",
        ran > 0 && worst <= delta,
        format!("{ran} configurations, worst miss rate {worst:.4} (δ = {delta})"),
    )
}

struct Table(Vec<bool>);

impl Predictor<usize> for Table {
    fn predict(&self, x: &usize) -> bool {
        self.0[*x]
    }
}

fn margin_bound(rng: &mut ChaCha8Rng, cases: usize) -> Check {
    let (mut checked, mut held) = (0, 0);
    for _ in 0..cases * 50 {
        if checked == cases {
            break;
        }
        let s = rng.random_range(3..20);
        let labels: Vec<bool> = (0..s).map(|_| rng.random()).collect();
        let raw: Vec<f64> = (0..s).map(|_| rng.random::<f64>() + 1e-3).collect();
        let z: f64 = raw.iter().sum();
        let dist = FiniteDistribution::new(
            raw.iter()
                .enumerate()
                .map(|(x, m)| (LabeledExample::new(x, labels[x]), m / z))
                .collect(),
        )
        .expect("valid masses");
        let n = rng.random_range(1..10);
        let flip = rng.random_range(0.0..0.4);
        let hs: Vec<Table> = (0..n)
            .map(|_| Table(labels.iter().map(|&y| y ^ (rng.random::<f64>() < flip)).collect()))
            .collect();
        let weights: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let tau = rng.random_range(0.02..0.3);
        let theta = rng.random_range(0.05..0.95);
        let Ok(c) = check_majority_margin_bound(&hs, &weights, &dist, tau, theta) else {
            continue;
        };
        if c.premise {
            checked += 1;
            held += c.holds() as usize;
        }
    }
    check(
        "margin_bound",
        checked > 0 && held == checked,
        format!("{held}/{checked} configurations hold"),
    )
}

fn planted_instances(rng: &mut ChaCha8Rng, cases: usize) -> Check {
    let spec = build_difficulty_spec(8, 3, 8).expect("valid spec");
    let mut bad = 0;
    for _ in 0..cases.min(50) {
        let inst = gen_planted_mdl(30, &spec, rng).expect("generation succeeds");
        let union: Vec<Gf2Vector> = inst.bases.iter().flat_map(|b| b.rows().to_vec()).collect();
        let rank_ok = gf2_rank(&union).ok() == Some(inst.diffs.iter().sum());
        let zero_err = inst.dists.iter().all(|d| population_error(&inst.hstar, d) == 0.0);
        bad += !(rank_ok && zero_err) as usize;
    }
    check("planted_instances", bad == 0, format!("{bad} invalid instances"))
}

fn realizable_accounting(rng: &mut ChaCha8Rng, cases: usize) -> Check {
    let (k, d) = (4, 12);
    let spec = build_difficulty_spec(k, 2, 4).expect("valid spec");
    let cfg = RealizableConfig::default();
    let mut bad = 0;
    let runs = cases.min(10);
    for i in 0..runs {
        let r = 1 + i % 2;
        let inst = gen_planted_mdl(d, &spec, rng).expect("generation succeeds");
        let params = tradeoff_params(k, r, 0.2, 0.1, d, &cfg).expect("valid params");
        let mut env = inst.environment();
        let ok = run_tradeoff_mdl(&mut env, &LinearClass::new(d), &params, &cfg, rng).is_ok_and(|(_, rep)| {
            rep.rounds_used == r as u64
                && rep.samples_total == r as u64 * (params.m + k as u64 * params.n)
                && rep.samples_total == env.ledger().snapshot().samples_total
        });
        bad += !ok as usize;
    }
    check("realizable_accounting", bad == 0, format!("{bad}/{runs} runs off"))
}

fn lazy_hedge_runs(rng: &mut ChaCha8Rng, cases: usize) -> Check {
    let cfg = LazyHedgeConfig::default();
    let (k, m, eps) = (32, 4, 0.1);
    let mut bad = Vec::new();
    let runs = cases.min(5);
    for kind in KINDS {
        for _ in 0..runs {
            let inst = make_adversarial(kind, k, m, rng).expect("valid instance");
            for region in REGIONS {
                let Ok(run) = lazy_hedge_oods(&inst, eps, region, &cfg) else {
                    bad.push(format!("{kind}/{region} errored"));
                    continue;
                };
                let slack_ok = run.regret_slack().is_ok_and(|s| s >= -1e-6);
                let culprits_ok = run.culprit_counts().iter().all(|&c| c <= culprit_limit(k, cfg.c));
                let optimal = inst.optimum() - inst.eval(run.w_hat.as_slice()) <= 3.0 * eps;
                if !(run.caps_monotone()
                    && run.queries_legal(region)
                    && run.overhead_bound_holds(cfg.c)
                    && slack_ok
                    && culprits_ok
                    && optimal)
                {
                    bad.push(format!("{kind}/{region}"));
                }
            }
        }
    }
    check(
        "lazy_hedge_runs",
        bad.is_empty(),
        format!("{} of {} runs violate an invariant {bad:?}", bad.len(), runs * 4),
    )
}

fn characterization(rng: &mut ChaCha8Rng, _cases: usize) -> Check {
    let mut bad = Vec::new();
    for kind in KINDS {
        let inst = make_adversarial(kind, 4, 2, rng).expect("valid instance");
        match verify_approx_max_characterization(&inst, inst.characterization_eps(), 32) {
            Ok(true) => {}
            other => bad.push(format!("{kind}: {other:?}")),
        }
    }
    check(
        "characterization",
        bad.is_empty(),
        format!("(k, m) = (4, 2) on a 1/32 grid {bad:?}"),
    )
}

fn locality(rng: &mut ChaCha8Rng, cases: usize) -> Check {
    let mut bad = Vec::new();
    for kind in KINDS {
        let inst = make_adversarial(kind, 16, 4, rng).expect("valid instance");
        if !verify_oracle_locality(&inst, cases, 10, rng) {
            bad.push(kind.to_string());
        }
    }
    check(
        "locality",
        bad.is_empty(),
        format!("{cases} trials x 10 resamples {bad:?}"),
    )
}

fn agnostic_bookkeeping(rng: &mut ChaCha8Rng, cases: usize) -> Check {
    let mut bad = 0;
    let runs = cases.min(6);
    for i in 0..runs {
        let inst = gen_agnostic_finite(3, 12, 0.2, rng).expect("valid instance");
        let mut env = inst.environment();
        let region = REGIONS[i % 2];
        let ok = run_lazy_hedge_mdl(
            &mut env,
            &inst.class,
            0.3,
            region,
            &AgnosticConfig::default(),
            None,
            rng,
        )
        .is_ok_and(|(_, rep)| {
            rep.rounds == rep.cap_updates.len()
                && rep.rounds_used == rep.rounds as u64
                && rep.samples_total == env.ledger().snapshot().samples_total
                && rep.regret_slack >= -1e-6
        });
        bad += !ok as usize;
    }
    check("agnostic_bookkeeping", bad == 0, format!("{bad}/{runs} runs off"))
}
