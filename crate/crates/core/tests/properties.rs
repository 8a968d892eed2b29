use ondemand_core::agnostic::{run_lazy_hedge_mdl, AgnosticConfig};
use ondemand_core::gf2::{gf2_rank, gf2_solve_label, sample_independent_subspaces, Label};
use ondemand_core::hedge::{hedge_step, regret_certificate};
use ondemand_core::instances::{build_difficulty_spec, gen_agnostic_finite, gen_planted_mdl};
use ondemand_core::oods::{
    adversarial_query, lazy_hedge_oods, make_adversarial, AdversarialKind, FirstOrderOracle, LazyHedgeConfig,
    MinOfAffine, RegionKind,
};
use ondemand_core::realizable::{run_tradeoff_mdl, tradeoff_params, RealizableConfig};
use ondemand_core::{
    minimax_opt, population_error, Environment, FiniteDistribution, Gf2Vector, HedgeHistory, LabeledExample,
    LinearClass, SampleRequest, SimplexWeights,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn simplex(raw: &[f64]) -> SimplexWeights {
    SimplexWeights::normalized(raw.iter().map(|x| x + 1e-6).collect()).unwrap()
}

fn random_simplex(k: usize, r: &mut ChaCha8Rng) -> SimplexWeights {
    let raw: Vec<f64> = (0..k).map(|_| -r.random::<f64>().ln()).collect();
    SimplexWeights::normalized(raw).unwrap()
}

fn in_span(d: usize, vs: &[Gf2Vector], mask: u64) -> Gf2Vector {
    let mut q = Gf2Vector::zeros(d);
    for (i, v) in vs.iter().enumerate() {
        if mask >> (i % 64) & 1 == 1 {
            q.xor_assign(v);
        }
    }
    q
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_unchanged_by_span_member(seed in any::<u64>(), d in 1usize..200, n in 0usize..20, mask in any::<u64>()) {
        let mut r = rng(seed);
        let vs: Vec<Gf2Vector> = (0..n).map(|_| Gf2Vector::random(d, &mut r)).collect();
        let q = in_span(d, &vs, mask);
        let mut more = vs.clone();
        more.push(q);
        prop_assert_eq!(gf2_rank(&vs).unwrap(), gf2_rank(&more).unwrap());
    }

    #[test]
    fn determined_iff_rank_unchanged(seed in any::<u64>(), d in 1usize..40, n in 0usize..40, from_span in any::<bool>()) {
        let mut r = rng(seed);
        let planted = Gf2Vector::random(d, &mut r);
        let vs: Vec<Gf2Vector> = (0..n).map(|_| Gf2Vector::random(d, &mut r)).collect();
        let observed: Vec<_> = vs.iter().map(|x| (x.clone(), planted.dot(x))).collect();
        let q = if from_span { in_span(d, &vs, r.random()) } else { Gf2Vector::random(d, &mut r) };
        let mut more = vs.clone();
        more.push(q.clone());
        let unchanged = gf2_rank(&vs).unwrap() == gf2_rank(&more).unwrap();
        match gf2_solve_label(&observed, &q).unwrap() {
            Label::Determined(y) => {
                prop_assert!(unchanged);
                prop_assert_eq!(y, planted.dot(&q));
            }
            Label::Undetermined => prop_assert!(!unchanged),
        }
    }

    #[test]
    fn independent_subspaces_have_full_union_rank(seed in any::<u64>(), dims in prop::collection::vec(0usize..6, 1..6), slack in 0usize..10) {
        let d = dims.iter().sum::<usize>() + slack;
        prop_assume!(d > 0);
        let bases = sample_independent_subspaces(d, &dims, &mut rng(seed)).unwrap();
        let union: Vec<Gf2Vector> = bases.iter().flat_map(|b| b.rows().to_vec()).collect();
        prop_assert_eq!(gf2_rank(&union).unwrap(), dims.iter().sum::<usize>());
        for (b, &dim) in bases.iter().zip(&dims) {
            prop_assert_eq!(b.rank(), dim);
        }
    }

    #[test]
    fn ledger_matches_returned_examples(seed in any::<u64>(), k in 1usize..6, rounds in 1usize..5) {
        let mut r = rng(seed);
        let dists: Vec<_> = (0..k)
            .map(|i| FiniteDistribution::uniform((0..3).map(|x| LabeledExample::new(10 * i + x, x == 0)).collect()).unwrap())
            .collect();
        let mut env = Environment::new(dists).unwrap();
        let mut seen = vec![0u64; k];
        for _ in 0..rounds {
            let mut reqs: Vec<_> = (0..k).map(|i| SampleRequest::pure(i, r.random_range(0..50))).collect();
            reqs.push(SampleRequest::mixture(random_simplex(k, &mut r), r.random_range(1..200)));
            for s in env.request_round(&reqs, &mut r).unwrap() {
                for (i, c) in s.per_source_counts(k).into_iter().enumerate() {
                    seen[i] += c;
                }
            }
        }
        let snap = env.ledger().snapshot();
        prop_assert_eq!(&snap.samples_per_dist, &seen);
        prop_assert_eq!(snap.samples_total, seen.iter().sum::<u64>());
        prop_assert_eq!(snap.rounds_used, rounds as u64);
    }

    #[test]
    fn minimax_opt_is_a_lower_bound(seed in any::<u64>(), k in 1usize..5) {
        let inst = gen_agnostic_finite(k, 12, 0.3, &mut rng(seed)).unwrap();
        let opt = inst.opt();
        let hs = inst.class.hypotheses();
        prop_assert_eq!(opt, minimax_opt(hs, &inst.dists).unwrap());
        for h in hs {
            let worst = inst.dists.iter().map(|d| population_error(h, d)).fold(0.0, f64::max);
            prop_assert!(opt <= worst + 1e-15);
        }
    }

    #[test]
    fn difficulty_masses_telescope(k in 2usize..300, r_frac in 0.0f64..1.0, extra in 0usize..64) {
        let max_r = (k as f64).log2().floor() as usize;
        let r = 1 + ((max_r - 1) as f64 * r_frac) as usize;
        let d0 = k + extra;
        if let Ok(spec) = build_difficulty_spec(k, r, d0) {
            let total: f64 = spec.levels.iter().map(|l| l.prob).sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
            prop_assert!(spec.levels.iter().all(|l| l.diff >= 1 && l.prob > 0.0));
        }
    }

    #[test]
    fn hedge_step_keeps_simplex_and_order(seed in any::<u64>(), k in 2usize..30, eta in 0.001f64..5.0) {
        let mut r = rng(seed);
        let w = random_simplex(k, &mut r);
        let reward: Vec<f64> = (0..k).map(|_| r.random()).collect();
        let next = hedge_step(&w, &reward, eta).unwrap();
        let sum: f64 = next.as_slice().iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-9);
        prop_assert!(next.as_slice().iter().all(|&x| x >= 0.0));
        for i in 0..k {
            for j in 0..k {
                if reward[i] > reward[j] && w[i] >= w[j] && next[j] > 0.0 && w[j] > 0.0 {
                    prop_assert!(next[i] / next[j] > w[i] / w[j] * (1.0 - 1e-12));
                }
            }
        }
    }

    #[test]
    fn regret_slack_nonnegative(seed in any::<u64>(), k in 1usize..12, horizon in 1usize..500, eta in 0.01f64..1.0) {
        let mut r = rng(seed);
        let mut h = HedgeHistory::new(eta);
        let mut w = SimplexWeights::uniform(k);
        for _ in 0..horizon {
            let reward: Vec<f64> = (0..k).map(|_| r.random()).collect();
            let next = hedge_step(&w, &reward, eta).unwrap();
            h.push(w, reward);
            w = next;
        }
        prop_assert!(regret_certificate(&h).unwrap() >= -1e-6);
        prop_assert!(h.is_hedge_trajectory(1e-12));
    }

    #[test]
    fn adversarial_objective_is_concave(seed in any::<u64>(), k in 2usize..40, m_frac in 0.0f64..1.0, small in any::<bool>()) {
        let mut r = rng(seed);
        let m = 1 + ((k - 1) as f64 * m_frac) as usize;
        let kind = if small { AdversarialKind::SmallEps } else { AdversarialKind::LargeEps };
        let inst = make_adversarial(kind, k, m, &mut r).unwrap();
        for _ in 0..16 {
            let u = random_simplex(k, &mut r);
            let v = random_simplex(k, &mut r);
            let mid: Vec<f64> = u.as_slice().iter().zip(v.as_slice()).map(|(a, b)| (a + b) / 2.0).collect();
            let lhs = inst.eval(&mid);
            let rhs = (inst.eval(u.as_slice()) + inst.eval(v.as_slice())) / 2.0;
            prop_assert!(lhs >= rhs - 1e-12);
            // Supergradient inequality at u.
            let resp = adversarial_query(&inst, &u);
            let lin: f64 = resp.supergradient.iter().zip(v.as_slice().iter().zip(u.as_slice())).map(|(g, (a, b))| g * (a - b)).sum();
            prop_assert!(inst.eval(v.as_slice()) <= resp.value + lin + 1e-12);
        }
        prop_assert!((inst.eval(inst.maximizer().as_slice()) - inst.optimum()).abs() <= 1e-12);
    }

    #[test]
    fn min_of_affine_supergradients(seed in any::<u64>(), k in 1usize..10, n in 1usize..8, raw in prop::collection::vec(0.0f64..1.0, 10)) {
        let mut r = rng(seed);
        let f = MinOfAffine::random(k, n, &mut r).unwrap();
        let u = simplex(&raw[..k]);
        let v = random_simplex(k, &mut r);
        let resp = f.query(&u);
        let lin: f64 = resp.supergradient.iter().zip(v.as_slice().iter().zip(u.as_slice())).map(|(g, (a, b))| g * (a - b)).sum();
        prop_assert!(f.value(&v) <= resp.value + lin + 1e-12);
        prop_assert!(f.value(&u) <= f.maximum().unwrap() + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lazy_hedge_invariants(seed in any::<u64>(), k in 1usize..16, n in 1usize..6, ell in any::<bool>(), eps in 0.05f64..0.3) {
        let f = MinOfAffine::random(k, n, &mut rng(seed)).unwrap();
        let region = if ell { RegionKind::Ellipsoid } else { RegionKind::Box };
        let run = lazy_hedge_oods(&f, eps, region, &LazyHedgeConfig::default()).unwrap();
        prop_assert!(run.caps_monotone());
        prop_assert!(run.queries_legal(region));
        prop_assert!(run.overhead_bound_holds(2.0));
        prop_assert!(run.regret_slack().unwrap() >= -1e-6);
        prop_assert_eq!(run.rounds, run.cap_updates.len());
        prop_assert!(run.history.is_hedge_trajectory(1e-9));
        prop_assert!(f.maximum().unwrap() - f.value(&run.w_hat) <= 3.0 * eps);
    }

    #[test]
    fn realizable_round_and_sample_accounting(seed in any::<u64>(), r in 1usize..=2) {
        let mut g = rng(seed);
        let (k, d0, d) = (4, 4, 12);
        let spec = build_difficulty_spec(k, 2, d0).unwrap();
        let inst = gen_planted_mdl(d, &spec, &mut g).unwrap();
        for dist in &inst.dists {
            prop_assert_eq!(population_error(&inst.hstar, dist), 0.0);
        }
        let union: Vec<Gf2Vector> = inst.bases.iter().flat_map(|b| b.rows().to_vec()).collect();
        prop_assert_eq!(gf2_rank(&union).unwrap(), inst.diffs.iter().sum::<usize>());

        let cfg = RealizableConfig::default();
        let params = tradeoff_params(k, r, 0.2, 0.1, d, &cfg).unwrap();
        let mut env = inst.environment();
        let (_, rep) = run_tradeoff_mdl(&mut env, &LinearClass::new(d), &params, &cfg, &mut g).unwrap();
        prop_assert_eq!(rep.rounds_used, r as u64);
        prop_assert_eq!(rep.samples_total, params.samples_total());
        prop_assert_eq!(rep.samples_total, r as u64 * (params.m + k as u64 * params.n));
        prop_assert_eq!(rep.weights.len(), r + 1);
        for q in &rep.weights {
            let s: f64 = q.iter().sum();
            prop_assert!((s - 1.0).abs() <= 1e-9 && q.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn agnostic_bookkeeping(seed in any::<u64>(), k in 1usize..5, ell in any::<bool>()) {
        let mut g = rng(seed);
        let inst = gen_agnostic_finite(k, 10, 0.2, &mut g).unwrap();
        let mut env = inst.environment();
        let region = if ell { RegionKind::Ellipsoid } else { RegionKind::Box };
        let (_, rep) = run_lazy_hedge_mdl(&mut env, &inst.class, 0.3, region, &AgnosticConfig::default(), None, &mut g).unwrap();
        prop_assert_eq!(rep.rounds, rep.cap_updates.len());
        prop_assert_eq!(rep.rounds_used, rep.rounds as u64);
        prop_assert_eq!(rep.samples_total, env.ledger().snapshot().samples_total);
        prop_assert!((rep.opt - inst.opt()).abs() <= 1e-15);
        prop_assert!(rep.regret_slack >= -1e-6);
        prop_assert!(rep.overhead <= 2.0 * rep.trajectory_sum_max * (1.0 + 1e-12));
    }
}
