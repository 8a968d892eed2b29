//! Sample totals of the boosting schedule at the default constants.

use ondemand_core::instances::{build_difficulty_spec, default_dimension, gen_planted_mdl, DEFAULT_DIM_FACTOR};
use ondemand_core::realizable::{run_tradeoff_mdl, tradeoff_params, RealizableConfig};
use ondemand_core::LinearClass;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const K8_TOTALS: [(usize, u64); 3] = [(1, 121_710_845), (2, 32_802_204), (3, 52_469_793)];

#[test]
fn k8_totals_are_frozen() {
    let d = default_dimension(16, 8, DEFAULT_DIM_FACTOR);
    assert_eq!(d, 67);
    let cfg = RealizableConfig::default();
    for (r, total) in K8_TOTALS {
        let p = tradeoff_params(8, r, 0.1, 0.1, d, &cfg).unwrap();
        assert_eq!(p.samples_total(), total, "r = {r}");
        assert_eq!(total, r as u64 * (p.m + 8 * p.n));
    }
}

#[test]
fn k8_totals_independent_of_c_m_ordering() {
    // The r = 2 versus r = 3 ordering is set by p, not by the ERM constant.
    let d = default_dimension(16, 8, DEFAULT_DIM_FACTOR);
    for c_m in [0.5, 1.0, 4.0, 16.0] {
        let cfg = RealizableConfig {
            c_m,
            ..RealizableConfig::default()
        };
        let t: Vec<u64> = (1..=3)
            .map(|r| tradeoff_params(8, r, 0.1, 0.1, d, &cfg).unwrap().samples_total())
            .collect();
        assert!(t[1] < t[0]);
        assert!(t[2] > t[1], "c_m = {c_m}: {t:?}");
    }
}

#[test]
fn planted_run_charges_exact_total() {
    let spec = build_difficulty_spec(8, 3, 16).unwrap();
    let d = default_dimension(16, 8, DEFAULT_DIM_FACTOR);
    let class = LinearClass::new(d);
    let cfg = RealizableConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let inst = gen_planted_mdl(d, &spec, &mut rng).unwrap();
    for (r, total) in K8_TOTALS {
        let p = tradeoff_params(8, r, 0.1, 0.1, d, &cfg).unwrap();
        let mut env = inst.environment();
        let (ensemble, rep) = run_tradeoff_mdl(&mut env, &class, &p, &cfg, &mut rng).unwrap();
        assert_eq!(ensemble.len(), r);
        assert_eq!(rep.samples_total, total);
        assert_eq!(rep.samples_per_dist.iter().sum::<u64>(), total);
        assert_eq!(rep.rounds_used, r as u64);
        assert!(rep.success, "r = {r}: max error {}", rep.max_pop_error);
    }
}
