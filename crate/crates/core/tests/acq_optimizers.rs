use mixbo::acq_opt::{
    hill_climb, optimize_ga_traced, optimize_is_hc_gd, optimize_is_mab_gd, optimize_is_mab_gd_with_stats,
    optimize_sa_traced, AcqOptConfig, GaConfig, IsConfig, MabConfig, Region, SaConfig, ACQ_OPT_IDS,
};
use mixbo::space::{hamming, SearchSpace, UnitPoint, VariableSpec};
use mixbo::trust_region::tr_init;
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cat_space(d: usize, k: usize) -> SearchSpace {
    SearchSpace::new(
        (0..d)
            .map(|i| VariableSpec::categorical(format!("x{i}"), (0..k).map(|c| format!("c{c}"))))
            .collect(),
    )
    .unwrap()
}

fn mixed_space() -> SearchSpace {
    SearchSpace::new(vec![
        VariableSpec::categorical("x0", ["c0", "c1", "c2"]),
        VariableSpec::categorical("x1", ["c0", "c1", "c2", "c3"]),
        VariableSpec::categorical("x2", ["c0", "c1"]),
        VariableSpec::continuous("r", 0.0, 1.0),
        VariableSpec::continuous("s", -1.0, 1.0),
    ])
    .unwrap()
}

fn ids_for(space: &SearchSpace) -> Vec<&'static str> {
    ACQ_OPT_IDS
        .iter()
        .copied()
        .filter(|id| *id != "ls" || space.is_categorical_only())
        .collect()
}

#[test]
fn indicator_seeded_at_its_peak_is_returned() {
    let space = cat_space(4, 3);
    let peak = UnitPoint::new(vec![], vec![2, 0, 1, 2]);
    let p = peak.clone();
    let acq = move |u: &UnitPoint| if u.cat == p.cat { 1.0 } else { 0.0 };
    for id in ids_for(&space) {
        let opt = AcqOptConfig::from_id(id, None).unwrap();
        for seed in 0..3 {
            let r = opt.optimize(&acq, &space, None, &[peak.clone()], seed).unwrap();
            assert_eq!(r.point, peak, "{id}");
            assert_eq!(r.value, 1.0);
        }
    }
}

#[test]
fn every_optimizer_is_deterministic() {
    let space = mixed_space();
    let acq = |u: &UnitPoint| -(u.num[0] - 0.3).powi(2) + u.cat[1] as f64 * 0.1 - u.cat[0] as f64 * 0.05;
    for id in ids_for(&space) {
        let opt = AcqOptConfig::from_id(id, None).unwrap();
        let a = opt.optimize(&acq, &space, None, &[], 17).unwrap();
        let b = opt.optimize(&acq, &space, None, &[], 17).unwrap();
        assert_eq!(a, b, "{id}");
    }
    let ls = AcqOptConfig::from_id("ls", None).unwrap();
    assert!(ls.check_space(&space).is_err());
}

#[test]
fn annealing_without_temperature_never_worsens() {
    let space = cat_space(6, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let scores: Vec<Vec<f64>> = (0..6).map(|_| (0..4).map(|_| rng.random::<f64>()).collect()).collect();
    let acq = |u: &UnitPoint| u.cat.iter().enumerate().map(|(p, c)| scores[p][*c]).sum::<f64>();
    let config = SaConfig {
        init_temp: 0.0,
        cooling: 0.0,
        ..SaConfig::default()
    };
    for seed in 0..5 {
        let (_, traces) = optimize_sa_traced(&acq, Region::new(&space, None), &[], &config, seed).unwrap();
        for t in traces {
            assert!(t.windows(2).all(|w| w[1] >= w[0]), "{t:?}");
        }
    }
}

#[test]
fn annealing_on_a_flat_acquisition_stays_in_the_region() {
    let space = cat_space(5, 3);
    let mut tr = tr_init(&space);
    let center = UnitPoint::new(vec![], vec![1, 1, 1, 1, 1]);
    tr.set_center(center.clone(), Some(0.0));
    tr.l_h = 2;
    let (r, _) = optimize_sa_traced(&|_: &UnitPoint| 0.0, Region::new(&space, Some(&tr)), &[], &SaConfig::default(), 3).unwrap();
    assert!(hamming(&r.point.cat, &center.cat) <= 2);
}

#[test]
fn genetic_best_fitness_never_drops() {
    let space = mixed_space();
    let acq = |u: &UnitPoint| (u.num[1] * 6.0).sin() + u.cat.iter().sum::<usize>() as f64 * 0.2;
    let config = GaConfig {
        num_iter: 60,
        ..GaConfig::default()
    };
    let (r, trace) = optimize_ga_traced(&acq, Region::new(&space, None), &[], &config, 5).unwrap();
    assert!(trace.windows(2).all(|w| w[1] >= w[0]));
    assert_eq!(*trace.last().unwrap(), r.value);
}

#[test]
fn interleaved_search_finds_an_interior_quadratic_optimum() {
    let space = SearchSpace::new(vec![
        VariableSpec::continuous("a", 0.0, 1.0),
        VariableSpec::continuous("b", 0.0, 1.0),
    ])
    .unwrap();
    let acq = |u: &UnitPoint| -(u.num[0] - 0.3).powi(2) - (u.num[1] - 0.65).powi(2);
    let config = IsConfig {
        num_lr: 0.02,
        ..IsConfig::default()
    };
    let r = optimize_is_hc_gd(&acq, Region::new(&space, None), &[], &config, 2).unwrap();
    assert!((r.point.num[0] - 0.3).abs() < 1e-2 && (r.point.num[1] - 0.65).abs() < 1e-2, "{:?}", r.point);
}

#[test]
fn interleaved_search_on_categories_is_hill_climbing() {
    let space = cat_space(5, 4);
    let acq = |u: &UnitPoint| u.cat.iter().enumerate().map(|(i, c)| ((i * 7 + c * 3) % 5) as f64).sum::<f64>();
    let config = IsConfig::default();
    for seed in 0..4 {
        let a = optimize_is_hc_gd(&acq, Region::new(&space, None), &[], &config, seed).unwrap();
        let b = hill_climb(&acq, Region::new(&space, None), &[], &config, seed).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn zero_nominal_radius_freezes_categories() {
    let space = mixed_space();
    let mut tr = tr_init(&space);
    let center = UnitPoint::new(vec![0.5, 0.5], vec![2, 1, 0]);
    tr.set_center(center.clone(), Some(1.0));
    tr.l_h = 0;
    let acq = |u: &UnitPoint| u.cat.iter().sum::<usize>() as f64 + u.num[0];
    for id in ["is", "sa", "ga", "mab_gd"] {
        let opt = AcqOptConfig::from_id(id, None).unwrap();
        let r = opt.optimize(&acq, &space, Some(&tr), &[center.clone()], 0).unwrap();
        assert_eq!(r.point.cat, center.cat, "{id}");
        assert!(tr.contains(&r.point), "{id}");
    }
}

#[test]
fn bandit_pulls_the_rewarding_arm_most() {
    let space = cat_space(1, 5);
    let acq = |u: &UnitPoint| if u.cat[0] == 3 { 1.0 } else { 0.0 };
    let mut freqs = Vec::new();
    for seed in 0..20 {
        let (r, stats) = optimize_is_mab_gd_with_stats(&acq, Region::new(&space, None), &[], &MabConfig::default(), seed).unwrap();
        assert_eq!(r.point.cat, vec![3]);
        let pulls = &stats.pulls[0];
        freqs.push(pulls[3] as f64 / pulls.iter().sum::<usize>() as f64);
    }
    let mean = freqs.iter().sum::<f64>() / freqs.len() as f64;
    assert!(mean > 0.5, "mean pull frequency {mean} ({freqs:?})");
    assert!(freqs.iter().all(|f| *f > 0.5), "{freqs:?}");
}

#[test]
fn bandit_on_a_numeric_space_only_ascends() {
    let space = SearchSpace::new(vec![VariableSpec::continuous("a", 0.0, 1.0)]).unwrap();
    let acq = |u: &UnitPoint| -(u.num[0] - 0.42).powi(2);
    let start = UnitPoint::new(vec![0.9], vec![]);
    let r = optimize_is_mab_gd(&acq, Region::new(&space, None), &[start.clone()], &MabConfig::default(), 1).unwrap();
    assert!(r.value >= acq(&start));
    assert!((r.point.num[0] - 0.42).abs() < 1e-2);
}

fn random_tr(space: &SearchSpace, seed: u64) -> mixbo::trust_region::TrustRegionState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tr = tr_init(space);
    let c = space.transform(&space.sample_uniform(1, seed).unwrap()[0]).unwrap();
    tr.set_center(c, Some(0.0));
    tr.l_h = rng.random_range(0..=space.n_categorical());
    for l in tr.l_n.iter_mut() {
        *l = rng.random_range(0.05..1.0);
    }
    tr
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn results_are_feasible_and_no_worse_than_the_seed(seed in 0u64..1_000, which in 0usize..4) {
        let space = mixed_space().with_constraint_id("neq:x0=c1").unwrap();
        let tr = random_tr(&space, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let w: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
        let acq = |u: &UnitPoint| {
            u.cat.iter().enumerate().map(|(i, c)| w[i * 3 + c.min(&2)]).sum::<f64>()
                + w[9] * u.num[0] + w[10] * (u.num[1] * 4.0).sin()
        };
        let id = ["is", "sa", "ga", "mab_gd"][which];
        let cfg = match id {
            "ga" => AcqOptConfig::from_id(id, Some(&serde_json::json!({"num_iter": 40}))).unwrap(),
            "mab_gd" => AcqOptConfig::from_id(id, Some(&serde_json::json!({"max_n_iter": 20, "n_cand": 200, "cont_iters": 10}))).unwrap(),
            _ => AcqOptConfig::from_id(id, None).unwrap(),
        };
        let mut center = tr.center.clone().unwrap();
        center.cat[0] = if center.cat[0] == 1 { 0 } else { center.cat[0] };
        let seeds: Vec<UnitPoint> = [center].into_iter().filter(|c| tr.contains(c)).collect();
        let r = cfg.optimize(&acq, &space, Some(&tr), &seeds, seed).unwrap();
        let p = space.inverse_transform(&r.point).unwrap();
        prop_assert!(space.validate_point(&p).is_ok());
        prop_assert!(space.check_constraints(&p));
        prop_assert!(tr.contains(&r.point), "{id}: {:?} outside", r.point);
        prop_assert!((r.value - acq(&r.point)).abs() < 1e-12);
        for s in &seeds {
            prop_assert!(r.value >= acq(s) - 1e-12, "{id} degraded the seed");
        }
    }
}
