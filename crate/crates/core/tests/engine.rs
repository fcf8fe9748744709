use std::collections::HashSet;

use mixbo::engine::{bo_build, BoConfig, Optimizer, OptimizerSpec};
use mixbo::space::{hamming, Point, SearchSpace, VariableSpec};
use mixbo::tasks::{task_from_id, Task};
use mixbo::Error;
use serde_json::json;

fn fast() -> serde_json::Value {
    json!({
        "gp": {"epochs": 20},
        "acq_opt": {"n_restarts": 1, "n_iter": 30}
    })
}

fn run(opt: &mut dyn Optimizer, task: &dyn Task, budget: usize) -> Vec<(Point, f64)> {
    let mut out = Vec::new();
    for _ in 0..budget {
        let x = opt.suggest().unwrap();
        let y = task.evaluate(&x);
        opt.observe(&x, y).unwrap();
        out.push((x, y));
    }
    out
}

fn cat_task() -> Box<dyn Task> {
    task_from_id("sfu:ackley:d=5:cat=4").unwrap()
}

#[test]
fn init_phase_replays_the_shared_sample() {
    let task = cat_task();
    let space = task.search_space();
    let shared = space.sample_uniform(6, 11).unwrap();
    for spec in [
        OptimizerSpec::bo("gp_to", "ei", "is", "basic").with_overrides(fast()),
        OptimizerSpec::baseline("hc"),
        OptimizerSpec::baseline("ga"),
        OptimizerSpec::baseline("sa"),
        OptimizerSpec::baseline("mab"),
    ] {
        let mut opt = spec.build(space, 6, 11).unwrap();
        let xs: Vec<Point> = run(opt.as_mut(), task.as_ref(), 6).into_iter().map(|(x, _)| x).collect();
        assert_eq!(xs, shared, "{}", spec.name());
    }
}

#[test]
fn random_search_is_one_uniform_stream() {
    let task = cat_task();
    let mut opt = OptimizerSpec::baseline("rs").build(task.search_space(), 5, 3).unwrap();
    let xs: Vec<Point> = run(opt.as_mut(), task.as_ref(), 25).into_iter().map(|(x, _)| x).collect();
    assert_eq!(xs, task.search_space().sample_uniform(25, 3).unwrap());
}

#[test]
fn bo_runs_are_deterministic_and_track_the_best() {
    let task = task_from_id("sfu:rastrigin:d=2:cat=3:num=1").unwrap();
    let spec = OptimizerSpec::bo("gp_mix_to", "ei", "is", "basic").with_overrides(fast());
    let a = run(spec.build(task.search_space(), 5, 2).unwrap().as_mut(), task.as_ref(), 15);
    let mut opt = spec.build(task.search_space(), 5, 2).unwrap();
    let b = run(opt.as_mut(), task.as_ref(), 15);
    assert_eq!(a, b);
    let min = b.iter().map(|(_, y)| *y).fold(f64::INFINITY, f64::min);
    assert_eq!(opt.best().unwrap().1, min);
    assert_eq!(opt.n_observed(), 15);
    let d = opt.diagnostics().expect("model diagnostics after the init phase");
    assert!(d.get("nll").is_some());
}

#[test]
fn protocol_violations_are_errors() {
    let task = cat_task();
    let space = task.search_space();
    let mut opt = OptimizerSpec::bo("gp_o", "ei", "ls", "none").build(space, 3, 0).unwrap();
    let stranger = space.sample_uniform(1, 99).unwrap().remove(0);
    assert!(matches!(opt.observe(&stranger, 1.0), Err(Error::Protocol(_))));
    let x = opt.suggest().unwrap();
    assert!(matches!(opt.suggest(), Err(Error::Protocol(_))));
    assert!(opt.observe(&x, f64::NAN).is_err());
    if stranger != x {
        assert!(matches!(opt.observe(&stranger, 1.0), Err(Error::Protocol(_))));
    }
    opt.observe(&x, 1.0).unwrap();
    assert!(matches!(opt.observe(&x, 1.0), Err(Error::Protocol(_))));
}

#[test]
fn batches_are_distinct_and_leave_no_fantasies() {
    let task = cat_task();
    let space = task.search_space().clone();
    let config = BoConfig::new("gp_to", "ei", "is", "none")
        .with_n_init(5)
        .with_seed(4)
        .with_overrides(fast());
    let mut opt = bo_build(config, space).unwrap();
    run(&mut opt, task.as_ref(), 5);
    for _ in 0..3 {
        let batch = opt.suggest_batch(3).unwrap();
        let keys: HashSet<Vec<u64>> = batch.iter().map(|p| p.key()).collect();
        assert_eq!(keys.len(), 3);
        assert_eq!(opt.n_hallucinated(), 2);
        for x in &batch {
            opt.observe(x, task.evaluate(x)).unwrap();
        }
        assert_eq!(opt.n_hallucinated(), 0);
    }
    assert!(opt.suggest_batch(0).is_err());
}

#[test]
fn incompatible_configurations_are_rejected() {
    let cats = cat_task();
    let mixed = task_from_id("sfu:sphere:d=2:cat=3:num=2").unwrap();
    let build = |spec: OptimizerSpec, t: &dyn Task| spec.build(t.search_space(), 5, 0).map(|_| ());
    assert!(matches!(build(OptimizerSpec::bo("lr_sh", "ei", "ls", "none"), cats.as_ref()), Err(Error::Incompatible(_))));
    assert!(matches!(build(OptimizerSpec::bo("gp_to", "ts", "ls", "none"), cats.as_ref()), Err(Error::Incompatible(_))));
    assert!(matches!(build(OptimizerSpec::bo("gp_ssk", "ei", "ga", "none"), cats.as_ref()), Err(Error::Unsupported { .. })));
    assert!(build(OptimizerSpec::bo("gp_to", "ei", "is", "none"), mixed.as_ref()).is_err());
    assert!(build(OptimizerSpec::bo("gp_mix_to", "ei", "ls", "none"), mixed.as_ref()).is_err());
    assert!(build(OptimizerSpec::bo("gp_to", "ei", "is", "fancy"), cats.as_ref()).is_err());
    assert!(build(OptimizerSpec::baseline("mab"), mixed.as_ref()).is_err());
    assert!(build(OptimizerSpec::baseline("bogus"), cats.as_ref()).is_err());
    assert!(build(OptimizerSpec::bo("lr_sh", "ts", "ls", "basic"), cats.as_ref()).is_ok());
    assert!(build(OptimizerSpec::bo("gp_to", "ei", "is", "none").with_overrides(json!({"gp": {"nope": 1}})), cats.as_ref()).is_err());
}

#[test]
fn exhausted_space_falls_back_to_revisits() {
    let space = SearchSpace::new(vec![VariableSpec::categorical("c", ["a", "b", "c"])]).unwrap();
    let config = BoConfig::new("gp_o", "ei", "ls", "none").with_n_init(2).with_overrides(json!({"gp": {"epochs": 20}}));
    let mut opt = bo_build(config, space.clone()).unwrap();
    let mut seen = HashSet::new();
    for i in 0..8 {
        let x = opt.suggest().unwrap();
        assert!(space.validate_point(&x).is_ok());
        seen.insert(x.key());
        opt.observe(&x, i as f64 * 0.1).unwrap();
    }
    assert_eq!(seen.len(), 3);
}

#[test]
fn suggestions_respect_the_trust_region_they_were_made_in() {
    let task = task_from_id("sfu:ackley:d=8:cat=4").unwrap();
    let space = task.search_space().clone();
    let mut opt = OptimizerSpec::bo("gp_to", "ei", "ga", "basic")
        .with_overrides(json!({"gp": {"epochs": 20}, "acq_opt": {"num_iter": 30}, "tr": {"fail_tol": 3}}))
        .build(&space, 5, 8)
        .unwrap();
    let mut checked = 0;
    for _ in 0..40 {
        let before = opt.tr_state().cloned();
        let x = opt.suggest().unwrap();
        if let Some(tr) = before.filter(|t| t.center.is_some()) {
            let u = space.transform(&x).unwrap();
            assert!(tr.contains(&u), "suggestion outside the trust region");
            checked += 1;
        }
        opt.observe(&x, task.evaluate(&x)).unwrap();
    }
    assert!(checked >= 30);
    assert!(opt.tr_state().unwrap().restart_index > 0, "fail_tol 3 should force restarts");
}

#[test]
fn hill_climbing_moves_one_category_from_the_incumbent() {
    let task = cat_task();
    let mut opt = OptimizerSpec::baseline("hc").build(task.search_space(), 5, 1).unwrap();
    run(opt.as_mut(), task.as_ref(), 5);
    // Fewer steps than neighbors, so an unseen neighbor always exists.
    for _ in 0..10 {
        let (best, _) = opt.best().unwrap();
        let x = opt.suggest().unwrap();
        let (a, b) = (task.search_space().transform(&best).unwrap(), task.search_space().transform(&x).unwrap());
        assert_eq!(hamming(&a.cat, &b.cat), 1);
        opt.observe(&x, task.evaluate(&x)).unwrap();
    }
}

#[test]
fn baselines_are_deterministic_and_avoid_repeats() {
    let task = cat_task();
    for kind in ["ga", "sa", "mab", "hc"] {
        let spec = OptimizerSpec::baseline(kind);
        let a = run(spec.build(task.search_space(), 5, 6).unwrap().as_mut(), task.as_ref(), 40);
        let b = run(spec.build(task.search_space(), 5, 6).unwrap().as_mut(), task.as_ref(), 40);
        assert_eq!(a, b, "{kind}");
        let keys: HashSet<Vec<u64>> = a.iter().map(|(x, _)| x.key()).collect();
        assert!(keys.len() >= 38, "{kind}: {} distinct of 40", keys.len());
    }
}

#[test]
fn horseshoe_with_thompson_sampling_runs() {
    let task = cat_task();
    let mut opt = OptimizerSpec::bo("lr_sh", "ts", "ls", "none")
        .with_overrides(json!({"hs": {"burn_in": 20, "n_draws": 20}}))
        .build(task.search_space(), 4, 0)
        .unwrap();
    let trace = run(opt.as_mut(), task.as_ref(), 8);
    assert_eq!(trace.len(), 8);
}
