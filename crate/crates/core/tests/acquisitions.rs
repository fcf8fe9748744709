use mixbo::acquisitions::{acq_evaluate, ei, lcb, normal_cdf, pi, ucb, AcquisitionKind, AcquisitionSpec};
use mixbo::space::{SearchSpace, UnitPoint, VariableSpec};
use mixbo::surrogates::{hs_fit, Dataset, HorseshoeOptions, Surrogate};
use proptest::prelude::*;

#[test]
fn lcb_exploration_term_scales_with_root_beta() {
    let base = lcb(1.0, 0.5, 2.0).unwrap() + 1.0;
    let doubled = lcb(1.0, 0.5, 4.0).unwrap() + 1.0;
    assert!((doubled / base - 2f64.sqrt()).abs() < 1e-12);
    assert_eq!(ucb(1.0, 1.0, 4.0).unwrap(), 3.0);
    assert!(lcb(0.0, 1.0, 0.0).is_err());
    assert!(ei(0.0, -1.0, 0.0).is_err());
    assert!(pi(f64::NAN, 1.0, 0.0).is_err());
}

#[test]
fn gaussian_cdf_reference_values() {
    assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
    assert!((normal_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-12);
    assert!((normal_cdf(-3.0) - 0.001_349_898_031_630_094_5).abs() < 1e-15);
}

#[test]
fn acquisition_ids_round_trip() {
    for id in ["ei", "pi", "ts", "lcb", "lcb:beta=2", "ucb:beta=9"] {
        let k = AcquisitionKind::parse(id).unwrap();
        assert_eq!(AcquisitionKind::parse(&k.id()).unwrap(), k);
    }
    assert!(AcquisitionKind::parse("ei:beta=2").is_err());
    assert!(AcquisitionKind::parse("lcb:beta=-1").is_err());
    assert!(AcquisitionKind::parse("kg").is_err());
    assert!(AcquisitionKind::Ts.requires_horseshoe());
}

#[test]
fn thompson_sampling_negates_the_sampled_objective() {
    let space = SearchSpace::new(vec![
        VariableSpec::categorical("a", ["x", "y", "z"]),
        VariableSpec::categorical("b", ["x", "y"]),
    ])
    .unwrap();
    let xs: Vec<UnitPoint> = (0..6).map(|i| UnitPoint::new(vec![], vec![i % 3, i % 2])).collect();
    let ys = vec![1.0, 0.2, 3.0, 1.5, 0.7, 2.2];
    let model = hs_fit(&space, &Dataset::new(xs.clone(), ys).unwrap(), &HorseshoeOptions::default(), 4).unwrap();
    let coef = model.sample_objective(9).unwrap();
    let hs = Surrogate::Horseshoe(model.clone());
    for u in &xs {
        let v = acq_evaluate(&hs, AcquisitionSpec::Ts { seed: 9 }, u).unwrap();
        assert_eq!(v, -model.evaluate(&coef, u));
    }
}

proptest! {
    #[test]
    fn ei_is_nonnegative_and_monotone_in_sigma(mu in -5.0f64..5.0, y in -5.0f64..5.0, s in 0.0f64..4.0, ds in 0.0f64..2.0) {
        let a = ei(mu, s, y).unwrap();
        let b = ei(mu, s + ds, y).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!(b >= a - 1e-12);
        prop_assert!(a >= (y - mu).max(0.0) - 1e-12);
    }

    #[test]
    fn pi_is_a_probability(mu in -5.0f64..5.0, y in -5.0f64..5.0, s in 0.0f64..4.0) {
        let p = pi(mu, s, y).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
    }
}
