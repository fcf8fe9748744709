use mixbo::space::{SearchSpace, UnitPoint, VariableSpec};
use mixbo::trust_region::{tr_init, tr_recenter, tr_restart, tr_update, TrUpdate};
use proptest::prelude::*;

fn space(d_h: usize, d_n: usize) -> SearchSpace {
    let mut v: Vec<VariableSpec> = (0..d_h)
        .map(|i| VariableSpec::categorical(format!("h{i}"), ["a", "b", "c"]))
        .collect();
    v.extend((0..d_n).map(|i| VariableSpec::continuous(format!("n{i}"), 0.0, 1.0)));
    SearchSpace::new(v).unwrap()
}

#[test]
fn restart_uses_the_incumbent_model_once_two_are_recorded() {
    let s = space(4, 2);
    let mut tr = tr_init(&s);
    tr.set_center(UnitPoint::new(vec![0.2, 0.2], vec![0, 0, 0, 0]), Some(3.0));
    let first = tr_restart(&mut tr, &s, None, 1).unwrap();
    assert!(!first.used_model);
    assert_eq!(tr.center_value, None);
    assert_eq!(tr.restart_index, 1);

    tr.center_value = Some(1.0);
    let second = tr_restart(&mut tr, &s, None, 2).unwrap();
    assert!(second.used_model);
    assert_eq!(second.n_candidates, 600);
    assert_eq!(tr.restart_incumbents.len(), 2);
    let c = tr.center.clone().unwrap();
    assert!(s.inverse_transform(&c).is_ok());
    assert_eq!((tr.l_h, tr.l_n.clone()), (3, vec![0.8, 0.8]));
    assert_eq!((tr.succ_count, tr.fail_count), (0, 0));
}

#[test]
fn restart_is_deterministic() {
    let s = space(3, 1);
    let run = || {
        let mut tr = tr_init(&s);
        for (i, v) in [2.0, 1.0, 0.5].iter().enumerate() {
            tr.set_center(UnitPoint::new(vec![0.1 * i as f64], vec![i % 3, 0, 1]), Some(*v));
            tr_restart(&mut tr, &s, None, 7).unwrap();
        }
        tr
    };
    assert_eq!(run(), run());
}

#[test]
fn recenter_outside_the_region_is_rejected() {
    let s = space(3, 0);
    let mut tr = tr_init(&s);
    tr.set_center(UnitPoint::new(vec![], vec![0, 0, 0]), Some(1.0));
    tr.l_h = 1;
    assert!(tr_recenter(&mut tr, &UnitPoint::new(vec![], vec![1, 1, 0]), 0.0).is_err());
    assert!(tr_recenter(&mut tr, &UnitPoint::new(vec![], vec![1, 0, 0]), 0.5).unwrap());
}

#[test]
fn restart_fires_on_the_fortieth_failure_at_minimum_radius() {
    let s = space(0, 1);
    let mut tr = tr_init(&s);
    tr.l_n = vec![0.04];
    for _ in 0..39 {
        assert_eq!(tr_update(&mut tr, false), TrUpdate::Continue);
    }
    assert_eq!(tr_update(&mut tr, false), TrUpdate::Restart);
    assert_eq!(tr.l_n, vec![0.04]);
}

proptest! {
    #[test]
    fn radii_and_counters_stay_valid(d_h in 0usize..8, d_n in 0usize..3, seq in proptest::collection::vec(proptest::bool::weighted(0.2), 0..400)) {
        prop_assume!(d_h + d_n > 0);
        let s = space(d_h, d_n);
        let mut tr = tr_init(&s);
        for (i, improved) in seq.into_iter().enumerate() {
            if tr_update(&mut tr, improved) == TrUpdate::Restart {
                tr_restart(&mut tr, &s, None, i as u64).unwrap();
            }
            prop_assert!(d_h == 0 || (1..=d_h).contains(&tr.l_h));
            prop_assert!(tr.l_n.iter().all(|l| (1.0 / 32.0..=1.0).contains(l)));
            prop_assert!(tr.succ_count == 0 || tr.fail_count == 0);
        }
    }
}
