use mixbo::space::{SearchSpace, UnitPoint, Value, VariableSpec};
use proptest::prelude::*;

fn space() -> SearchSpace {
    SearchSpace::new(vec![
        VariableSpec::continuous("c", -32.768, 32.768),
        VariableSpec::integer("i", 1, 10),
        VariableSpec::categorical("h", ["A", "B", "C", "D"]),
        VariableSpec::integer("j", -5, 5),
    ])
    .unwrap()
}

#[test]
fn json_space_round_trip_keeps_constraints() {
    let s = space().with_constraint_id("neq:h=B").unwrap();
    let back = SearchSpace::from_json(&s.to_json()).unwrap();
    assert_eq!(back.dim(), 4);
    for p in back.sample_uniform(200, 1).unwrap() {
        assert_ne!(p.0[2], Value::Cat(1));
    }
}

proptest! {
    #[test]
    fn transform_round_trips(seed in 0u64..100_000) {
        let s = space();
        let p = s.sample_uniform(1, seed).unwrap().remove(0);
        let u = s.transform(&p).unwrap();
        prop_assert!(u.num.iter().all(|v| (0.0..=1.0).contains(v)));
        let back = s.inverse_transform(&u).unwrap();
        match (p.0[0], back.0[0]) {
            (Value::Real(a), Value::Real(b)) => prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0)),
            _ => prop_assert!(false),
        }
        prop_assert_eq!(&p.0[1..], &back.0[1..]);
        let json = s.point_to_json(&p);
        prop_assert_eq!(s.point_from_json(&json).unwrap(), p);
    }

    #[test]
    fn inverse_transform_always_lands_in_bounds(a in 0.0f64..=1.0, b in 0.0f64..=1.0, c in 0.0f64..=1.0, h in 0usize..4) {
        let s = space();
        let p = s.inverse_transform(&UnitPoint::new(vec![a, b, c], vec![h])).unwrap();
        prop_assert!(s.validate_point(&p).is_ok());
    }
}
