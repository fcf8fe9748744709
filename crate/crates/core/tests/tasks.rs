use mixbo::space::{Point, Value};
use mixbo::tasks::{make_ackley20, make_pest_control, pest_constants, task_from_id, Task};
use proptest::prelude::*;

const GOLDEN: &str = include_str!("golden/pest_control.json");

fn constant(k: usize) -> Point {
    Point(vec![Value::Cat(k); 25])
}

#[test]
fn pest_control_matches_the_golden_file() {
    let golden: serde_json::Value = serde_json::from_str(GOLDEN).unwrap();
    assert_eq!(golden["constants_version"], pest_constants().version);
    let task = make_pest_control();
    assert_eq!(task.evaluate(&constant(0)), golden["all_no_pesticide"].as_f64().unwrap());
    for k in 1..5 {
        assert_eq!(task.evaluate(&constant(k)), golden["all_pesticide"][k - 1].as_f64().unwrap(), "pesticide {k}");
    }
    let cyclic = Point((0..25).map(|i| Value::Cat((i * 7 + 3) % 5)).collect());
    assert_eq!(task.evaluate(&cyclic), golden["cyclic_7i_plus_3"].as_f64().unwrap());
}

#[test]
fn pest_value_is_cost_plus_infection() {
    let task = make_pest_control();
    for seed in 0..10 {
        let p = task.search_space().sample_uniform(1, seed).unwrap().remove(0);
        let (cost, infection) = task.evaluate_components(&p);
        assert_eq!(task.evaluate(&p), cost + infection);
        assert!(cost >= 0.0 && infection >= 0.0);
    }
}

#[test]
fn ackley20_first_category_matches_the_formula() {
    let task = make_ackley20();
    let x = -32.768f64;
    let oracle = -20.0 * (-0.2 * (x * x).sqrt()).exp() - ((2.0 * std::f64::consts::PI * x).cos()).exp() + 20.0 + std::f64::consts::E;
    let v = task.evaluate(&Point(vec![Value::Cat(0); 20]));
    assert!((v - oracle).abs() < 1e-12, "{v} vs {oracle}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn evaluations_are_bit_identical(seed in 0u64..10_000, which in 0usize..4) {
        let id = ["pest", "ackley53", "sfu:rosenbrock:d=3:cat=4:num=2:int=1", "sfu:griewank:d=6:cat=7"][which];
        let task = task_from_id(id).unwrap();
        let p = task.search_space().sample_uniform(1, seed).unwrap().remove(0);
        let first = task.evaluate(&p).to_bits();
        for _ in 0..9 {
            prop_assert_eq!(task.evaluate(&p).to_bits(), first);
        }
        if let Some(opt) = task.known_optimum() {
            prop_assert!(task.evaluate(&p) >= opt - 1e-12);
        }
    }
}
