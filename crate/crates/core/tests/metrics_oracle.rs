mod support;

use std::collections::BTreeSet;

use mulr::eval::{entity_macro_f1, micro_f1, strict_accuracy, type_f1};
use proptest::prelude::*;
use support::*;

#[test]
fn hand_fixture() {
    for (name, got, want) in metric_fixture_values() {
        assert!((got - want).abs() < 1e-12, "{name}: {got} vs {want}");
    }
}

#[test]
fn hand_fixture_per_type() {
    let (p, g) = metric_fixture();
    for (t, want) in [("a", 8.0 / 9.0), ("b", 2.0 / 3.0), ("c", 1.0 / 3.0), ("d", 4.0 / 5.0)] {
        let got = type_f1(&p, &g, t).unwrap().unwrap();
        assert!((got - want).abs() < 1e-12, "{t}: {got}");
    }
    assert_eq!(type_f1(&p, &g, "e").unwrap(), None);
}

#[test]
fn accuracy_never_exceeds_entity_macro() {
    assert_eq!(accuracy_below_entity_macro(1000, 11), 0);
}

fn labels() -> impl Strategy<Value = Vec<(BTreeSet<String>, BTreeSet<String>)>> {
    let set = proptest::collection::btree_set(prop_oneof!["a", "b", "c", "d"].prop_map(String::from), 0..4);
    proptest::collection::vec((set.clone(), set), 1..20)
}

proptest! {
    #[test]
    fn scores_in_unit_interval_and_perfect_is_one(rows in labels()) {
        let preds: Vec<_> = rows.iter().enumerate().map(|(i, r)| (format!("e{i}"), r.0.clone())).collect();
        let golds: Vec<_> = rows.iter().enumerate().map(|(i, r)| (format!("e{i}"), r.1.clone())).collect();
        for v in [strict_accuracy(&preds, &golds).unwrap(), micro_f1(&preds, &golds).unwrap(), entity_macro_f1(&preds, &golds).unwrap()] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert_eq!(strict_accuracy(&golds, &golds).unwrap(), 1.0);
        prop_assert_eq!(entity_macro_f1(&golds, &golds).unwrap(), 1.0);
        prop_assert_eq!(micro_f1(&golds, &golds).unwrap(), 1.0);
    }
}
