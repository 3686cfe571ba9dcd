use mrp_core::cp::{parse_cp, Definitions};
use mrp_core::ftpl::parse_ftpl;
use mrp_core::generate::{self, rng, Head, HEADS};
use mrp_core::json::{parse_config, parse_ops, serialize_config, serialize_ops};
use mrp_core::model::Value;
use mrp_core::ops::{apply_primitive, NamedOp, OpTable, PrimitiveOp, ValueExpr};
use proptest::prelude::*;

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig::with_cases(n)
}

proptest! {
    #![proptest_config(cases(1000))]

    #[test]
    fn primitives_are_total_and_preserve_validity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let c = generate::config(&mut r, 8);
        prop_assert!(c.is_valid());
        let op = generate::primitive(&mut r, false);
        let next = apply_primitive(&c, &op);
        prop_assert!(next.is_valid(), "{} broke validity: {:?}", op, next.validate());
    }

    #[test]
    fn named_ops_preserve_validity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let c = generate::config(&mut r, 8);
        for op in generate::named_ops(&mut r, 3, false) {
            prop_assert!(op.apply(&c).is_valid(), "{:?}", op);
        }
    }

    #[test]
    fn idempotent_primitives(seed in any::<u64>()) {
        let mut r = rng(seed);
        let c = generate::config(&mut r, 8);
        let op = generate::primitive(&mut r, true);
        let additive = matches!(op, PrimitiveOp::SetParam { expr: ValueExpr::Add(_), .. });
        prop_assert!(!additive);
        let once = apply_primitive(&c, &op);
        prop_assert_eq!(apply_primitive(&once, &op), once, "{}", op);
    }

    #[test]
    fn additive_update_is_not_idempotent(seed in any::<u64>(), delta in prop_oneof![-5i64..=-1, 1i64..=5]) {
        let mut r = rng(seed);
        let c = generate::config(&mut r, 8);
        let Some(target) = c.components.values().find(|k| k.parameters.contains_key("p")) else {
            return Ok(());
        };
        let op = PrimitiveOp::SetParam { component: target.name.clone(), param: "p".into(), expr: ValueExpr::Add(delta) };
        let once = apply_primitive(&c, &op);
        let twice = apply_primitive(&once, &op);
        prop_assert_ne!(&once, &c);
        prop_assert_ne!(&twice, &once);
        let base = match c.components[&target.name].parameters["p"].value { Value::Int(v) => v, _ => unreachable!() };
        prop_assert_eq!(&twice.components[&target.name].parameters["p"].value, &Value::Int(base + 2 * delta));
    }

    #[test]
    fn run_is_identity(seed in any::<u64>()) {
        let c = generate::config(&mut rng(seed), 8);
        prop_assert_eq!(&apply_primitive(&c, &PrimitiveOp::Run), &c);
        prop_assert_eq!(&OpTable::new().apply(&c, "run"), &c);
    }

    #[test]
    fn named_op_is_a_fold_of_its_steps(seed in any::<u64>()) {
        let mut r = rng(seed);
        let c = generate::config(&mut r, 8);
        let steps: Vec<PrimitiveOp> = (0..4).map(|_| generate::primitive(&mut r, false)).collect();
        let folded = steps.iter().fold(c.clone(), |acc, s| apply_primitive(&acc, s));
        prop_assert_eq!(NamedOp { name: "f".into(), steps }.apply(&c), folded);
    }
}

proptest! {
    #![proptest_config(cases(300))]

    #[test]
    fn config_json_round_trips(seed in any::<u64>()) {
        let c = generate::config(&mut rng(seed), 8);
        prop_assert_eq!(parse_config(&serialize_config(&c)).unwrap(), c);
    }

    #[test]
    fn ops_json_round_trips(seed in any::<u64>()) {
        let table = OpTable::from_ops(generate::named_ops(&mut rng(seed), 4, false)).unwrap();
        prop_assert_eq!(parse_ops(&serialize_ops(&table)).unwrap(), table);
    }

    #[test]
    fn cp_display_round_trips(seed in any::<u64>()) {
        let f = generate::cp_any(&mut rng(seed), 4);
        let text = f.to_string();
        prop_assert_eq!(parse_cp(&text, &Definitions::new()).unwrap(), f, "{}", text);
    }

    #[test]
    fn ftpl_display_round_trips(seed in any::<u64>(), head in 0usize..4) {
        let names = generate::op_names(3);
        let ops = OpTable::from_ops(generate::named_ops(&mut rng(seed), 3, true)).unwrap();
        let f = generate::ftpl(&mut rng(seed), HEADS[head], &names, 3);
        let text = f.to_string();
        prop_assert_eq!(parse_ftpl(&text, &ops, &Definitions::new()).unwrap(), f, "{}", text);
    }

    #[test]
    fn generated_flat_formulas_are_flat(seed in any::<u64>()) {
        prop_assert!(generate::cp_flat(&mut rng(seed), 3).is_cp_flat());
        let f = generate::ftpl(&mut rng(seed), Head::After, &generate::op_names(2), 3);
        prop_assert!(f.is_cp_flat());
    }
}

#[test]
fn flatness_is_structural() {
    let d = Definitions::new();
    let flat = [
        "true",
        "component(A) and binding(A.o, B.i)",
        "forall x in class(K) : (param(x.p) >= 1 and component(B))",
    ];
    let not_flat = [
        "component(A) or component(B)",
        "not component(A)",
        "exists x in components : (param(x.p) = 1)",
        "forall x in components : (component(A) or param(x.p) = 1)",
        "component(A) and not false",
    ];
    for t in flat {
        assert!(parse_cp(t, &d).unwrap().is_cp_flat(), "{t}");
    }
    for t in not_flat {
        assert!(!parse_cp(t, &d).unwrap().is_cp_flat(), "{t}");
    }
}
