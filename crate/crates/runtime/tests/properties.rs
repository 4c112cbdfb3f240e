use emrkit_core::parse_emr;
use emrkit_runtime::*;
use emrkit_sut::{Action, ActionSequence, Fault, MockShop};
use emrkit_testkit::actions::{sequence, shop_input, transform};
use proptest::prelude::*;

fn same_action(a: &Action, b: &Action) -> bool {
    a.kind == b.kind && a.parameters == b.parameters
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn followups_copy_and_edit_only_their_target(
        (source, t) in sequence().prop_flat_map(|s| { let n = s.len(); (Just(s), transform(n)) })
    ) {
        let before = source.clone();
        let mut out = create_followup(&source, &t).unwrap();
        prop_assert_eq!(&source, &before);
        for (i, a) in out.actions.iter().enumerate() {
            prop_assert_eq!(a.position, i);
        }
        let n = source.len();
        let untouched: Vec<(usize, usize)> = match &t {
            Transform::Identity => (0..n).map(|i| (i, i)).collect(),
            Transform::SetParameter { position, .. }
            | Transform::RemoveParameter { position, .. }
            | Transform::ReplaceAction { position, .. } => {
                (0..n).filter(|i| i != position).map(|i| (i, i)).collect()
            }
            Transform::InsertAction { position, .. } => {
                (0..n).map(|i| (i, if i < *position { i } else { i + 1 })).collect()
            }
            Transform::RemoveAction { position } => {
                (0..n).filter(|i| i != position).map(|i| (i, if i < *position { i } else { i - 1 })).collect()
            }
        };
        for (s, o) in untouched {
            prop_assert!(same_action(&source.actions[s], &out.actions[o]), "{} vs {}", s, o);
        }
        for a in &mut out.actions {
            a.kind.push('!');
            a.parameters.clear();
        }
        prop_assert_eq!(&source, &before);
    }

    /// With flags `a[i]` and outcomes `c[i]`, one IMPLIES per binding:
    /// Fail iff some a && !c, Pass iff no failure and some a, else Inapplicable.
    #[test]
    fn quantification_is_universal(rows in prop::collection::vec((any::<bool>(), any::<bool>()), 0..8)) {
        let n = rows.len() as i64;
        let flags: Vec<bool> = rows.iter().map(|r| r.0).collect();
        let outcomes: Vec<bool> = rows.iter().map(|r| r.1).collect();
        let stubs = StubBindings::new()
            .bind("rows", move |_| Ok(Value::List((0..n).map(Value::Int).collect())))
            .bind("flag", move |a| pick(&flags, a))
            .bind("outcome", move |a| pick(&outcomes, a));
        let ast = parse_emr("MR {{ for (var i : rows()) { IMPLIES(flag(i), outcome(i)); } }}").unwrap();
        let input = ActionSequence::new(1, vec![]);
        let v = evaluate_emr(&ast, &input, &MockShop::new(), &stubs).unwrap();
        let fails = rows.iter().filter(|(a, c)| *a && !*c).count();
        let expected = if fails > 0 {
            VerdictValue::Fail
        } else if rows.iter().any(|r| r.0) {
            VerdictValue::Pass
        } else {
            VerdictValue::Inapplicable
        };
        prop_assert_eq!(v.value, expected);
        prop_assert_eq!(v.failures, fails);
        prop_assert_eq!(v.failing_bindings.len(), fails);
        if v.value == VerdictValue::Inapplicable {
            prop_assert_eq!(v.antecedents_held, 0);
        }
    }

    #[test]
    fn all_false_antecedents_are_vacuous(n in 0usize..10, consequent in any::<bool>()) {
        let src = format!(
            "MR {{{{ for (var a : Input(1).actions()) {{ IMPLIES(a.getKind().equals(\"never\"), {consequent}); }} }}}}"
        );
        let input = ActionSequence::new(1, vec![Action::new("view_cart"); n]);
        let v = evaluate_emr(&parse_emr(&src).unwrap(), &input, &MockShop::new(), &StubBindings::new()).unwrap();
        prop_assert_eq!(v.value, VerdictValue::Inapplicable);
    }

    #[test]
    fn created_inputs_equal_their_origin(source in sequence()) {
        let src = "MR {{
            IMPLIES(CREATE(Input(2), Input(1)), Input(2).actions().equals(Input(1).actions()));
        }}";
        let v = evaluate_emr(&parse_emr(src).unwrap(), &source, &MockShop::new(), &StubBindings::new()).unwrap();
        prop_assert_eq!(v.value, VerdictValue::Pass);
    }
}

fn pick(values: &[bool], args: &[Value]) -> Result<Value, String> {
    match args {
        [Value::Int(i)] => Ok(Value::Bool(values[*i as usize])),
        _ => Err("expects one index".into()),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn evaluation_is_deterministic(input in shop_input(), fault in prop::option::of(prop_oneof![
        Just(Fault::IgnoreFilter), Just(Fault::OffByOne), Just(Fault::StaleResults)
    ])) {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/emrs");
        let mut paths: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        paths.sort();
        let stubs = shop_stubs();
        for p in paths {
            let ast = parse_emr(&std::fs::read_to_string(&p).unwrap()).unwrap();
            let a = evaluate_emr(&ast, &input, &MockShop::with_faults(fault), &stubs).unwrap();
            let b = evaluate_emr(&ast, &input, &MockShop::with_faults(fault), &stubs).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
