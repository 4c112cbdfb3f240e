//! Generators for action sequences and follow-up transforms.

use emrkit_runtime::Transform;
use emrkit_sut::{Action, ActionSequence};
use proptest::prelude::*;
use serde_json::json;

pub fn action() -> impl Strategy<Value = Action> {
    let kind = prop_oneof![Just("search"), Just("login"), Just("view_item"), Just("view_cart")];
    let params = prop::collection::btree_map(
        prop_oneof![Just("query"), Just("category"), Just("page"), Just("user")].prop_map(String::from),
        prop_oneof![
            "[a-z]{0,6}".prop_map(|s| json!(s)),
            (0i64..30).prop_map(|n| json!(n)),
            any::<bool>().prop_map(|b| json!(b)),
        ],
        0..3,
    );
    (kind, params).prop_map(|(k, p)| {
        let mut a = Action::new(k);
        a.parameters = p;
        a
    })
}

pub fn sequence() -> impl Strategy<Value = ActionSequence> {
    prop::collection::vec(action(), 1..6).prop_map(|a| ActionSequence::new(1, a))
}

pub fn transform(len: usize) -> impl Strategy<Value = Transform> {
    let pos = 0..len;
    prop_oneof![
        Just(Transform::Identity),
        (pos.clone(), "[a-z]{1,5}", 0i64..9).prop_map(|(position, name, v)| Transform::SetParameter {
            position,
            name,
            value: json!(v),
        }),
        (pos.clone(), prop_oneof![Just("query"), Just("page")]).prop_map(|(position, n)| {
            Transform::RemoveParameter {
                position,
                name: n.into(),
            }
        }),
        (0..=len, action()).prop_map(|(position, action)| Transform::InsertAction { position, action }),
        pos.clone().prop_map(|position| Transform::RemoveAction { position }),
        (pos, action()).prop_map(|(position, action)| Transform::ReplaceAction { position, action }),
    ]
}

pub fn shop_input() -> impl Strategy<Value = ActionSequence> {
    let words = prop_oneof![Just("chair"), Just("desk"), Just("lamp"), Just(""), Just("garden"), Just("x")];
    let act = prop_oneof![
        4 => (words, prop::option::of(prop_oneof![Just("office"), Just("outdoor")])).prop_map(|(w, c)| {
            let a = Action::new("search").with("query", w);
            match c { Some(c) => a.with("category", c), None => a }
        }),
        1 => Just(Action::new("login").with("user", "carol")),
        1 => (1i64..13).prop_map(|id| Action::new("view_item").with("item_id", id)),
    ];
    prop::collection::vec(act, 1..4).prop_map(|a| ActionSequence::new(1, a))
}
