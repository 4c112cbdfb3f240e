//! Host functions for EMRs written against the mock shop, and the built-in
//! source inputs used to exercise them.

use emrkit_sut::mock::satisfies;
use emrkit_sut::{Action, ActionSequence, Output};
use serde_json::{json, Value as Json};

use crate::followup::{create_followup, Transform};
use crate::stubs::StubBindings;
use crate::suite::NamedInput;
use crate::value::Value;

/// Filter types in iteration order, with the search parameter and value
/// each one applies.
pub const FILTER_TYPES: [&str; 5] = ["category", "brand", "price", "rating", "availability"];

pub fn filter_parameter(filter_type: &str) -> Option<(&'static str, Json)> {
    Some(match filter_type {
        "category" => ("category", json!("office")),
        "brand" => ("brand", json!("Acme")),
        "price" => ("max_price", json!(150)),
        "rating" => ("min_rating", json!(4)),
        "availability" => ("in_stock", json!(true)),
        _ => return None,
    })
}

pub const PRICE_CAPS: [i64; 4] = [50, 100, 150, 200];

fn arity(name: &str, args: &[Value], n: usize) -> Result<(), String> {
    if args.len() == n {
        Ok(())
    } else {
        Err(format!("{name} expects {n} arguments, found {}", args.len()))
    }
}

fn wrong(name: &str, i: usize, want: &str, got: &Value) -> String {
    format!("{name} argument {} must be {want}, found {}", i + 1, got.type_name())
}

fn seq<'v>(name: &str, args: &'v [Value], i: usize) -> Result<&'v ActionSequence, String> {
    match &args[i] {
        Value::Seq(s) => Ok(s),
        v => Err(wrong(name, i, "an input sequence", v)),
    }
}

fn action<'v>(name: &str, args: &'v [Value], i: usize) -> Result<&'v Action, String> {
    match &args[i] {
        Value::Action(a) => Ok(a),
        v => Err(wrong(name, i, "an action", v)),
    }
}

fn output<'v>(name: &str, args: &'v [Value], i: usize) -> Result<&'v Output, String> {
    match &args[i] {
        Value::Output(o) => Ok(o),
        v => Err(wrong(name, i, "an output", v)),
    }
}

fn int(name: &str, args: &[Value], i: usize) -> Result<i64, String> {
    args[i].as_int().ok_or_else(|| wrong(name, i, "an integer", &args[i]))
}

fn string<'v>(name: &str, args: &'v [Value], i: usize) -> Result<&'v str, String> {
    args[i].as_str().ok_or_else(|| wrong(name, i, "a string", &args[i]))
}

fn position(name: &str, args: &[Value], i: usize) -> Result<usize, String> {
    usize::try_from(int(name, args, i)?).map_err(|_| format!("{name}: negative position"))
}

fn item<'v>(name: &str, args: &'v [Value], i: usize) -> Result<&'v serde_json::Map<String, Json>, String> {
    match &args[i] {
        Value::Json(Json::Object(m)) => Ok(m),
        v => Err(wrong(name, i, "a result item", v)),
    }
}

fn results(o: &Output) -> &[Json] {
    o.results().unwrap_or(&[])
}

fn edit(source: &ActionSequence, t: Transform) -> Result<Value, String> {
    create_followup(source, &t).map(Value::Seq).map_err(|e| e.to_string())
}

/// The mock shop host library.
pub fn shop_stubs() -> StubBindings {
    StubBindings::new()
        .bind("isSearchAction", |a| {
            arity("isSearchAction", a, 1)?;
            Ok(Value::Bool(action("isSearchAction", a, 0)?.kind == "search"))
        })
        .bind("getFilterTypes", |a| {
            arity("getFilterTypes", a, 0)?;
            Ok(Value::List(FILTER_TYPES.iter().map(|f| Value::from(*f)).collect()))
        })
        .bind("applyFilter", |a| {
            arity("applyFilter", a, 3)?;
            let ft = string("applyFilter", a, 2)?;
            let (name, value) = filter_parameter(ft).ok_or_else(|| format!("unknown filter type '{ft}'"))?;
            edit(
                seq("applyFilter", a, 0)?,
                Transform::SetParameter {
                    position: position("applyFilter", a, 1)?,
                    name: name.into(),
                    value,
                },
            )
        })
        .bind("notSameFilterApplied", |a| {
            arity("notSameFilterApplied", a, 2)?;
            let ft = string("notSameFilterApplied", a, 1)?;
            let (name, _) = filter_parameter(ft).ok_or_else(|| format!("unknown filter type '{ft}'"))?;
            Ok(Value::Bool(action("notSameFilterApplied", a, 0)?.param(name).is_none()))
        })
        .bind("fewerResults", |a| {
            arity("fewerResults", a, 2)?;
            let (f, o) = (output("fewerResults", a, 0)?, output("fewerResults", a, 1)?);
            Ok(Value::Bool(f.summary_size < o.summary_size))
        })
        .bind("moreRelevantResults", |a| {
            arity("moreRelevantResults", a, 3)?;
            output("moreRelevantResults", a, 1)?;
            let ft = string("moreRelevantResults", a, 2)?;
            let (name, value) = filter_parameter(ft).ok_or_else(|| format!("unknown filter type '{ft}'"))?;
            let f = output("moreRelevantResults", a, 0)?;
            Ok(Value::Bool(results(f).iter().all(|it| satisfies(it, name, &value))))
        })
        .bind("withParameter", |a| {
            arity("withParameter", a, 4)?;
            edit(
                seq("withParameter", a, 0)?,
                Transform::SetParameter {
                    position: position("withParameter", a, 1)?,
                    name: string("withParameter", a, 2)?.into(),
                    value: a[3].to_json(),
                },
            )
        })
        .bind("getPriceCaps", |a| {
            arity("getPriceCaps", a, 0)?;
            Ok(Value::List(PRICE_CAPS.iter().map(|c| Value::Int(*c)).collect()))
        })
        .bind("allPricesAtMost", |a| {
            arity("allPricesAtMost", a, 2)?;
            let cap = int("allPricesAtMost", a, 1)?;
            let o = output("allPricesAtMost", a, 0)?;
            Ok(Value::Bool(results(o).iter().all(|it| satisfies(it, "max_price", &json!(cap)))))
        })
        .bind("allSatisfy", |a| {
            arity("allSatisfy", a, 3)?;
            let o = output("allSatisfy", a, 0)?;
            let p = string("allSatisfy", a, 1)?;
            let v = a[2].to_json();
            Ok(Value::Bool(results(o).iter().all(|it| satisfies(it, p, &v))))
        })
        .bind("isOk", |a| {
            arity("isOk", a, 1)?;
            Ok(Value::Bool(output("isOk", a, 0)?.status == "ok"))
        })
        .bind("getTotal", |a| {
            arity("getTotal", a, 1)?;
            let o = output("getTotal", a, 0)?;
            Ok(o.payload.get("total").and_then(Json::as_i64).map_or(Value::Null, Value::Int))
        })
        .bind("searchFor", |a| {
            arity("searchFor", a, 1)?;
            Ok(Value::Action(Action::new("search").with("query", string("searchFor", a, 0)?)))
        })
        .bind("loginAction", |a| {
            arity("loginAction", a, 1)?;
            Ok(Value::Action(Action::new("login").with("user", string("loginAction", a, 0)?)))
        })
        .bind("sequenceOf", |a| {
            let actions = (0..a.len())
                .map(|i| action("sequenceOf", a, i).cloned())
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Value::Seq(ActionSequence::new(0, actions)))
        })
        .bind("containsItem", |a| {
            arity("containsItem", a, 2)?;
            let o = output("containsItem", a, 0)?;
            let id = item("containsItem", a, 1)?.get("id");
            Ok(Value::Bool(id.is_some() && results(o).iter().any(|it| it.get("id") == id)))
        })
        .bind("sameResults", |a| {
            arity("sameResults", a, 2)?;
            let (x, y) = (output("sameResults", a, 0)?, output("sameResults", a, 1)?);
            Ok(Value::Bool(x.status == y.status && results(x) == results(y)))
        })
        .bind("getQuery", |a| {
            arity("getQuery", a, 1)?;
            Ok(action("getQuery", a, 0)?
                .param("query")
                .map_or(Value::Null, Value::from_json))
        })
        .bind("upperCase", |a| {
            arity("upperCase", a, 1)?;
            Ok(Value::Str(string("upperCase", a, 0)?.to_uppercase()))
        })
        .bind("getName", |a| field("getName", a, "name"))
        .bind("getCategory", |a| field("getCategory", a, "category"))
        .bind("isInStock", |a| {
            arity("isInStock", a, 1)?;
            Ok(Value::Bool(item("isInStock", a, 0)?.get("in_stock") == Some(&Json::Bool(true))))
        })
}

fn field(name: &str, a: &[Value], key: &str) -> Result<Value, String> {
    arity(name, a, 1)?;
    Ok(item(name, a, 0)?.get(key).map_or(Value::Null, Value::from_json))
}

fn search(query: &str) -> Action {
    Action::new("search").with("query", query)
}

/// Source inputs covering single and repeated searches, pre-applied
/// filters, pagination, and sessions without any search.
pub fn builtin_inputs() -> Vec<NamedInput> {
    let one = |name: &str, a: Action| NamedInput::new(name, ActionSequence::new(1, vec![a]));
    let many = |name: &str, actions: Vec<Action>| NamedInput::new(name, ActionSequence::new(1, actions));
    let mut inputs: Vec<NamedInput> = ["chair", "desk", "lamp", "office", "bench", "sofa"]
        .iter()
        .map(|q| one(&format!("search-{q}"), search(q)))
        .collect();
    inputs.extend([
        one("search-all", search("")),
        one("search-chair-office", search("chair").with("category", "office")),
        one("search-all-cheap", search("").with("max_price", 100)),
        one("search-premium", search("").with("min_price", 200)),
        one("search-all-page2", search("").with("page", 2).with("page_size", 5)),
        many(
            "login-search-chair",
            vec![Action::new("login").with("user", "alice"), search("chair")],
        ),
        many("two-searches", vec![search("lamp"), search("desk")]),
        many(
            "cart",
            vec![
                Action::new("login").with("user", "alice"),
                search("chair"),
                Action::new("add_to_cart").with("item_id", 2).with("quantity", 1),
                Action::new("view_cart"),
            ],
        ),
        one("view-item", Action::new("view_item").with("item_id", 3)),
    ]);
    inputs
}
