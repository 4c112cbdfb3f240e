//! A deterministic in-process shop with optional seeded faults.
//!
//! Search supports a case-insensitive substring `query` and the filters
//! `category`, `brand`, `min_price`, `max_price`, `min_rating` and
//! `in_stock`, paginated by `page` (from 1) and `page_size` (default 20).
//! Results keep catalog order.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::action::{Action, Output};
use crate::session::{Backend, Session, SessionFactory, SessionIds};
use crate::SutError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Item {
    pub id: u32,
    pub name: &'static str,
    pub category: &'static str,
    pub brand: &'static str,
    pub price: u32,
    pub rating: u32,
    pub in_stock: bool,
}

impl Item {
    pub fn to_json(&self) -> Value {
        json!({
            "id": self.id,
            "name": self.name,
            "category": self.category,
            "brand": self.brand,
            "price": self.price,
            "rating": self.rating,
            "in_stock": self.in_stock,
        })
    }
}

const fn item(
    id: u32,
    name: &'static str,
    category: &'static str,
    brand: &'static str,
    price: u32,
    rating: u32,
    in_stock: bool,
) -> Item {
    Item {
        id,
        name,
        category,
        brand,
        price,
        rating,
        in_stock,
    }
}

pub const CATALOG: [Item; 12] = [
    item(1, "Ergonomic Office Chair", "office", "Acme", 199, 5, true),
    item(2, "Mesh Office Chair", "office", "Zenith", 129, 4, true),
    item(3, "Dining Chair", "kitchen", "Woodly", 49, 4, true),
    item(4, "Gaming Chair", "gaming", "Acme", 249, 3, false),
    item(5, "Folding Chair", "outdoor", "Camply", 29, 3, true),
    item(6, "Standing Desk", "office", "Acme", 399, 5, true),
    item(7, "Writing Desk", "office", "Woodly", 159, 4, false),
    item(8, "Desk Lamp", "lighting", "Lumo", 39, 4, true),
    item(9, "Floor Lamp", "lighting", "Lumo", 89, 3, true),
    item(10, "Bookshelf", "storage", "Woodly", 99, 4, true),
    item(11, "Filing Cabinet", "office", "Zenith", 139, 2, false),
    item(12, "Garden Bench", "outdoor", "Camply", 179, 5, true),
];

pub const DEFAULT_PAGE_SIZE: i64 = 20;

/// Search parameters that restrict the result set.
pub const FILTER_PARAMS: [&str; 6] = [
    "category",
    "brand",
    "min_price",
    "max_price",
    "min_rating",
    "in_stock",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Filter parameters are accepted but not applied.
    IgnoreFilter,
    /// Every page window starts one result late.
    OffByOne,
    /// A search answers with the previous search of the same session.
    StaleResults,
}

impl Fault {
    pub const ALL: [Fault; 3] = [Fault::IgnoreFilter, Fault::OffByOne, Fault::StaleResults];

    pub fn name(self) -> &'static str {
        match self {
            Fault::IgnoreFilter => "ignore-filter",
            Fault::OffByOne => "off-by-one",
            Fault::StaleResults => "stale-results",
        }
    }
}

impl fmt::Display for Fault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Fault {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Fault::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                let known: Vec<_> = Fault::ALL.iter().map(|f| f.name()).collect();
                format!("unknown fault '{s}' (known: {})", known.join(", "))
            })
    }
}

/// True when a result item (as returned in a payload) satisfies one filter
/// parameter. Unknown parameters are never satisfied.
pub fn satisfies(item: &Value, param: &str, value: &Value) -> bool {
    let field = |k: &str| item.get(k);
    let num = |k: &str| field(k).and_then(Value::as_i64);
    match param {
        "category" | "brand" => field(param).is_some_and(|f| f == value),
        "min_price" => matches!((num("price"), value.as_i64()), (Some(p), Some(v)) if p >= v),
        "max_price" => matches!((num("price"), value.as_i64()), (Some(p), Some(v)) if p <= v),
        "min_rating" => matches!((num("rating"), value.as_i64()), (Some(r), Some(v)) if r >= v),
        "in_stock" => field("in_stock").is_some_and(|f| f == value),
        _ => false,
    }
}

fn matches_query(item: &Item, query: &str) -> bool {
    item.name.to_lowercase().contains(&query.to_lowercase())
}

/// Factory for mock shop sessions. Sessions share nothing.
#[derive(Debug, Default)]
pub struct MockShop {
    faults: BTreeSet<Fault>,
    ids: SessionIds,
}

impl MockShop {
    pub fn new() -> Self {
        MockShop::default()
    }

    pub fn with_faults(faults: impl IntoIterator<Item = Fault>) -> Self {
        MockShop {
            faults: faults.into_iter().collect(),
            ids: SessionIds::default(),
        }
    }

    pub fn faults(&self) -> impl Iterator<Item = Fault> + '_ {
        self.faults.iter().copied()
    }
}

impl SessionFactory for MockShop {
    fn open(&self) -> Result<Session, SutError> {
        Ok(Session::new(
            self.ids.next("mock"),
            Box::new(ShopState {
                faults: self.faults.clone(),
                ..ShopState::default()
            }),
        ))
    }

    fn isolated(&self) -> bool {
        true
    }

    fn describe(&self) -> String {
        if self.faults.is_empty() {
            "mock shop".into()
        } else {
            let names: Vec<_> = self.faults.iter().map(|f| f.name()).collect();
            format!("mock shop (faults: {})", names.join(", "))
        }
    }
}

#[derive(Debug, Default)]
struct ShopState {
    faults: BTreeSet<Fault>,
    user: Option<String>,
    cart: Vec<(u32, i64)>,
    last_search: Option<Value>,
}

fn bad_request(message: String) -> Output {
    Output::error("bad_request", &message)
}

fn expect_kind(action: &Action, name: &str, want: fn(&Value) -> bool, what: &str) -> Result<(), Output> {
    match action.param(name) {
        Some(v) if !want(v) => Err(bad_request(format!("parameter '{name}' must be {what}"))),
        _ => Ok(()),
    }
}

fn check_params(action: &Action, allowed: &[(&str, &str)]) -> Result<(), Output> {
    for name in action.parameters.keys() {
        if !allowed.iter().any(|(a, _)| a == name) {
            return Err(bad_request(format!("unknown parameter '{name}'")));
        }
    }
    for (name, ty) in allowed {
        match *ty {
            "string" => expect_kind(action, name, Value::is_string, "a string")?,
            "integer" => expect_kind(action, name, Value::is_i64, "an integer")?,
            "boolean" => expect_kind(action, name, Value::is_boolean, "a boolean")?,
            _ => unreachable!("parameter table uses known types"),
        }
    }
    Ok(())
}

const SEARCH_PARAMS: [(&str, &str); 9] = [
    ("query", "string"),
    ("category", "string"),
    ("brand", "string"),
    ("min_price", "integer"),
    ("max_price", "integer"),
    ("min_rating", "integer"),
    ("in_stock", "boolean"),
    ("page", "integer"),
    ("page_size", "integer"),
];

impl ShopState {
    fn search(&mut self, action: &Action) -> Output {
        if let Err(out) = check_params(action, &SEARCH_PARAMS) {
            return out;
        }
        let int = |k: &str, d: i64| action.param(k).and_then(Value::as_i64).unwrap_or(d);
        let (page, size) = (int("page", 1), int("page_size", DEFAULT_PAGE_SIZE));
        if page < 1 || size < 1 {
            return bad_request("page and page_size must be positive".into());
        }
        let query = action.param("query").and_then(Value::as_str).unwrap_or("");
        let apply_filters = !self.faults.contains(&Fault::IgnoreFilter);
        let matching: Vec<Value> = CATALOG
            .iter()
            .filter(|it| matches_query(it, query))
            .map(Item::to_json)
            .filter(|it| {
                !apply_filters
                    || FILTER_PARAMS
                        .iter()
                        .filter_map(|p| action.param(p).map(|v| (p, v)))
                        .all(|(p, v)| satisfies(it, p, v))
            })
            .collect();
        let mut start = (page - 1).saturating_mul(size);
        if self.faults.contains(&Fault::OffByOne) {
            start = start.saturating_add(1);
        }
        let results: Vec<Value> = matching
            .iter()
            .skip(usize::try_from(start).unwrap_or(usize::MAX))
            .take(usize::try_from(size).unwrap_or(usize::MAX))
            .cloned()
            .collect();
        let payload = json!({
            "results": results,
            "total": matching.len(),
            "page": page,
        });
        let shown = if self.faults.contains(&Fault::StaleResults) {
            self.last_search.replace(payload.clone()).unwrap_or(payload)
        } else {
            payload
        };
        Output::ok(shown)
    }

    fn find_item(&self, action: &Action) -> Result<&'static Item, Output> {
        let id = action.param("item_id").and_then(Value::as_i64);
        CATALOG
            .iter()
            .find(|it| Some(it.id as i64) == id)
            .ok_or_else(|| Output::error("not_found", "no such item"))
    }
}

impl Backend for ShopState {
    fn execute(&mut self, action: &Action) -> Result<Output, SutError> {
        let result = match action.kind.as_str() {
            "search" => Ok(self.search(action)),
            "login" => check_params(action, &[("user", "string")]).map(|_| {
                match action.param("user").and_then(Value::as_str) {
                    Some(u) if !u.is_empty() => {
                        self.user = Some(u.to_string());
                        Output::ok(json!({ "user": u }))
                    }
                    _ => bad_request("login needs a user".into()),
                }
            }),
            "logout" => check_params(action, &[]).map(|_| {
                self.user = None;
                self.cart.clear();
                Output::ok(json!({}))
            }),
            "view_item" => check_params(action, &[("item_id", "integer")])
                .and_then(|_| self.find_item(action))
                .map(|it| Output::ok(json!({ "item": it.to_json() }))),
            "add_to_cart" => check_params(action, &[("item_id", "integer"), ("quantity", "integer")])
                .and_then(|_| {
                    if self.user.is_none() {
                        return Err(Output::error("unauthorized", "login required"));
                    }
                    let it = self.find_item(action)?;
                    let qty = action.param("quantity").and_then(Value::as_i64).unwrap_or(1);
                    if qty < 1 {
                        return Err(bad_request("quantity must be positive".into()));
                    }
                    self.cart.push((it.id, qty));
                    Ok(Output::ok(json!({ "cart_size": self.cart.len() })))
                }),
            "view_cart" => check_params(action, &[]).and_then(|_| {
                if self.user.is_none() {
                    return Err(Output::error("unauthorized", "login required"));
                }
                let lines: Vec<Value> = self
                    .cart
                    .iter()
                    .map(|(id, q)| json!({ "item_id": id, "quantity": q }))
                    .collect();
                Ok(Output::ok(json!({ "results": lines })))
            }),
            other => return Err(SutError::UnknownAction(other.to_string())),
        };
        Ok(result.unwrap_or_else(|out| out))
    }
}
