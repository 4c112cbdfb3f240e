use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::value::Value;

/// A host implementation of a function an EMR calls. Method-style calls
/// `x.f(a)` pass the receiver first: `f(x, a)`.
pub type StubFn = Arc<dyn Fn(&[Value]) -> Result<Value, String> + Send + Sync>;

#[derive(Clone, Default)]
pub struct StubBindings {
    map: BTreeMap<String, StubFn>,
}

impl StubBindings {
    pub fn new() -> Self {
        StubBindings::default()
    }

    pub fn bind(
        mut self,
        name: &str,
        f: impl Fn(&[Value]) -> Result<Value, String> + Send + Sync + 'static,
    ) -> Self {
        self.insert(name, Arc::new(f));
        self
    }

    pub fn insert(&mut self, name: &str, f: StubFn) {
        self.map.insert(name.to_string(), f);
    }

    pub fn get(&self, name: &str) -> Option<&StubFn> {
        self.map.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.map.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// The bindings whose names appear in `names`.
    pub fn restrict<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> StubBindings {
        let mut out = StubBindings::new();
        for n in names {
            if let Some(f) = self.map.get(n) {
                out.map.insert(n.to_string(), Arc::clone(f));
            }
        }
        out
    }

    /// Adds every binding of `other`, replacing same-named ones.
    pub fn merge(mut self, other: &StubBindings) -> Self {
        for (k, v) in &other.map {
            self.map.insert(k.clone(), Arc::clone(v));
        }
        self
    }
}

impl fmt::Debug for StubBindings {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.map.keys()).finish()
    }
}
