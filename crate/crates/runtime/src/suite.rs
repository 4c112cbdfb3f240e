use std::collections::BTreeMap;
use std::fmt::Write;

use emrkit_core::EmrAst;
use emrkit_sut::{ActionSequence, SessionFactory};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eval::{evaluate_emr, FailingBinding, Verdict, VerdictValue};
use crate::stubs::StubBindings;

/// A source input with the name it is reported under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedInput {
    pub name: String,
    pub sequence: ActionSequence,
}

impl NamedInput {
    pub fn new(name: impl Into<String>, sequence: ActionSequence) -> Self {
        NamedInput {
            name: name.into(),
            sequence,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairError {
    pub message: String,
    /// The SUT session failed, as opposed to an evaluation error.
    pub adapter: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairResult {
    pub emr: String,
    pub input: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<PairError>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub input: String,
    #[serde(flatten)]
    pub binding: FailingBinding,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmrReport {
    pub emr: String,
    pub counts: BTreeMap<VerdictValue, usize>,
    pub errors: usize,
    pub failures: Vec<Failure>,
    pub stubs: Vec<String>,
}

impl EmrReport {
    pub fn count(&self, v: VerdictValue) -> usize {
        self.counts.get(&v).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SuiteReport {
    pub sut: String,
    pub emrs: Vec<EmrReport>,
    pub pairs: Vec<PairResult>,
}

impl SuiteReport {
    pub fn total(&self, v: VerdictValue) -> usize {
        self.emrs.iter().map(|e| e.count(v)).sum()
    }

    pub fn errors(&self) -> usize {
        self.emrs.iter().map(|e| e.errors).sum()
    }

    pub fn adapter_failures(&self) -> usize {
        self.pairs
            .iter()
            .filter(|p| p.error.as_ref().is_some_and(|e| e.adapter))
            .count()
    }

    pub fn emr(&self, id: &str) -> Option<&EmrReport> {
        self.emrs.iter().find(|e| e.emr == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let width = self.emrs.iter().map(|e| e.emr.len()).max().unwrap_or(3).max(3);
        let mut out = String::new();
        let _ = writeln!(out, "SUT: {}", self.sut);
        let _ = writeln!(
            out,
            "{:<width$}  {:>5}  {:>5}  {:>12}  {:>13}  {:>6}",
            "EMR", "Pass", "Fail", "Inapplicable", "NotExecutable", "Errors"
        );
        for e in &self.emrs {
            let _ = writeln!(
                out,
                "{:<width$}  {:>5}  {:>5}  {:>12}  {:>13}  {:>6}",
                e.emr,
                e.count(VerdictValue::Pass),
                e.count(VerdictValue::Fail),
                e.count(VerdictValue::Inapplicable),
                e.count(VerdictValue::NotExecutable),
                e.errors
            );
        }
        for e in &self.emrs {
            for f in &e.failures {
                let binds: Vec<String> = f
                    .binding
                    .bindings
                    .iter()
                    .map(|b| format!("{} = {}", b.name, b.value))
                    .collect();
                let _ = writeln!(
                    out,
                    "FAIL {} on {} at line {}: {}",
                    e.emr,
                    f.input,
                    f.binding.line,
                    if binds.is_empty() { "no loop bindings".to_string() } else { binds.join(", ") }
                );
            }
            if !e.stubs.is_empty() {
                let _ = writeln!(out, "NOT EXECUTABLE {}: unbound {}", e.emr, e.stubs.join(", "));
            }
        }
        for p in &self.pairs {
            if let Some(err) = &p.error {
                let _ = writeln!(out, "ERROR {} on {}: {}", p.emr, p.input, err.message);
            }
        }
        out
    }
}

fn emr_id(ast: &EmrAst, i: usize) -> String {
    if ast.id.is_empty() {
        format!("emr-{}", i + 1)
    } else {
        ast.id.clone()
    }
}

/// Evaluates every (EMR, input) pair. Pairs run in parallel only when the
/// factory declares session isolation; the report order is fixed either way.
pub fn run_suite(
    emrs: &[EmrAst],
    inputs: &[NamedInput],
    factory: &dyn SessionFactory,
    stubs: &StubBindings,
) -> SuiteReport {
    let jobs: Vec<(usize, usize)> = (0..emrs.len())
        .flat_map(|e| (0..inputs.len()).map(move |i| (e, i)))
        .collect();
    let run = |&(e, i): &(usize, usize)| {
        let result = evaluate_emr(&emrs[e], &inputs[i].sequence, factory, stubs);
        let (verdict, error) = match result {
            Ok(v) => (Some(v), None),
            Err(err) => (
                None,
                Some(PairError {
                    adapter: err.is_adapter_failure(),
                    message: err.to_string(),
                }),
            ),
        };
        PairResult {
            emr: emr_id(&emrs[e], e),
            input: inputs[i].name.clone(),
            verdict,
            error,
        }
    };
    let pairs: Vec<PairResult> = if factory.isolated() {
        jobs.par_iter().map(run).collect()
    } else {
        jobs.iter().map(run).collect()
    };

    let mut reports: Vec<EmrReport> = emrs
        .iter()
        .enumerate()
        .map(|(i, ast)| EmrReport {
            emr: emr_id(ast, i),
            counts: VerdictValue::ALL.iter().map(|v| (*v, 0)).collect(),
            errors: 0,
            failures: Vec::new(),
            stubs: Vec::new(),
        })
        .collect();
    for (&(e, _), p) in jobs.iter().zip(&pairs) {
        let r = &mut reports[e];
        match &p.verdict {
            Some(v) => {
                *r.counts.entry(v.value).or_default() += 1;
                r.failures.extend(v.failing_bindings.iter().map(|b| Failure {
                    input: p.input.clone(),
                    binding: b.clone(),
                }));
                for s in &v.stubs {
                    if !r.stubs.contains(s) {
                        r.stubs.push(s.clone());
                    }
                }
            }
            None => r.errors += 1,
        }
    }
    SuiteReport {
        sut: factory.describe(),
        emrs: reports,
        pairs,
    }
}
