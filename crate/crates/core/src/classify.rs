//! Simple/Complex classification of annotatable statement lines.
//!
//! Annotation works line by line on the canonical layout, so the unit that
//! gets classified is a [`LineRole::Unit`] line. A line is Complex when it
//! renders at least one invocation of a non-construct function or method,
//! and Simple otherwise.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ast::{Construct, EmrAst};
use crate::layout::{canonical_lines, LineRole};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StatementClass {
    Simple,
    Complex,
}

impl fmt::Display for StatementClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StatementClass::Simple => "Simple",
            StatementClass::Complex => "Complex",
        })
    }
}

/// One annotatable line of an EMR.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StatementLine {
    /// 0-based position among the statement lines of the EMR.
    pub index: usize,
    /// Line number in the canonical rendering.
    pub line: usize,
    /// Index of the AST statement the line belongs to.
    pub statement: usize,
    pub code: String,
    pub explanation: Option<String>,
    pub class: StatementClass,
    pub invocations: Vec<String>,
    pub constructs: Vec<Construct>,
}

pub fn statement_lines(ast: &EmrAst) -> Vec<StatementLine> {
    canonical_lines(ast)
        .into_iter()
        .filter(|l| l.role == LineRole::Unit)
        .enumerate()
        .map(|(index, l)| StatementLine {
            index,
            line: l.number,
            statement: l.statement.expect("unit lines belong to a statement"),
            class: if l.calls.is_empty() {
                StatementClass::Simple
            } else {
                StatementClass::Complex
            },
            code: l.code,
            explanation: l.note,
            invocations: l.calls,
            constructs: l.constructs,
        })
        .collect()
}

/// `(canonical line, class)` for every statement line, in order.
pub fn classify_statements(ast: &EmrAst) -> Vec<(usize, StatementClass)> {
    statement_lines(ast).into_iter().map(|s| (s.line, s.class)).collect()
}

/// Number of annotatable statement lines.
pub fn statement_count(ast: &EmrAst) -> usize {
    statement_lines(ast).len()
}
