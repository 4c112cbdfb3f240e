//! Semantic checks: construct arity and typing, variable scoping, and
//! resolution of calls against the API catalog.
//!
//! A call that resolves to neither a construct, a catalog entry nor a
//! built-in value method is reported with [`Severity::Stub`]: the EMR is
//! still well formed, but a host implementation has to be bound before it
//! can run.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ast::{Block, Construct, EmrAst, Expr, ExprKind, Pos, StatementKind};
use crate::catalog::ApiCatalog;

/// Methods every runtime value understands.
pub const BUILTIN_METHODS: &[&str] = &[
    "actions",
    "size",
    "get",
    "isEmpty",
    "getPosition",
    "getKind",
    "getParameter",
    "hasParameter",
    "getStatus",
    "getResults",
    "getSummarySize",
    "getPayload",
    "equals",
    "contains",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Stub,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Stub => "stub",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub line: u32,
    pub column: u32,
    pub message: String,
    /// The unresolved function for stubs; the offending name otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<String>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.line, self.column, self.severity, self.message)
    }
}

/// One JSON object per line.
pub fn diagnostics_to_json_lines(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| serde_json::to_string(d).expect("diagnostics serialize") + "\n")
        .collect()
}

/// Distinct stub names in order of first appearance.
pub fn stub_names(diags: &[Diagnostic]) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for d in diags.iter().filter(|d| d.severity == Severity::Stub) {
        if let Some(s) = &d.symbol {
            if !names.contains(s) {
                names.push(s.clone());
            }
        }
    }
    names
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    Bool,
    Int,
    Str,
    Seq,
    Unknown,
}

impl Ty {
    fn describe(self) -> &'static str {
        match self {
            Ty::Bool => "boolean",
            Ty::Int => "integer",
            Ty::Str => "string",
            Ty::Seq => "input sequence",
            Ty::Unknown => "value",
        }
    }

    fn from_catalog(name: &str) -> Ty {
        match name.to_ascii_lowercase().as_str() {
            "boolean" | "bool" => Ty::Bool,
            "int" | "integer" | "long" => Ty::Int,
            "string" | "str" => Ty::Str,
            _ => Ty::Unknown,
        }
    }
}

struct Checker<'a> {
    catalog: &'a ApiCatalog,
    scopes: Vec<HashMap<String, Ty>>,
    loop_depth: usize,
    out: Vec<Diagnostic>,
}

impl Checker<'_> {
    fn report(&mut self, severity: Severity, pos: Pos, message: String, symbol: Option<&str>) {
        self.out.push(Diagnostic {
            severity,
            line: pos.line,
            column: pos.column,
            message,
            symbol: symbol.map(str::to_string),
        });
    }

    fn lookup(&self, name: &str) -> Option<Ty> {
        self.scopes.iter().rev().find_map(|s| s.get(name).copied())
    }

    fn declare(&mut self, name: &str, ty: Ty, pos: Pos) {
        if self.lookup(name).is_some() {
            self.report(
                Severity::Warning,
                pos,
                format!("'{name}' shadows an earlier declaration"),
                Some(name),
            );
        }
        self.scopes
            .last_mut()
            .expect("scope stack is never empty")
            .insert(name.to_string(), ty);
    }

    fn block(&mut self, block: &Block) {
        self.scopes.push(HashMap::new());
        for stmt in &block.statements {
            let pos = Pos {
                line: stmt.line,
                column: 1,
                offset: stmt.span.0,
            };
            match &stmt.kind {
                StatementKind::ForEach {
                    var,
                    iterable,
                    body,
                    ..
                } => {
                    let ty = self.expr(iterable);
                    if matches!(ty, Ty::Bool | Ty::Int | Ty::Str) {
                        self.report(
                            Severity::Error,
                            iterable.pos,
                            format!("cannot iterate over a {}", ty.describe()),
                            None,
                        );
                    }
                    self.scopes.push(HashMap::new());
                    self.declare(var, Ty::Unknown, pos);
                    self.loop_depth += 1;
                    self.block(body);
                    self.loop_depth -= 1;
                    self.scopes.pop();
                }
                StatementKind::If { condition, body } => {
                    let ty = self.expr(condition);
                    self.require_bool(ty, condition.pos, "if condition");
                    self.block(body);
                }
                StatementKind::VarDecl { name, init, .. } => {
                    let ty = self.expr(init);
                    self.declare(name, ty, pos);
                }
                StatementKind::Expr(e) => {
                    let ty = self.expr(e);
                    let effectful = matches!(
                        e.kind,
                        ExprKind::Call { .. } | ExprKind::Method { .. } | ExprKind::Construct { .. }
                    );
                    if !effectful && ty != Ty::Bool {
                        self.report(
                            Severity::Warning,
                            e.pos,
                            "expression statement has no effect".into(),
                            None,
                        );
                    }
                }
                StatementKind::Continue => {
                    if self.loop_depth == 0 {
                        self.report(
                            Severity::Error,
                            pos,
                            "'continue' outside of a loop".into(),
                            None,
                        );
                    }
                }
            }
        }
        self.scopes.pop();
    }

    fn require_bool(&mut self, ty: Ty, pos: Pos, what: &str) {
        if matches!(ty, Ty::Int | Ty::Str | Ty::Seq) {
            self.report(
                Severity::Error,
                pos,
                format!("{what} must be boolean, found {}", ty.describe()),
                None,
            );
        }
    }

    fn expr(&mut self, e: &Expr) -> Ty {
        match &e.kind {
            ExprKind::Ident(name) => match self.lookup(name) {
                Some(ty) => ty,
                None => {
                    self.report(
                        Severity::Error,
                        e.pos,
                        format!("undefined variable '{name}'"),
                        Some(name),
                    );
                    Ty::Unknown
                }
            },
            ExprKind::Int(_) => Ty::Int,
            ExprKind::Str(_) => Ty::Str,
            ExprKind::Bool(_) => Ty::Bool,
            ExprKind::Not(inner) => {
                let ty = self.expr(inner);
                self.require_bool(ty, inner.pos, "operand of '!'");
                Ty::Bool
            }
            ExprKind::And(l, r) | ExprKind::Or(l, r) => {
                let op = if matches!(e.kind, ExprKind::And(..)) { "&&" } else { "||" };
                for side in [l, r] {
                    let ty = self.expr(side);
                    self.require_bool(ty, side.pos, &format!("operand of '{op}'"));
                }
                Ty::Bool
            }
            ExprKind::Call { name, args } => {
                let tys: Vec<Ty> = args.iter().map(|a| self.expr(a)).collect();
                match self.catalog.get(name) {
                    Some(entry) => {
                        if entry.parameters.len() != tys.len() {
                            self.report(
                                Severity::Error,
                                e.pos,
                                format!(
                                    "{name} expects {} arguments, found {}",
                                    entry.parameters.len(),
                                    tys.len()
                                ),
                                Some(name),
                            );
                        }
                        Ty::from_catalog(&entry.returns)
                    }
                    None => {
                        self.report(
                            Severity::Stub,
                            e.pos,
                            format!("'{name}' is not a construct or catalog API; bind a stub"),
                            Some(name),
                        );
                        Ty::Unknown
                    }
                }
            }
            ExprKind::Method {
                receiver,
                name,
                name_pos,
                args,
            } => {
                self.expr(receiver);
                for a in args {
                    self.expr(a);
                }
                if BUILTIN_METHODS.contains(&name.as_str()) {
                    match name.as_str() {
                        "size" | "getPosition" | "getSummarySize" => Ty::Int,
                        "isEmpty" | "hasParameter" | "equals" | "contains" => Ty::Bool,
                        "getKind" | "getStatus" => Ty::Str,
                        _ => Ty::Unknown,
                    }
                } else if let Some(entry) = self.catalog.get(name) {
                    Ty::from_catalog(&entry.returns)
                } else {
                    self.report(
                        Severity::Stub,
                        *name_pos,
                        format!("method '{name}' is not built in or a catalog API; bind a stub"),
                        Some(name),
                    );
                    Ty::Unknown
                }
            }
            ExprKind::Construct { construct, args } => self.construct(*construct, args, e.pos),
        }
    }

    fn construct(&mut self, c: Construct, args: &[Expr], pos: Pos) -> Ty {
        let tys: Vec<Ty> = args.iter().map(|a| self.expr(a)).collect();
        let name = c.name();
        if !c.arities().contains(&args.len()) {
            let expected = match c.arities() {
                [1] => "1 argument".to_string(),
                [n] => format!("{n} arguments"),
                _ => "1 or 2 arguments".to_string(),
            };
            self.report(
                Severity::Error,
                pos,
                format!("{name} expects {expected}"),
                Some(name),
            );
            return if c.is_logical() { Ty::Bool } else { Ty::Unknown };
        }
        match c {
            Construct::Input => {
                self.require_index(&args[0], "Input");
                Ty::Seq
            }
            Construct::Output => {
                if args.len() == 1 {
                    self.require_index(&args[0], "Output");
                } else {
                    if matches!(tys[0], Ty::Bool | Ty::Int | Ty::Str) {
                        self.report(
                            Severity::Error,
                            args[0].pos,
                            format!(
                                "Output expects an input sequence as first argument, found {}",
                                tys[0].describe()
                            ),
                            Some(name),
                        );
                    }
                    if matches!(tys[1], Ty::Bool | Ty::Str | Ty::Seq) {
                        self.report(
                            Severity::Error,
                            args[1].pos,
                            format!("Output position must be an integer, found {}", tys[1].describe()),
                            Some(name),
                        );
                    }
                }
                Ty::Unknown
            }
            Construct::Create => {
                match args[0].as_construct() {
                    Some((Construct::Input, [idx])) => {
                        if matches!(idx.kind, ExprKind::Int(k) if k < 2) {
                            self.report(
                                Severity::Error,
                                args[0].pos,
                                "CREATE must target a follow-up input (index 2 or higher)".into(),
                                Some(name),
                            );
                        }
                    }
                    _ => self.report(
                        Severity::Error,
                        args[0].pos,
                        "CREATE expects Input(k) as its first argument".into(),
                        Some(name),
                    ),
                }
                if matches!(tys[1], Ty::Bool | Ty::Int | Ty::Str) {
                    self.report(
                        Severity::Error,
                        args[1].pos,
                        format!("CREATE cannot copy a {}", tys[1].describe()),
                        Some(name),
                    );
                }
                Ty::Bool
            }
            Construct::Implies | Construct::Not | Construct::Or | Construct::And => {
                for (i, (a, ty)) in args.iter().zip(&tys).enumerate() {
                    self.require_bool(*ty, a.pos, &format!("{name} argument {}", i + 1));
                }
                Ty::Bool
            }
        }
    }

    fn require_index(&mut self, arg: &Expr, name: &str) {
        let ok = matches!(arg.kind, ExprKind::Int(k) if k >= 1);
        if !ok {
            self.report(
                Severity::Error,
                arg.pos,
                format!("{name} expects an integer index of 1 or higher"),
                Some(name),
            );
        }
    }
}

/// Checks `ast` against `catalog`. An empty result means the EMR can run
/// without stub bindings.
pub fn validate(ast: &EmrAst, catalog: &ApiCatalog) -> Vec<Diagnostic> {
    let mut checker = Checker {
        catalog,
        scopes: vec![HashMap::new()],
        loop_depth: 0,
        out: Vec::new(),
    };
    checker.block(&ast.body);
    checker.out
}
