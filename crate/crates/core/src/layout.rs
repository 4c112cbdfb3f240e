//! Canonical line layout.
//!
//! The printer, the comment attacher and the statement classifier all share
//! one layout so that canonical line numbers mean the same thing everywhere.
//! A logical construct call (`IMPLIES`, `OR`, `AND`) that is a statement on
//! its own, or an argument of another split call, is spread over several
//! lines when it contains a method or function invocation: one line for the
//! opening `NAME(`, one per argument (infix `&&`/`||` chains put each operand
//! on its own line) and a closing `)` line.

use crate::ast::{Block, Construct, EmrAst, Expr, ExprKind, Statement, StatementKind};
use crate::token::escape_string;

pub const INDENT: &str = "    ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineRole {
    /// `MR {{` or `}}`.
    Frame,
    /// A full-line comment.
    Comment,
    /// An annotatable code line.
    Unit,
    /// A line holding only closing delimiters.
    Closing,
}

/// One line of the canonical rendering.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct CanonicalLine {
    /// 1-based line number in [`crate::pretty_print`] output.
    pub number: usize,
    pub depth: usize,
    /// Code without indentation or trailing comment; comment text for
    /// [`LineRole::Comment`] lines.
    pub code: String,
    pub note: Option<String>,
    pub role: LineRole,
    /// Index of the statement that owns the line.
    pub statement: Option<usize>,
    /// Names of non-construct invocations rendered on the line.
    pub calls: Vec<String>,
    /// Constructs rendered on the line.
    pub constructs: Vec<Construct>,
}

impl CanonicalLine {
    pub fn render(&self) -> String {
        let indent = INDENT.repeat(self.depth);
        let comment = |text: &str| {
            if text.is_empty() {
                "//".to_string()
            } else {
                format!("// {text}")
            }
        };
        match (&self.role, &self.note) {
            (LineRole::Comment, _) => format!("{indent}{}", comment(&self.code)),
            (_, Some(note)) => format!("{indent}{} {}", self.code, comment(note)),
            (_, None) => format!("{indent}{}", self.code),
        }
    }
}

/// A line a statement prints for itself, before numbering.
#[derive(Debug, Clone)]
pub(crate) struct OwnLine<'a> {
    pub depth: usize,
    pub code: String,
    /// Source offset where the line's first token sat when parsed.
    pub anchor: usize,
    pub unit: bool,
    pub inline: Vec<&'a Expr>,
    pub constructs: Vec<Construct>,
}

pub(crate) enum Segment<'a> {
    Line(OwnLine<'a>),
    Body(&'a Block),
}

/// Own lines of `stmt` (relative depth 0) interleaved with its body.
pub(crate) fn segments(stmt: &Statement) -> Vec<Segment<'_>> {
    match &stmt.kind {
        StatementKind::ForEach {
            var_type,
            var,
            iterable,
            body,
        } => {
            let ty = var_type.as_deref().unwrap_or("var");
            vec![
                Segment::Line(unit(
                    format!("for ({ty} {var} : {}) {{", render_expr(iterable)),
                    stmt.span.0,
                    vec![iterable],
                )),
                Segment::Body(body),
                Segment::Line(closing("}".into(), close_anchor(stmt, body), 0)),
            ]
        }
        StatementKind::If { condition, body } => {
            if stmt.is_inline_if() {
                vec![Segment::Line(unit(
                    format!("if ({}) continue;", render_expr(condition)),
                    stmt.span.0,
                    vec![condition],
                ))]
            } else {
                vec![
                    Segment::Line(unit(
                        format!("if ({}) {{", render_expr(condition)),
                        stmt.span.0,
                        vec![condition],
                    )),
                    Segment::Body(body),
                    Segment::Line(closing("}".into(), close_anchor(stmt, body), 0)),
                ]
            }
        }
        StatementKind::VarDecl {
            var_type,
            name,
            init,
        } => {
            let ty = var_type.as_deref().unwrap_or("var");
            vec![Segment::Line(unit(
                format!("{ty} {name} = {};", render_expr(init)),
                stmt.span.0,
                vec![init],
            ))]
        }
        StatementKind::Continue => {
            vec![Segment::Line(unit("continue;".into(), stmt.span.0, vec![]))]
        }
        StatementKind::Expr(e) => {
            if is_split_call(e) {
                let mut out = Vec::new();
                split_call(e, 0, ";", &mut out);
                let first = out.first_mut().expect("split call yields lines");
                first.anchor = first.anchor.min(stmt.span.0);
                out.into_iter().map(Segment::Line).collect()
            } else {
                vec![Segment::Line(unit(
                    format!("{};", render_expr(e)),
                    stmt.span.0,
                    vec![e],
                ))]
            }
        }
    }
}

/// Own lines only, in order; the ordinals key [`Statement::notes`].
pub(crate) fn own_lines(stmt: &Statement) -> Vec<OwnLine<'_>> {
    segments(stmt)
        .into_iter()
        .filter_map(|s| match s {
            Segment::Line(l) => Some(l),
            Segment::Body(_) => None,
        })
        .collect()
}

fn close_anchor(stmt: &Statement, body: &Block) -> usize {
    body.braces
        .map(|(_, close)| close)
        .unwrap_or(stmt.span.1.saturating_sub(1))
}

fn unit<'a>(code: String, anchor: usize, inline: Vec<&'a Expr>) -> OwnLine<'a> {
    OwnLine {
        depth: 0,
        code,
        anchor,
        unit: true,
        inline,
        constructs: Vec::new(),
    }
}

fn closing<'a>(code: String, anchor: usize, depth: usize) -> OwnLine<'a> {
    OwnLine {
        depth,
        code,
        anchor,
        unit: false,
        inline: Vec::new(),
        constructs: Vec::new(),
    }
}

fn is_split_call(e: &Expr) -> bool {
    matches!(
        &e.kind,
        ExprKind::Construct { construct: Construct::Implies | Construct::Or | Construct::And, args }
            if !args.is_empty()
    ) && e.has_invocation()
}

fn is_split_chain(e: &Expr) -> bool {
    matches!(e.kind, ExprKind::And(..) | ExprKind::Or(..)) && e.has_invocation()
}

fn split_call<'a>(e: &'a Expr, depth: usize, suffix: &str, out: &mut Vec<OwnLine<'a>>) {
    let (construct, args) = e.as_construct().expect("split_call on a construct");
    out.push(OwnLine {
        depth,
        code: format!("{}(", construct.name()),
        anchor: e.pos.offset,
        unit: true,
        inline: Vec::new(),
        constructs: vec![construct],
    });
    for (i, arg) in args.iter().enumerate() {
        let arg_suffix = if i + 1 < args.len() { "," } else { "" };
        if is_split_call(arg) {
            split_call(arg, depth + 1, arg_suffix, out);
        } else if is_split_chain(arg) {
            split_chain(arg, depth + 1, arg_suffix, out);
        } else {
            let mut line = unit(
                format!("{}{arg_suffix}", render_expr(arg)),
                arg.pos.offset,
                vec![arg],
            );
            line.depth = depth + 1;
            out.push(line);
        }
    }
    out.push(closing(
        format!("){suffix}"),
        e.end.saturating_sub(1),
        depth,
    ));
}

fn split_chain<'a>(e: &'a Expr, depth: usize, suffix: &str, out: &mut Vec<OwnLine<'a>>) {
    let (op, operands) = flatten_chain(e);
    let last = operands.len() - 1;
    for (i, operand) in operands.into_iter().enumerate() {
        let text = render_operand(operand, op);
        let code = if i == last {
            format!("{text}{suffix}")
        } else {
            format!("{text} {op}")
        };
        let mut line = unit(code, operand.pos.offset, vec![operand]);
        line.depth = depth;
        out.push(line);
    }
}

/// Operands along the left spine of a same-operator chain.
fn flatten_chain(e: &Expr) -> (&'static str, Vec<&Expr>) {
    let is_and = matches!(e.kind, ExprKind::And(..));
    let op = if is_and { "&&" } else { "||" };
    let mut operands = Vec::new();
    let mut cur = e;
    loop {
        match &cur.kind {
            ExprKind::And(l, r) if is_and => {
                operands.push(r.as_ref());
                cur = l;
            }
            ExprKind::Or(l, r) if !is_and => {
                operands.push(r.as_ref());
                cur = l;
            }
            _ => {
                operands.push(cur);
                break;
            }
        }
    }
    operands.reverse();
    (op, operands)
}

fn render_operand(e: &Expr, op: &str) -> String {
    // Left-spine operands of the same operator were flattened already, so any
    // nested And/Or here needs parentheses to survive re-parsing.
    let needs_parens = match &e.kind {
        ExprKind::Or(..) => true,
        ExprKind::And(..) => op == "&&",
        _ => false,
    };
    if needs_parens {
        format!("({})", render_expr(e))
    } else {
        render_expr(e)
    }
}

/// Single-line canonical rendering of an expression.
pub fn render_expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Construct { construct, args } => {
            format!("{}({})", construct.name(), render_args(args))
        }
        ExprKind::Call { name, args } => format!("{name}({})", render_args(args)),
        ExprKind::Method {
            receiver,
            name,
            args,
            ..
        } => {
            let recv = match receiver.kind {
                ExprKind::Not(_) | ExprKind::And(..) | ExprKind::Or(..) => {
                    format!("({})", render_expr(receiver))
                }
                _ => render_expr(receiver),
            };
            format!("{recv}.{name}({})", render_args(args))
        }
        ExprKind::Ident(name) => name.clone(),
        ExprKind::Int(v) => v.to_string(),
        ExprKind::Str(s) => escape_string(s),
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Not(inner) => match inner.kind {
            ExprKind::And(..) | ExprKind::Or(..) => format!("!({})", render_expr(inner)),
            _ => format!("!{}", render_expr(inner)),
        },
        ExprKind::And(l, r) => {
            let left = match l.kind {
                ExprKind::Or(..) => format!("({})", render_expr(l)),
                _ => render_expr(l),
            };
            let right = match r.kind {
                ExprKind::Or(..) | ExprKind::And(..) => format!("({})", render_expr(r)),
                _ => render_expr(r),
            };
            format!("{left} && {right}")
        }
        ExprKind::Or(l, r) => {
            let right = match r.kind {
                ExprKind::Or(..) => format!("({})", render_expr(r)),
                _ => render_expr(r),
            };
            format!("{} || {right}", render_expr(l))
        }
    }
}

fn render_args(args: &[Expr]) -> String {
    args.iter().map(render_expr).collect::<Vec<_>>().join(", ")
}

/// Lays out the whole MR as numbered canonical lines.
pub fn canonical_lines(ast: &EmrAst) -> Vec<CanonicalLine> {
    let mut lines = Vec::new();
    for c in &ast.leading_comments {
        push_comment(&mut lines, 0, c);
    }
    push(&mut lines, 0, "MR {{".into(), ast.open_note.clone(), LineRole::Frame, None, &[], &[]);
    block_lines(&ast.body, 1, &mut lines);
    push(&mut lines, 0, "}}".into(), ast.close_note.clone(), LineRole::Frame, None, &[], &[]);
    for c in &ast.trailing_comments {
        push_comment(&mut lines, 0, c);
    }
    lines
}

fn block_lines(block: &Block, depth: usize, lines: &mut Vec<CanonicalLine>) {
    for stmt in &block.statements {
        for c in &stmt.leading_comments {
            push_comment(lines, depth, c);
        }
        let mut ordinal = 0;
        for seg in segments(stmt) {
            match seg {
                Segment::Body(body) => block_lines(body, depth + 1, lines),
                Segment::Line(l) => {
                    let role = if l.unit { LineRole::Unit } else { LineRole::Closing };
                    push(
                        lines,
                        depth + l.depth,
                        l.code,
                        stmt.notes.get(&ordinal).cloned(),
                        role,
                        Some(stmt.index),
                        &l.inline,
                        &l.constructs,
                    );
                    ordinal += 1;
                }
            }
        }
    }
    for c in &block.dangling_comments {
        push_comment(lines, depth, c);
    }
}

fn push_comment(lines: &mut Vec<CanonicalLine>, depth: usize, text: &str) {
    push(lines, depth, text.to_string(), None, LineRole::Comment, None, &[], &[]);
}

#[allow(clippy::too_many_arguments)]
fn push(
    lines: &mut Vec<CanonicalLine>,
    depth: usize,
    code: String,
    note: Option<String>,
    role: LineRole,
    statement: Option<usize>,
    inline: &[&Expr],
    header: &[Construct],
) {
    let mut calls = Vec::new();
    let mut constructs = header.to_vec();
    for e in inline {
        e.walk(&mut |n| match &n.kind {
            ExprKind::Call { name, .. } | ExprKind::Method { name, .. } => calls.push(name.clone()),
            ExprKind::Construct { construct, .. } => constructs.push(*construct),
            _ => {}
        });
    }
    lines.push(CanonicalLine {
        number: lines.len() + 1,
        depth,
        code,
        note,
        role,
        statement,
        calls,
        constructs,
    });
}
