//! Recursive-descent parser for `MR {{ ... }}` programs.
//!
//! Statement terminators are optional; the canonical printer always emits
//! them. Comments are attached after the tree is built: a comment sharing a
//! line with the token before it becomes a note on the canonical line that
//! token belongs to, a comment on its own line becomes a leading comment of
//! the next statement.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::ast::{Block, Construct, EmrAst, Expr, ExprKind, Pos, Statement, StatementKind};
use crate::layout::own_lines;
use crate::repair::hint_for;
use crate::token::{tokenize, unescape_string, LexError, Token, TokenKind};

/// Nesting bound for statements and expressions.
pub const MAX_DEPTH: usize = 128;

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
pub struct ParseError {
    pub line: u32,
    pub column: u32,
    pub message: String,
    pub expected: Vec<String>,
    pub found: String,
    /// Set when the violation matches a known repair rule.
    pub hint: Option<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {}; found {})", self.expected.join(" or "), self.found)?;
        }
        if let Some(h) = &self.hint {
            write!(f, "; hint: {h}")?;
        }
        Ok(())
    }
}

impl From<LexError> for ParseError {
    fn from(e: LexError) -> Self {
        ParseError {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
            expected: Vec::new(),
            found: String::new(),
            hint: None,
        }
    }
}

#[derive(Debug, Clone)]
struct PTok {
    kind: TokenKind,
    text: String,
    line: u32,
    column: u32,
    offset: usize,
}

impl PTok {
    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            column: self.column,
            offset: self.offset,
        }
    }

    fn end(&self) -> usize {
        self.offset + self.text.len()
    }

    fn is(&self, p: &str) -> bool {
        matches!(self.kind, TokenKind::Punctuation | TokenKind::Keyword) && self.text == p
    }
}

/// Splits `{{`/`}}` into single braces; the parser re-pairs them where needed.
fn significant(tokens: &[Token]) -> Vec<PTok> {
    let mut out = Vec::with_capacity(tokens.len());
    for t in tokens.iter().filter(|t| t.kind != TokenKind::Comment) {
        if t.is_punct("{{") || t.is_punct("}}") {
            let half = &t.lexeme[..1];
            for i in 0..2 {
                out.push(PTok {
                    kind: TokenKind::Punctuation,
                    text: half.to_string(),
                    line: t.line,
                    column: t.column + i as u32,
                    offset: t.offset + i,
                });
            }
        } else {
            out.push(PTok {
                kind: t.kind,
                text: t.lexeme.clone(),
                line: t.line,
                column: t.column,
                offset: t.offset,
            });
        }
    }
    out
}

struct Parser {
    toks: Vec<PTok>,
    i: usize,
    depth: usize,
    eof_pos: (u32, u32),
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> Option<&PTok> {
        self.toks.get(self.i)
    }

    fn peek_at(&self, n: usize) -> Option<&PTok> {
        self.toks.get(self.i + n)
    }

    fn at(&self, p: &str) -> bool {
        self.peek().is_some_and(|t| t.is(p))
    }

    fn bump(&mut self) -> PTok {
        let t = self.toks[self.i].clone();
        self.i += 1;
        t
    }

    fn prev_end(&self) -> usize {
        self.i.checked_sub(1).map_or(0, |j| self.toks[j].end())
    }

    fn error(&self, message: impl Into<String>, expected: &[&str]) -> ParseError {
        let (line, column, found) = match self.peek() {
            Some(t) => (t.line, t.column, format!("'{}'", t.text)),
            None => (self.eof_pos.0, self.eof_pos.1, "end of input".to_string()),
        };
        ParseError {
            line,
            column,
            message: message.into(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            hint: self.peek().and_then(|t| hint_for(&t.text)),
            found,
        }
    }

    fn expect(&mut self, p: &str) -> PResult<PTok> {
        if self.at(p) {
            Ok(self.bump())
        } else {
            Err(self.error(format!("expected '{p}'"), &[&format!("'{p}'")]))
        }
    }

    fn expect_ident(&mut self, what: &str) -> PResult<PTok> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Identifier => Ok(self.bump()),
            _ => Err(self.error(format!("expected {what}"), &["identifier"])),
        }
    }

    /// Two single braces that came from one `{{` or `}}` (or were written adjacent).
    fn at_double(&self, brace: &str) -> bool {
        match (self.peek(), self.peek_at(1)) {
            (Some(a), Some(b)) => a.is(brace) && b.is(brace) && b.offset == a.offset + 1,
            _ => false,
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            Err(self.error("nesting too deep", &[]))
        } else {
            Ok(())
        }
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn program(&mut self) -> PResult<(Block, usize, usize, u32, u32)> {
        let mr = match self.peek() {
            Some(t) if t.is("MR") => self.bump(),
            _ => return Err(self.error("an EMR must start with an MR block", &["'MR'"])),
        };
        if !self.at_double("{") {
            return Err(self.error("expected '{{' after MR", &["'{{'"]));
        }
        let open = self.bump().offset;
        self.bump();
        let mut statements = Vec::new();
        loop {
            while self.at(";") {
                self.bump();
            }
            if self.at_double("}") {
                break;
            }
            if self.peek().is_none() || self.at("}") {
                return Err(self.error("unterminated MR block", &["statement", "'}}'"]));
            }
            statements.push(self.statement()?);
        }
        let close = self.bump();
        let last_line = self.bump().line;
        if self.peek().is_some() {
            return Err(self.error(
                "only one MR block is allowed per source",
                &["end of input"],
            ));
        }
        Ok((Block::new(statements), open, close.offset, mr.line, last_line))
    }

    fn statement(&mut self) -> PResult<Statement> {
        self.enter()?;
        let first = self.peek().expect("statement called at a token").clone();
        let kind = if first.is("for") {
            self.for_each()?
        } else if first.is("if") {
            self.bump();
            self.expect("(")?;
            let condition = self.expr()?;
            self.expect(")")?;
            let body = self.body()?;
            StatementKind::If { condition, body }
        } else if first.is("var") {
            self.bump();
            let name = self.expect_ident("a variable name")?.text;
            self.expect("=")?;
            let init = self.expr()?;
            self.terminator();
            StatementKind::VarDecl {
                var_type: None,
                name,
                init,
            }
        } else if first.is("continue") {
            self.bump();
            self.terminator();
            StatementKind::Continue
        } else if first.kind == TokenKind::Identifier
            && self.peek_at(1).is_some_and(|t| t.kind == TokenKind::Identifier)
            && self.peek_at(2).is_some_and(|t| t.is("="))
        {
            let ty = self.bump().text;
            let name = self.bump().text;
            self.bump();
            let init = self.expr()?;
            self.terminator();
            StatementKind::VarDecl {
                var_type: Some(ty),
                name,
                init,
            }
        } else {
            let e = self.expr()?;
            self.terminator();
            StatementKind::Expr(e)
        };
        self.leave();
        let mut stmt = Statement::new(kind);
        stmt.line = first.line;
        stmt.span = (first.offset, self.prev_end());
        Ok(stmt)
    }

    fn terminator(&mut self) {
        if self.at(";") {
            self.bump();
        }
    }

    fn for_each(&mut self) -> PResult<StatementKind> {
        self.bump();
        self.expect("(")?;
        let var_type = if self.at("var") {
            self.bump();
            None
        } else {
            Some(self.expect_ident("a loop variable type or 'var'")?.text)
        };
        let var = self.expect_ident("a loop variable name")?.text;
        self.expect(":")?;
        let iterable = self.expr()?;
        self.expect(")")?;
        let body = self.body()?;
        if body.statements.is_empty() {
            return Err(ParseError {
                message: "for-each body must not be empty".into(),
                ..self.error("", &[])
            });
        }
        Ok(StatementKind::ForEach {
            var_type,
            var,
            iterable,
            body,
        })
    }

    fn body(&mut self) -> PResult<Block> {
        if self.at("{") {
            let open = self.bump().offset;
            let mut statements = Vec::new();
            loop {
                while self.at(";") {
                    self.bump();
                }
                if self.at("}") {
                    break;
                }
                if self.peek().is_none() {
                    return Err(self.error("unterminated block", &["statement", "'}'"]));
                }
                statements.push(self.statement()?);
            }
            let close = self.bump().offset;
            Ok(Block {
                statements,
                dangling_comments: Vec::new(),
                braces: Some((open, close)),
            })
        } else if self.peek().is_none() || self.at("}") {
            Err(self.error("expected a statement or block", &["'{'", "statement"]))
        } else {
            Ok(Block::new(vec![self.statement()?]))
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.enter()?;
        let mut left = self.and_expr()?;
        while self.at("||") {
            self.bump();
            let right = self.and_expr()?;
            left = binary(left, right, ExprKind::Or);
        }
        self.leave();
        Ok(left)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut left = self.unary()?;
        while self.at("&&") {
            self.bump();
            let right = self.unary()?;
            left = binary(left, right, ExprKind::And);
        }
        Ok(left)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.at("!") {
            self.enter()?;
            let bang = self.bump();
            let inner = self.unary()?;
            self.leave();
            let end = inner.end;
            return Ok(Expr {
                kind: ExprKind::Not(Box::new(inner)),
                pos: bang.pos(),
                end,
            });
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        let mut chained = 0;
        while self.at(".") {
            chained += 1;
            if chained > MAX_DEPTH {
                return Err(self.error("method chain too long", &[]));
            }
            self.bump();
            let name = self.expect_ident("a method name")?;
            let args = self.args()?;
            let pos = e.pos;
            e = Expr {
                kind: ExprKind::Method {
                    receiver: Box::new(e),
                    name: name.text.clone(),
                    name_pos: name.pos(),
                    args,
                },
                pos,
                end: self.prev_end(),
            };
        }
        Ok(e)
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect("(")?;
        let mut args = Vec::new();
        if self.at(")") {
            self.bump();
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.at(",") {
                self.bump();
            } else if self.at(")") {
                self.bump();
                return Ok(args);
            } else {
                return Err(self.error("expected ',' or ')' after argument", &["','", "')'"]));
            }
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let Some(t) = self.peek().cloned() else {
            return Err(self.error("expected an expression", &["expression"]));
        };
        let kind = match t.kind {
            TokenKind::Identifier => {
                self.bump();
                if self.at("(") {
                    let args = self.args()?;
                    match Construct::from_name(&t.text) {
                        Some(construct) => ExprKind::Construct { construct, args },
                        None => ExprKind::Call {
                            name: t.text.clone(),
                            args,
                        },
                    }
                } else {
                    ExprKind::Ident(t.text.clone())
                }
            }
            TokenKind::IntegerLiteral => {
                self.bump();
                match t.text.parse::<i64>() {
                    Ok(v) => ExprKind::Int(v),
                    Err(_) => {
                        self.i -= 1;
                        return Err(self.error("integer literal out of range", &[]));
                    }
                }
            }
            TokenKind::StringLiteral => {
                self.bump();
                ExprKind::Str(unescape_string(&t.text))
            }
            TokenKind::Keyword if t.text == "true" || t.text == "false" => {
                self.bump();
                ExprKind::Bool(t.text == "true")
            }
            TokenKind::Punctuation if t.text == "(" => {
                self.enter()?;
                self.bump();
                let inner = self.expr()?;
                self.expect(")")?;
                self.leave();
                return Ok(inner);
            }
            _ => return Err(self.error("expected an expression", &["expression"])),
        };
        Ok(Expr {
            kind,
            pos: t.pos(),
            end: self.prev_end(),
        })
    }
}

fn binary(left: Expr, right: Expr, make: fn(Box<Expr>, Box<Expr>) -> ExprKind) -> Expr {
    let pos = left.pos;
    let end = right.end;
    Expr {
        kind: make(Box::new(left), Box::new(right)),
        pos,
        end,
    }
}

/// Parses one EMR.
pub fn parse_emr(source: &str) -> Result<EmrAst, ParseError> {
    let lexed = tokenize(source)?;
    let toks = significant(&lexed.tokens);
    let eof_pos = {
        let line = 1 + source.matches('\n').count() as u32;
        let column = 1 + source.rsplit('\n').next().unwrap_or("").chars().count() as u32;
        (line, column)
    };
    let mut parser = Parser {
        toks,
        i: 0,
        depth: 0,
        eof_pos,
    };
    let mr_offset = parser.peek().map_or(0, |t| t.offset);
    let (body, open_offset, close_offset, first_line, last_line) = parser.program()?;
    let mut ast = EmrAst::new(Vec::new());
    ast.body = body;
    ast.source_span = (first_line, last_line);
    ast.renumber();
    attach_comments(&mut ast, &lexed.tokens, mr_offset, open_offset, close_offset);
    Ok(ast)
}

struct Comment {
    offset: usize,
    line: u32,
    text: String,
    /// Offset and line of the previous significant token.
    prev: Option<(usize, u32)>,
}

fn attach_comments(
    ast: &mut EmrAst,
    tokens: &[Token],
    mr_offset: usize,
    open_offset: usize,
    close_offset: usize,
) {
    let mut comments = Vec::new();
    let mut prev = None;
    for t in tokens {
        if let Some(body) = t.comment_body() {
            comments.push(Comment {
                offset: t.offset,
                line: t.line,
                text: body.to_string(),
                prev,
            });
        } else {
            // the last line of a multi-line token is where it ends; only
            // comments can span lines and those are excluded here
            prev = Some((t.offset, t.line));
        }
    }

    let mut notes = Vec::new();
    for c in comments {
        if c.offset < mr_offset {
            ast.leading_comments.push(c.text);
        } else if c.offset > close_offset {
            match c.prev {
                Some((_, line)) if line == c.line => join_note(&mut ast.close_note, c.text),
                _ => ast.trailing_comments.push(c.text),
            }
        } else {
            match c.prev {
                Some((p, line)) if line == c.line && p <= open_offset + 1 => {
                    join_note(&mut ast.open_note, c.text)
                }
                Some((p, line)) if line == c.line && owner_of(&ast.body, p).is_some() => {
                    notes.push((p, c.text))
                }
                _ => place_standalone(&mut ast.body, c, &mut notes),
            }
        }
    }

    // notes depend on the final inline-if decision, which depends on leading
    // comments, so they go in last
    for (p, text) in notes {
        if let Some(path) = owner_of(&ast.body, p) {
            let stmt = statement_at_mut(&mut ast.body, &path);
            let ordinal = line_for(stmt, p);
            match stmt.notes.get_mut(&ordinal) {
                Some(existing) => {
                    existing.push(' ');
                    existing.push_str(&text);
                }
                None => {
                    stmt.notes.insert(ordinal, text);
                }
            }
        }
    }
}

fn join_note(slot: &mut Option<String>, text: String) {
    match slot {
        Some(existing) => {
            existing.push(' ');
            existing.push_str(&text);
        }
        None => *slot = Some(text),
    }
}

fn contains(span: (usize, usize), offset: usize) -> bool {
    span.0 <= offset && offset < span.1
}

/// Path (child indices) to the deepest statement whose span holds `offset`,
/// stopping at an inline `if ... continue;`.
fn owner_of(block: &Block, offset: usize) -> Option<Vec<usize>> {
    let (i, stmt) = block
        .statements
        .iter()
        .enumerate()
        .find(|(_, s)| contains(s.span, offset))?;
    let mut path = vec![i];
    // `if (c) continue;` written on one line prints as one line, so its
    // comment belongs to the `if`
    let one_line = stmt.is_inline_if()
        && stmt.body().is_some_and(|b| b.statements[0].line == stmt.line);
    if !one_line {
        if let Some(inner) = stmt.body().and_then(|b| owner_of(b, offset)) {
            path.extend(inner);
        }
    }
    Some(path)
}

fn statement_at_mut<'a>(block: &'a mut Block, path: &[usize]) -> &'a mut Statement {
    let stmt = &mut block.statements[path[0]];
    if path.len() == 1 {
        return stmt;
    }
    match &mut stmt.kind {
        StatementKind::ForEach { body, .. } | StatementKind::If { body, .. } => {
            statement_at_mut(body, &path[1..])
        }
        _ => unreachable!("path descends only through bodies"),
    }
}

/// Ordinal of the own line whose anchor is the last one at or before `offset`.
fn line_for(stmt: &Statement, offset: usize) -> usize {
    own_lines(stmt)
        .iter()
        .enumerate()
        .rfind(|(_, l)| l.anchor <= offset)
        .map(|(i, _)| i)
        .unwrap_or(0)
}

fn place_standalone(block: &mut Block, c: Comment, notes: &mut Vec<(usize, String)>) {
    let hit = block
        .statements
        .iter()
        .position(|s| s.span.0 < c.offset && c.offset < s.span.1);
    let Some(i) = hit else {
        match block.statements.iter_mut().find(|s| s.span.0 > c.offset) {
            Some(next) => next.leading_comments.push(c.text),
            None => block.dangling_comments.push(c.text),
        }
        return;
    };
    let stmt = &mut block.statements[i];
    let descend = match stmt.body() {
        Some(body) => match body.braces {
            Some((open, close)) => open < c.offset && c.offset < close,
            None => body.statements.iter().any(|s| contains(s.span, c.offset)),
        },
        None => false,
    };
    if descend {
        if let StatementKind::ForEach { body, .. } | StatementKind::If { body, .. } =
            &mut stmt.kind
        {
            place_standalone(body, c, notes);
        }
    } else {
        // inside the statement's own lines, e.g. between arguments of a
        // multi-line call
        let anchor = c.prev.map_or(stmt.span.0, |(p, _)| p.max(stmt.span.0));
        notes.push((anchor, c.text));
    }
}

/// Statement explanations keyed by statement index.
pub fn explanations(ast: &EmrAst) -> BTreeMap<usize, String> {
    ast.statements()
        .into_iter()
        .filter_map(|s| s.explanation().map(|e| (s.index, e)))
        .collect()
}
