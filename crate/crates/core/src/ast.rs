//! Syntax tree for a single executable metamorphic relation.
//!
//! Nodes carry source positions for diagnostics. Two trees are
//! *structurally* equal when they agree on everything except positions;
//! see [`EmrAst::structurally_eq`].

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

/// Source location of a node's first token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Pos {
    pub line: u32,
    pub column: u32,
    pub offset: usize,
}

/// The built-in language constructs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Construct {
    Input,
    Output,
    Create,
    Implies,
    Not,
    Or,
    And,
}

impl Construct {
    pub const ALL: [Construct; 7] = [
        Construct::Input,
        Construct::Output,
        Construct::Create,
        Construct::Implies,
        Construct::Not,
        Construct::Or,
        Construct::And,
    ];

    pub fn from_name(name: &str) -> Option<Construct> {
        Construct::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            Construct::Input => "Input",
            Construct::Output => "Output",
            Construct::Create => "CREATE",
            Construct::Implies => "IMPLIES",
            Construct::Not => "NOT",
            Construct::Or => "OR",
            Construct::And => "AND",
        }
    }

    /// Accepted argument counts.
    pub fn arities(self) -> &'static [usize] {
        match self {
            Construct::Input | Construct::Not => &[1],
            Construct::Output => &[1, 2],
            Construct::Create | Construct::Implies | Construct::Or | Construct::And => &[2],
        }
    }

    /// Constructs whose value is a boolean.
    pub fn is_logical(self) -> bool {
        matches!(
            self,
            Construct::Create | Construct::Implies | Construct::Not | Construct::Or | Construct::And
        )
    }
}

impl fmt::Display for Construct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
    /// Byte offset just past the node's last token.
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ExprKind {
    Construct { construct: Construct, args: Vec<Expr> },
    /// Free function call; resolved against the API catalog or stub bindings.
    Call { name: String, args: Vec<Expr> },
    /// `receiver.name(args)`; chains nest through `receiver`.
    Method {
        receiver: Box<Expr>,
        name: String,
        name_pos: Pos,
        args: Vec<Expr>,
    },
    Ident(String),
    Int(i64),
    Str(String),
    Bool(bool),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn new(kind: ExprKind) -> Self {
        Expr {
            kind,
            pos: Pos::default(),
            end: 0,
        }
    }

    pub fn construct(construct: Construct, args: Vec<Expr>) -> Self {
        Expr::new(ExprKind::Construct { construct, args })
    }

    pub fn call(name: impl Into<String>, args: Vec<Expr>) -> Self {
        Expr::new(ExprKind::Call {
            name: name.into(),
            args,
        })
    }

    pub fn method(receiver: Expr, name: impl Into<String>, args: Vec<Expr>) -> Self {
        Expr::new(ExprKind::Method {
            receiver: Box::new(receiver),
            name: name.into(),
            name_pos: Pos::default(),
            args,
        })
    }

    pub fn ident(name: impl Into<String>) -> Self {
        Expr::new(ExprKind::Ident(name.into()))
    }

    /// Visits this node and all descendants in pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Construct { args, .. } | ExprKind::Call { args, .. } => {
                args.iter().for_each(|a| a.walk(f))
            }
            ExprKind::Method { receiver, args, .. } => {
                receiver.walk(f);
                args.iter().for_each(|a| a.walk(f));
            }
            ExprKind::Not(e) => e.walk(f),
            ExprKind::And(a, b) | ExprKind::Or(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            ExprKind::Ident(_) | ExprKind::Int(_) | ExprKind::Str(_) | ExprKind::Bool(_) => {}
        }
    }

    /// Names of free-function and method calls in this subtree.
    pub fn call_names(&self) -> Vec<&str> {
        let mut names = Vec::new();
        self.walk(&mut |e| match &e.kind {
            ExprKind::Call { name, .. } | ExprKind::Method { name, .. } => names.push(name.as_str()),
            _ => {}
        });
        names
    }

    /// True when the subtree contains at least one non-construct call.
    pub fn has_invocation(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            found |= matches!(e.kind, ExprKind::Call { .. } | ExprKind::Method { .. })
        });
        found
    }

    pub fn as_construct(&self) -> Option<(Construct, &[Expr])> {
        match &self.kind {
            ExprKind::Construct { construct, args } => Some((*construct, args)),
            _ => None,
        }
    }

    fn strip(&mut self) {
        self.pos = Pos::default();
        self.end = 0;
        match &mut self.kind {
            ExprKind::Construct { args, .. } | ExprKind::Call { args, .. } => {
                args.iter_mut().for_each(Expr::strip)
            }
            ExprKind::Method {
                receiver,
                args,
                name_pos,
                ..
            } => {
                *name_pos = Pos::default();
                receiver.strip();
                args.iter_mut().for_each(Expr::strip);
            }
            ExprKind::Not(e) => e.strip(),
            ExprKind::And(a, b) | ExprKind::Or(a, b) => {
                a.strip();
                b.strip();
            }
            ExprKind::Ident(_) | ExprKind::Int(_) | ExprKind::Str(_) | ExprKind::Bool(_) => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Block {
    pub statements: Vec<Statement>,
    /// Full-line comments after the last statement.
    pub dangling_comments: Vec<String>,
    /// Offsets of the `{` and `}` when the block was written with braces.
    #[serde(skip)]
    pub braces: Option<(usize, usize)>,
}

impl Block {
    pub fn new(statements: Vec<Statement>) -> Self {
        Block {
            statements,
            ..Block::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Statement {
    /// Pre-order position within the MR, starting at 0.
    pub index: usize,
    pub line: u32,
    pub kind: StatementKind,
    /// Full-line comments directly above the statement.
    pub leading_comments: Vec<String>,
    /// Trailing comments keyed by the ordinal of the statement's own
    /// canonical line (header lines first, closing line last).
    pub notes: BTreeMap<usize, String>,
    /// Byte range `[start, end)` in the parsed source.
    #[serde(skip)]
    pub span: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum StatementKind {
    ForEach {
        /// Declared element type; `None` for `var`.
        var_type: Option<String>,
        var: String,
        iterable: Expr,
        body: Block,
    },
    If {
        condition: Expr,
        body: Block,
    },
    VarDecl {
        var_type: Option<String>,
        name: String,
        init: Expr,
    },
    Expr(Expr),
    Continue,
}

impl Statement {
    pub fn new(kind: StatementKind) -> Self {
        Statement {
            index: 0,
            line: 0,
            kind,
            leading_comments: Vec::new(),
            notes: BTreeMap::new(),
            span: (0, 0),
        }
    }

    pub fn body(&self) -> Option<&Block> {
        match &self.kind {
            StatementKind::ForEach { body, .. } | StatementKind::If { body, .. } => Some(body),
            _ => None,
        }
    }

    /// All trailing comments of the statement's own lines, joined by spaces.
    pub fn explanation(&self) -> Option<String> {
        if self.notes.is_empty() {
            None
        } else {
            Some(self.notes.values().cloned().collect::<Vec<_>>().join(" "))
        }
    }

    /// Expressions that belong to this statement but not to nested statements.
    pub fn own_exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            StatementKind::ForEach { iterable, .. } => vec![iterable],
            StatementKind::If { condition, .. } => vec![condition],
            StatementKind::VarDecl { init, .. } => vec![init],
            StatementKind::Expr(e) => vec![e],
            StatementKind::Continue => vec![],
        }
    }

    /// True for `if (cond) continue;`, which prints on a single line.
    pub fn is_inline_if(&self) -> bool {
        match &self.kind {
            StatementKind::If { body, .. } => {
                body.dangling_comments.is_empty()
                    && matches!(body.statements.as_slice(),
                        [s] if matches!(s.kind, StatementKind::Continue)
                            && s.leading_comments.is_empty()
                            && s.notes.is_empty())
            }
            _ => false,
        }
    }

    fn strip(&mut self) {
        self.line = 0;
        self.span = (0, 0);
        match &mut self.kind {
            StatementKind::ForEach { iterable, body, .. } => {
                iterable.strip();
                body.strip();
            }
            StatementKind::If { condition, body } => {
                condition.strip();
                body.strip();
            }
            StatementKind::VarDecl { init, .. } => init.strip(),
            StatementKind::Expr(e) => e.strip(),
            StatementKind::Continue => {}
        }
    }
}

impl Block {
    fn strip(&mut self) {
        self.braces = None;
        self.statements.iter_mut().for_each(Statement::strip);
    }

    /// Visits every statement in pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Statement)) {
        for s in &self.statements {
            f(s);
            if let Some(b) = s.body() {
                b.walk(f);
            }
        }
    }

    fn renumber(&mut self, next: &mut usize) {
        for s in &mut self.statements {
            s.index = *next;
            *next += 1;
            match &mut s.kind {
                StatementKind::ForEach { body, .. } | StatementKind::If { body, .. } => {
                    body.renumber(next)
                }
                _ => {}
            }
        }
    }
}

/// A parsed `MR {{ ... }}` program.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EmrAst {
    pub id: String,
    /// Comments before the `MR` keyword.
    pub leading_comments: Vec<String>,
    /// Comment on the `MR {{` line.
    pub open_note: Option<String>,
    pub body: Block,
    /// Comment on the closing `}}` line.
    pub close_note: Option<String>,
    /// Comments after the closing `}}`.
    pub trailing_comments: Vec<String>,
    /// First and last source line of the MR block.
    pub source_span: (u32, u32),
}

impl EmrAst {
    pub fn new(statements: Vec<Statement>) -> Self {
        let mut ast = EmrAst {
            id: "emr".to_string(),
            leading_comments: Vec::new(),
            open_note: None,
            body: Block::new(statements),
            close_note: None,
            trailing_comments: Vec::new(),
            source_span: (0, 0),
        };
        ast.renumber();
        ast
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    /// Reassigns pre-order statement indices.
    pub fn renumber(&mut self) {
        let mut next = 0;
        self.body.renumber(&mut next);
    }

    /// Every statement in pre-order.
    pub fn statements(&self) -> Vec<&Statement> {
        let mut out = Vec::new();
        self.body.walk(&mut |s| out.push(s));
        out
    }

    /// Every expression tree root owned by a statement, in pre-order.
    pub fn exprs(&self) -> Vec<&Expr> {
        self.statements()
            .into_iter()
            .flat_map(|s| s.own_exprs())
            .collect()
    }

    /// Copy with all source positions cleared.
    pub fn without_positions(&self) -> EmrAst {
        let mut copy = self.clone();
        copy.source_span = (0, 0);
        copy.body.strip();
        copy
    }

    /// Equality that ignores source positions.
    pub fn structurally_eq(&self, other: &EmrAst) -> bool {
        self.without_positions() == other.without_positions()
    }
}
