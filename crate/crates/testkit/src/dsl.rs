//! Generators for EMR syntax trees, token streams and defect injection.

use std::collections::BTreeMap;

use emrkit_core::*;
use proptest::prelude::*;

pub const RESERVED: &[&str] = &["for", "if", "var", "continue", "true", "false"];

pub fn ident() -> impl Strategy<Value = String> {
    "[a-z][a-zA-Z0-9_]{0,6}".prop_filter("not a keyword", |s| !RESERVED.contains(&s.as_str()))
}

pub fn type_name() -> impl Strategy<Value = String> {
    "[A-Z][a-z]{1,6}"
}

pub fn comment_text() -> impl Strategy<Value = String> {
    "[ -~]{0,12}".prop_map(|s| s.trim().to_string())
}

fn construct_expr(inner: BoxedStrategy<Expr>) -> impl Strategy<Value = Expr> {
    (proptest::sample::select(Construct::ALL.to_vec()), 0usize..=3)
        .prop_flat_map(move |(c, n)| {
            let n = if c.arities().contains(&n) { n } else { c.arities()[0] };
            proptest::collection::vec(inner.clone(), n)
                .prop_map(move |args| Expr::construct(c, args))
        })
}

pub fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        ident().prop_map(Expr::ident),
        any::<i64>().prop_map(|v| Expr::new(ExprKind::Int(v))),
        "[ -~]{0,6}".prop_map(|s| Expr::new(ExprKind::Str(s))),
        any::<bool>().prop_map(|b| Expr::new(ExprKind::Bool(b))),
    ];
    leaf.prop_recursive(4, 32, 3, |inner| {
        let args = proptest::collection::vec(inner.clone(), 0..3);
        prop_oneof![
            construct_expr(inner.clone().boxed()),
            (ident(), args.clone()).prop_map(|(n, a)| Expr::call(n, a)),
            (inner.clone(), ident(), args).prop_map(|(r, n, a)| Expr::method(r, n, a)),
            inner.clone().prop_map(|e| Expr::new(ExprKind::Not(Box::new(e)))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expr::new(ExprKind::And(Box::new(a), Box::new(b)))),
            (inner.clone(), inner)
                .prop_map(|(a, b)| Expr::new(ExprKind::Or(Box::new(a), Box::new(b)))),
        ]
    })
}

fn decorate(
    kind: StatementKind,
    leading: Vec<String>,
    note: Option<String>,
) -> Statement {
    let mut s = Statement::new(kind);
    s.leading_comments = leading;
    if let Some(n) = note {
        s.notes = BTreeMap::from([(0, n)]);
    }
    s
}

fn block(stmts: Vec<Statement>, dangling: Vec<String>) -> Block {
    let mut b = Block::new(stmts);
    b.dangling_comments = dangling;
    b
}

pub fn statement() -> impl Strategy<Value = Statement> {
    let comments = || proptest::collection::vec(comment_text(), 0..2);
    let note = || proptest::option::weighted(0.3, comment_text());
    let leaf = prop_oneof![
        3 => expr().prop_map(StatementKind::Expr),
        2 => (proptest::option::of(type_name()), ident(), expr())
            .prop_map(|(var_type, name, init)| StatementKind::VarDecl { var_type, name, init }),
        1 => Just(StatementKind::Continue),
    ];
    let leaf = (leaf, comments(), note()).prop_map(|(k, c, n)| decorate(k, c, n));
    leaf.prop_recursive(3, 24, 4, move |inner| {
        let body = |min| {
            (
                proptest::collection::vec(inner.clone(), min..4),
                proptest::collection::vec(comment_text(), 0..2),
            )
                .prop_map(|(s, d)| block(s, d))
        };
        let kind = prop_oneof![
            (proptest::option::of(type_name()), ident(), expr(), body(1)).prop_map(
                |(var_type, var, iterable, body)| StatementKind::ForEach {
                    var_type,
                    var,
                    iterable,
                    body
                }
            ),
            (expr(), body(0)).prop_map(|(condition, body)| StatementKind::If { condition, body }),
            expr().prop_map(|condition| StatementKind::If {
                condition,
                body: Block::new(vec![Statement::new(StatementKind::Continue)]),
            }),
        ];
        (kind, proptest::collection::vec(comment_text(), 0..2), proptest::option::weighted(0.3, comment_text()))
            .prop_map(|(k, c, n)| decorate(k, c, n))
    })
}

pub fn program() -> impl Strategy<Value = EmrAst> {
    (
        proptest::collection::vec(statement(), 0..5),
        proptest::collection::vec(comment_text(), 0..2),
        proptest::option::weighted(0.3, comment_text()),
        proptest::option::weighted(0.3, comment_text()),
        proptest::collection::vec(comment_text(), 0..2),
        proptest::collection::vec(comment_text(), 0..2),
    )
        .prop_map(|(stmts, leading, open, close, trailing, dangling)| {
            let mut ast = EmrAst::new(stmts);
            ast.leading_comments = leading;
            ast.open_note = open;
            ast.close_note = close;
            ast.trailing_comments = trailing;
            ast.body.dangling_comments = dangling;
            ast
        })
}

/// Replaces the separating comma of every chosen two-argument IMPLIES with
/// ` &`. Returns the mutated source and the number of injected defects.
pub fn inject_ampersands(source: &str, choose: &[bool]) -> (String, usize) {
    let lexed = tokenize(source).unwrap();
    let toks = &lexed.tokens;
    let sig: Vec<usize> = (0..toks.len())
        .filter(|&i| toks[i].kind != TokenKind::Comment)
        .collect();
    let mut targets = Vec::new();
    let mut seen = 0;
    for (k, &i) in sig.iter().enumerate() {
        if toks[i].lexeme != "IMPLIES" || !sig.get(k + 1).is_some_and(|&j| toks[j].is_punct("(")) {
            continue;
        }
        let mut depth = 0;
        let mut commas = Vec::new();
        for &j in &sig[k + 1..] {
            match toks[j].lexeme.as_str() {
                "(" => depth += 1,
                ")" => {
                    depth -= 1;
                    if depth == 0 {
                        break;
                    }
                }
                "," if depth == 1 => commas.push(j),
                _ => {}
            }
        }
        if commas.len() == 1 {
            if choose.get(seen).copied().unwrap_or(false) {
                targets.push(commas[0]);
            }
            seen += 1;
        }
    }
    let mut out = String::new();
    for (i, t) in toks.iter().enumerate() {
        out.push_str(&t.trivia);
        if targets.contains(&i) {
            out.push_str(" &");
        } else {
            out.push_str(&t.lexeme);
        }
    }
    out.push_str(&lexed.trailing_trivia);
    (out, targets.len())
}

pub fn token_text() -> impl Strategy<Value = (TokenKind, String)> {
    prop_oneof![
        proptest::sample::select(vec!["MR", "for", "if", "var", "continue", "true", "false"])
            .prop_map(|k| (TokenKind::Keyword, k.to_string())),
        ident().prop_map(|s| (TokenKind::Identifier, s)),
        any::<i64>().prop_map(|v| (TokenKind::IntegerLiteral, v.to_string())),
        "[ -~]{0,8}".prop_map(|s| (TokenKind::StringLiteral, format!("{s:?}"))),
        proptest::sample::select(vec![
            "{{", "}}", "&&", "||", "{", "}", "(", ")", ";", ",", ".", ":", "=", "!", "&",
        ])
        .prop_map(|p| (TokenKind::Punctuation, p.to_string())),
        comment_text().prop_map(|c| (TokenKind::Comment, format!("//{c}"))),
    ]
}
