//! Lexer, parser, validator, canonical printer, statement classifier and
//! auto-repairer for the EMR language.
//!
//! ```
//! use emrkit_core::{parse_emr, pretty_print, validate, ApiCatalog};
//!
//! let ast = parse_emr("MR {{ IMPLIES(NOT(false), true) }}").unwrap();
//! assert!(validate(&ast, &ApiCatalog::empty()).is_empty());
//! assert_eq!(pretty_print(&ast), "MR {{\n    IMPLIES(NOT(false), true);\n}}");
//! ```

pub mod ast;
pub mod catalog;
pub mod classify;
pub mod layout;
pub mod parser;
pub mod printer;
pub mod repair;
pub mod token;
pub mod validate;

pub use ast::{Block, Construct, EmrAst, Expr, ExprKind, Pos, Statement, StatementKind};
pub use catalog::{ApiCatalog, ApiEntry, ApiParam, CatalogError};
pub use classify::{classify_statements, statement_count, statement_lines, StatementClass, StatementLine};
pub use layout::{canonical_lines, render_expr, CanonicalLine, LineRole};
pub use parser::{explanations, parse_emr, ParseError};
pub use printer::pretty_print;
pub use repair::{repair, RepairEntry, RepairLog, WLC_AMP};
pub use token::{tokenize, LexError, Lexed, Token, TokenKind};
pub use validate::{
    diagnostics_to_json_lines, has_errors, stub_names, validate, Diagnostic, Severity,
    BUILTIN_METHODS,
};
