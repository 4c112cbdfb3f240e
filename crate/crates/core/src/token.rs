//! Tokenizer for EMR source text.
//!
//! Every token records the whitespace that preceded it, so the original
//! source can be rebuilt byte for byte from a [`Lexed`] value. Comments are
//! kept as tokens because they carry the per-statement explanations.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Reserved words of the DSL.
pub const KEYWORDS: &[&str] = &["MR", "for", "if", "var", "continue", "true", "false"];

/// Punctuation, longest first so that maximal munch falls out of a linear scan.
pub const PUNCTUATION: &[&str] = &[
    "{{", "}}", "&&", "||", "{", "}", "(", ")", ";", ",", ".", ":", "=", "!", "&",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenKind {
    Keyword,
    Identifier,
    IntegerLiteral,
    StringLiteral,
    Punctuation,
    Comment,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    /// 1-based line of the first character.
    pub line: u32,
    /// 1-based column, counted in characters.
    pub column: u32,
    /// Byte offset of the lexeme in the source.
    pub offset: usize,
    /// Whitespace between the previous token (or start of input) and this one.
    pub trivia: String,
}

impl Token {
    pub fn is_punct(&self, p: &str) -> bool {
        self.kind == TokenKind::Punctuation && self.lexeme == p
    }

    pub fn is_keyword(&self, k: &str) -> bool {
        self.kind == TokenKind::Keyword && self.lexeme == k
    }

    pub fn end(&self) -> usize {
        self.offset + self.lexeme.len()
    }

    /// Text of a comment token without the leading `//`, trimmed.
    pub fn comment_body(&self) -> Option<&str> {
        (self.kind == TokenKind::Comment).then(|| self.lexeme.trim_start_matches("//").trim())
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.lexeme)
    }
}

/// Output of [`tokenize`]: the tokens plus whitespace after the last one.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Lexed {
    pub tokens: Vec<Token>,
    pub trailing_trivia: String,
}

impl Lexed {
    /// Rebuilds the exact source text.
    pub fn reconstruct(&self) -> String {
        let mut out = String::new();
        for t in &self.tokens {
            out.push_str(&t.trivia);
            out.push_str(&t.lexeme);
        }
        out.push_str(&self.trailing_trivia);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("illegal character {ch:?} at {line}:{column}")]
    IllegalCharacter { ch: char, line: u32, column: u32 },
    #[error("unterminated string literal starting at {line}:{column}")]
    UnterminatedString { line: u32, column: u32 },
}

impl LexError {
    pub fn line(&self) -> u32 {
        match self {
            LexError::IllegalCharacter { line, .. } | LexError::UnterminatedString { line, .. } => {
                *line
            }
        }
    }

    pub fn column(&self) -> u32 {
        match self {
            LexError::IllegalCharacter { column, .. }
            | LexError::UnterminatedString { column, .. } => *column,
        }
    }
}

struct Cursor<'a> {
    src: &'a str,
    offset: usize,
    line: u32,
    column: u32,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.offset..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.offset += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn bump_n(&mut self, bytes: usize) {
        let target = self.offset + bytes;
        while self.offset < target {
            self.bump();
        }
    }
}

/// Splits `source` into tokens.
pub fn tokenize(source: &str) -> Result<Lexed, LexError> {
    let mut cur = Cursor {
        src: source,
        offset: 0,
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();
    let mut trivia_start = 0;

    loop {
        while matches!(cur.peek(), Some(' ' | '\t' | '\n' | '\r')) {
            cur.bump();
        }
        let Some(c) = cur.peek() else { break };
        let trivia = source[trivia_start..cur.offset].to_string();
        let (start, line, column) = (cur.offset, cur.line, cur.column);
        let rest = cur.rest();

        let kind = if rest.starts_with("//") {
            // trailing blanks and a CR before the newline stay trivia
            let line = &rest[..rest.find('\n').unwrap_or(rest.len())];
            cur.bump_n(line.trim_end_matches([' ', '\t', '\r']).len());
            TokenKind::Comment
        } else if c == '"' {
            cur.bump();
            loop {
                match cur.bump() {
                    None | Some('\n') => return Err(LexError::UnterminatedString { line, column }),
                    Some('\\') => {
                        if cur.bump().is_none() {
                            return Err(LexError::UnterminatedString { line, column });
                        }
                    }
                    Some('"') => break,
                    Some(_) => {}
                }
            }
            TokenKind::StringLiteral
        } else if c.is_ascii_digit()
            || (c == '-' && rest[1..].starts_with(|d: char| d.is_ascii_digit()))
        {
            cur.bump();
            while matches!(cur.peek(), Some(d) if d.is_ascii_digit()) {
                cur.bump();
            }
            TokenKind::IntegerLiteral
        } else if c.is_ascii_alphabetic() || c == '_' {
            while matches!(cur.peek(), Some(d) if d.is_ascii_alphanumeric() || d == '_') {
                cur.bump();
            }
            if KEYWORDS.contains(&&source[start..cur.offset]) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            }
        } else if let Some(p) = PUNCTUATION.iter().find(|p| rest.starts_with(*p)) {
            cur.bump_n(p.len());
            TokenKind::Punctuation
        } else {
            return Err(LexError::IllegalCharacter { ch: c, line, column });
        };

        tokens.push(Token {
            kind,
            lexeme: source[start..cur.offset].to_string(),
            line,
            column,
            offset: start,
            trivia,
        });
        trivia_start = cur.offset;
    }

    Ok(Lexed {
        tokens,
        trailing_trivia: source[trivia_start..].to_string(),
    })
}

/// Decodes the body of a string literal lexeme (including its quotes).
pub fn unescape_string(lexeme: &str) -> String {
    let inner = &lexeme[1..lexeme.len() - 1];
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('r') => out.push('\r'),
            Some(other) => out.push(other),
            None => {}
        }
    }
    out
}

/// Inverse of [`unescape_string`]; returns a quoted lexeme.
pub fn escape_string(value: &str) -> String {
    let mut out = String::with_capacity(value.len() + 2);
    out.push('"');
    for c in value.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            other => out.push(other),
        }
    }
    out.push('"');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        tokenize(src)
            .unwrap()
            .tokens
            .into_iter()
            .map(|t| (t.kind, t.lexeme))
            .collect()
    }

    #[test]
    fn empty_mr_block() {
        assert_eq!(
            kinds("MR {{ }}"),
            vec![
                (TokenKind::Keyword, "MR".into()),
                (TokenKind::Punctuation, "{{".into()),
                (TokenKind::Punctuation, "}}".into()),
            ]
        );
    }

    #[test]
    fn continue_line_keeps_comment() {
        let src = "if (!isSearchAction(searchAction)) continue; //(2) ";
        let toks = kinds(src);
        assert!(toks.contains(&(TokenKind::Identifier, "isSearchAction".into())));
        assert!(toks.contains(&(TokenKind::Keyword, "continue".into())));
        assert_eq!(toks.last().unwrap(), &(TokenKind::Comment, "//(2)".into()));
    }

    #[test]
    fn maximal_munch_on_ampersands() {
        let toks = kinds("a & b && c &&& d");
        let puncts: Vec<_> = toks
            .iter()
            .filter(|(k, _)| *k == TokenKind::Punctuation)
            .map(|(_, l)| l.as_str())
            .collect();
        assert_eq!(puncts, vec!["&", "&&", "&&", "&"]);
    }

    #[test]
    fn positions_are_exact() {
        let src = "MR {{\n  foo(1);\n}}";
        let lexed = tokenize(src).unwrap();
        let foo = &lexed.tokens[2];
        assert_eq!((foo.line, foo.column), (2, 3));
        assert_eq!(&src[foo.offset..foo.end()], "foo");
    }

    #[test]
    fn columns_count_characters() {
        let lexed = tokenize("\"é\" x").unwrap();
        assert_eq!(lexed.tokens[1].column, 5);
    }

    #[test]
    fn illegal_character_reports_position() {
        assert_eq!(
            tokenize("MR {{\n  a | b }}").unwrap_err(),
            LexError::IllegalCharacter {
                ch: '|',
                line: 2,
                column: 5
            }
        );
        assert!(matches!(
            tokenize("x = \"open"),
            Err(LexError::UnterminatedString { line: 1, column: 5 })
        ));
    }

    #[test]
    fn crlf_comment_excludes_carriage_return() {
        let lexed = tokenize("a // c\r\nb").unwrap();
        assert_eq!(lexed.tokens[1].lexeme, "// c");
        assert_eq!(lexed.reconstruct(), "a // c\r\nb");
    }

    #[test]
    fn negative_integers() {
        assert_eq!(kinds("-12"), vec![(TokenKind::IntegerLiteral, "-12".into())]);
        assert!(tokenize("-x").is_err());
    }

    #[test]
    fn string_escapes_round_trip() {
        for s in ["plain", "with \"quotes\"", "back\\slash", "tab\tnew\nline"] {
            assert_eq!(unescape_string(&escape_string(s)), s);
        }
    }
}
