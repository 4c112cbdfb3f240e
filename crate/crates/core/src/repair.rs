//! Source-level auto-repair for recurring generation defects.
//!
//! Rules operate on the token stream so that string literals and comments
//! are never touched. Each rule is idempotent on its own output.

use serde::{Deserialize, Serialize};

use crate::token::{tokenize, Lexed, Token, TokenKind};

/// One applied rewrite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairEntry {
    /// 1-based line in the input source.
    pub line: u32,
    pub rule: String,
    /// Trimmed text of the input line.
    pub before: String,
    /// Trimmed text of the same line after repair.
    pub after: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RepairLog {
    pub entries: Vec<RepairEntry>,
}

impl RepairLog {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn count(&self, rule: &str) -> usize {
        self.entries.iter().filter(|e| e.rule == rule).count()
    }

    /// One JSON object per line.
    pub fn to_json_lines(&self) -> String {
        self.entries
            .iter()
            .map(|e| serde_json::to_string(e).expect("repair entries serialize") + "\n")
            .collect()
    }
}

/// A token edit produced by a rule: replace token `index` with `replacement`,
/// optionally dropping the whitespace in front of it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edit {
    pub index: usize,
    pub replacement: String,
    pub drop_trivia: bool,
}

pub struct RepairRule {
    pub id: &'static str,
    pub description: &'static str,
    /// Lexeme that, when it stops the parser, suggests this rule.
    pub trigger: &'static str,
    pub find: fn(&Lexed) -> Vec<Edit>,
}

pub const WLC_AMP: &str = "WLC-AMP";

/// Repair rules, applied in order.
pub static RULES: &[RepairRule] = &[RepairRule {
    id: WLC_AMP,
    description: "IMPLIES arguments must be separated by ',' not '&'",
    trigger: "&",
    find: find_implies_ampersand,
}];

/// Hint text for a parse error stopped at `lexeme`.
pub fn hint_for(lexeme: &str) -> Option<String> {
    RULES
        .iter()
        .find(|r| r.trigger == lexeme)
        .map(|r| format!("{}: {}; run repair", r.id, r.description))
}

/// `IMPLIES(x & y)`: a single argument whose top-level operator is `&`
/// becomes two arguments.
fn find_implies_ampersand(lexed: &Lexed) -> Vec<Edit> {
    let sig: Vec<(usize, &Token)> = lexed
        .tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| t.kind != TokenKind::Comment)
        .collect();
    let mut edits = Vec::new();
    for (k, (_, t)) in sig.iter().enumerate() {
        let opens_call = t.kind == TokenKind::Identifier
            && t.lexeme == "IMPLIES"
            && sig.get(k + 1).is_some_and(|(_, n)| n.is_punct("("));
        if !opens_call {
            continue;
        }
        let mut depth = 0usize;
        let mut commas = 0;
        let mut amps = Vec::new();
        let mut close = None;
        for (j, (_, tok)) in sig.iter().enumerate().skip(k + 1) {
            if tok.is_punct("(") {
                depth += 1;
            } else if tok.is_punct(")") {
                depth -= 1;
                if depth == 0 {
                    close = Some(j);
                    break;
                }
            } else if depth == 1 && tok.is_punct(",") {
                commas += 1;
            } else if depth == 1 && tok.is_punct("&") {
                amps.push(j);
            }
        }
        let Some(close) = close else { continue };
        if let ([amp], 0) = (amps.as_slice(), commas) {
            // operands on both sides
            if *amp > k + 2 && *amp + 1 < close {
                let index = sig[*amp].0;
                edits.push(Edit {
                    index,
                    replacement: ",".into(),
                    drop_trivia: !lexed.tokens[index].trivia.contains('\n'),
                });
            }
        }
    }
    edits
}

fn apply(lexed: &Lexed, edits: &[Edit]) -> String {
    let mut out = String::new();
    for (i, t) in lexed.tokens.iter().enumerate() {
        match edits.iter().find(|e| e.index == i) {
            Some(e) => {
                if !e.drop_trivia {
                    out.push_str(&t.trivia);
                }
                out.push_str(&e.replacement);
            }
            None => {
                out.push_str(&t.trivia);
                out.push_str(&t.lexeme);
            }
        }
    }
    out.push_str(&lexed.trailing_trivia);
    out
}

/// Applies every rule. Sources that do not tokenize, or that no rule
/// matches, come back unchanged with an empty log.
pub fn repair(source: &str) -> (String, RepairLog) {
    let mut current = source.to_string();
    let mut log = RepairLog::default();
    for rule in RULES {
        let Ok(lexed) = tokenize(&current) else {
            break;
        };
        let edits = (rule.find)(&lexed);
        if edits.is_empty() {
            continue;
        }
        let repaired = apply(&lexed, &edits);
        let before_lines: Vec<&str> = current.lines().collect();
        let after_lines: Vec<&str> = repaired.lines().collect();
        let mut lines: Vec<u32> = edits.iter().map(|e| lexed.tokens[e.index].line).collect();
        lines.sort_unstable();
        for line in lines {
            let at = line as usize - 1;
            log.entries.push(RepairEntry {
                line,
                rule: rule.id.to_string(),
                before: before_lines.get(at).unwrap_or(&"").trim().to_string(),
                after: after_lines.get(at).unwrap_or(&"").trim().to_string(),
            });
        }
        current = repaired;
    }
    (current, log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse_emr;

    #[test]
    fn splits_single_ampersand_argument() {
        let (out, log) = repair("MR {{ IMPLIES(a() & b()) }}");
        assert_eq!(out, "MR {{ IMPLIES(a(), b()) }}");
        assert_eq!(log.len(), 1);
        assert_eq!(log.entries[0].rule, WLC_AMP);
        assert_eq!(log.entries[0].before, "MR {{ IMPLIES(a() & b()) }}");
        assert!(parse_emr(&out).is_ok());
    }

    #[test]
    fn two_argument_call_with_ampersand_is_left_alone() {
        let src = "MR {{ IMPLIES(CREATE(Input(2),x) & userLoggedIn(), ok()) }}";
        let (out, log) = repair(src);
        assert_eq!(out, src);
        assert!(log.is_empty());
        assert!(!out.contains("&&"));
    }

    #[test]
    fn double_ampersand_is_not_a_defect() {
        let src = "MR {{ IMPLIES(a() && b(), c()) }}";
        assert_eq!(repair(src), (src.to_string(), RepairLog::default()));
    }

    #[test]
    fn ampersand_on_its_own_line_keeps_the_newline() {
        let src = "MR {{\nIMPLIES(\n  a()\n  & b()\n);\n}}";
        let (out, log) = repair(src);
        assert_eq!(out, "MR {{\nIMPLIES(\n  a()\n  , b()\n);\n}}");
        assert_eq!(log.entries[0].line, 4);
        assert_eq!(log.entries[0].before, "& b()");
        assert_eq!(log.entries[0].after, ", b()");
    }

    #[test]
    fn nested_implies_are_repaired_independently() {
        let src = "MR {{ IMPLIES(a() & IMPLIES(b() & c())) }}";
        let (out, log) = repair(src);
        assert_eq!(out, "MR {{ IMPLIES(a(), IMPLIES(b(), c())) }}");
        assert_eq!(log.count(WLC_AMP), 2);
    }

    #[test]
    fn ampersands_in_strings_and_comments_are_ignored() {
        let src = "MR {{ IMPLIES(a(\"x & y\"), b()) // p & q\n}}";
        assert!(repair(src).1.is_empty());
    }

    #[test]
    fn untokenizable_source_passes_through() {
        let src = "MR {{ IMPLIES(a() & b()) | }}";
        assert_eq!(repair(src).0, src);
    }

    #[test]
    fn ambiguous_double_defect_is_not_guessed() {
        let src = "MR {{ IMPLIES(a() & b() & c()) }}";
        assert!(repair(src).1.is_empty());
    }

    #[test]
    fn hint_names_the_rule() {
        assert!(hint_for("&").unwrap().starts_with("WLC-AMP"));
        assert!(hint_for(";").is_none());
    }
}
