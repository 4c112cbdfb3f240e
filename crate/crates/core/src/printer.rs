use crate::ast::EmrAst;
use crate::layout::canonical_lines;

/// Canonical text of `ast`: one line per layout line, four-space indent,
/// explanations as trailing `//` comments. No trailing newline.
pub fn pretty_print(ast: &EmrAst) -> String {
    canonical_lines(ast)
        .iter()
        .map(|l| l.render())
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse_emr;

    #[test]
    fn empty_block() {
        assert_eq!(pretty_print(&parse_emr("MR {{ }}").unwrap()), "MR {{\n}}");
    }

    #[test]
    fn simple_statement_stays_on_one_line() {
        let ast = parse_emr("MR {{ IMPLIES(NOT(false), true) }}").unwrap();
        assert_eq!(pretty_print(&ast), "MR {{\n    IMPLIES(NOT(false), true);\n}}");
    }

    #[test]
    fn notes_and_comments_are_kept() {
        let src = "// header\nMR {{ // open\n  var x = Input(1); // the source\n  // tail\n}} // end";
        let out = pretty_print(&parse_emr(src).unwrap());
        assert_eq!(
            out,
            "// header\nMR {{ // open\n    var x = Input(1); // the source\n    // tail\n}} // end"
        );
    }
}
