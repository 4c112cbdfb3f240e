use emrkit_core::*;
use emrkit_testkit::dsl::{inject_ampersands, program, token_text};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printed_programs_reparse_to_the_same_tree(ast in program()) {
        let printed = pretty_print(&ast);
        let reparsed = parse_emr(&printed)
            .map_err(|e| TestCaseError::fail(format!("{e}\n{printed}")))?;
        prop_assert!(reparsed.structurally_eq(&ast), "{}", printed);
        prop_assert_eq!(pretty_print(&reparsed), printed);
    }

    #[test]
    fn tokens_survive_print_and_relex(toks in proptest::collection::vec(token_text(), 0..40)) {
        let mut src = String::new();
        for (kind, text) in &toks {
            src.push_str(text);
            src.push_str(if *kind == TokenKind::Comment { "\n" } else { " " });
        }
        let lexed = tokenize(&src).unwrap();
        let got: Vec<_> = lexed.tokens.iter().map(|t| (t.kind, t.lexeme.clone())).collect();
        prop_assert_eq!(got, toks);
        prop_assert_eq!(lexed.reconstruct(), src);
    }

    #[test]
    fn repair_undoes_injected_defects(
        ast in program(),
        choose in proptest::collection::vec(any::<bool>(), 8),
    ) {
        let clean = pretty_print(&ast);
        prop_assert_eq!(&repair(&clean).0, &clean);
        let (broken, injected) = inject_ampersands(&clean, &choose);
        let (fixed, log) = repair(&broken);
        prop_assert_eq!(log.count(WLC_AMP), injected);
        prop_assert_eq!(&fixed, &clean);
        prop_assert!(parse_emr(&fixed).is_ok());
        let lines: Vec<&str> = broken.lines().collect();
        for e in &log.entries {
            prop_assert!(lines[e.line as usize - 1].contains(&e.before));
        }
        let (twice, second) = repair(&fixed);
        prop_assert_eq!(twice, fixed);
        prop_assert!(second.is_empty());
    }

    #[test]
    fn catalog_growth_never_adds_stubs(ast in program(), picks in proptest::collection::vec(any::<bool>(), 16)) {
        let mut names: Vec<String> = Vec::new();
        for e in ast.exprs() {
            for n in e.call_names() {
                if !names.iter().any(|m| m == n) {
                    names.push(n.to_string());
                }
            }
        }
        let stubs = |c: &ApiCatalog| {
            validate(&ast, c).iter().filter(|d| d.severity == Severity::Stub).count()
        };
        let mut catalog = ApiCatalog::empty();
        let mut previous = stubs(&catalog);
        for (name, pick) in names.iter().zip(picks.iter().cycle()) {
            if !pick {
                continue;
            }
            catalog = catalog.with(ApiEntry::new(name.clone(), &[], "boolean", "test entry"));
            let now = stubs(&catalog);
            prop_assert!(now <= previous);
            previous = now;
        }
        for d in validate(&ast, &ApiCatalog::empty()) {
            if d.severity == Severity::Stub {
                prop_assert!(d.symbol.is_some());
            }
        }
    }

    #[test]
    fn every_statement_line_gets_one_class(ast in program()) {
        let lines = statement_lines(&ast);
        let classes = classify_statements(&ast);
        prop_assert_eq!(lines.len(), classes.len());
        let units = canonical_lines(&ast).iter().filter(|l| l.role == LineRole::Unit).count();
        prop_assert_eq!(units, lines.len());
        for (l, (line, class)) in lines.iter().zip(&classes) {
            prop_assert_eq!(l.line, *line);
            prop_assert_eq!(l.class, *class);
            if *class == StatementClass::Simple {
                prop_assert!(l.invocations.is_empty());
            } else {
                prop_assert!(!l.invocations.is_empty());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn reflowed_sources_round_trip(
        ast in program(),
        gaps in proptest::collection::vec(proptest::sample::select(vec![" ", "\n", "\t", "\n\n    ", "  \n"]), 64),
    ) {
        let printed = pretty_print(&ast);
        let lexed = tokenize(&printed).unwrap();
        let mut src = String::new();
        let mut after_comment = false;
        for (i, t) in lexed.tokens.iter().enumerate() {
            let gap = gaps[i % gaps.len()];
            if i > 0 {
                src.push_str(if after_comment && !gap.contains('\n') { "\n" } else { gap });
            }
            src.push_str(&t.lexeme);
            after_comment = t.kind == TokenKind::Comment;
        }
        let first = parse_emr(&src).map_err(|e| TestCaseError::fail(format!("{e}\n{src}")))?;
        let again = parse_emr(&pretty_print(&first)).unwrap();
        prop_assert!(again.structurally_eq(&first), "{}", src);
        prop_assert_eq!(tokenize(&src).unwrap().reconstruct(), src);
    }
}

#[test]
fn mutation_helper_counts_only_two_argument_calls() {
    let src = "MR {{ IMPLIES(a(), IMPLIES(b(), c())); IMPLIES(x) }}";
    let (out, n) = inject_ampersands(src, &[true, true, true]);
    assert_eq!(n, 2);
    assert_eq!(out, "MR {{ IMPLIES(a() & IMPLIES(b() & c())); IMPLIES(x) }}");
}
