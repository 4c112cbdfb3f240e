use std::collections::{BTreeMap, BTreeSet};

use emrkit_grader::{
    percent, summarize_annotations, summarize_survey, tally_naive, Label, LikertResponse, Rating,
    StatementAnnotation, SurveyStatement,
};
use proptest::prelude::*;

fn annotations() -> impl Strategy<Value = Vec<StatementAnnotation>> {
    prop::collection::vec(prop::collection::btree_set(0usize..13, 1..4), 0..80).prop_map(|sets| {
        sets.into_iter()
            .enumerate()
            .map(|(i, s)| StatementAnnotation {
                emr: format!("e{}", i % 7),
                line: i,
                labels: s.into_iter().map(|k| Label::ALL[k]).collect(),
                note: None,
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn distribution_is_conserved_and_consistent(a in annotations(), extra in 0usize..20) {
        let statements = a.len() + extra;
        let r = summarize_annotations(&a, statements);
        let counts: Vec<usize> = Label::ALL.iter().map(|l| r.counts[l]).collect();
        prop_assert_eq!(&counts, &tally_naive(&a));
        prop_assert_eq!(counts.iter().sum::<usize>(), r.labels);
        prop_assert!(r.labels >= r.annotated_statements);
        let multi = a.iter().any(|s| s.labels.len() > 1);
        prop_assert_eq!(r.labels == r.annotated_statements, !multi);
        for l in Label::ALL {
            if statements > 0 {
                let exact = r.counts[&l] as f64 * 100.0 / statements as f64;
                prop_assert!((r.percentages[&l] - exact).abs() <= 0.05 + 1e-9);
            }
        }
        let correct = a.iter().filter(|s| s.labels.iter().all(|l| matches!(l, Label::C | Label::CLC | Label::AI))).count();
        prop_assert_eq!(r.correct_statements, correct);
    }

    #[test]
    fn survey_rows_add_up(ratings in prop::collection::vec((0usize..6, 0usize..5), 0..200)) {
        let responses: Vec<LikertResponse> = ratings
            .iter()
            .enumerate()
            .map(|(i, &(s, r))| LikertResponse {
                subject: format!("X{i}"),
                statement: SurveyStatement::ALL[s],
                respondent: "P".into(),
                rating: Rating::ALL[r],
            })
            .collect();
        let report = summarize_survey(&responses);
        let mut expected: BTreeMap<SurveyStatement, usize> = BTreeMap::new();
        for r in &responses {
            *expected.entry(r.statement).or_default() += 1;
        }
        for row in &report.rows {
            prop_assert_eq!(row.counts.values().sum::<usize>(), row.responses);
            prop_assert_eq!(row.responses, expected.get(&row.statement).copied().unwrap_or(0));
            prop_assert_eq!(row.positive_rate.is_none(), row.responses == 0);
        }
        let present: BTreeSet<_> = report.rows.iter().map(|r| r.statement).collect();
        prop_assert!(expected.keys().all(|s| present.contains(s)));
    }

    #[test]
    fn percent_matches_float_rounding_away_from_ties(count in 0usize..10_000, total in 1usize..10_000) {
        let exact = count as f64 * 100.0 / total as f64;
        prop_assert!((percent(count, total, 1) - exact).abs() <= 0.05 + 1e-9);
    }
}
