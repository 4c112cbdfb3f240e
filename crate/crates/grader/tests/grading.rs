use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use emrkit_core::parse_emr;
use emrkit_grader::{
    emr_size_stats, load_annotations, load_emr_dir, load_survey, parse_annotations, parse_survey,
    summarize_annotations, summarize_survey, tally_naive, GradeError, Label, Rating, SurveyStatement,
};

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

// Label row and percentage row of the published distribution table.
const PUBLISHED_COUNTS: [usize; 13] = [52, 54, 1, 3, 0, 3, 1, 9, 1, 2, 0, 10, 3];
const PUBLISHED_PERCENT: [f64; 13] = [38.2, 39.7, 0.7, 2.2, 0.0, 0.7, 0.0, 6.6, 0.7, 1.5, 0.0, 7.4, 2.2];

#[test]
fn label_distribution_reproduces_the_published_table() {
    let emrs = load_emr_dir(&fixture("emrs")).unwrap();
    let asts: Vec<_> = emrs.values().cloned().collect();
    let stats = emr_size_stats(&asts).unwrap();
    let annotations = load_annotations(&fixture("grading/exp2-annotations.jsonl"), &emrs).unwrap();
    let report = summarize_annotations(&annotations, stats.total);

    assert_eq!(report.statements, 136);
    assert_eq!(report.annotated_statements, 136);
    let counts: Vec<usize> = Label::ALL.iter().map(|l| report.counts[l]).collect();
    assert_eq!(counts, PUBLISHED_COUNTS);
    assert_eq!(report.labels, 139);
    assert_eq!(report.correct_statements, 107);
    // 107/136 = 78.68%; rounded half-up like every other percentage. The
    // published text gives 78.6%, which only truncation produces.
    assert_eq!(report.correct_rate, 78.7);

    for (i, l) in Label::ALL.iter().enumerate() {
        let oracle = format!("{:.1}", PUBLISHED_COUNTS[i] as f64 * 100.0 / 136.0);
        assert_eq!(format!("{:.1}", report.percentages[l]), oracle, "{l}");
        // The published row misprints IE (3/136) and INE (1/136).
        if !matches!(l, Label::IE | Label::INE) {
            assert!((report.percentages[l] - PUBLISHED_PERCENT[i]).abs() <= 0.05, "{l}");
        }
    }
    assert_eq!(report.percentages[&Label::IE], 2.2);
    assert_eq!(report.percentages[&Label::INE], 0.7);

    let naive = tally_naive(&annotations);
    assert_eq!(naive, counts);
    let multi = annotations.iter().filter(|a| a.labels.len() > 1).count();
    assert_eq!(multi, 3);
    assert!(annotations.iter().filter(|a| a.labels.len() > 1).all(|a| !a.is_correct()));

    let text = report.to_text();
    assert!(text.lines().next().unwrap().split_whitespace().eq(Label::ALL.iter().map(|l| l.code())));
    assert!(text.contains("correct statements: 107 (78.7%)"));
}

#[test]
fn suite_size_matches_the_published_statistics() {
    let emrs = load_emr_dir(&fixture("emrs")).unwrap();
    assert_eq!(emrs.len(), 10);
    let asts: Vec<_> = emrs.values().cloned().collect();
    let stats = emr_size_stats(&asts).unwrap();
    assert_eq!((stats.min, stats.max, stats.total, stats.emrs), (10, 20, 136, 10));
    assert!((stats.mean - 13.6).abs() < 1e-9);
    assert!(emr_size_stats(&[]).is_none());
    let one = emr_size_stats(&asts[..1]).unwrap();
    assert_eq!((one.min, one.max, one.total), (one.total, one.total, 11));
    assert_eq!(one.mean, 11.0);
}

fn fig4() -> BTreeMap<String, emrkit_core::EmrAst> {
    let ast = parse_emr(&std::fs::read_to_string(fixture("fig4.smrl")).unwrap()).unwrap();
    BTreeMap::from([("fig4".to_string(), ast)])
}

#[test]
fn search_action_check_may_be_labelled_ine() {
    let a = parse_annotations(r#"{"emr": "fig4", "line": 3, "labels": ["INE"]}"#, &fig4()).unwrap();
    assert_eq!(a.len(), 1);
    assert!(!a[0].is_correct());
}

#[test]
fn annotation_errors() {
    let emrs = fig4();
    let err = |text: &str| parse_annotations(text, &emrs).unwrap_err();
    assert!(matches!(
        err(r#"{"emr": "fig4", "line": 3, "labels": ["CLC"]}"#),
        GradeError::ApplicabilityViolation { label: Label::CLC, .. }
    ));
    assert!(matches!(
        err(r#"{"emr": "fig4", "line": 7, "labels": ["C"]}"#),
        GradeError::ApplicabilityViolation { label: Label::C, .. }
    ));
    assert!(matches!(err(r#"{"emr": "fig4", "line": 3, "labels": ["XYZ"]}"#), GradeError::UnknownLabel { .. }));
    assert!(matches!(err(r#"{"emr": "fig4", "line": 1, "labels": ["C"]}"#), GradeError::LineNotInEmr { .. }));
    assert!(matches!(err(r#"{"emr": "fig5", "line": 3, "labels": ["C"]}"#), GradeError::UnknownEmr { .. }));
    assert!(matches!(err(r#"{"emr": "fig4", "line": 3, "labels": []}"#), GradeError::Schema { line: 1, .. }));
    assert!(matches!(
        err("\n{\"emr\": \"fig4\", \"line\": 3, \"label\": [\"C\"]}"),
        GradeError::Schema { line: 2, .. }
    ));
    assert!(matches!(
        err("{\"emr\": \"fig4\", \"line\": 3, \"labels\": [\"C\"]}\n{\"emr\": \"fig4\", \"line\": 3, \"labels\": [\"IE\"]}"),
        GradeError::DuplicateAnnotation { line: 2, .. }
    ));
}

#[test]
fn empty_and_single_annotation_files() {
    let emrs = fig4();
    let none = parse_annotations("", &emrs).unwrap();
    assert!(none.is_empty());
    let report = summarize_annotations(&none, 0);
    assert_eq!((report.labels, report.correct_statements, report.correct_rate), (0, 0, 0.0));
    let one = parse_annotations(r#"{"emr": "fig4", "line": 2, "labels": ["C"]}"#, &emrs).unwrap();
    assert_eq!(summarize_annotations(&one, 1).correct_rate, 100.0);
}

#[test]
fn mr_survey_reproduces_the_published_responses() {
    let responses = load_survey(&fixture("grading/exp1-mr-survey.csv")).unwrap();
    let report = summarize_survey(&responses);
    assert_eq!(report.rows.len(), 3);
    let expected = [
        (SurveyStatement::S1, [3, 46, 12, 3, 0], 49, 77.0),
        (SurveyStatement::S2, [0, 41, 10, 12, 1], 41, 64.0),
        (SurveyStatement::S3, [0, 18, 19, 24, 3], 18, 28.0),
    ];
    for (statement, counts, positive, pct) in expected {
        let row = report.row(statement).unwrap();
        let got: Vec<usize> = Rating::ALL.iter().map(|r| row.counts[r]).collect();
        assert_eq!(got, counts);
        assert_eq!(row.responses, 64);
        assert_eq!(row.positive, positive);
        assert_eq!(row.positive_rate, Some(positive as f64 / 64.0));
        assert_eq!(row.positive_percent, Some(pct));
    }
    // one respondent gave eleven "disagree" and one "strongly disagree" to S3
    let p1: Vec<_> = responses
        .iter()
        .filter(|r| r.respondent == "P1" && r.statement == SurveyStatement::S3)
        .collect();
    assert_eq!(p1.len(), 12);
    assert_eq!(p1.iter().filter(|r| r.rating == Rating::Disagree).count(), 11);
    let text = report.to_text();
    assert!(text.contains("49/64 (77%)"), "{text}");
}

#[test]
fn statements_without_responses_have_no_rate() {
    let responses = parse_survey("subject,statement,respondent,rating\nEMR1,S1E,P1,Strongly Agree\n").unwrap();
    let report = summarize_survey(&responses);
    assert_eq!(report.rows.len(), 3);
    assert_eq!(report.row(SurveyStatement::S1E).unwrap().positive_percent, Some(100.0));
    let s2e = report.row(SurveyStatement::S2E).unwrap();
    assert_eq!((s2e.responses, s2e.positive_rate), (0, None));
    assert!(report.row(SurveyStatement::S1).is_none());
    assert!(summarize_survey(&[]).rows.is_empty());
}

#[test]
fn survey_errors() {
    let dup = "subject,statement,respondent,rating\nMR1,S1,P1,agree\nMR1,S1,P1,neutral\n";
    assert!(matches!(parse_survey(dup), Err(GradeError::DuplicateResponse { line: 3, .. })));
    assert!(parse_survey("subject,statement,respondent,rating\nMR1,S1,P2,agree\nMR1,S1,P1,agree\n").is_ok());
    assert!(matches!(
        parse_survey("subject,statement,respondent,rating\nMR1,S4,P1,agree\n"),
        Err(GradeError::Schema { line: 2, .. })
    ));
    assert!(matches!(
        parse_survey("subject,statement,respondent,rating\nMR1,S1,P1,maybe\n"),
        Err(GradeError::Schema { .. })
    ));
    assert!(matches!(parse_survey("a,b,c,d\n"), Err(GradeError::Schema { line: 1, .. })));
    assert!(parse_survey("subject,statement,respondent,rating\nMR1,S1,P1\n").is_err());
}
