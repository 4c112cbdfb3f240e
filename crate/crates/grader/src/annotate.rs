use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use emrkit_core::{parse_emr, statement_lines, EmrAst, StatementClass};
use serde::{Deserialize, Serialize};

use crate::label::Label;
use crate::{percent, GradeError};

/// Labels given to one canonical statement line of one EMR.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatementAnnotation {
    pub emr: String,
    /// Canonical line number of the statement.
    pub line: usize,
    pub labels: BTreeSet<Label>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl StatementAnnotation {
    pub fn is_correct(&self) -> bool {
        self.labels.iter().all(|l| l.is_correct())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    emr: String,
    line: usize,
    labels: Vec<String>,
    #[serde(default)]
    note: Option<String>,
}

/// Every `*.smrl` file of `dir`, keyed by file stem.
pub fn load_emr_dir(dir: &Path) -> Result<BTreeMap<String, EmrAst>, GradeError> {
    let mut out = BTreeMap::new();
    let entries = std::fs::read_dir(dir).map_err(|e| GradeError::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| GradeError::io(dir, e))?.path();
        if path.extension().is_none_or(|x| x != "smrl") {
            continue;
        }
        let text = std::fs::read_to_string(&path).map_err(|e| GradeError::io(&path, e))?;
        let ast = parse_emr(&text).map_err(|e| GradeError::Emr {
            path: path.clone(),
            message: e.to_string(),
        })?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        out.insert(stem, ast);
    }
    Ok(out)
}

/// Decodes JSON-lines annotations and checks them against the EMRs they
/// refer to. Blank lines are skipped; error line numbers are 1-based.
pub fn parse_annotations(
    text: &str,
    emrs: &BTreeMap<String, EmrAst>,
) -> Result<Vec<StatementAnnotation>, GradeError> {
    let classes: BTreeMap<&str, BTreeMap<usize, StatementClass>> = emrs
        .iter()
        .map(|(id, ast)| {
            (
                id.as_str(),
                statement_lines(ast).into_iter().map(|s| (s.line, s.class)).collect(),
            )
        })
        .collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(raw).map_err(|e| GradeError::Schema {
            line,
            message: e.to_string(),
        })?;
        if rec.labels.is_empty() {
            return Err(GradeError::Schema {
                line,
                message: "labels must not be empty".into(),
            });
        }
        let mut labels = BTreeSet::new();
        for code in &rec.labels {
            let label = Label::parse(code).ok_or_else(|| GradeError::UnknownLabel {
                line,
                label: code.clone(),
            })?;
            labels.insert(label);
        }
        let statements = classes.get(rec.emr.as_str()).ok_or_else(|| GradeError::UnknownEmr {
            line,
            emr: rec.emr.clone(),
        })?;
        let class = *statements.get(&rec.line).ok_or_else(|| GradeError::LineNotInEmr {
            line,
            emr: rec.emr.clone(),
            statement_line: rec.line,
        })?;
        if let Some(&bad) = labels.iter().find(|l| l.applies_to() != class) {
            return Err(GradeError::ApplicabilityViolation {
                line,
                emr: rec.emr,
                statement_line: rec.line,
                label: bad,
                expected: bad.applies_to(),
                found: class,
            });
        }
        if !seen.insert((rec.emr.clone(), rec.line)) {
            return Err(GradeError::DuplicateAnnotation {
                line,
                emr: rec.emr,
                statement_line: rec.line,
            });
        }
        out.push(StatementAnnotation {
            emr: rec.emr,
            line: rec.line,
            labels,
            note: rec.note,
        });
    }
    Ok(out)
}

pub fn load_annotations(
    path: &Path,
    emrs: &BTreeMap<String, EmrAst>,
) -> Result<Vec<StatementAnnotation>, GradeError> {
    let text = std::fs::read_to_string(path).map_err(|e| GradeError::io(path, e))?;
    parse_annotations(&text, emrs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub statements: usize,
    pub annotated_statements: usize,
    pub labels: usize,
    /// Every label, zero counts included.
    pub counts: BTreeMap<Label, usize>,
    /// Percent of `statements`, one decimal, rounded half-up.
    pub percentages: BTreeMap<Label, f64>,
    pub correct_statements: usize,
    pub correct_rate: f64,
}

/// Label distribution over `statements` statement lines. A statement is
/// correct when all of its labels are. If more statements are annotated
/// than `statements` says, the annotated count is used instead.
pub fn summarize_annotations(annotations: &[StatementAnnotation], statements: usize) -> DistributionReport {
    let statements = statements.max(annotations.len());
    let mut counts: BTreeMap<Label, usize> = Label::ALL.iter().map(|&l| (l, 0)).collect();
    for a in annotations {
        for l in &a.labels {
            *counts.get_mut(l).expect("every label present") += 1;
        }
    }
    let percentages = counts.iter().map(|(&l, &c)| (l, percent(c, statements, 1))).collect();
    let correct_statements = annotations.iter().filter(|a| a.is_correct()).count();
    DistributionReport {
        statements,
        annotated_statements: annotations.len(),
        labels: counts.values().sum(),
        counts,
        percentages,
        correct_statements,
        correct_rate: percent(correct_statements, statements, 1),
    }
}

/// Second, deliberately plain tally of per-label counts used to cross-check
/// [`summarize_annotations`].
pub fn tally_naive(annotations: &[StatementAnnotation]) -> Vec<usize> {
    let mut counts = vec![0; Label::ALL.len()];
    for a in annotations {
        for l in &a.labels {
            for (i, candidate) in Label::ALL.iter().enumerate() {
                if candidate == l {
                    counts[i] += 1;
                }
            }
        }
    }
    counts
}

impl DistributionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Label columns in table order: a count row and a percentage row.
    pub fn to_text(&self) -> String {
        let width = |l: &Label| l.code().len().max(6);
        let row = |cells: Vec<String>| -> String {
            cells
                .iter()
                .zip(Label::ALL.iter())
                .map(|(c, l)| format!("{c:>w$}", w = width(l)))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut out = String::new();
        out.push_str(&row(Label::ALL.iter().map(|l| l.code().to_string()).collect()));
        out.push('\n');
        out.push_str(&row(Label::ALL.iter().map(|l| self.counts[l].to_string()).collect()));
        out.push('\n');
        out.push_str(&row(Label::ALL.iter().map(|l| format!("{:.1}%", self.percentages[l])).collect()));
        out.push('\n');
        out.push_str(&format!(
            "\nstatements: {} (annotated {})\nlabels: {}\ncorrect statements: {} ({:.1}%)\n",
            self.statements, self.annotated_statements, self.labels, self.correct_statements, self.correct_rate
        ));
        out
    }
}
