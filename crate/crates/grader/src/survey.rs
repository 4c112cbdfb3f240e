use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{percent, GradeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SurveyStatement {
    S1,
    S2,
    S3,
    S1E,
    S2E,
    S3E,
}

impl SurveyStatement {
    pub const ALL: [SurveyStatement; 6] = [
        SurveyStatement::S1,
        SurveyStatement::S2,
        SurveyStatement::S3,
        SurveyStatement::S1E,
        SurveyStatement::S2E,
        SurveyStatement::S3E,
    ];

    pub fn code(self) -> &'static str {
        match self {
            SurveyStatement::S1 => "S1",
            SurveyStatement::S2 => "S2",
            SurveyStatement::S3 => "S3",
            SurveyStatement::S1E => "S1E",
            SurveyStatement::S2E => "S2E",
            SurveyStatement::S3E => "S3E",
        }
    }

    pub fn parse(code: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.code().eq_ignore_ascii_case(code.trim()))
    }

    /// Statements about EMRs rather than MRs.
    pub fn is_emr(self) -> bool {
        matches!(self, SurveyStatement::S1E | SurveyStatement::S2E | SurveyStatement::S3E)
    }

    pub fn text(self) -> &'static str {
        match self {
            SurveyStatement::S1 => "The MR is easy to understand.",
            SurveyStatement::S2 => "The MR captures a property that needs to be considered when testing the application.",
            SurveyStatement::S3 => "The MR helps identify the expected outputs for given inputs.",
            SurveyStatement::S1E => "The EMR is easy to understand.",
            SurveyStatement::S2E => "The EMR is consistent with the corresponding MR.",
            SurveyStatement::S3E => "It is feasible to implement all the functions used in the EMR.",
        }
    }
}

impl fmt::Display for SurveyStatement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rating {
    StronglyAgree,
    Agree,
    Neutral,
    Disagree,
    StronglyDisagree,
}

impl Rating {
    pub const ALL: [Rating; 5] = [
        Rating::StronglyAgree,
        Rating::Agree,
        Rating::Neutral,
        Rating::Disagree,
        Rating::StronglyDisagree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rating::StronglyAgree => "strongly agree",
            Rating::Agree => "agree",
            Rating::Neutral => "neutral",
            Rating::Disagree => "disagree",
            Rating::StronglyDisagree => "strongly disagree",
        }
    }

    /// Accepts the scale wording with spaces, hyphens or underscores.
    pub fn parse(text: &str) -> Option<Rating> {
        let norm = text.trim().to_ascii_lowercase().replace(['-', '_'], " ");
        Rating::ALL.into_iter().find(|r| r.name() == norm)
    }

    pub fn is_positive(self) -> bool {
        matches!(self, Rating::StronglyAgree | Rating::Agree)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LikertResponse {
    /// The MR or EMR being rated.
    pub subject: String,
    pub statement: SurveyStatement,
    pub respondent: String,
    pub rating: Rating,
}

#[derive(Deserialize)]
struct Row {
    subject: String,
    statement: String,
    respondent: String,
    rating: String,
}

/// Reads `subject,statement,respondent,rating` CSV. Error line numbers
/// count the header as line 1.
pub fn parse_survey(text: &str) -> Result<Vec<LikertResponse>, GradeError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| GradeError::Schema {
        line: 1,
        message: e.to_string(),
    })?;
    if headers.iter().collect::<Vec<_>>() != ["subject", "statement", "respondent", "rating"] {
        return Err(GradeError::Schema {
            line: 1,
            message: "header must be subject,statement,respondent,rating".into(),
        });
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for record in reader.deserialize::<Row>() {
        let row = record.map_err(|e| GradeError::Schema {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = out.len() + 2;
        let statement = SurveyStatement::parse(&row.statement).ok_or_else(|| GradeError::Schema {
            line,
            message: format!("unknown statement '{}'", row.statement),
        })?;
        let rating = Rating::parse(&row.rating).ok_or_else(|| GradeError::Schema {
            line,
            message: format!("unknown rating '{}'", row.rating),
        })?;
        if !seen.insert((row.respondent.clone(), row.subject.clone(), statement)) {
            return Err(GradeError::DuplicateResponse {
                line,
                respondent: row.respondent,
                subject: row.subject,
                statement: statement.to_string(),
            });
        }
        out.push(LikertResponse {
            subject: row.subject,
            statement,
            respondent: row.respondent,
            rating,
        });
    }
    Ok(out)
}

pub fn load_survey(path: &Path) -> Result<Vec<LikertResponse>, GradeError> {
    let text = std::fs::read_to_string(path).map_err(|e| GradeError::io(path, e))?;
    parse_survey(&text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyRow {
    pub statement: SurveyStatement,
    /// Counts in scale order, strongly agree first.
    pub counts: BTreeMap<Rating, usize>,
    pub responses: usize,
    pub positive: usize,
    /// Share of strongly-agree and agree ratings; absent without responses.
    pub positive_rate: Option<f64>,
    /// `positive_rate` as a whole percentage, rounded half-up.
    pub positive_percent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyReport {
    pub rows: Vec<SurveyRow>,
}

/// Per-statement counts for every questionnaire (MR or EMR) that has at
/// least one response; statements of that questionnaire without responses
/// get a row with an absent rate.
pub fn summarize_survey(responses: &[LikertResponse]) -> SurveyReport {
    let mr = responses.iter().any(|r| !r.statement.is_emr());
    let emr = responses.iter().any(|r| r.statement.is_emr());
    let rows = SurveyStatement::ALL
        .into_iter()
        .filter(|s| if s.is_emr() { emr } else { mr })
        .map(|statement| {
            let mut counts: BTreeMap<Rating, usize> = Rating::ALL.iter().map(|&r| (r, 0)).collect();
            for r in responses.iter().filter(|r| r.statement == statement) {
                *counts.get_mut(&r.rating).expect("every rating present") += 1;
            }
            let total: usize = counts.values().sum();
            let positive = counts.iter().filter(|(r, _)| r.is_positive()).map(|(_, c)| c).sum();
            SurveyRow {
                statement,
                counts,
                responses: total,
                positive,
                positive_rate: (total > 0).then(|| positive as f64 / total as f64),
                positive_percent: (total > 0).then(|| percent(positive, total, 0)),
            }
        })
        .collect();
    SurveyReport { rows }
}

impl SurveyReport {
    pub fn row(&self, statement: SurveyStatement) -> Option<&SurveyRow> {
        self.rows.iter().find(|r| r.statement == statement)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Rating columns in scale order, then responses and positive share.
    pub fn to_text(&self) -> String {
        let mut headers: Vec<&str> = vec![""];
        headers.extend(Rating::ALL.iter().map(|r| r.name()));
        headers.extend(["responses", "positive"]);
        let mut table: Vec<Vec<String>> = vec![headers.iter().map(|h| h.to_string()).collect()];
        for row in &self.rows {
            let mut cells = vec![row.statement.to_string()];
            cells.extend(Rating::ALL.iter().map(|r| row.counts[r].to_string()));
            cells.push(row.responses.to_string());
            cells.push(match row.positive_percent {
                Some(p) => format!("{}/{} ({p:.0}%)", row.positive, row.responses),
                None => "-".into(),
            });
            table.push(cells);
        }
        let widths: Vec<usize> = (0..headers.len())
            .map(|c| table.iter().map(|r| r[c].len()).max().unwrap_or(0))
            .collect();
        table
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .map(|(c, cell)| {
                        if c == 0 {
                            format!("{cell:<w$}", w = widths[c])
                        } else {
                            format!("{cell:>w$}", w = widths[c])
                        }
                    })
                    .collect::<Vec<_>>()
                    .join("  ")
                    .trim_end()
                    .to_string()
                    + "\n"
            })
            .collect()
    }
}
