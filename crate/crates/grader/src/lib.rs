//! Grading of generated EMRs.
//!
//! Statement lines are annotated with the thirteen-label taxonomy and
//! summarised into a label distribution; practitioner ratings of MRs and
//! EMRs are aggregated per Likert statement; and suite sizes are measured
//! on the canonical statement enumeration.

pub mod annotate;
pub mod label;
pub mod size;
pub mod survey;

use std::path::PathBuf;

use thiserror::Error;

pub use annotate::{
    load_annotations, load_emr_dir, parse_annotations, summarize_annotations, tally_naive, DistributionReport,
    StatementAnnotation,
};
pub use label::{Label, LabelClass};
pub use size::{emr_size_stats, SizeStats};
pub use survey::{
    load_survey, parse_survey, summarize_survey, LikertResponse, Rating, SurveyReport, SurveyRow, SurveyStatement,
};

#[derive(Debug, Error)]
pub enum GradeError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("line {line}: unknown label '{label}'")]
    UnknownLabel { line: usize, label: String },
    #[error("line {line}: label {label} applies to {expected} statements but {emr}:{statement_line} is {found}")]
    ApplicabilityViolation {
        line: usize,
        emr: String,
        statement_line: usize,
        label: Label,
        expected: emrkit_core::StatementClass,
        found: emrkit_core::StatementClass,
    },
    #[error("line {line}: {emr} has no statement on canonical line {statement_line}")]
    LineNotInEmr { line: usize, emr: String, statement_line: usize },
    #[error("line {line}: unknown EMR '{emr}'")]
    UnknownEmr { line: usize, emr: String },
    #[error("line {line}: {emr}:{statement_line} is annotated twice")]
    DuplicateAnnotation { line: usize, emr: String, statement_line: usize },
    #[error("line {line}: duplicate response of {respondent} for {subject} {statement}")]
    DuplicateResponse {
        line: usize,
        respondent: String,
        subject: String,
        statement: String,
    },
    #[error("{path}: {message}")]
    Emr { path: PathBuf, message: String },
}

impl GradeError {
    pub(crate) fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        GradeError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }
}

/// `count / total` as a percentage rounded half-up to `decimals` places,
/// in exact integer arithmetic.
pub fn percent(count: usize, total: usize, decimals: u32) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let scale = 10u128.pow(decimals);
    let num = count as u128 * 100 * scale;
    let den = total as u128;
    let rounded = (2 * num + den) / (2 * den);
    rounded as f64 / scale as f64
}
