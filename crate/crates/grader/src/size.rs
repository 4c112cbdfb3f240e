use emrkit_core::{statement_count, EmrAst};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeStats {
    pub emrs: usize,
    pub min: usize,
    pub mean: f64,
    pub max: usize,
    pub total: usize,
}

/// Statement-line counts of a suite; `None` for an empty suite.
pub fn emr_size_stats(emrs: &[EmrAst]) -> Option<SizeStats> {
    let counts: Vec<usize> = emrs.iter().map(statement_count).collect();
    let total: usize = counts.iter().sum();
    Some(SizeStats {
        emrs: counts.len(),
        min: *counts.iter().min()?,
        mean: total as f64 / counts.len() as f64,
        max: *counts.iter().max()?,
        total,
    })
}
