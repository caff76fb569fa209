//! Two-score CSV ingestion.
//!
//! Required columns `id`, `group`, `score_a`, `score_b`; optional `weight`.
//! Values are `p/q` or dot decimals. Missing weights default to uniform.

use std::collections::HashSet;
use std::io::Read;
use std::path::{Path, PathBuf};

use crate::audit::tau::{ScoredDataset, ScoredRow};
use crate::rational::{self, ratio};

#[derive(Debug, thiserror::Error)]
pub enum ScoresError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("missing column {0:?}")]
    MissingColumn(&'static str),
    #[error("line {line}: duplicate id {id:?}")]
    DuplicateId { line: u64, id: String },
    #[error("line {line}: cannot parse {column} value {value:?}")]
    BadValue { line: u64, column: &'static str, value: String },
    #[error("line {line}: weight must be positive")]
    NonPositiveWeight { line: u64 },
    #[error("no data rows")]
    Empty,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub fn parse_scores_csv(reader: impl Read) -> Result<ScoredDataset, ScoresError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &'static str| headers.iter().position(|h| h == name);
    let need = |name: &'static str| col(name).ok_or(ScoresError::MissingColumn(name));
    let (id_c, group_c, a_c, b_c) = (need("id")?, need("group")?, need("score_a")?, need("score_b")?);
    let weight_c = col("weight");

    let mut rows = Vec::new();
    let mut explicit = Vec::new();
    let mut seen = HashSet::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |c: usize| record.get(c).unwrap_or("");
        let number = |c: usize, column: &'static str| {
            rational::parse(field(c)).map_err(|_| ScoresError::BadValue {
                line,
                column,
                value: field(c).to_string(),
            })
        };
        let id = field(id_c).to_string();
        if !seen.insert(id.clone()) {
            return Err(ScoresError::DuplicateId { line, id });
        }
        let weight = match weight_c.map(|c| (c, field(c))) {
            Some((c, v)) if !v.is_empty() => {
                let w = number(c, "weight")?;
                if w <= ratio(0, 1) {
                    return Err(ScoresError::NonPositiveWeight { line });
                }
                Some(w)
            }
            _ => None,
        };
        explicit.push(weight.clone());
        rows.push(ScoredRow {
            id,
            group: field(group_c).to_string(),
            score_a: number(a_c, "score_a")?,
            score_b: number(b_c, "score_b")?,
            weight: weight.unwrap_or_else(|| ratio(0, 1)),
        });
    }
    if rows.is_empty() {
        return Err(ScoresError::Empty);
    }
    if explicit.iter().any(Option::is_none) {
        let uniform = ratio(1, rows.len() as i64);
        for r in &mut rows {
            r.weight = uniform.clone();
        }
    }
    Ok(ScoredDataset { rows })
}

pub fn ingest_scores_csv(path: impl AsRef<Path>) -> Result<ScoredDataset, ScoresError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| ScoresError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scores_csv(file)
}
