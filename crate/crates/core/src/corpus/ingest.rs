//! JSON-Lines ingestion with a rejects report.

use super::{Corpus, CorpusError, PublicationRecord};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

/// Supported corpus wire formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IngestFormat {
    /// One publication object per line.
    JsonLines,
}

/// A line that failed schema validation, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedLine {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug)]
pub struct IngestOutcome {
    pub corpus: Corpus,
    pub rejects: Vec<RejectedLine>,
    pub warnings: Vec<String>,
}

impl IngestOutcome {
    /// Writes the rejects report as JSON Lines: `{"line": int, "reason": str}`.
    pub fn write_rejects(&self, path: &Path) -> Result<(), CorpusError> {
        let mut file = File::create(path).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        for reject in &self.rejects {
            let line = serde_json::to_string(reject).expect("reject serializes");
            writeln!(file, "{line}").map_err(|source| CorpusError::Io {
                path: path.display().to_string(),
                source,
            })?;
        }
        Ok(())
    }
}

fn validate_record(rec: &PublicationRecord, study_period: Option<(i32, i32)>) -> Result<(), String> {
    if rec.pub_id.is_empty() {
        return Err("empty pub_id".into());
    }
    if rec.authors.is_empty() {
        return Err("authorships must be non-empty".into());
    }
    if let Some((lo, hi)) = study_period {
        if rec.year < lo || rec.year > hi {
            return Err(format!(
                "year {} outside study period [{lo}, {hi}]",
                rec.year
            ));
        }
    }
    for author in &rec.authors {
        if author.author_id.is_empty() {
            return Err("empty author_id".into());
        }
        let c = &author.country;
        let iso_like = c.len() == 2 && c.chars().all(|ch| ch.is_ascii_alphabetic());
        if !iso_like && c != "unknown" {
            return Err(format!("country {c:?} is not ISO alpha-2 or \"unknown\""));
        }
    }
    Ok(())
}

/// Parses a corpus file. Lines failing the schema are collected into the
/// rejects report, never silently dropped; a duplicate pub_id is fatal.
pub fn ingest(path: &Path, format: IngestFormat) -> Result<IngestOutcome, CorpusError> {
    ingest_with_period(path, format, None)
}

/// Like [`ingest`], additionally rejecting records outside `study_period`.
pub fn ingest_with_period(
    path: &Path,
    format: IngestFormat,
    study_period: Option<(i32, i32)>,
) -> Result<IngestOutcome, CorpusError> {
    let IngestFormat::JsonLines = format;
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);

    let mut records = Vec::new();
    let mut rejects = Vec::new();
    let mut warnings = Vec::new();
    let mut saw_content = false;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        saw_content = true;
        match serde_json::from_str::<PublicationRecord>(&line) {
            Ok(mut rec) => match validate_record(&rec, study_period) {
                Ok(()) => {
                    for author in &mut rec.authors {
                        if author.country != "unknown" {
                            author.country = author.country.to_ascii_uppercase();
                        }
                    }
                    records.push(rec);
                }
                Err(reason) => rejects.push(RejectedLine {
                    line: line_no,
                    reason,
                }),
            },
            Err(err) => rejects.push(RejectedLine {
                line: line_no,
                reason: err.to_string(),
            }),
        }
    }

    if !saw_content {
        warnings.push(format!("{}: empty corpus file", path.display()));
    }

    let corpus = Corpus::from_records(records)?;
    Ok(IngestOutcome {
        corpus,
        rejects,
        warnings,
    })
}
