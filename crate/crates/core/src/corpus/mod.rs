//! Bibliographic records, venue tiering, and career-cohort selection.
//!
//! A [`Corpus`] is an immutable collection of publication records. All
//! operations here are pure reads; ingestion itself is single-threaded.

mod ingest;
mod sjr;

pub use ingest::{ingest, ingest_with_period, IngestFormat, IngestOutcome, RejectedLine};
pub use sjr::{tier_venues, tier_venues_with, SigmaMode, SjrTable, VenueTier, VenueTiering};

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("duplicate pub_id {0:?}")]
    DuplicatePubId(String),
    #[error("unknown author {0:?}")]
    UnknownAuthor(String),
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("venue tiering needs at least 2 venues with SJR entries for {year}, found {found}")]
    TooFewVenues { year: i32, found: usize },
    #[error("malformed SJR row {line}: {reason}")]
    MalformedSjrRow { line: usize, reason: String },
    #[error("invalid cohort spec: {0}")]
    InvalidCohortSpec(String),
}

/// Gender attribute as supplied in the input data; never inferred here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Female,
    Male,
    Unknown,
}

impl Gender {
    /// Number of gender categories, the `C` used for gender diversity.
    pub const CATEGORIES: usize = 3;
}

/// Name-ethnicity category, consumed as an input attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ethnicity {
    EastAsian,
    Japanese,
    IndianSubcontinent,
    African,
    Muslim,
    British,
    EastEuropean,
    Jewish,
    French,
    Germanic,
    Hispanic,
    Italian,
    Nordic,
    Unknown,
}

impl Ethnicity {
    /// Number of ethnicity categories (13 named groups plus unknown).
    pub const CATEGORIES: usize = 14;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorRef {
    pub author_id: String,
    pub name: String,
    pub gender: Gender,
    pub ethnicity: Ethnicity,
    /// ISO-3166 alpha-2 code (uppercased) or `"unknown"`.
    pub country: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublicationRecord {
    pub pub_id: String,
    pub year: i32,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub venue_id: String,
    pub citation_count: u32,
    pub authors: Vec<AuthorRef>,
}

/// Academic-age bucket, half-open: G1 = [0,5), G2 = [5,10), G3 = [10,15), G4 = [15,inf).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AgeGroup {
    G1,
    G2,
    G3,
    G4,
}

impl AgeGroup {
    pub const CATEGORIES: usize = 4;
}

/// Buckets a career age (years since first publication) into its group.
pub fn academic_age_group(career_age: u32) -> AgeGroup {
    match career_age {
        0..=4 => AgeGroup::G1,
        5..=9 => AgeGroup::G2,
        10..=14 => AgeGroup::G3,
        _ => AgeGroup::G4,
    }
}

/// Cohort definition: who enters the study and over which windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSpec {
    /// Inclusive range of admissible first-publication years.
    pub first_pub_years: (i32, i32),
    /// Minimum number of distinct co-authors within the feature window.
    pub min_collaborations: usize,
    /// Length of the early-career feature window, in years.
    pub feature_window_years: i32,
    /// Length of the label window, in years; must exceed the feature window.
    pub label_window_years: i32,
}

impl Default for CohortSpec {
    fn default() -> Self {
        CohortSpec {
            first_pub_years: (2006, 2010),
            min_collaborations: 1,
            feature_window_years: 5,
            label_window_years: 10,
        }
    }
}

impl CohortSpec {
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.feature_window_years <= 0 {
            return Err(CorpusError::InvalidCohortSpec(
                "feature_window_years must be positive".into(),
            ));
        }
        if self.label_window_years <= self.feature_window_years {
            return Err(CorpusError::InvalidCohortSpec(
                "label_window_years must exceed feature_window_years".into(),
            ));
        }
        if self.first_pub_years.0 > self.first_pub_years.1 {
            return Err(CorpusError::InvalidCohortSpec(
                "first_pub_years range is reversed".into(),
            ));
        }
        Ok(())
    }

    /// Inclusive feature window for an author debuting in `first_year`.
    pub fn feature_window(&self, first_year: i32) -> (i32, i32) {
        (first_year, first_year + self.feature_window_years - 1)
    }

    /// Inclusive label window for an author debuting in `first_year`.
    pub fn label_window(&self, first_year: i32) -> (i32, i32) {
        (first_year, first_year + self.label_window_years - 1)
    }
}

/// Immutable publication collection with an author index.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Corpus {
    records: Vec<PublicationRecord>,
    /// author_id -> indices into `records`, ascending.
    author_index: BTreeMap<String, Vec<usize>>,
}

impl Corpus {
    /// Builds a corpus, checking pub_id uniqueness (duplicates are fatal).
    pub fn from_records(records: Vec<PublicationRecord>) -> Result<Self, CorpusError> {
        let mut seen = BTreeSet::new();
        for rec in &records {
            if !seen.insert(rec.pub_id.clone()) {
                return Err(CorpusError::DuplicatePubId(rec.pub_id.clone()));
            }
        }
        let mut author_index: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, rec) in records.iter().enumerate() {
            for author in &rec.authors {
                let slots = author_index.entry(author.author_id.clone()).or_default();
                if slots.last() != Some(&i) {
                    slots.push(i);
                }
            }
        }
        Ok(Corpus {
            records,
            author_index,
        })
    }

    pub fn records(&self) -> &[PublicationRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn contains_author(&self, author_id: &str) -> bool {
        self.author_index.contains_key(author_id)
    }

    /// All author ids, ascending.
    pub fn author_ids(&self) -> impl Iterator<Item = &str> {
        self.author_index.keys().map(String::as_str)
    }

    pub fn author_count(&self) -> usize {
        self.author_index.len()
    }

    /// Publications of one author, in record order.
    pub fn publications_of(&self, author_id: &str) -> impl Iterator<Item = &PublicationRecord> {
        self.author_index
            .get(author_id)
            .into_iter()
            .flatten()
            .map(move |&i| &self.records[i])
    }

    /// Publications of one author within an inclusive year window.
    pub fn publications_of_in(
        &self,
        author_id: &str,
        window: (i32, i32),
    ) -> impl Iterator<Item = &PublicationRecord> {
        self.publications_of(author_id)
            .filter(move |r| r.year >= window.0 && r.year <= window.1)
    }

    /// Publications within an inclusive year window, in record order.
    pub fn publications_in(&self, window: (i32, i32)) -> impl Iterator<Item = &PublicationRecord> {
        self.records
            .iter()
            .filter(move |r| r.year >= window.0 && r.year <= window.1)
    }
}

/// Year of an author's first publication in the corpus.
pub fn first_pub_year(corpus: &Corpus, author_id: &str) -> Result<i32, CorpusError> {
    corpus
        .publications_of(author_id)
        .map(|r| r.year)
        .min()
        .ok_or_else(|| CorpusError::UnknownAuthor(author_id.to_string()))
}

/// Distinct co-authors of `author_id` on publications within `window`.
pub fn distinct_collaborators(
    corpus: &Corpus,
    author_id: &str,
    window: (i32, i32),
) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for rec in corpus.publications_of_in(author_id, window) {
        for a in &rec.authors {
            if a.author_id != author_id {
                out.insert(a.author_id.clone());
            }
        }
    }
    out
}

/// Selects the study cohort: authors debuting within `spec.first_pub_years`
/// with at least `spec.min_collaborations` distinct co-authors inside their
/// feature window. Output is ascending by author_id.
pub fn select_cohort(corpus: &Corpus, spec: &CohortSpec) -> Result<Vec<String>, CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    spec.validate()?;
    let mut out = Vec::new();
    for author_id in corpus.author_ids() {
        let first = first_pub_year(corpus, author_id)?;
        if first < spec.first_pub_years.0 || first > spec.first_pub_years.1 {
            continue;
        }
        let window = spec.feature_window(first);
        if distinct_collaborators(corpus, author_id, window).len() >= spec.min_collaborations {
            out.push(author_id.to_string());
        }
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;

    pub(crate) fn pub_record(
        pub_id: &str,
        year: i32,
        venue: &str,
        citations: u32,
        author_ids: &[&str],
    ) -> PublicationRecord {
        PublicationRecord {
            pub_id: pub_id.to_string(),
            year,
            title: format!("title {pub_id}"),
            abstract_text: format!("abstract {pub_id}"),
            venue_id: venue.to_string(),
            citation_count: citations,
            authors: author_ids
                .iter()
                .map(|id| AuthorRef {
                    author_id: id.to_string(),
                    name: id.to_string(),
                    gender: Gender::Unknown,
                    ethnicity: Ethnicity::Unknown,
                    country: "unknown".to_string(),
                })
                .collect(),
        }
    }
}
