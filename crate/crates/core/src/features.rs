//! Diversity metrics, research-performance metrics, the rising-star label,
//! and per-author feature assembly.

use crate::corpus::{
    academic_age_group, first_pub_year, AgeGroup, AuthorRef, CohortSpec, Corpus, Ethnicity,
    Gender, VenueTier, VenueTiering,
};
use crate::network::NodeMetrics;
use crate::topics::{dominant_topic, DisciplinaryProfile};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("empty value list")]
    EmptyValues,
    #[error("observed {observed} categories exceed declared {declared}")]
    TooManyCategories { observed: usize, declared: usize },
    #[error("label window must be longer than feature window (t2 > t1)")]
    BadWindows,
    #[error("need at least 2 authors to label, found {0}")]
    TooFewAuthors(usize),
    #[error("no rated authors among the threshold subset")]
    EmptyThresholdSubset,
    #[error("missing {stage} data for author {author:?}")]
    MissingUpstream { author: String, stage: String },
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// How entropies are scaled. `LnCategories` divides by ln(C) for a [0,1]
/// range; `Raw` reports plain nats (the range the category count allows).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiversityNorm {
    #[default]
    LnCategories,
    Raw,
}

fn entropy_of_proportions(proportions: impl Iterator<Item = f64>) -> f64 {
    // The + 0.0 folds a possible -0.0 (single category) into plain zero.
    proportions
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum::<f64>()
        + 0.0
}

fn normalize_entropy(h: f64, num_categories: usize, norm: DiversityNorm) -> f64 {
    match norm {
        DiversityNorm::Raw => h,
        DiversityNorm::LnCategories => {
            if num_categories <= 1 {
                0.0
            } else {
                h / (num_categories as f64).ln()
            }
        }
    }
}

/// Shannon entropy of the observed category proportions, normalized by
/// ln(num_categories) into [0,1]. One declared category yields 0.
pub fn shannon_diversity<T: Ord>(
    values: &[T],
    num_categories: usize,
) -> Result<f64, FeatureError> {
    shannon_diversity_with(values, num_categories, DiversityNorm::LnCategories)
}

pub fn shannon_diversity_with<T: Ord>(
    values: &[T],
    num_categories: usize,
    norm: DiversityNorm,
) -> Result<f64, FeatureError> {
    if values.is_empty() {
        return Err(FeatureError::EmptyValues);
    }
    let mut counts: BTreeMap<&T, usize> = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_insert(0) += 1;
    }
    if counts.len() > num_categories {
        return Err(FeatureError::TooManyCategories {
            observed: counts.len(),
            declared: num_categories,
        });
    }
    let n = values.len() as f64;
    let h = entropy_of_proportions(counts.values().map(|&c| c as f64 / n));
    Ok(normalize_entropy(h, num_categories, norm))
}

/// Normalized entropy of a probability distribution (the focal author's own
/// topic mixture).
pub fn distribution_diversity(distribution: &[f64], norm: DiversityNorm) -> f64 {
    let h = entropy_of_proportions(distribution.iter().copied());
    normalize_entropy(h, distribution.len(), norm)
}

/// Everything needed to compute the six diversity values for one author.
#[derive(Debug, Clone)]
pub struct DiversityInputs {
    pub focal_gender: Gender,
    pub focal_ethnicity: Ethnicity,
    pub focal_country: String,
    pub focal_age_group: AgeGroup,
    /// Attributes of the distinct collaborators over the feature window;
    /// the four lists are index-aligned (one entry per collaborator).
    pub collaborator_genders: Vec<Gender>,
    pub collaborator_ethnicities: Vec<Ethnicity>,
    pub collaborator_countries: Vec<String>,
    pub collaborator_age_groups: Vec<AgeGroup>,
    /// Dominant topic of each distinct collaborator.
    pub collaborator_topics: Vec<usize>,
    /// The focal author's own topic distribution, length K.
    pub own_distribution: Vec<f64>,
    /// Distinct countries appearing in the corpus (capped), the `C` for
    /// affiliation diversity.
    pub country_categories: usize,
}

/// The six diversity values of one feature vector, all in [0,1] under the
/// default normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diversities {
    pub indiv_disc_div: f64,
    pub group_disc_div: f64,
    pub ethnic_div: f64,
    pub gender_div: f64,
    pub affiliation_div: f64,
    pub age_div: f64,
}

/// Computes the collaborator diversities (entropy over the distinct
/// collaborators plus the focal author) and the focal author's own
/// disciplinary diversity. Zero collaborators yield zero for every group
/// diversity.
pub fn compute_diversities(
    inputs: &DiversityInputs,
    norm: DiversityNorm,
) -> Result<Diversities, FeatureError> {
    let k = inputs.own_distribution.len();
    let indiv = distribution_diversity(&inputs.own_distribution, norm);
    if inputs.collaborator_genders.is_empty() {
        return Ok(Diversities {
            indiv_disc_div: indiv,
            group_disc_div: 0.0,
            ethnic_div: 0.0,
            gender_div: 0.0,
            affiliation_div: 0.0,
            age_div: 0.0,
        });
    }

    let mut genders = inputs.collaborator_genders.clone();
    genders.push(inputs.focal_gender);
    let mut ethnicities = inputs.collaborator_ethnicities.clone();
    ethnicities.push(inputs.focal_ethnicity);
    let mut countries = inputs.collaborator_countries.clone();
    countries.push(inputs.focal_country.clone());
    let mut ages = inputs.collaborator_age_groups.clone();
    ages.push(inputs.focal_age_group);

    Ok(Diversities {
        indiv_disc_div: indiv,
        group_disc_div: shannon_diversity_with(&inputs.collaborator_topics, k.max(1), norm)?,
        ethnic_div: shannon_diversity_with(&ethnicities, Ethnicity::CATEGORIES, norm)?,
        gender_div: shannon_diversity_with(&genders, Gender::CATEGORIES, norm)?,
        affiliation_div: shannon_diversity_with(&countries, inputs.country_categories, norm)?,
        age_div: shannon_diversity_with(&ages, AgeGroup::CATEGORIES, norm)?,
    })
}

/// Largest h such that at least h papers have at least h citations each.
pub fn h_index(citation_counts: &[u32]) -> u32 {
    let mut sorted: Vec<u32> = citation_counts.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut h = 0u32;
    for (i, &c) in sorted.iter().enumerate() {
        if c >= i as u32 + 1 {
            h = i as u32 + 1;
        } else {
            break;
        }
    }
    h
}

/// H-index snapshot over the two career windows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CareerSnapshot {
    pub h1: u32,
    pub h2: u32,
    pub t1: i32,
    pub t2: i32,
}

/// H-index growth rate (h2 - h1) / (t2 - t1).
pub fn growth_rate(s: &CareerSnapshot) -> Result<f64, FeatureError> {
    if s.t2 <= s.t1 {
        return Err(FeatureError::BadWindows);
    }
    Ok((f64::from(s.h2) - f64::from(s.h1)) / f64::from(s.t2 - s.t1))
}

/// Mean and population standard deviation.
pub fn mean_and_population_sigma(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Labels authors whose rate is at least mu + 3*sigma over all given rates.
/// A degenerate cohort (sigma = 0) has no stars.
pub fn label_rising_stars(
    rates: &BTreeMap<String, f64>,
) -> Result<BTreeMap<String, u8>, FeatureError> {
    let all: BTreeSet<String> = rates.keys().cloned().collect();
    label_rising_stars_scoped(rates, &all)
}

/// Like [`label_rising_stars`], but mu and sigma come from `stat_authors`
/// only (e.g. the training cohort), while every rated author is labeled
/// against that threshold.
pub fn label_rising_stars_scoped(
    rates: &BTreeMap<String, f64>,
    stat_authors: &BTreeSet<String>,
) -> Result<BTreeMap<String, u8>, FeatureError> {
    if rates.len() < 2 {
        return Err(FeatureError::TooFewAuthors(rates.len()));
    }
    let stat_rates: Vec<f64> = rates
        .iter()
        .filter(|(a, _)| stat_authors.contains(*a))
        .map(|(_, &r)| r)
        .collect();
    if stat_rates.is_empty() {
        return Err(FeatureError::EmptyThresholdSubset);
    }
    let (mean, sigma) = mean_and_population_sigma(&stat_rates);
    let threshold = mean + 3.0 * sigma;
    Ok(rates
        .iter()
        .map(|(author, &rate)| {
            let label = u8::from(sigma > 0.0 && rate >= threshold);
            (author.clone(), label)
        })
        .collect())
}

/// The 14-category feature set plus the binary label, one row per author.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub author_id: String,
    pub articles: u32,
    pub articles_a: u32,
    pub articles_b: u32,
    pub articles_c: u32,
    pub citations: u32,
    pub h_index: u32,
    pub indiv_disc_div: f64,
    pub group_disc_div: f64,
    pub ethnic_div: f64,
    pub gender_div: f64,
    pub affiliation_div: f64,
    pub age_div: f64,
    pub degree_centrality: f64,
    pub weighted_degree: f64,
    pub clustering_coefficient: f64,
    pub betweenness: f64,
    pub label: u8,
}

/// Column names of the numeric features, in export order.
pub const FEATURE_COLUMNS: [&str; 16] = [
    "articles",
    "articles_a",
    "articles_b",
    "articles_c",
    "citations",
    "h_index",
    "indiv_disc_div",
    "group_disc_div",
    "ethnic_div",
    "gender_div",
    "affiliation_div",
    "age_div",
    "degree_centrality",
    "weighted_degree",
    "clustering_coefficient",
    "betweenness",
];

impl FeatureVector {
    /// Numeric values in [`FEATURE_COLUMNS`] order.
    pub fn numeric_row(&self) -> [f64; 16] {
        [
            f64::from(self.articles),
            f64::from(self.articles_a),
            f64::from(self.articles_b),
            f64::from(self.articles_c),
            f64::from(self.citations),
            f64::from(self.h_index),
            self.indiv_disc_div,
            self.group_disc_div,
            self.ethnic_div,
            self.gender_div,
            self.affiliation_div,
            self.age_div,
            self.degree_centrality,
            self.weighted_degree,
            self.clustering_coefficient,
            self.betweenness,
        ]
    }
}

/// Feature-matrix export: `author_id`, the 16 numeric columns, then `label`.
pub fn export_feature_matrix(vectors: &[FeatureVector], path: &Path) -> Result<(), FeatureError> {
    let io_err = |source: std::io::Error| FeatureError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut w = std::fs::File::create(path).map_err(io_err)?;
    writeln!(w, "author_id,{},label", FEATURE_COLUMNS.join(",")).map_err(io_err)?;
    for v in vectors {
        let cells: Vec<String> = v.numeric_row().iter().map(|x| format!("{x}")).collect();
        writeln!(w, "{},{},{}", v.author_id, cells.join(","), v.label).map_err(io_err)?;
    }
    Ok(())
}

/// Per-author label bookkeeping for the label report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub author_id: String,
    pub h1: u32,
    pub h2: u32,
    pub growth_rate: f64,
    pub label: u8,
}

pub fn export_label_report(records: &[LabelRecord], path: &Path) -> Result<(), FeatureError> {
    let io_err = |source: std::io::Error| FeatureError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut w = std::fs::File::create(path).map_err(io_err)?;
    writeln!(w, "author_id,h1,h2,growth_rate,label").map_err(io_err)?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.author_id, r.h1, r.h2, r.growth_rate, r.label
        )
        .map_err(io_err)?;
    }
    Ok(())
}

/// How collaborator diversities aggregate over the feature window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiversityScope {
    /// One entropy over the window's distinct-collaborator set.
    #[default]
    Window,
    /// Entropy per paper, then the mean over the window's papers.
    PerPaperMean,
}

/// Upstream artifacts handed to feature assembly. Profiles are document
/// rows (per publication) so each author's early-career mixture can be
/// restricted to their own window.
pub struct AssemblyInputs<'a> {
    pub corpus: &'a Corpus,
    /// Per-publication topic rows (from the fitted model's doc index).
    pub doc_topics: &'a BTreeMap<String, Vec<f64>>,
    pub topic_count: usize,
    pub metrics: &'a BTreeMap<String, NodeMetrics>,
    pub tiering: &'a VenueTiering,
    pub labels: &'a BTreeMap<String, u8>,
    pub country_categories: usize,
    pub norm: DiversityNorm,
    pub scope: DiversityScope,
    /// Plain (`false`) or per-co-author (`true`) weighted degree feature.
    pub normalized_weighted_degree: bool,
}

fn mean_topic_row(
    doc_topics: &BTreeMap<String, Vec<f64>>,
    pub_ids: impl Iterator<Item = String>,
    k: usize,
) -> Option<Vec<f64>> {
    let mut sum = vec![0.0f64; k];
    let mut count = 0usize;
    for pub_id in pub_ids {
        let row = doc_topics.get(&pub_id)?;
        for (acc, &p) in sum.iter_mut().zip(row) {
            *acc += p;
        }
        count += 1;
    }
    if count == 0 {
        return None;
    }
    let total: f64 = sum.iter().sum();
    if total > 0.0 {
        for p in &mut sum {
            *p /= total;
        }
    }
    Some(sum)
}

/// Assembles one feature vector per cohort author, deterministic ascending
/// by author_id. Counts are restricted to the author's feature window; the
/// label comes from `inputs.labels`.
pub fn assemble_features(
    inputs: &AssemblyInputs<'_>,
    cohort: &[String],
    spec: &CohortSpec,
) -> Result<Vec<FeatureVector>, FeatureError> {
    let mut ordered: Vec<&String> = cohort.iter().collect();
    ordered.sort();
    let rows: Result<Vec<FeatureVector>, FeatureError> = ordered
        .iter()
        .map(|author| assemble_one(inputs, author, spec))
        .collect();
    rows
}

fn collaborator_profile_topic(
    inputs: &AssemblyInputs<'_>,
    collaborator: &str,
    window_end: i32,
) -> Result<usize, FeatureError> {
    // Collaborator mixture over their publications up to the focal window
    // end; avoids reading text published after the feature window.
    let pubs = inputs
        .corpus
        .publications_of(collaborator)
        .filter(|r| r.year <= window_end)
        .map(|r| r.pub_id.clone());
    let row = mean_topic_row(inputs.doc_topics, pubs, inputs.topic_count).ok_or_else(|| {
        FeatureError::MissingUpstream {
            author: collaborator.to_string(),
            stage: "topics".into(),
        }
    })?;
    Ok(dominant_topic(&DisciplinaryProfile {
        author_id: collaborator.to_string(),
        distribution: row,
    }))
}

fn assemble_one(
    inputs: &AssemblyInputs<'_>,
    author: &str,
    spec: &CohortSpec,
) -> Result<FeatureVector, FeatureError> {
    let corpus = inputs.corpus;
    let first = first_pub_year(corpus, author).map_err(|_| FeatureError::MissingUpstream {
        author: author.to_string(),
        stage: "corpus".into(),
    })?;
    let window = spec.feature_window(first);
    let window_pubs: Vec<_> = corpus.publications_of_in(author, window).collect();
    if window_pubs.is_empty() {
        return Err(FeatureError::MissingUpstream {
            author: author.to_string(),
            stage: "corpus".into(),
        });
    }

    let mut articles_by_tier = BTreeMap::from([
        (VenueTier::A, 0u32),
        (VenueTier::B, 0u32),
        (VenueTier::C, 0u32),
    ]);
    let mut citations = 0u32;
    let mut citation_counts = Vec::new();
    for rec in &window_pubs {
        let tier = inputs.tiering.tier_of(&rec.venue_id, rec.year);
        *articles_by_tier.get_mut(&tier).unwrap() += 1;
        citations = citations.saturating_add(rec.citation_count);
        citation_counts.push(rec.citation_count);
    }

    // Distinct collaborators with their attributes, first occurrence wins.
    let mut focal_ref: Option<&AuthorRef> = None;
    let mut collaborators: BTreeMap<&str, &AuthorRef> = BTreeMap::new();
    for rec in &window_pubs {
        for a in &rec.authors {
            if a.author_id == author {
                focal_ref.get_or_insert(a);
            } else {
                collaborators.entry(a.author_id.as_str()).or_insert(a);
            }
        }
    }
    let focal_ref = focal_ref.expect("focal author appears on own publications");

    let own_distribution = mean_topic_row(
        inputs.doc_topics,
        window_pubs.iter().map(|r| r.pub_id.clone()),
        inputs.topic_count,
    )
    .ok_or_else(|| FeatureError::MissingUpstream {
        author: author.to_string(),
        stage: "topics".into(),
    })?;

    // Per-collaborator attributes shared by both aggregation scopes.
    let mut attrs: BTreeMap<&str, (Gender, Ethnicity, String, AgeGroup, usize)> = BTreeMap::new();
    for (id, a) in &collaborators {
        let their_first =
            first_pub_year(corpus, id).map_err(|_| FeatureError::MissingUpstream {
                author: id.to_string(),
                stage: "corpus".into(),
            })?;
        let age = (window.1 - their_first).max(0) as u32;
        attrs.insert(
            id,
            (
                a.gender,
                a.ethnicity,
                a.country.clone(),
                academic_age_group(age),
                collaborator_profile_topic(inputs, id, window.1)?,
            ),
        );
    }
    let focal_age_group = academic_age_group((window.1 - first).max(0) as u32);
    let inputs_for = |ids: &[&str], own: Vec<f64>| DiversityInputs {
        focal_gender: focal_ref.gender,
        focal_ethnicity: focal_ref.ethnicity,
        focal_country: focal_ref.country.clone(),
        focal_age_group,
        collaborator_genders: ids.iter().map(|id| attrs[id].0).collect(),
        collaborator_ethnicities: ids.iter().map(|id| attrs[id].1).collect(),
        collaborator_countries: ids.iter().map(|id| attrs[id].2.clone()).collect(),
        collaborator_age_groups: ids.iter().map(|id| attrs[id].3).collect(),
        collaborator_topics: ids.iter().map(|id| attrs[id].4).collect(),
        own_distribution: own,
        country_categories: inputs.country_categories,
    };

    let diversities = match inputs.scope {
        DiversityScope::Window => {
            let ids: Vec<&str> = attrs.keys().copied().collect();
            compute_diversities(&inputs_for(&ids, own_distribution.clone()), inputs.norm)?
        }
        DiversityScope::PerPaperMean => {
            // Mean of per-paper collaborator entropies; solo papers
            // contribute zero. The focal author's own disciplinary
            // diversity stays window-level.
            let mut acc = Diversities {
                indiv_disc_div: 0.0,
                group_disc_div: 0.0,
                ethnic_div: 0.0,
                gender_div: 0.0,
                affiliation_div: 0.0,
                age_div: 0.0,
            };
            for rec in &window_pubs {
                let distinct: BTreeSet<&str> = rec
                    .authors
                    .iter()
                    .map(|a| a.author_id.as_str())
                    .filter(|id| *id != author)
                    .collect();
                let ids: Vec<&str> = distinct.into_iter().collect();
                let d =
                    compute_diversities(&inputs_for(&ids, own_distribution.clone()), inputs.norm)?;
                acc.group_disc_div += d.group_disc_div;
                acc.ethnic_div += d.ethnic_div;
                acc.gender_div += d.gender_div;
                acc.affiliation_div += d.affiliation_div;
                acc.age_div += d.age_div;
            }
            let n = window_pubs.len() as f64;
            Diversities {
                indiv_disc_div: distribution_diversity(&own_distribution, inputs.norm),
                group_disc_div: acc.group_disc_div / n,
                ethnic_div: acc.ethnic_div / n,
                gender_div: acc.gender_div / n,
                affiliation_div: acc.affiliation_div / n,
                age_div: acc.age_div / n,
            }
        }
    };

    let metrics = inputs
        .metrics
        .get(author)
        .ok_or_else(|| FeatureError::MissingUpstream {
            author: author.to_string(),
            stage: "network".into(),
        })?;
    let label = *inputs
        .labels
        .get(author)
        .ok_or_else(|| FeatureError::MissingUpstream {
            author: author.to_string(),
            stage: "label".into(),
        })?;

    Ok(FeatureVector {
        author_id: author.to_string(),
        articles: window_pubs.len() as u32,
        articles_a: articles_by_tier[&VenueTier::A],
        articles_b: articles_by_tier[&VenueTier::B],
        articles_c: articles_by_tier[&VenueTier::C],
        citations,
        h_index: h_index(&citation_counts),
        indiv_disc_div: diversities.indiv_disc_div,
        group_disc_div: diversities.group_disc_div,
        ethnic_div: diversities.ethnic_div,
        gender_div: diversities.gender_div,
        affiliation_div: diversities.affiliation_div,
        age_div: diversities.age_div,
        degree_centrality: metrics.degree_centrality,
        weighted_degree: if inputs.normalized_weighted_degree {
            metrics.weighted_degree_normalized
        } else {
            metrics.weighted_degree
        },
        clustering_coefficient: metrics.clustering_coefficient,
        betweenness: metrics.betweenness_centrality,
        label,
    })
}
