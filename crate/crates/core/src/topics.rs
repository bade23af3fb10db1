//! LDA topic modeling by collapsed Gibbs sampling, and per-author
//! disciplinary profiles.
//!
//! Sampling is deterministic: every document owns an RNG stream derived from
//! the global seed and its doc id, and documents are processed in doc-id
//! order regardless of input order. Identical (matrix, params, seed) produce
//! a bit-identical model, and permuting the input documents permutes the
//! document-topic rows and nothing else.

use crate::textprep::DocTermMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TopicsError {
    #[error("topic count {k} exceeds vocabulary size {vocab}")]
    TooManyTopics { k: usize, vocab: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("document-term matrix is empty")]
    EmptyMatrix,
    #[error("matrix has zero tokens")]
    ZeroTokens,
    #[error("vocabulary mismatch between model ({model}) and matrix ({matrix})")]
    VocabularyMismatch { model: usize, matrix: usize },
    #[error("document count mismatch between model ({model}) and matrix ({matrix})")]
    DocCountMismatch { model: usize, matrix: usize },
    #[error("unknown document {0:?}")]
    UnknownDocument(String),
    #[error("author has no publications to profile")]
    EmptyPublicationList,
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A fitted LDA model: point estimates from the final sweep's counts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LdaModel {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub iterations: usize,
    pub vocabulary: Vec<String>,
    pub doc_ids: Vec<String>,
    /// K x V rows, each summing to 1.
    pub topic_word: Vec<Vec<f64>>,
    /// D x K rows, each summing to 1.
    pub doc_topic: Vec<Vec<f64>>,
}

impl LdaModel {
    pub fn doc_row(&self, pub_id: &str) -> Option<&[f64]> {
        self.doc_ids
            .iter()
            .position(|d| d == pub_id)
            .map(|i| self.doc_topic[i].as_slice())
    }

    /// Model export as a single JSON document.
    pub fn export_json(&self, path: &Path) -> Result<(), TopicsError> {
        let json = serde_json::to_string_pretty(self).expect("model serializes");
        std::fs::write(path, json).map_err(|source| TopicsError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// An author's mean topic distribution over their publications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisciplinaryProfile {
    pub author_id: String,
    pub distribution: Vec<f64>,
}

fn doc_rng(seed: u64, doc_id: &str) -> ChaCha20Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(doc_id.as_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha20Rng::from_seed(key)
}

/// In-progress collapsed Gibbs state; exposed so sweeps and their count
/// invariants can be driven and checked externally.
pub struct GibbsSampler<'a> {
    dtm: &'a DocTermMatrix,
    k: usize,
    alpha: f64,
    beta: f64,
    seed: u64,
    /// Documents in canonical (doc-id sorted) processing order.
    order: Vec<usize>,
    /// Flattened token words per document (original row order).
    words: Vec<Vec<u32>>,
    assignments: Vec<Vec<u32>>,
    doc_topic_counts: Vec<Vec<u32>>,
    topic_word_counts: Vec<Vec<u32>>,
    topic_totals: Vec<u64>,
    rngs: Vec<ChaCha20Rng>,
    sweeps_done: usize,
}

impl<'a> GibbsSampler<'a> {
    pub fn new(
        dtm: &'a DocTermMatrix,
        k: usize,
        alpha: f64,
        beta: f64,
        seed: u64,
    ) -> Result<Self, TopicsError> {
        if dtm.n_docs() == 0 {
            return Err(TopicsError::EmptyMatrix);
        }
        if k == 0 {
            return Err(TopicsError::InvalidParameter("K must be at least 1".into()));
        }
        if k > dtm.n_terms() {
            return Err(TopicsError::TooManyTopics {
                k,
                vocab: dtm.n_terms(),
            });
        }
        if !(alpha > 0.0) || !(beta > 0.0) {
            return Err(TopicsError::InvalidParameter(
                "alpha and beta must be positive".into(),
            ));
        }

        let d = dtm.n_docs();
        let v = dtm.n_terms();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| dtm.doc_ids[a].cmp(&dtm.doc_ids[b]));

        let words: Vec<Vec<u32>> = dtm
            .rows
            .iter()
            .map(|row| {
                let mut out = Vec::new();
                for &(term, count) in row {
                    for _ in 0..count {
                        out.push(term as u32);
                    }
                }
                out
            })
            .collect();

        let mut sampler = GibbsSampler {
            dtm,
            k,
            alpha,
            beta,
            seed,
            order,
            assignments: words.iter().map(|w| vec![0u32; w.len()]).collect(),
            words,
            doc_topic_counts: vec![vec![0u32; k]; d],
            topic_word_counts: vec![vec![0u32; v]; k],
            topic_totals: vec![0u64; k],
            rngs: dtm
                .doc_ids
                .iter()
                .map(|id| doc_rng(seed, id))
                .collect(),
            sweeps_done: 0,
        };

        for pos in 0..sampler.order.len() {
            let doc = sampler.order[pos];
            for i in 0..sampler.words[doc].len() {
                let topic = sampler.rngs[doc].gen_range(0..k as u32);
                let word = sampler.words[doc][i] as usize;
                sampler.assignments[doc][i] = topic;
                sampler.doc_topic_counts[doc][topic as usize] += 1;
                sampler.topic_word_counts[topic as usize][word] += 1;
                sampler.topic_totals[topic as usize] += 1;
            }
        }
        Ok(sampler)
    }

    /// One full collapsed Gibbs sweep over every token.
    pub fn sweep(&mut self) {
        let v_beta = self.beta * self.dtm.n_terms() as f64;
        let mut weights = vec![0.0f64; self.k];
        for pos in 0..self.order.len() {
            let doc = self.order[pos];
            for i in 0..self.words[doc].len() {
                let word = self.words[doc][i] as usize;
                let old = self.assignments[doc][i] as usize;
                self.doc_topic_counts[doc][old] -= 1;
                self.topic_word_counts[old][word] -= 1;
                self.topic_totals[old] -= 1;

                let mut total = 0.0;
                for t in 0..self.k {
                    let w = (self.doc_topic_counts[doc][t] as f64 + self.alpha)
                        * (self.topic_word_counts[t][word] as f64 + self.beta)
                        / (self.topic_totals[t] as f64 + v_beta);
                    weights[t] = w;
                    total += w;
                }
                let mut target = self.rngs[doc].gen::<f64>() * total;
                let mut new = self.k - 1;
                for (t, &w) in weights.iter().enumerate() {
                    target -= w;
                    if target <= 0.0 {
                        new = t;
                        break;
                    }
                }
                self.assignments[doc][i] = new as u32;
                self.doc_topic_counts[doc][new] += 1;
                self.topic_word_counts[new][word] += 1;
                self.topic_totals[new] += 1;
            }
        }
        self.sweeps_done += 1;
        debug_assert!(self.counts_conserved());
    }

    /// Checks token-topic count conservation: per-document assignment counts
    /// sum to the document's token count, and topic-word tables sum to the
    /// corpus token count.
    pub fn counts_conserved(&self) -> bool {
        let per_doc_ok = (0..self.dtm.n_docs()).all(|d| {
            let assigned: u64 = self.doc_topic_counts[d].iter().map(|&c| u64::from(c)).sum();
            assigned == self.words[d].len() as u64
        });
        let table_total: u64 = self
            .topic_word_counts
            .iter()
            .flat_map(|row| row.iter().map(|&c| u64::from(c)))
            .sum();
        let token_total: u64 = self.words.iter().map(|w| w.len() as u64).sum();
        let totals_ok = self.topic_totals.iter().sum::<u64>() == token_total;
        per_doc_ok && table_total == token_total && totals_ok
    }

    /// Point estimates from the current counts.
    pub fn finalize(&self) -> LdaModel {
        let v = self.dtm.n_terms();
        let v_beta = self.beta * v as f64;
        let k_alpha = self.alpha * self.k as f64;
        let topic_word = (0..self.k)
            .map(|t| {
                let denom = self.topic_totals[t] as f64 + v_beta;
                (0..v)
                    .map(|w| (self.topic_word_counts[t][w] as f64 + self.beta) / denom)
                    .collect()
            })
            .collect();
        let doc_topic = (0..self.dtm.n_docs())
            .map(|d| {
                let denom = self.words[d].len() as f64 + k_alpha;
                (0..self.k)
                    .map(|t| (self.doc_topic_counts[d][t] as f64 + self.alpha) / denom)
                    .collect()
            })
            .collect();
        LdaModel {
            k: self.k,
            alpha: self.alpha,
            beta: self.beta,
            seed: self.seed,
            iterations: self.sweeps_done,
            vocabulary: self.dtm.vocabulary.clone(),
            doc_ids: self.dtm.doc_ids.clone(),
            topic_word,
            doc_topic,
        }
    }
}

/// Default symmetric document-topic prior, 50/K.
pub fn default_alpha(k: usize) -> f64 {
    50.0 / k as f64
}

/// Default symmetric topic-word prior.
pub const DEFAULT_BETA: f64 = 0.01;

/// Fits LDA with `iterations` collapsed Gibbs sweeps.
pub fn fit_lda(
    dtm: &DocTermMatrix,
    k: usize,
    alpha: f64,
    beta: f64,
    iterations: usize,
    seed: u64,
) -> Result<LdaModel, TopicsError> {
    if iterations == 0 {
        return Err(TopicsError::InvalidParameter(
            "iterations must be at least 1".into(),
        ));
    }
    let mut sampler = GibbsSampler::new(dtm, k, alpha, beta, seed)?;
    for _ in 0..iterations {
        sampler.sweep();
    }
    Ok(sampler.finalize())
}

/// Per-token predictive perplexity of `dtm` under the model:
/// exp(-log-likelihood / token count). Documents are matched by id.
pub fn perplexity(model: &LdaModel, dtm: &DocTermMatrix) -> Result<f64, TopicsError> {
    if model.vocabulary.len() != dtm.n_terms() {
        return Err(TopicsError::VocabularyMismatch {
            model: model.vocabulary.len(),
            matrix: dtm.n_terms(),
        });
    }
    if model.doc_ids.len() != dtm.n_docs() {
        return Err(TopicsError::DocCountMismatch {
            model: model.doc_ids.len(),
            matrix: dtm.n_docs(),
        });
    }
    let row_index: BTreeMap<&str, usize> = model
        .doc_ids
        .iter()
        .enumerate()
        .map(|(i, d)| (d.as_str(), i))
        .collect();
    let mut log_likelihood = 0.0;
    let mut tokens = 0u64;
    for (d, row) in dtm.rows.iter().enumerate() {
        let model_row = *row_index
            .get(dtm.doc_ids[d].as_str())
            .ok_or_else(|| TopicsError::UnknownDocument(dtm.doc_ids[d].clone()))?;
        let theta = &model.doc_topic[model_row];
        for &(word, count) in row {
            let p: f64 = (0..model.k)
                .map(|t| theta[t] * model.topic_word[t][word])
                .sum();
            log_likelihood += f64::from(count) * p.ln();
            tokens += u64::from(count);
        }
    }
    if tokens == 0 {
        return Err(TopicsError::ZeroTokens);
    }
    Ok((-log_likelihood / tokens as f64).exp())
}

/// Mean of the author's document-topic rows, re-normalized to sum 1.
/// Invariant to the order of `author_pubs`.
pub fn author_profile(
    model: &LdaModel,
    author_id: &str,
    author_pubs: &[String],
) -> Result<DisciplinaryProfile, TopicsError> {
    if author_pubs.is_empty() {
        return Err(TopicsError::EmptyPublicationList);
    }
    let mut sum = vec![0.0f64; model.k];
    let mut sorted: Vec<&String> = author_pubs.iter().collect();
    sorted.sort();
    for pub_id in sorted {
        let row = model
            .doc_row(pub_id)
            .ok_or_else(|| TopicsError::UnknownDocument(pub_id.clone()))?;
        for (acc, &p) in sum.iter_mut().zip(row) {
            *acc += p;
        }
    }
    let total: f64 = sum.iter().sum();
    for p in &mut sum {
        *p /= total;
    }
    Ok(DisciplinaryProfile {
        author_id: author_id.to_string(),
        distribution: sum,
    })
}

/// Argmax topic; ties break toward the lowest index.
pub fn dominant_topic(profile: &DisciplinaryProfile) -> usize {
    let mut best = 0;
    for (i, &p) in profile.distribution.iter().enumerate() {
        if p > profile.distribution[best] {
            best = i;
        }
    }
    best
}

/// Profile export: CSV `author_id,t0..t{K-1}`.
pub fn export_profiles(
    profiles: &[DisciplinaryProfile],
    k: usize,
    path: &Path,
) -> Result<(), TopicsError> {
    let io_err = |source: std::io::Error| TopicsError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut w = std::fs::File::create(path).map_err(io_err)?;
    let header: Vec<String> = std::iter::once("author_id".to_string())
        .chain((0..k).map(|t| format!("t{t}")))
        .collect();
    writeln!(w, "{}", header.join(",")).map_err(io_err)?;
    for profile in profiles {
        let row: Vec<String> = std::iter::once(profile.author_id.clone())
            .chain(profile.distribution.iter().map(|p| format!("{p}")))
            .collect();
        writeln!(w, "{}", row.join(",")).map_err(io_err)?;
    }
    Ok(())
}
