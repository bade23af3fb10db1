//! Title+abstract preprocessing and the document-term frequency matrix.
//!
//! The chain: merge title and abstract, lowercase, split on non-alphabetic
//! characters, drop tokens shorter than 3 characters, drop stopwords, then
//! lemmatize with a deterministic rule-based suffix stripper (plural -s/-es,
//! -ing, -ed, -ization -> -ize). A full lexical lemmatizer is intentionally
//! out of scope; downstream topic modeling is robust to this substitution.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TextError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("no documents supplied")]
    NoDocuments,
    #[error(
        "empty vocabulary after document-frequency filtering: \
         {total_terms} distinct terms, {below_min_df} below min_df={min_df}, \
         {above_max_df} above max_df_ratio={max_df_ratio}"
    )]
    EmptyVocabulary {
        total_terms: usize,
        below_min_df: usize,
        above_max_df: usize,
        min_df: usize,
        max_df_ratio: f64,
    },
}

/// A normalized token stream for one document. Unigrams are lowercase
/// alphabetic and at least 3 characters; bigrams join two unigrams with `_`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDoc {
    pub pub_id: String,
    pub tokens: Vec<String>,
}

/// Stop-list: one term per line, UTF-8. Blank lines ignored.
pub fn load_stoplist(path: &Path) -> Result<BTreeSet<String>, TextError> {
    let file = std::fs::File::open(path).map_err(|source| TextError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut out = BTreeSet::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|source| TextError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let term = line.trim().to_lowercase();
        if !term.is_empty() {
            out.insert(term);
        }
    }
    Ok(out)
}

/// A small built-in English stop-list; callers merge their own on top.
pub fn default_stoplist() -> BTreeSet<String> {
    [
        "the", "and", "for", "are", "but", "not", "with", "this", "that", "from", "they", "their",
        "been", "have", "has", "had", "was", "were", "which", "will", "would", "can", "could",
        "should", "our", "all", "also", "into", "such", "these", "those", "than", "then", "when",
        "where", "while", "who", "whom", "how", "what", "its", "his", "her", "she", "him", "you",
        "your", "out", "use", "used", "using", "based", "paper", "propose", "proposed", "results",
        "show", "shows", "study", "approach", "method", "methods", "present", "presents",
        "however", "between", "both", "each", "more", "most", "some", "other", "over", "under",
        "first", "second", "new", "two", "one",
    ]
    .into_iter()
    .map(str::to_string)
    .collect()
}

const MIN_TOKEN_LEN: usize = 3;

/// Rule-based suffix stripping, applied to fixpoint. A rule only fires when
/// the remaining stem keeps at least 3 characters, and plural rules skip
/// words ending in "ss".
pub fn lemmatize(token: &str) -> String {
    let mut current = token.to_string();
    loop {
        let next = strip_once(&current);
        if next == current {
            return current;
        }
        current = next;
    }
}

fn strip_once(word: &str) -> String {
    if let Some(stem) = word.strip_suffix("ization") {
        if stem.len() + 3 >= MIN_TOKEN_LEN {
            return format!("{stem}ize");
        }
    }
    if let Some(stem) = word.strip_suffix("ing") {
        if stem.len() >= MIN_TOKEN_LEN {
            return stem.to_string();
        }
    }
    if let Some(stem) = word.strip_suffix("ed") {
        if stem.len() >= MIN_TOKEN_LEN {
            return stem.to_string();
        }
    }
    if !word.ends_with("ss") {
        if let Some(stem) = word.strip_suffix("es") {
            if stem.len() >= MIN_TOKEN_LEN {
                return stem.to_string();
            }
        }
        if let Some(stem) = word.strip_suffix('s') {
            if stem.len() >= MIN_TOKEN_LEN {
                return stem.to_string();
            }
        }
    }
    word.to_string()
}

/// Normalizes a title+abstract pair into unigram tokens, order preserved.
pub fn preprocess(title: &str, abstract_text: &str, stoplist: &BTreeSet<String>) -> Vec<String> {
    let merged = format!("{title} {abstract_text}");
    let lowered = merged.to_lowercase();
    lowered
        .split(|c: char| !c.is_alphabetic())
        .filter(|tok| tok.chars().count() >= MIN_TOKEN_LEN)
        .filter(|tok| !stoplist.contains(*tok))
        .map(lemmatize)
        .filter(|tok| !stoplist.contains(tok))
        .collect()
}

/// Preprocesses one publication into a [`TokenizedDoc`].
pub fn preprocess_doc(
    pub_id: &str,
    title: &str,
    abstract_text: &str,
    stoplist: &BTreeSet<String>,
) -> TokenizedDoc {
    TokenizedDoc {
        pub_id: pub_id.to_string(),
        tokens: preprocess(title, abstract_text, stoplist),
    }
}

/// Appends adjacent-pair bigrams (joined with `_`) after the unigrams.
/// `max_n = 1` returns the document unchanged.
pub fn extract_ngrams(doc: &TokenizedDoc, max_n: usize) -> TokenizedDoc {
    assert!(
        (1..=2).contains(&max_n),
        "max_n must be 1 or 2, got {max_n}"
    );
    let mut tokens = doc.tokens.clone();
    if max_n == 2 {
        for pair in doc.tokens.windows(2) {
            tokens.push(format!("{}_{}", pair[0], pair[1]));
        }
    }
    TokenizedDoc {
        pub_id: doc.pub_id.clone(),
        tokens,
    }
}

/// Sparse documents-by-terms count matrix. Vocabulary is sorted
/// lexicographically; each row holds (term index, count) pairs ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocTermMatrix {
    pub vocabulary: Vec<String>,
    pub doc_ids: Vec<String>,
    pub rows: Vec<Vec<(usize, u32)>>,
}

impl DocTermMatrix {
    pub fn n_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn n_terms(&self) -> usize {
        self.vocabulary.len()
    }

    /// Total token count (restricted to the vocabulary).
    pub fn total_tokens(&self) -> u64 {
        self.rows
            .iter()
            .flat_map(|r| r.iter().map(|&(_, c)| u64::from(c)))
            .sum()
    }

    pub fn row_sum(&self, doc: usize) -> u64 {
        self.rows[doc].iter().map(|&(_, c)| u64::from(c)).sum()
    }

    /// Exports the sparse triplet CSV `doc_id,term,count` plus a vocabulary
    /// file (one term per line).
    pub fn export(&self, triplets: &Path, vocab: &Path) -> Result<(), TextError> {
        let io_err = |p: &Path, e: std::io::Error| TextError::Io {
            path: p.display().to_string(),
            source: e,
        };
        let mut w = std::fs::File::create(triplets).map_err(|e| io_err(triplets, e))?;
        writeln!(w, "doc_id,term,count").map_err(|e| io_err(triplets, e))?;
        for (d, row) in self.rows.iter().enumerate() {
            for &(t, c) in row {
                writeln!(w, "{},{},{}", self.doc_ids[d], self.vocabulary[t], c)
                    .map_err(|e| io_err(triplets, e))?;
            }
        }
        let mut v = std::fs::File::create(vocab).map_err(|e| io_err(vocab, e))?;
        for term in &self.vocabulary {
            writeln!(v, "{term}").map_err(|e| io_err(vocab, e))?;
        }
        Ok(())
    }
}

/// Builds the DTM keeping terms whose document frequency lies in
/// `[min_df, max_df_ratio * n_docs]`.
pub fn build_dtm(
    docs: &[TokenizedDoc],
    min_df: usize,
    max_df_ratio: f64,
) -> Result<DocTermMatrix, TextError> {
    if docs.is_empty() {
        return Err(TextError::NoDocuments);
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in docs {
        let distinct: BTreeSet<&str> = doc.tokens.iter().map(String::as_str).collect();
        for term in distinct {
            *df.entry(term).or_insert(0) += 1;
        }
    }
    let max_df = max_df_ratio * docs.len() as f64;
    let mut below = 0usize;
    let mut above = 0usize;
    let mut vocabulary = Vec::new();
    for (&term, &freq) in &df {
        if freq < min_df {
            below += 1;
        } else if freq as f64 > max_df {
            above += 1;
        } else {
            vocabulary.push(term.to_string());
        }
    }
    if vocabulary.is_empty() {
        return Err(TextError::EmptyVocabulary {
            total_terms: df.len(),
            below_min_df: below,
            above_max_df: above,
            min_df,
            max_df_ratio,
        });
    }
    let index: BTreeMap<&str, usize> = vocabulary
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    let rows = docs
        .iter()
        .map(|doc| {
            let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
            for tok in &doc.tokens {
                if let Some(&t) = index.get(tok.as_str()) {
                    *counts.entry(t).or_insert(0) += 1;
                }
            }
            counts.into_iter().collect()
        })
        .collect();
    Ok(DocTermMatrix {
        vocabulary,
        doc_ids: docs.iter().map(|d| d.pub_id.clone()).collect(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(id: &str, tokens: &[&str]) -> TokenizedDoc {
        TokenizedDoc {
            pub_id: id.to_string(),
            tokens: tokens.iter().map(|t| t.to_string()).collect(),
        }
    }

    #[test]
    fn strips_digits_and_short_words() {
        // Digits and the 2-char "ai"/"in" are removed; "learning" is then
        // stemmed by the -ing rule.
        let tokens = preprocess("Deep Learning", "AI in 2019!", &BTreeSet::new());
        assert_eq!(tokens, vec!["deep", "learn"]);
    }

    #[test]
    fn stopword_only_text_is_empty() {
        let stop: BTreeSet<String> = ["the", "and", "with"].iter().map(|s| s.to_string()).collect();
        assert!(preprocess("The", "and the with", &stop).is_empty());
    }

    #[test]
    fn suffix_rules_share_a_stem() {
        let tokens = preprocess("Networks networking networked", "", &BTreeSet::new());
        assert_eq!(tokens, vec!["network", "network", "network"]);
    }

    #[test]
    fn lemmatizer_rules() {
        assert_eq!(lemmatize("normalization"), "normalize");
        assert_eq!(lemmatize("classes"), "class");
        assert_eq!(lemmatize("class"), "class");
        assert_eq!(lemmatize("sing"), "sing");
        assert_eq!(lemmatize("models"), "model");
    }

    proptest! {
        #[test]
        fn lemmatize_is_idempotent(word in "[a-z]{3,12}") {
            let once = lemmatize(&word);
            prop_assert_eq!(lemmatize(&once), once);
        }
    }

    #[test]
    fn preprocess_is_idempotent_on_its_output() {
        let stop = default_stoplist();
        let tokens = preprocess(
            "Co-Authorship Networks of Rising Stars",
            "We analyze collaborations, diversities, and h-index growth in 2010.",
            &stop,
        );
        let rejoined = tokens.join(" ");
        assert_eq!(preprocess(&rejoined, "", &stop), tokens);
    }

    #[test]
    fn bigrams_are_adjacent_pairs() {
        let d = doc("p", &["deep", "learning", "model"]);
        let out = extract_ngrams(&d, 2);
        assert_eq!(
            out.tokens,
            vec!["deep", "learning", "model", "deep_learning", "learning_model"]
        );
    }

    #[test]
    fn single_token_has_no_bigrams() {
        let d = doc("p", &["deep"]);
        assert_eq!(extract_ngrams(&d, 2).tokens, vec!["deep"]);
        assert!(extract_ngrams(&doc("q", &[]), 2).tokens.is_empty());
    }

    #[test]
    fn dtm_counts_shared_term() {
        let docs = vec![
            doc("d1", &["model", "graph", "model"]),
            doc("d2", &["model", "entropy"]),
        ];
        let dtm = build_dtm(&docs, 1, 1.0).unwrap();
        let m = dtm.vocabulary.iter().position(|t| t == "model").unwrap();
        let total: u32 = dtm
            .rows
            .iter()
            .flat_map(|r| r.iter().filter(|&&(t, _)| t == m).map(|&(_, c)| c))
            .sum();
        assert_eq!(total, 3);
    }

    #[test]
    fn min_df_excludes_rare_terms() {
        let mut docs: Vec<TokenizedDoc> = (0..9)
            .map(|i| doc(&format!("d{i}"), &["common"]))
            .collect();
        docs.push(doc("d9", &["common", "rare"]));
        let dtm = build_dtm(&docs, 2, 1.0).unwrap();
        assert_eq!(dtm.vocabulary, vec!["common"]);
    }

    #[test]
    fn max_df_excludes_ubiquitous_terms() {
        // "learning" appears in 3 of 3 docs; with max_df_ratio 0.5 the cap is
        // 1.5 documents, so it is excluded.
        let docs = vec![
            doc("d1", &["learning", "alpha"]),
            doc("d2", &["learning", "alpha"]),
            doc("d3", &["learning", "beta"]),
        ];
        let dtm = build_dtm(&docs, 1, 0.5).unwrap();
        assert_eq!(dtm.vocabulary, vec!["beta"]);
    }

    #[test]
    fn empty_vocabulary_reports_diagnostics() {
        let docs = vec![doc("d1", &["solo"])];
        let err = build_dtm(&docs, 2, 1.0).unwrap_err();
        match err {
            TextError::EmptyVocabulary {
                total_terms,
                below_min_df,
                ..
            } => {
                assert_eq!(total_terms, 1);
                assert_eq!(below_min_df, 1);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    proptest! {
        /// Row sums equal per-document token counts restricted to vocabulary.
        #[test]
        fn row_sums_match_token_counts(
            raw in proptest::collection::vec(
                proptest::collection::vec("[a-c]{3}", 1..8),
                1..6,
            )
        ) {
            let docs: Vec<TokenizedDoc> = raw
                .iter()
                .enumerate()
                .map(|(i, toks)| TokenizedDoc {
                    pub_id: format!("d{i}"),
                    tokens: toks.clone(),
                })
                .collect();
            let dtm = build_dtm(&docs, 1, 1.0).unwrap();
            let vocab: BTreeSet<&str> = dtm.vocabulary.iter().map(String::as_str).collect();
            for (d, doc) in docs.iter().enumerate() {
                let expected = doc
                    .tokens
                    .iter()
                    .filter(|t| vocab.contains(t.as_str()))
                    .count() as u64;
                prop_assert_eq!(dtm.row_sum(d), expected);
            }
        }

        /// Permuting input docs permutes rows identically.
        #[test]
        fn dtm_is_permutation_equivariant(seed in 0u64..1000) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let docs = vec![
                doc("a", &["alpha", "beta"]),
                doc("b", &["beta", "gamma", "beta"]),
                doc("c", &["alpha", "gamma"]),
                doc("d", &["delta"]),
            ];
            let mut shuffled = docs.clone();
            let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
            shuffled.shuffle(&mut rng);
            let base = build_dtm(&docs, 1, 1.0).unwrap();
            let perm = build_dtm(&shuffled, 1, 1.0).unwrap();
            prop_assert_eq!(&base.vocabulary, &perm.vocabulary);
            for (i, d) in shuffled.iter().enumerate() {
                let j = docs.iter().position(|x| x.pub_id == d.pub_id).unwrap();
                prop_assert_eq!(&perm.rows[i], &base.rows[j]);
            }
        }
    }
}
