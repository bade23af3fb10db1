//! End-to-end orchestration: ingest -> textprep -> topics -> network ->
//! features -> learn, with a manifest recording the config hash, per-stage
//! seeds, and a checksum for every emitted file. Stage outputs are cached
//! by config-section hash so unchanged stages are skipped on re-runs.
//!
//! A fixed global seed makes the run byte-identical across repeats and
//! across worker-thread counts.

use crate::config::{ConfigError, NetworkAggregation, PipelineConfig, WeightedDegreeMode};
use crate::corpus::{
    first_pub_year, ingest_with_period, select_cohort, Corpus, IngestFormat, SjrTable,
    VenueTiering,
};
use crate::features::{
    assemble_features, export_feature_matrix, export_label_report, growth_rate, h_index,
    label_rising_stars_scoped, AssemblyInputs, CareerSnapshot, FeatureVector, LabelRecord,
    FEATURE_COLUMNS,
};
use crate::learn::{
    compare_columns, correlation_matrix, evaluate, stats::export_correlation_matrix, DataRow,
    Dataset, EvaluationReport, ModelKind,
};
use crate::network::{CoauthorGraph, NodeMetrics};
use crate::seeds::derive_seed;
use crate::textprep::{
    build_dtm, default_stoplist, extract_ngrams, load_stoplist, preprocess_doc, DocTermMatrix,
};
use crate::topics::{fit_lda, LdaModel};
use rayon::prelude::*;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("stage {stage} failed: {message}")]
    Stage { stage: &'static str, message: String },
}

impl PipelineError {
    fn stage(stage: &'static str, err: impl std::fmt::Display) -> Self {
        PipelineError::Stage {
            stage,
            message: err.to_string(),
        }
    }

    /// Process exit code: 2 for config errors, 3 for stage failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Stage { .. } => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageStatus {
    pub name: String,
    pub status: String,
    pub cached: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub seed: u64,
    pub stage_seeds: BTreeMap<String, u64>,
    pub stages: Vec<StageStatus>,
    pub files: Vec<ManifestFile>,
    pub failed_stage: Option<String>,
    pub partial: bool,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self, std::io::Error> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}

#[derive(Debug)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub manifest: Manifest,
}

pub fn sha256_file(path: &Path) -> Result<String, std::io::Error> {
    let bytes = std::fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn sha256_str(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn config_hash(config: &PipelineConfig) -> String {
    sha256_str(&serde_json::to_string(config).expect("config serializes"))
}

/// JSON stage cache keyed by a content hash.
struct StageCache {
    dir: PathBuf,
    enabled: bool,
}

impl StageCache {
    fn get_or_compute<T, E>(
        &self,
        stage: &str,
        key: &str,
        compute: impl FnOnce() -> Result<T, E>,
    ) -> Result<(T, bool), E>
    where
        T: Serialize + DeserializeOwned,
    {
        let path = self.dir.join(format!("{stage}-{key}.json"));
        if self.enabled {
            if let Ok(text) = std::fs::read_to_string(&path) {
                if let Ok(value) = serde_json::from_str::<T>(&text) {
                    return Ok((value, true));
                }
            }
        }
        let value = compute()?;
        if self.enabled {
            let _ = std::fs::create_dir_all(&self.dir);
            if let Ok(json) = serde_json::to_string(&value) {
                let _ = std::fs::write(&path, json);
            }
        }
        Ok((value, false))
    }
}

/// Artifacts held in memory between stages; the partial results a failed run
/// got through are still available to callers.
pub struct PipelineArtifacts {
    pub corpus: Corpus,
    pub tiering: VenueTiering,
    pub cohort: Vec<String>,
    pub dtm: DocTermMatrix,
    pub model: LdaModel,
    pub metrics: BTreeMap<String, NodeMetrics>,
    pub labels: BTreeMap<String, u8>,
    pub label_records: Vec<LabelRecord>,
    pub features: Vec<FeatureVector>,
    pub evaluation: EvaluationReport,
}

pub struct CorpusStage {
    pub corpus: Corpus,
    pub tiering: VenueTiering,
    pub cohort: Vec<String>,
    pub rejects: usize,
}

pub fn stage_corpus(config: &PipelineConfig) -> Result<CorpusStage, PipelineError> {
    let outcome = ingest_with_period(
        &config.inputs.corpus,
        IngestFormat::JsonLines,
        Some(config.study_period),
    )
    .map_err(|e| PipelineError::stage("corpus", e))?;
    let table =
        SjrTable::from_csv(&config.inputs.sjr).map_err(|e| PipelineError::stage("corpus", e))?;
    let tiering = VenueTiering::build(table, config.network.sigma);
    let cohort = select_cohort(&outcome.corpus, &config.cohort)
        .map_err(|e| PipelineError::stage("corpus", e))?;
    let out_dir = &config.output_dir;
    if !outcome.rejects.is_empty() {
        outcome
            .write_rejects(&out_dir.join("rejects.jsonl"))
            .map_err(|e| PipelineError::stage("corpus", e))?;
    }
    Ok(CorpusStage {
        corpus: outcome.corpus,
        tiering,
        cohort,
        rejects: outcome.rejects.len(),
    })
}

pub fn stage_text(
    config: &PipelineConfig,
    corpus: &Corpus,
) -> Result<DocTermMatrix, PipelineError> {
    let mut stoplist = default_stoplist();
    if let Some(path) = &config.inputs.stoplist {
        let custom = load_stoplist(path).map_err(|e| PipelineError::stage("textprep", e))?;
        stoplist.extend(custom);
    }
    let docs: Vec<_> = corpus
        .records()
        .par_iter()
        .map(|rec| {
            let doc = preprocess_doc(&rec.pub_id, &rec.title, &rec.abstract_text, &stoplist);
            extract_ngrams(&doc, config.text.max_ngram)
        })
        .collect();
    build_dtm(&docs, config.text.min_df, config.text.max_df_ratio)
        .map_err(|e| PipelineError::stage("textprep", e))
}

pub fn stage_topics(
    config: &PipelineConfig,
    dtm: &DocTermMatrix,
) -> Result<LdaModel, PipelineError> {
    fit_lda(
        dtm,
        config.lda.topics,
        config.lda.alpha_value(),
        config.lda.beta,
        config.lda.iterations,
        derive_seed(config.seed, "topics"),
    )
    .map_err(|e| PipelineError::stage("topics", e))
}

fn metrics_for_window(
    corpus: &Corpus,
    window: (i32, i32),
    authors: &[String],
) -> Result<BTreeMap<String, NodeMetrics>, PipelineError> {
    let graph = CoauthorGraph::build(corpus, window);
    crate::network::node_metrics(&graph, authors).map_err(|e| PipelineError::stage("network", e))
}

fn mean_yearly_metrics(
    corpus: &Corpus,
    author: &str,
    window: (i32, i32),
) -> Result<NodeMetrics, PipelineError> {
    let mut acc = NodeMetrics::isolated(author);
    let mut years_present = 0usize;
    let mut degree_sum = 0usize;
    for year in window.0..=window.1 {
        if corpus.publications_of_in(author, (year, year)).next().is_none() {
            continue;
        }
        let graph = CoauthorGraph::build(corpus, (year, year));
        let m = crate::network::node_metrics(&graph, std::slice::from_ref(&author.to_string()))
            .map_err(|e| PipelineError::stage("network", e))?;
        let m = &m[author];
        years_present += 1;
        degree_sum += m.degree;
        acc.degree_centrality += m.degree_centrality;
        acc.weighted_degree += m.weighted_degree;
        acc.weighted_degree_normalized += m.weighted_degree_normalized;
        acc.clustering_coefficient += m.clustering_coefficient;
        acc.betweenness_centrality += m.betweenness_centrality;
    }
    if years_present > 0 {
        let n = years_present as f64;
        acc.degree = degree_sum / years_present;
        acc.degree_centrality /= n;
        acc.weighted_degree /= n;
        acc.weighted_degree_normalized /= n;
        acc.clustering_coefficient /= n;
        acc.betweenness_centrality /= n;
    }
    Ok(acc)
}

pub fn stage_network(
    config: &PipelineConfig,
    corpus: &Corpus,
    cohort: &[String],
) -> Result<BTreeMap<String, NodeMetrics>, PipelineError> {
    // Cohort authors grouped by their personal feature window.
    let mut by_window: BTreeMap<(i32, i32), Vec<String>> = BTreeMap::new();
    for author in cohort {
        let first =
            first_pub_year(corpus, author).map_err(|e| PipelineError::stage("network", e))?;
        by_window
            .entry(config.cohort.feature_window(first))
            .or_default()
            .push(author.clone());
    }
    match config.network.aggregation {
        NetworkAggregation::Window => {
            let groups: Vec<((i32, i32), Vec<String>)> = by_window.into_iter().collect();
            let computed: Result<Vec<BTreeMap<String, NodeMetrics>>, PipelineError> = groups
                .par_iter()
                .map(|(window, authors)| metrics_for_window(corpus, *window, authors))
                .collect();
            let mut out = BTreeMap::new();
            for map in computed? {
                out.extend(map);
            }
            Ok(out)
        }
        NetworkAggregation::YearlyMean => {
            let mut jobs: Vec<(String, (i32, i32))> = Vec::new();
            for (window, authors) in by_window {
                for author in authors {
                    jobs.push((author, window));
                }
            }
            let computed: Result<Vec<(String, NodeMetrics)>, PipelineError> = jobs
                .par_iter()
                .map(|(author, window)| {
                    mean_yearly_metrics(corpus, author, *window).map(|m| (author.clone(), m))
                })
                .collect();
            Ok(computed?.into_iter().collect())
        }
    }
}

pub struct LabelStage {
    pub labels: BTreeMap<String, u8>,
    pub records: Vec<LabelRecord>,
    pub rates: BTreeMap<String, f64>,
}

pub fn stage_labels(
    config: &PipelineConfig,
    corpus: &Corpus,
    cohort: &[String],
) -> Result<LabelStage, PipelineError> {
    let test_years = config.test_years();
    let mut rates = BTreeMap::new();
    let mut snapshots = BTreeMap::new();
    let mut stat_authors = BTreeSet::new();
    for author in cohort {
        let first =
            first_pub_year(corpus, author).map_err(|e| PipelineError::stage("label", e))?;
        let feature_window = config.cohort.feature_window(first);
        let label_window = config.cohort.label_window(first);
        let cites_h1: Vec<u32> = corpus
            .publications_of_in(author, feature_window)
            .map(|r| r.citation_count)
            .collect();
        let cites_h2: Vec<u32> = corpus
            .publications_of_in(author, label_window)
            .map(|r| r.citation_count)
            .collect();
        let snapshot = CareerSnapshot {
            h1: h_index(&cites_h1),
            h2: h_index(&cites_h2),
            t1: config.cohort.feature_window_years,
            t2: config.cohort.label_window_years,
        };
        let rate = growth_rate(&snapshot).map_err(|e| PipelineError::stage("label", e))?;
        rates.insert(author.clone(), rate);
        snapshots.insert(author.clone(), snapshot);
        if !test_years.contains(&first) {
            stat_authors.insert(author.clone());
        }
    }
    // Threshold statistics come from training-cohort authors only; when the
    // whole cohort is in the test years, fall back to all authors.
    if stat_authors.is_empty() {
        stat_authors = rates.keys().cloned().collect();
    }
    let labels = label_rising_stars_scoped(&rates, &stat_authors)
        .map_err(|e| PipelineError::stage("label", e))?;
    let records = rates
        .iter()
        .map(|(author, &rate)| {
            let s = &snapshots[author];
            LabelRecord {
                author_id: author.clone(),
                h1: s.h1,
                h2: s.h2,
                growth_rate: rate,
                label: labels[author],
            }
        })
        .collect();
    Ok(LabelStage {
        labels,
        records,
        rates,
    })
}

pub fn stage_features(
    config: &PipelineConfig,
    corpus: &Corpus,
    tiering: &VenueTiering,
    model: &LdaModel,
    metrics: &BTreeMap<String, NodeMetrics>,
    labels: &BTreeMap<String, u8>,
    cohort: &[String],
) -> Result<Vec<FeatureVector>, PipelineError> {
    let doc_topics: BTreeMap<String, Vec<f64>> = model
        .doc_ids
        .iter()
        .cloned()
        .zip(model.doc_topic.iter().cloned())
        .collect();
    let countries: BTreeSet<&str> = corpus
        .records()
        .iter()
        .flat_map(|r| r.authors.iter().map(|a| a.country.as_str()))
        .collect();
    let inputs = AssemblyInputs {
        corpus,
        doc_topics: &doc_topics,
        topic_count: model.k,
        metrics,
        tiering,
        labels,
        country_categories: countries.len().min(config.diversity.country_cap).max(1),
        norm: config.diversity.normalization,
        scope: config.diversity.scope,
        normalized_weighted_degree: config.network.weighted_degree
            == WeightedDegreeMode::Normalized,
    };
    assemble_features(&inputs, cohort, &config.cohort)
        .map_err(|e| PipelineError::stage("features", e))
}

/// Builds the learn-stage dataset: 16 numeric columns, cohort year =
/// first-publication year.
pub fn build_dataset(
    corpus: &Corpus,
    features: &[FeatureVector],
) -> Result<Dataset, PipelineError> {
    let rows: Result<Vec<DataRow>, PipelineError> = features
        .iter()
        .map(|v| {
            let year = first_pub_year(corpus, &v.author_id)
                .map_err(|e| PipelineError::stage("learn", e))?;
            Ok(DataRow {
                features: v.numeric_row().to_vec(),
                label: v.label,
                year,
                author_id: v.author_id.clone(),
                synthetic: false,
            })
        })
        .collect();
    Ok(Dataset {
        feature_names: FEATURE_COLUMNS.iter().map(|s| s.to_string()).collect(),
        rows: rows?,
    })
}

/// Extended column matrix for the statistical reports: the 16 features plus
/// raw degree and the growth rate.
fn report_columns(
    features: &[FeatureVector],
    metrics: &BTreeMap<String, NodeMetrics>,
    rates: &BTreeMap<String, f64>,
) -> (Vec<String>, Vec<Vec<f64>>, Vec<u8>) {
    let mut names: Vec<String> = FEATURE_COLUMNS.iter().map(|s| s.to_string()).collect();
    names.push("degree_raw".into());
    names.push("growth_rate".into());
    let mut rows = Vec::with_capacity(features.len());
    let mut labels = Vec::with_capacity(features.len());
    for v in features {
        let mut row = v.numeric_row().to_vec();
        row.push(metrics.get(&v.author_id).map_or(0.0, |m| m.degree as f64));
        row.push(rates.get(&v.author_id).copied().unwrap_or(0.0));
        rows.push(row);
        labels.push(v.label);
    }
    (names, rows, labels)
}

/// Per-year paper counts, distinct authors, and mean authors per paper.
pub fn report_distributions(corpus: &Corpus) -> Vec<(i32, usize, usize, f64)> {
    let mut per_year: BTreeMap<i32, (usize, BTreeSet<&str>, usize)> = BTreeMap::new();
    for rec in corpus.records() {
        let entry = per_year.entry(rec.year).or_default();
        entry.0 += 1;
        for a in &rec.authors {
            entry.1.insert(&a.author_id);
        }
        entry.2 += rec.authors.len();
    }
    per_year
        .into_iter()
        .map(|(year, (papers, authors, authorships))| {
            (year, papers, authors.len(), authorships as f64 / papers as f64)
        })
        .collect()
}

pub fn export_distributions(
    rows: &[(i32, usize, usize, f64)],
    path: &Path,
) -> Result<(), std::io::Error> {
    let mut w = std::fs::File::create(path)?;
    writeln!(w, "year,papers,authors,mean_authors_per_paper")?;
    for (year, papers, authors, mean) in rows {
        writeln!(w, "{year},{papers},{authors},{mean}")?;
    }
    Ok(())
}

fn input_fingerprint(config: &PipelineConfig) -> Result<String, PipelineError> {
    let corpus_hash = sha256_file(&config.inputs.corpus)
        .map_err(|e| PipelineError::stage("corpus", e))?;
    let sjr_hash =
        sha256_file(&config.inputs.sjr).map_err(|e| PipelineError::stage("corpus", e))?;
    Ok(format!("{corpus_hash}:{sjr_hash}"))
}

fn stage_key(sections: &[&str]) -> String {
    sha256_str(&sections.join("|"))[..24].to_string()
}

fn json_of<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("config section serializes")
}

/// Runs the full pipeline, writing the five report artifacts plus the
/// manifest into `config.output_dir`. With `threads` set, all within-stage
/// parallelism runs on a dedicated pool of that size; outputs are identical
/// for any thread count.
pub fn run_pipeline(
    config: &PipelineConfig,
    threads: Option<usize>,
) -> Result<RunSummary, PipelineError> {
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| PipelineError::stage("setup", e))?;
            pool.install(|| run_pipeline_inner(config))
        }
        None => run_pipeline_inner(config),
    }
}

fn write_failure_manifest(config: &PipelineConfig, manifest: &mut Manifest, stage: &str) {
    manifest.failed_stage = Some(stage.to_string());
    manifest.partial = true;
    manifest.stages.push(StageStatus {
        name: stage.to_string(),
        status: "failed".into(),
        cached: false,
    });
    let path = config.output_dir.join("manifest.json");
    if std::fs::create_dir_all(&config.output_dir).is_ok() {
        let _ = std::fs::write(
            &path,
            serde_json::to_string_pretty(manifest).expect("manifest serializes"),
        );
    }
}

fn run_pipeline_inner(config: &PipelineConfig) -> Result<RunSummary, PipelineError> {
    config.validate()?;
    std::fs::create_dir_all(&config.output_dir)
        .map_err(|e| PipelineError::stage("setup", e))?;

    let mut manifest = Manifest {
        config_hash: config_hash(config),
        seed: config.seed,
        stage_seeds: BTreeMap::from([
            ("topics".to_string(), derive_seed(config.seed, "topics")),
            ("learn".to_string(), derive_seed(config.seed, "learn")),
        ]),
        ..Manifest::default()
    };
    let cache = StageCache {
        dir: config.output_dir.join(".cache"),
        enabled: config.cache,
    };

    macro_rules! stage {
        ($name:literal, $expr:expr) => {
            match $expr {
                Ok(value) => {
                    manifest.stages.push(StageStatus {
                        name: $name.to_string(),
                        status: "ok".into(),
                        cached: false,
                    });
                    value
                }
                Err(err) => {
                    let err: PipelineError = err;
                    write_failure_manifest(config, &mut manifest, $name);
                    return Err(err);
                }
            }
        };
        ($name:literal, cached $key:expr, $expr:expr) => {{
            let result: Result<(_, bool), PipelineError> =
                cache.get_or_compute($name, &$key, || $expr);
            match result {
                Ok((value, was_cached)) => {
                    manifest.stages.push(StageStatus {
                        name: $name.to_string(),
                        status: "ok".into(),
                        cached: was_cached,
                    });
                    value
                }
                Err(err) => {
                    write_failure_manifest(config, &mut manifest, $name);
                    return Err(err);
                }
            }
        }};
    }

    let (inputs_hash, corpus_stage) = stage!(
        "corpus",
        (|| {
            let fingerprint = input_fingerprint(config)?;
            let stage = stage_corpus(config)?;
            Ok::<_, PipelineError>((fingerprint, stage))
        })()
    );
    let CorpusStage {
        corpus,
        tiering,
        cohort,
        rejects,
    } = corpus_stage;

    let text_key = stage_key(&[
        &inputs_hash,
        &json_of(&config.study_period),
        &json_of(&config.text),
    ]);
    let dtm = stage!("textprep", cached text_key, stage_text(config, &corpus));

    let topics_key = stage_key(&[
        &text_key,
        &json_of(&config.lda),
        &config.seed.to_string(),
    ]);
    let model = stage!("topics", cached topics_key, stage_topics(config, &dtm));

    let network_key = stage_key(&[
        &inputs_hash,
        &json_of(&config.study_period),
        &json_of(&config.cohort),
        &json_of(&config.network),
    ]);
    let metrics = stage!(
        "network",
        cached network_key,
        stage_network(config, &corpus, &cohort)
    );

    let label_stage = stage!("label", stage_labels(config, &corpus, &cohort));

    let features = stage!(
        "features",
        stage_features(
            config,
            &corpus,
            &tiering,
            &model,
            &metrics,
            &label_stage.labels,
            &cohort,
        )
    );

    let dataset = stage!("learn", build_dataset(&corpus, &features));
    let evaluation = stage!(
        "learn",
        evaluate(
            &dataset,
            &config.test_years(),
            &ModelKind::ALL,
            &config.ml.params,
            derive_seed(config.seed, "learn"),
        )
        .map_err(|e| PipelineError::stage("learn", e))
    );

    // Reports.
    let out = &config.output_dir;
    let feature_path = out.join("feature_matrix.csv");
    let label_path = out.join("label_report.csv");
    let corr_path = out.join("correlation_matrix.csv");
    let group_path = out.join("group_comparison.csv");
    let eval_path = out.join("evaluation_report.json");

    stage!(
        "report",
        (|| -> Result<(), PipelineError> {
            export_feature_matrix(&features, &feature_path)
                .map_err(|e| PipelineError::stage("report", e))?;
            export_label_report(&label_stage.records, &label_path)
                .map_err(|e| PipelineError::stage("report", e))?;
            let (names, rows, labels) =
                report_columns(&features, &metrics, &label_stage.rates);
            let matrix = correlation_matrix(&names, &rows);
            export_correlation_matrix(&names, &matrix, &corr_path)
                .map_err(|e| PipelineError::stage("report", e))?;
            let comparison = compare_columns(&names, &rows, &labels)
                .map_err(|e| PipelineError::stage("report", e))?;
            comparison
                .export_csv(&group_path)
                .map_err(|e| PipelineError::stage("report", e))?;
            evaluation
                .export_json(&eval_path)
                .map_err(|e| PipelineError::stage("report", e))?;
            Ok(())
        })()
    );

    let mut tracked = vec![
        feature_path.clone(),
        label_path.clone(),
        corr_path.clone(),
        group_path.clone(),
        eval_path.clone(),
    ];
    if rejects > 0 {
        tracked.push(out.join("rejects.jsonl"));
    }
    for path in &tracked {
        let sha = sha256_file(path).map_err(|e| PipelineError::stage("report", e))?;
        let rel = path
            .strip_prefix(out)
            .unwrap_or(path)
            .display()
            .to_string();
        manifest.files.push(ManifestFile { path: rel, sha256: sha });
    }
    let manifest_path = out.join("manifest.json");
    std::fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )
    .map_err(|e| PipelineError::stage("report", e))?;

    // Keep the full artifact set available to library callers.
    let _ = PipelineArtifacts {
        corpus,
        tiering,
        cohort,
        dtm,
        model,
        metrics,
        labels: label_stage.labels,
        label_records: label_stage.records,
        features,
        evaluation,
    };

    Ok(RunSummary {
        out_dir: out.clone(),
        manifest,
    })
}
