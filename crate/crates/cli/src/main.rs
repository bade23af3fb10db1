//! Command-line front end: stage-by-stage subcommands plus the full `run`
//! pipeline and the synthetic-corpus generator.
//!
//! Exit codes: 0 success, 2 configuration error, 3 stage failure.

use clap::{Args, Parser, Subcommand};
use starscout_core::config::PipelineConfig;
use starscout_core::corpus::tier_venues;
use starscout_core::learn::{balance_training, rfe, train_on, ModelKind, TrainedModel};
use starscout_core::pipeline::{
    build_dataset, export_distributions, report_distributions, run_pipeline, stage_corpus,
    stage_features, stage_labels, stage_network, stage_text, stage_topics, PipelineError,
};
use starscout_core::seeds::derive_seed;
use starscout_core::synth::{synthesize_corpus, SynthSpec};
use starscout_core::topics::{author_profile, export_profiles, perplexity};
use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "starscout",
    version,
    about = "Early-career rising-star prediction over bibliographic corpora"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Pipeline config JSON.
    #[arg(long)]
    config: PathBuf,
    /// Override the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's global seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for within-stage parallelism.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the corpus file; write the rejects report.
    Ingest(CommonOpts),
    /// Tier every venue by its yearly SJR distribution.
    Tier(CommonOpts),
    /// Build the document-term matrix and vocabulary.
    Text(CommonOpts),
    /// Fit the topic model; export model and author profiles.
    Topics {
        #[command(flatten)]
        common: CommonOpts,
        /// Diagnostic: fit one model per K and report training perplexity.
        #[arg(long, value_delimiter = ',')]
        sweep_k: Option<Vec<usize>>,
    },
    /// Build co-authorship graphs and export structural metrics.
    Network(CommonOpts),
    /// Assemble the per-author feature matrix.
    Features(CommonOpts),
    /// Compute h-index growth labels.
    Label(CommonOpts),
    /// Train the four classifiers on the training window.
    Train(CommonOpts),
    /// Cross-validate and evaluate all classifiers.
    Evaluate(CommonOpts),
    /// Distribution, correlation, and group-comparison reports.
    Report(CommonOpts),
    /// Generate a synthetic corpus with planted rising stars.
    Synth {
        /// Output directory for corpus.jsonl, sjr.csv, truth.csv, config.json.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2000)]
        authors: usize,
        #[arg(long, default_value_t = 0.05)]
        rising_fraction: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// First-publication year range, e.g. 2006:2010.
        #[arg(long, default_value = "2006:2010", value_parser = parse_year_range)]
        years: (i32, i32),
    },
    /// Run the full pipeline end to end.
    Run(CommonOpts),
}

fn parse_year_range(text: &str) -> Result<(i32, i32), String> {
    let (a, b) = text
        .split_once(':')
        .ok_or_else(|| "expected start:end".to_string())?;
    let start: i32 = a.parse().map_err(|e| format!("bad start year: {e}"))?;
    let end: i32 = b.parse().map_err(|e| format!("bad end year: {e}"))?;
    Ok((start, end))
}

fn load_config(opts: &CommonOpts) -> Result<PipelineConfig, PipelineError> {
    let mut config = PipelineConfig::load(&opts.config)?;
    if let Some(out) = &opts.out {
        config.output_dir = out.clone();
    }
    if let Some(seed) = opts.seed {
        config.seed = seed;
    }
    config.validate()?;
    std::fs::create_dir_all(&config.output_dir)
        .map_err(|e| PipelineError::Stage { stage: "setup", message: e.to_string() })?;
    Ok(config)
}

fn with_pool<T>(
    threads: Option<usize>,
    work: impl FnOnce() -> Result<T, PipelineError> + Send,
) -> Result<T, PipelineError>
where
    T: Send,
{
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| PipelineError::Stage { stage: "setup", message: e.to_string() })?
            .install(work),
        None => work(),
    }
}

fn io_stage(err: std::io::Error) -> PipelineError {
    PipelineError::Stage { stage: "report", message: err.to_string() }
}

fn run_command(command: Command) -> Result<(), PipelineError> {
    match command {
        Command::Ingest(opts) => {
            let config = load_config(&opts)?;
            let stage = stage_corpus(&config)?;
            println!(
                "ingested {} records ({} rejected), cohort size {}",
                stage.corpus.len(),
                stage.rejects,
                stage.cohort.len()
            );
            Ok(())
        }
        Command::Tier(opts) => {
            let config = load_config(&opts)?;
            let table = starscout_core::corpus::SjrTable::from_csv(&config.inputs.sjr)
                .map_err(|e| PipelineError::Stage { stage: "corpus", message: e.to_string() })?;
            let path = config.output_dir.join("venue_tiers.csv");
            let mut file = std::fs::File::create(&path).map_err(io_stage)?;
            writeln!(file, "venue_id,year,tier").map_err(io_stage)?;
            for year in table.years() {
                let Ok(tiers) = tier_venues(&table, year) else {
                    continue;
                };
                for (venue, tier) in tiers {
                    writeln!(file, "{venue},{year},{tier}").map_err(io_stage)?;
                }
            }
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Text(opts) => {
            let config = load_config(&opts)?;
            with_pool(opts.threads, || {
                let stage = stage_corpus(&config)?;
                let dtm = stage_text(&config, &stage.corpus)?;
                let triplets = config.output_dir.join("dtm.csv");
                let vocab = config.output_dir.join("vocabulary.txt");
                dtm.export(&triplets, &vocab)
                    .map_err(|e| PipelineError::Stage { stage: "textprep", message: e.to_string() })?;
                println!(
                    "{} documents, {} terms -> {}",
                    dtm.n_docs(),
                    dtm.n_terms(),
                    triplets.display()
                );
                Ok(())
            })
        }
        Command::Topics { common, sweep_k } => {
            let config = load_config(&common)?;
            with_pool(common.threads, || {
                let stage = stage_corpus(&config)?;
                let dtm = stage_text(&config, &stage.corpus)?;
                if let Some(candidates) = sweep_k {
                    println!("k,perplexity");
                    for k in candidates {
                        let mut variant = config.clone();
                        variant.lda.topics = k;
                        let model = stage_topics(&variant, &dtm)?;
                        let p = perplexity(&model, &dtm).map_err(|e| PipelineError::Stage {
                            stage: "topics",
                            message: e.to_string(),
                        })?;
                        println!("{k},{p:.4}");
                    }
                    return Ok(());
                }
                let model = stage_topics(&config, &dtm)?;
                let model_path = config.output_dir.join("lda_model.json");
                model
                    .export_json(&model_path)
                    .map_err(|e| PipelineError::Stage { stage: "topics", message: e.to_string() })?;
                let mut profiles = Vec::new();
                for author in stage.corpus.author_ids() {
                    let pubs: Vec<String> = stage
                        .corpus
                        .publications_of(author)
                        .map(|r| r.pub_id.clone())
                        .collect();
                    let profile = author_profile(&model, author, &pubs).map_err(|e| {
                        PipelineError::Stage { stage: "topics", message: e.to_string() }
                    })?;
                    profiles.push(profile);
                }
                let profile_path = config.output_dir.join("profiles.csv");
                export_profiles(&profiles, model.k, &profile_path)
                    .map_err(|e| PipelineError::Stage { stage: "topics", message: e.to_string() })?;
                let p = perplexity(&model, &dtm)
                    .map_err(|e| PipelineError::Stage { stage: "topics", message: e.to_string() })?;
                println!(
                    "K={} perplexity={p:.4}; wrote {} and {}",
                    model.k,
                    model_path.display(),
                    profile_path.display()
                );
                Ok(())
            })
        }
        Command::Network(opts) => {
            let config = load_config(&opts)?;
            with_pool(opts.threads, || {
                let stage = stage_corpus(&config)?;
                let metrics = stage_network(&config, &stage.corpus, &stage.cohort)?;
                // One edge list per distinct cohort window.
                let mut windows = BTreeSet::new();
                for author in &stage.cohort {
                    let first = starscout_core::corpus::first_pub_year(&stage.corpus, author)
                        .map_err(|e| PipelineError::Stage { stage: "network", message: e.to_string() })?;
                    windows.insert(config.cohort.feature_window(first));
                }
                for window in windows {
                    let graph =
                        starscout_core::network::CoauthorGraph::build(&stage.corpus, window);
                    let edges = config
                        .output_dir
                        .join(format!("edges_{}_{}.csv", window.0, window.1));
                    let isolated = config
                        .output_dir
                        .join(format!("isolated_{}_{}.txt", window.0, window.1));
                    graph.export(&edges, &isolated).map_err(|e| PipelineError::Stage {
                        stage: "network",
                        message: e.to_string(),
                    })?;
                }
                let metrics_path = config.output_dir.join("network_metrics.csv");
                starscout_core::network::export_metrics(&metrics, &metrics_path).map_err(|e| {
                    PipelineError::Stage { stage: "network", message: e.to_string() }
                })?;
                println!("wrote {}", metrics_path.display());
                Ok(())
            })
        }
        Command::Label(opts) => {
            let config = load_config(&opts)?;
            let stage = stage_corpus(&config)?;
            let labels = stage_labels(&config, &stage.corpus, &stage.cohort)?;
            let path = config.output_dir.join("label_report.csv");
            starscout_core::features::export_label_report(&labels.records, &path)
                .map_err(|e| PipelineError::Stage { stage: "label", message: e.to_string() })?;
            let stars = labels.labels.values().filter(|&&l| l == 1).count();
            println!(
                "labeled {} authors, {stars} rising stars -> {}",
                labels.labels.len(),
                path.display()
            );
            Ok(())
        }
        Command::Features(opts) => {
            let config = load_config(&opts)?;
            with_pool(opts.threads, || {
                let (features, _, _) = compute_features(&config)?;
                let path = config.output_dir.join("feature_matrix.csv");
                starscout_core::features::export_feature_matrix(&features, &path)
                    .map_err(|e| PipelineError::Stage { stage: "features", message: e.to_string() })?;
                println!("wrote {} rows -> {}", features.len(), path.display());
                Ok(())
            })
        }
        Command::Train(opts) => {
            let config = load_config(&opts)?;
            with_pool(opts.threads, || {
                let (features, _, stage) = compute_features(&config)?;
                let dataset = build_dataset(&stage.corpus, &features)?;
                let test_years = config.test_years();
                let train_years: BTreeSet<i32> = dataset
                    .years()
                    .into_iter()
                    .filter(|y| !test_years.contains(y))
                    .collect();
                let pool = dataset.slice_years(&train_years);
                let seed = derive_seed(config.seed, "learn");
                let mut models: BTreeMap<String, TrainedModel> = BTreeMap::new();
                for kind in ModelKind::ALL {
                    let model_seed = derive_seed(seed, kind.name());
                    let balanced = balance_training(
                        &pool,
                        &config.ml.params,
                        derive_seed(model_seed, "rfe-smote"),
                    )
                    .map_err(|e| PipelineError::Stage { stage: "learn", message: e.to_string() })?;
                    let (selected, _) = rfe(
                        &balanced,
                        kind,
                        config.ml.params.rfe_k.min(dataset.feature_names.len()),
                        &config.ml.params,
                        derive_seed(model_seed, "rfe"),
                    )
                    .map_err(|e| PipelineError::Stage { stage: "learn", message: e.to_string() })?;
                    let model = train_on(&balanced, &selected, kind, &config.ml.params, model_seed)
                        .map_err(|e| PipelineError::Stage { stage: "learn", message: e.to_string() })?;
                    models.insert(kind.name().to_string(), model);
                }
                let path = config.output_dir.join("models.json");
                std::fs::write(&path, serde_json::to_string_pretty(&models).expect("serializes"))
                    .map_err(io_stage)?;
                println!("trained {} models -> {}", models.len(), path.display());
                Ok(())
            })
        }
        Command::Evaluate(opts) => {
            let config = load_config(&opts)?;
            with_pool(opts.threads, || {
                let (features, _, stage) = compute_features(&config)?;
                let dataset = build_dataset(&stage.corpus, &features)?;
                let report = starscout_core::learn::evaluate(
                    &dataset,
                    &config.test_years(),
                    &ModelKind::ALL,
                    &config.ml.params,
                    derive_seed(config.seed, "learn"),
                )
                .map_err(|e| PipelineError::Stage { stage: "learn", message: e.to_string() })?;
                let path = config.output_dir.join("evaluation_report.json");
                report
                    .export_json(&path)
                    .map_err(|e| PipelineError::Stage { stage: "learn", message: e.to_string() })?;
                for model in &report.models {
                    println!(
                        "{}: F1={:.4} AUC={:.4} precision={:.4} recall={:.4}",
                        model.kind.name(),
                        model.f1,
                        model.auc,
                        model.precision,
                        model.recall
                    );
                }
                println!("wrote {}", path.display());
                Ok(())
            })
        }
        Command::Report(opts) => {
            let config = load_config(&opts)?;
            let stage = stage_corpus(&config)?;
            let rows = report_distributions(&stage.corpus);
            let path = config.output_dir.join("distributions.csv");
            export_distributions(&rows, &path).map_err(io_stage)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Synth {
            out,
            authors,
            rising_fraction,
            seed,
            years,
        } => {
            let spec = SynthSpec {
                cohort_size: authors,
                rising_fraction,
                first_pub_years: years,
                seed,
                ..SynthSpec::default()
            };
            let output = synthesize_corpus(&spec, &out).map_err(|e| match e {
                starscout_core::synth::SynthError::Infeasible(msg) => {
                    PipelineError::Config(starscout_core::config::ConfigError::Invalid(msg))
                }
                other => PipelineError::Stage { stage: "synth", message: other.to_string() },
            })?;
            println!(
                "wrote {}, {}, {}, {}",
                output.corpus.display(),
                output.sjr.display(),
                output.truth.display(),
                output.config.display()
            );
            Ok(())
        }
        Command::Run(opts) => {
            let config = load_config(&opts)?;
            let summary = run_pipeline(&config, opts.threads)?;
            println!("pipeline complete -> {}", summary.out_dir.display());
            for file in &summary.manifest.files {
                println!("  {}  {}", file.sha256, file.path);
            }
            Ok(())
        }
    }
}

type FeatureBundle = (
    Vec<starscout_core::features::FeatureVector>,
    starscout_core::pipeline::LabelStage,
    starscout_core::pipeline::CorpusStage,
);

/// Runs every stage feature assembly depends on.
fn compute_features(config: &PipelineConfig) -> Result<FeatureBundle, PipelineError> {
    let stage = stage_corpus(config)?;
    let dtm = stage_text(config, &stage.corpus)?;
    let model = stage_topics(config, &dtm)?;
    let metrics = stage_network(config, &stage.corpus, &stage.cohort)?;
    let labels = stage_labels(config, &stage.corpus, &stage.cohort)?;
    let features = stage_features(
        config,
        &stage.corpus,
        &stage.tiering,
        &model,
        &metrics,
        &labels.labels,
        &stage.cohort,
    )?;
    Ok((features, labels, stage))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_command(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
