//! Classifier suite: SMOTE rebalancing, expanding-window cross-validation,
//! recursive feature elimination, four model families (LR, linear SVM,
//! Gaussian naive Bayes, random forest), and evaluation metrics.
//!
//! Training is deterministic under a fixed seed; distinct models and folds
//! derive independent seeds and may run concurrently.

pub mod folds;
pub mod forest;
pub mod gnb;
pub mod linear;
pub mod metrics;
pub mod rfe;
pub mod smote;
pub mod stats;

pub use folds::{expanding_window_folds, Fold, FoldPlan};
pub use forest::RfParams;
pub use gnb::GnbParams;
pub use linear::{LrParams, Standardizer, SvmParams};
pub use metrics::{auc, f1_score, roc_points, trapezoid_area};
pub use rfe::rfe;
pub use smote::{smote, smote_with, SmoteResult};
pub use stats::{
    compare_columns, correlation_matrix, group_comparison, pearson, welch_t,
    GroupComparisonReport,
};

use crate::seeds::derive_seed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("input length mismatch ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty or undersized input")]
    EmptyInput,
    #[error("labels must be 0 or 1")]
    NonBinaryLabel,
    #[error("both classes must be present")]
    SingleClass,
    #[error("zero variance input")]
    ZeroVariance,
    #[error("minority class has {count} samples, need at least 2")]
    MinorityTooSmall { count: usize },
    #[error("need at least 2 non-test years, found {non_test}")]
    TooFewYears { non_test: usize },
    #[error("test year {test_year} is not after the training range")]
    TestYearInsideTrainingRange { test_year: i32 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// One author's row: feature values, binary label, cohort year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataRow {
    pub features: Vec<f64>,
    pub label: u8,
    pub year: i32,
    pub author_id: String,
    /// True for SMOTE-generated rows.
    pub synthetic: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub rows: Vec<DataRow>,
}

impl Dataset {
    pub fn years(&self) -> Vec<i32> {
        let mut out: Vec<i32> = self.rows.iter().map(|r| r.year).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Rows whose year is in `years`.
    pub fn slice_years(&self, years: &BTreeSet<i32>) -> Dataset {
        Dataset {
            feature_names: self.feature_names.clone(),
            rows: self
                .rows
                .iter()
                .filter(|r| years.contains(&r.year))
                .cloned()
                .collect(),
        }
    }

    /// Keeps only the given columns, in the given order.
    pub fn project(&self, columns: &[usize]) -> Dataset {
        Dataset {
            feature_names: columns
                .iter()
                .map(|&c| self.feature_names[c].clone())
                .collect(),
            rows: self
                .rows
                .iter()
                .map(|r| DataRow {
                    features: columns.iter().map(|&c| r.features[c]).collect(),
                    ..r.clone()
                })
                .collect(),
        }
    }

    pub fn matrix(&self) -> (Vec<Vec<f64>>, Vec<u8>) {
        (
            self.rows.iter().map(|r| r.features.clone()).collect(),
            self.rows.iter().map(|r| r.label).collect(),
        )
    }

    fn has_both_classes(&self) -> bool {
        self.rows.iter().any(|r| r.label == 1) && self.rows.iter().any(|r| r.label == 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lr,
    Svm,
    Gnb,
    Rf,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Lr, ModelKind::Svm, ModelKind::Gnb, ModelKind::Rf];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Lr => "lr",
            ModelKind::Svm => "svm",
            ModelKind::Gnb => "gnb",
            ModelKind::Rf => "rf",
        }
    }
}

/// Hyperparameters for all four model families plus the shared knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlParams {
    pub lr: LrParams,
    pub svm: SvmParams,
    pub gnb: GnbParams,
    pub rf: RfParams,
    pub smote_k: usize,
    pub rfe_k: usize,
    /// Probability threshold for F1 on probabilistic models; SVM thresholds
    /// its margin at 0.
    pub threshold: f64,
}

impl Default for MlParams {
    fn default() -> Self {
        MlParams {
            lr: LrParams::default(),
            svm: SvmParams::default(),
            gnb: GnbParams::default(),
            rf: RfParams::default(),
            smote_k: 5,
            rfe_k: 8,
            threshold: 0.5,
        }
    }
}

impl MlParams {
    /// Reduced forest size for tests that fit many models.
    #[cfg(test)]
    pub(crate) fn small_rf() -> Self {
        MlParams {
            rf: RfParams {
                trees: 15,
                ..RfParams::default()
            },
            ..MlParams::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum ModelState {
    Linear {
        model: linear::LinearModel,
        scaler: Standardizer,
        /// True for LR (sigmoid probabilities), false for SVM (raw margin).
        probabilistic: bool,
    },
    Gnb(gnb::GnbModel),
    Rf(forest::ForestModel),
}

/// A fitted model; `score` consumes full-width feature rows and projects
/// onto the model's selected columns internally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: ModelKind,
    /// Column indices (into the training dataset) this model consumes.
    pub selected_features: Vec<usize>,
    pub seed: u64,
    state: ModelState,
}

impl TrainedModel {
    /// Probability for LR/GNB/RF; signed margin for SVM.
    pub fn score(&self, full_row: &[f64]) -> f64 {
        let row: Vec<f64> = self
            .selected_features
            .iter()
            .map(|&c| full_row[c])
            .collect();
        match &self.state {
            ModelState::Linear { model, scaler, probabilistic } => {
                let z = model.raw_score(&scaler.transform_row(&row));
                if *probabilistic {
                    1.0 / (1.0 + (-z).exp())
                } else {
                    z
                }
            }
            ModelState::Gnb(m) => m.predict_proba(&row),
            ModelState::Rf(m) => m.predict_proba(&row),
        }
    }

    /// Class decision: probabilistic models against `threshold`, SVM margin
    /// against 0.
    pub fn predict(&self, full_row: &[f64], threshold: f64) -> u8 {
        let cut = match &self.state {
            ModelState::Linear { probabilistic: false, .. } => 0.0,
            _ => threshold,
        };
        u8::from(self.score(full_row) >= cut)
    }

    /// Importance per selected feature: |coefficients| in standardized space
    /// for LR/SVM, impurity importances for RF, standardized class-mean gaps
    /// for GNB.
    pub fn importances(&self) -> Vec<f64> {
        match &self.state {
            ModelState::Linear { model, .. } => model.weights.iter().map(|w| w.abs()).collect(),
            ModelState::Gnb(m) => m.mean_gap_importances(),
            ModelState::Rf(m) => m.importances.clone(),
        }
    }
}

/// Trains one model on the full feature width of `ds`.
pub fn train(
    ds: &Dataset,
    kind: ModelKind,
    params: &MlParams,
    seed: u64,
) -> Result<TrainedModel, LearnError> {
    let columns: Vec<usize> = (0..ds.feature_names.len()).collect();
    train_on(ds, &columns, kind, params, seed)
}

/// Trains one model restricted to `columns` of `ds`.
pub fn train_on(
    ds: &Dataset,
    columns: &[usize],
    kind: ModelKind,
    params: &MlParams,
    seed: u64,
) -> Result<TrainedModel, LearnError> {
    if !ds.has_both_classes() {
        return Err(LearnError::SingleClass);
    }
    let projected = ds.project(columns);
    let (xs, ys) = projected.matrix();
    let state = match kind {
        ModelKind::Lr | ModelKind::Svm => {
            let scaler =
                Standardizer::fit_rows(xs.iter().map(Vec::as_slice), columns.len());
            let xs_std: Vec<Vec<f64>> = xs.iter().map(|r| scaler.transform_row(r)).collect();
            let (model, probabilistic) = if kind == ModelKind::Lr {
                (linear::train_lr(&xs_std, &ys, &params.lr), true)
            } else {
                (linear::train_svm(&xs_std, &ys, &params.svm), false)
            };
            ModelState::Linear {
                model,
                scaler,
                probabilistic,
            }
        }
        ModelKind::Gnb => ModelState::Gnb(gnb::train_gnb(&xs, &ys, &params.gnb)),
        ModelKind::Rf => ModelState::Rf(forest::train_rf(&xs, &ys, &params.rf, seed)),
    };
    Ok(TrainedModel {
        kind,
        selected_features: columns.to_vec(),
        seed,
        state,
    })
}

/// Importances ranked descending, ties by feature index.
pub fn feature_importance(model: &TrainedModel) -> Vec<(usize, f64)> {
    let mut ranked: Vec<(usize, f64)> = model
        .selected_features
        .iter()
        .copied()
        .zip(model.importances())
        .collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite").then(a.0.cmp(&b.0)));
    ranked
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldScore {
    pub train_years: Vec<i32>,
    pub val_years: Vec<i32>,
    pub f1: Option<f64>,
    pub auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub kind: ModelKind,
    pub f1: f64,
    pub auc: f64,
    pub precision: f64,
    pub recall: f64,
    pub roc: Vec<(f64, f64)>,
    pub folds: Vec<FoldScore>,
    pub selected_features: Vec<String>,
    pub elimination_order: Vec<String>,
    /// (feature name, importance), descending.
    pub importances: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub test_years: Vec<i32>,
    pub seed: u64,
    pub models: Vec<ModelReport>,
}

impl EvaluationReport {
    pub fn model(&self, kind: ModelKind) -> Option<&ModelReport> {
        self.models.iter().find(|m| m.kind == kind)
    }

    pub fn export_json(&self, path: &Path) -> Result<(), LearnError> {
        let json = serde_json::to_string_pretty(self).expect("report serializes");
        std::fs::write(path, json).map_err(|source| LearnError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// SMOTE on training rows only, standardized distances. A training slice
/// whose minority class has one sample trains unbalanced instead of
/// aborting the evaluation.
pub fn balance_training(
    train: &Dataset,
    params: &MlParams,
    seed: u64,
) -> Result<Dataset, LearnError> {
    match smote_with(train, params.smote_k, seed, true) {
        Ok(result) => Ok(result.dataset),
        Err(LearnError::MinorityTooSmall { .. }) => Ok(train.clone()),
        Err(other) => Err(other),
    }
}

/// Builds the per-fold (balanced train, untouched validation) datasets used
/// by the evaluation loop; exposed for leakage audits.
pub fn fold_datasets(
    ds: &Dataset,
    plan: &FoldPlan,
    params: &MlParams,
    seed: u64,
) -> Result<Vec<(Dataset, Dataset)>, LearnError> {
    plan.folds
        .iter()
        .enumerate()
        .map(|(i, fold)| {
            let train = ds.slice_years(&fold.train_years);
            let val = ds.slice_years(&fold.val_years);
            let balanced =
                balance_training(&train, params, derive_seed(seed, &format!("fold-{i}")))?;
            Ok((balanced, val))
        })
        .collect()
}

fn evaluate_model(
    ds: &Dataset,
    plan: &FoldPlan,
    kind: ModelKind,
    params: &MlParams,
    seed: u64,
) -> Result<ModelReport, LearnError> {
    let model_seed = derive_seed(seed, kind.name());
    let non_test_years: BTreeSet<i32> = ds
        .years()
        .into_iter()
        .filter(|y| !plan.test_years.contains(y))
        .collect();
    let train_pool = ds.slice_years(&non_test_years);

    // Feature selection on the balanced training pool.
    let pool = balance_training(&train_pool, params, derive_seed(model_seed, "rfe-smote"))?;
    let (selected, eliminated) = rfe::rfe(
        &pool,
        kind,
        params.rfe_k.min(ds.feature_names.len()),
        params,
        derive_seed(model_seed, "rfe"),
    )?;

    // Expanding-window validation scores.
    let mut fold_scores = Vec::new();
    for (i, fold) in plan.folds.iter().enumerate() {
        let train = ds.slice_years(&fold.train_years);
        let val = ds.slice_years(&fold.val_years);
        let score = if train.has_both_classes() && !val.rows.is_empty() {
            let train =
                balance_training(&train, params, derive_seed(model_seed, &format!("fold-{i}")))?;
            let model = train_on(&train, &selected, kind, params, model_seed)?;
            let scores: Vec<f64> = val.rows.iter().map(|r| model.score(&r.features)).collect();
            let predictions: Vec<u8> = val
                .rows
                .iter()
                .map(|r| model.predict(&r.features, params.threshold))
                .collect();
            let labels: Vec<u8> = val.rows.iter().map(|r| r.label).collect();
            FoldScore {
                train_years: fold.train_years.iter().copied().collect(),
                val_years: fold.val_years.iter().copied().collect(),
                f1: f1_score(&predictions, &labels).ok(),
                auc: auc(&scores, &labels).ok(),
            }
        } else {
            FoldScore {
                train_years: fold.train_years.iter().copied().collect(),
                val_years: fold.val_years.iter().copied().collect(),
                f1: None,
                auc: None,
            }
        };
        fold_scores.push(score);
    }

    // Final fit on the whole training span, scored on the held-out window.
    let final_train = balance_training(&train_pool, params, derive_seed(model_seed, "final"))?;
    let model = train_on(&final_train, &selected, kind, params, model_seed)?;
    let test = ds.slice_years(&plan.test_years);
    let scores: Vec<f64> = test.rows.iter().map(|r| model.score(&r.features)).collect();
    let predictions: Vec<u8> = test
        .rows
        .iter()
        .map(|r| model.predict(&r.features, params.threshold))
        .collect();
    let labels: Vec<u8> = test.rows.iter().map(|r| r.label).collect();
    let confusion = metrics::confusion(&predictions, &labels)?;

    Ok(ModelReport {
        kind,
        f1: f1_score(&predictions, &labels)?,
        auc: auc(&scores, &labels)?,
        precision: metrics::precision(&confusion),
        recall: metrics::recall(&confusion),
        roc: roc_points(&scores, &labels)?,
        folds: fold_scores,
        selected_features: selected
            .iter()
            .map(|&c| ds.feature_names[c].clone())
            .collect(),
        elimination_order: eliminated
            .iter()
            .map(|&c| ds.feature_names[c].clone())
            .collect(),
        importances: feature_importance(&model)
            .into_iter()
            .map(|(c, imp)| (ds.feature_names[c].clone(), imp))
            .collect(),
    })
}

/// Runs feature selection, expanding-window validation, and held-out
/// evaluation for every requested model kind. Models run concurrently with
/// independent derived seeds.
pub fn evaluate(
    ds: &Dataset,
    test_years: &BTreeSet<i32>,
    kinds: &[ModelKind],
    params: &MlParams,
    seed: u64,
) -> Result<EvaluationReport, LearnError> {
    let plan = expanding_window_folds(&ds.years(), test_years)?;
    let models: Result<Vec<ModelReport>, LearnError> = kinds
        .par_iter()
        .map(|&kind| evaluate_model(ds, &plan, kind, params, seed))
        .collect();
    Ok(EvaluationReport {
        test_years: test_years.iter().copied().collect(),
        seed,
        models: models?,
    })
}
