//! Correlation, two-sample tests, and the class-comparison report.

use super::LearnError;
use serde::{Deserialize, Serialize};
use std::io::Write as _;
use std::path::Path;

/// Product-moment correlation in [-1, 1].
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, LearnError> {
    if x.len() != y.len() {
        return Err(LearnError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(LearnError::EmptyInput);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(LearnError::ZeroVariance);
    }
    Ok(cov / (vx.sqrt() * vy.sqrt()))
}

/// Welch two-sample t statistic with Welch-Satterthwaite degrees of freedom.
pub fn welch_t(a: &[f64], b: &[f64]) -> Result<(f64, f64), LearnError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(LearnError::EmptyInput);
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let ma = a.iter().sum::<f64>() / na;
    let mb = b.iter().sum::<f64>() / nb;
    let va = a.iter().map(|v| (v - ma) * (v - ma)).sum::<f64>() / (na - 1.0);
    let vb = b.iter().map(|v| (v - mb) * (v - mb)).sum::<f64>() / (nb - 1.0);
    let se2 = va / na + vb / nb;
    if se2 == 0.0 {
        // Identical constant samples: t = 0 by convention, df from counts.
        return Ok((0.0, na + nb - 2.0));
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2
        / ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
    Ok((t, df))
}

/// One class's summary for one feature in the comparison report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub mode: f64,
    pub mean: f64,
    pub sigma: f64,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

/// Per-feature comparison row: both class summaries plus the Welch test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub feature: String,
    pub positive: ClassSummary,
    pub negative: ClassSummary,
    pub t: f64,
    pub df: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GroupComparisonReport {
    pub rows: Vec<ComparisonRow>,
}

fn is_integer_valued(values: &[f64]) -> bool {
    values.iter().all(|v| v.fract() == 0.0)
}

/// Mode of a sample. Integer-valued samples take the smallest most-frequent
/// exact value; real-valued samples are histogrammed with Freedman-Diaconis
/// bins and report the fullest bin's midpoint (lowest bin on ties).
pub fn sample_mode(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    if is_integer_valued(&sorted) {
        return exact_mode(&sorted);
    }
    let n = sorted.len();
    let q1 = sorted[(n - 1) / 4];
    let q3 = sorted[(3 * (n - 1)) / 4];
    let iqr = q3 - q1;
    let width = 2.0 * iqr / (n as f64).cbrt();
    let (min, max) = (sorted[0], sorted[n - 1]);
    if width <= 0.0 || min == max {
        return exact_mode(&sorted);
    }
    let bins = ((max - min) / width).ceil() as usize;
    let bins = bins.max(1);
    let mut counts = vec![0usize; bins];
    for &v in &sorted {
        let idx = (((v - min) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let best = counts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    min + (best as f64 + 0.5) * width
}

fn exact_mode(sorted: &[f64]) -> f64 {
    let mut best_value = sorted[0];
    let mut best_count = 0usize;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let count = j - i + 1;
        if count > best_count {
            best_count = count;
            best_value = sorted[i];
        }
        i = j + 1;
    }
    best_value
}

fn summarize(values: &[f64]) -> ClassSummary {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    ClassSummary {
        mode: sample_mode(values),
        mean,
        sigma: var.sqrt(),
        min,
        max,
        n: values.len(),
    }
}

/// Class-conditional comparison over named columns: per feature and class,
/// mode, mean, population sigma, range, plus a Welch t-test across classes.
pub fn compare_columns(
    feature_names: &[String],
    rows: &[Vec<f64>],
    labels: &[u8],
) -> Result<GroupComparisonReport, LearnError> {
    if rows.len() != labels.len() {
        return Err(LearnError::LengthMismatch {
            left: rows.len(),
            right: labels.len(),
        });
    }
    if !labels.contains(&1) || !labels.contains(&0) {
        return Err(LearnError::SingleClass);
    }
    let mut report = GroupComparisonReport::default();
    for (f, name) in feature_names.iter().enumerate() {
        let pos: Vec<f64> = rows
            .iter()
            .zip(labels)
            .filter(|&(_, &y)| y == 1)
            .map(|(r, _)| r[f])
            .collect();
        let neg: Vec<f64> = rows
            .iter()
            .zip(labels)
            .filter(|&(_, &y)| y == 0)
            .map(|(r, _)| r[f])
            .collect();
        let (t, df) = if pos.len() >= 2 && neg.len() >= 2 {
            welch_t(&pos, &neg)?
        } else {
            (f64::NAN, f64::NAN)
        };
        report.rows.push(ComparisonRow {
            feature: name.clone(),
            positive: summarize(&pos),
            negative: summarize(&neg),
            t,
            df,
        });
    }
    Ok(report)
}

impl GroupComparisonReport {
    /// CSV export: `feature,class,mode,mean,sigma,min,max,t,df`.
    pub fn export_csv(&self, path: &Path) -> Result<(), LearnError> {
        let io_err = |source: std::io::Error| LearnError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut w = std::fs::File::create(path).map_err(io_err)?;
        writeln!(w, "feature,class,mode,mean,sigma,min,max,t,df").map_err(io_err)?;
        for row in &self.rows {
            for (class, s) in [(1, &row.positive), (0, &row.negative)] {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{}",
                    row.feature, class, s.mode, s.mean, s.sigma, s.min, s.max, row.t, row.df
                )
                .map_err(io_err)?;
            }
        }
        Ok(())
    }
}

/// Class comparison over the assembled feature vectors (the 16 numeric
/// columns against the rising-star label).
pub fn group_comparison(
    features: &[crate::features::FeatureVector],
) -> Result<GroupComparisonReport, LearnError> {
    let names: Vec<String> = crate::features::FEATURE_COLUMNS
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows: Vec<Vec<f64>> = features.iter().map(|v| v.numeric_row().to_vec()).collect();
    let labels: Vec<u8> = features.iter().map(|v| v.label).collect();
    compare_columns(&names, &rows, &labels)
}

/// Feature-by-feature Pearson matrix; zero-variance cells export empty.
pub fn correlation_matrix(
    feature_names: &[String],
    rows: &[Vec<f64>],
) -> Vec<Vec<Option<f64>>> {
    let d = feature_names.len();
    let columns: Vec<Vec<f64>> = (0..d)
        .map(|f| rows.iter().map(|r| r[f]).collect())
        .collect();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| pearson(&columns[i], &columns[j]).ok())
                .collect()
        })
        .collect()
}

pub fn export_correlation_matrix(
    feature_names: &[String],
    matrix: &[Vec<Option<f64>>],
    path: &Path,
) -> Result<(), LearnError> {
    let io_err = |source: std::io::Error| LearnError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut w = std::fs::File::create(path).map_err(io_err)?;
    writeln!(w, "feature,{}", feature_names.join(",")).map_err(io_err)?;
    for (name, row) in feature_names.iter().zip(matrix) {
        let cells: Vec<String> = row
            .iter()
            .map(|c| c.map(|v| format!("{v}")).unwrap_or_default())
            .collect();
        writeln!(w, "{name},{}", cells.join(",")).map_err(io_err)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pearson_exact_cases() {
        let x = [1.0, 2.0, 3.0];
        assert_abs_diff_eq!(pearson(&x, &[2.0, 4.0, 6.0]).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            pearson(&x, &[-1.0, -2.0, -3.0]).unwrap(),
            -1.0,
            epsilon = 1e-12
        );
        // x=[1,2,3], y=[1,2,4] -> sqrt(27/28)
        assert_abs_diff_eq!(
            pearson(&x, &[1.0, 2.0, 4.0]).unwrap(),
            (27.0f64 / 28.0).sqrt(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn pearson_zero_variance_errors() {
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(LearnError::ZeroVariance)
        ));
    }

    #[test]
    fn welch_identical_samples_t_zero() {
        let (t, _) = welch_t(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_abs_diff_eq!(t, 0.0);
    }

    #[test]
    fn welch_sign_follows_shift() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b: Vec<f64> = a.iter().map(|v| v + 2.0).collect();
        let (t, _) = welch_t(&a, &b).unwrap();
        assert!(t < 0.0);
        let (t2, _) = welch_t(&b, &a).unwrap();
        assert!(t2 > 0.0);
    }

    #[test]
    fn welch_hand_case() {
        // a=[1,2,3], b=[2,4,6]: sample variances 1 and 4,
        // t = -2 / sqrt(1/3 + 4/3) = -1.5492, df = 50/17.
        let (t, df) = welch_t(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert_abs_diff_eq!(t, -2.0 / (5.0f64 / 3.0).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(df, 50.0 / 17.0, epsilon = 1e-12);
    }

    #[test]
    fn integer_mode_is_exact() {
        assert_abs_diff_eq!(sample_mode(&[1.0, 1.0, 3.0]), 1.0);
        assert_abs_diff_eq!(sample_mode(&[2.0, 3.0, 3.0, 1.0]), 3.0);
    }

    #[test]
    fn constant_feature_collapses() {
        let names = vec!["x".to_string()];
        let rows = vec![vec![2.0], vec![2.0], vec![2.0], vec![2.0]];
        let labels = [1, 1, 0, 0];
        let report = compare_columns(&names, &rows, &labels).unwrap();
        let row = &report.rows[0];
        assert_eq!(row.positive.sigma, 0.0);
        assert_eq!(row.positive.min, row.positive.max);
        assert_abs_diff_eq!(row.t, 0.0);
    }

    #[test]
    fn single_class_errors() {
        let names = vec!["x".to_string()];
        let rows = vec![vec![1.0], vec![2.0]];
        assert!(matches!(
            compare_columns(&names, &rows, &[1, 1]),
            Err(LearnError::SingleClass)
        ));
    }

    #[test]
    fn real_mode_lands_in_densest_region() {
        // Cluster near 0.1, outliers spread to 3.0.
        let mut values = vec![0.09, 0.1, 0.11, 0.1, 0.12, 0.08, 0.1];
        values.extend([1.5, 2.0, 3.0]);
        let mode = sample_mode(&values);
        assert!(mode < 0.5, "mode {mode}");
    }

    #[test]
    fn permuting_paired_inputs_leaves_outputs_unchanged() {
        let x = [0.3, 1.2, -0.5, 2.2, 0.9];
        let y = [1.0, 0.4, 0.2, 1.8, -0.2];
        let base = pearson(&x, &y).unwrap();
        let perm = [4, 2, 0, 1, 3];
        let xp: Vec<f64> = perm.iter().map(|&i| x[i]).collect();
        let yp: Vec<f64> = perm.iter().map(|&i| y[i]).collect();
        assert_abs_diff_eq!(base, pearson(&xp, &yp).unwrap(), epsilon = 1e-12);
    }
}
