//! Synthetic minority oversampling: each synthetic row interpolates between
//! a minority row and one of its k nearest minority neighbors.

use super::{DataRow, Dataset, LearnError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

#[derive(Debug)]
pub struct SmoteResult {
    pub dataset: Dataset,
    pub warnings: Vec<String>,
}

/// Oversamples the minority class to match the majority count. Original rows
/// are preserved; synthetic rows are flagged and carry `smote-<i>` ids.
/// Distances are plain Euclidean on the given features.
pub fn smote(ds: &Dataset, k: usize, seed: u64) -> Result<SmoteResult, LearnError> {
    smote_with(ds, k, seed, false)
}

/// Like [`smote`], with optional per-column standardization of the distance
/// space (interpolation always happens on the raw features; the two agree
/// because standardization is affine).
pub fn smote_with(
    ds: &Dataset,
    k: usize,
    seed: u64,
    standardize_distances: bool,
) -> Result<SmoteResult, LearnError> {
    if k == 0 {
        return Err(LearnError::InvalidParameter("smote k must be >= 1".into()));
    }
    let positives = ds.rows.iter().filter(|r| r.label == 1).count();
    let negatives = ds.rows.len() - positives;
    if positives == negatives {
        return Ok(SmoteResult {
            dataset: ds.clone(),
            warnings: Vec::new(),
        });
    }
    let minority_label = u8::from(positives < negatives);
    let minority: Vec<&DataRow> = ds.rows.iter().filter(|r| r.label == minority_label).collect();
    let need = positives.abs_diff(negatives);
    if minority.len() < 2 {
        return Err(LearnError::MinorityTooSmall {
            count: minority.len(),
        });
    }

    let mut warnings = Vec::new();
    let k_eff = if k >= minority.len() {
        warnings.push(format!(
            "smote k={k} >= minority count {}; clamped to {}",
            minority.len(),
            minority.len() - 1
        ));
        minority.len() - 1
    } else {
        k
    };

    // Distance space: optionally standardized copies of the minority rows.
    let space: Vec<Vec<f64>> = if standardize_distances {
        let scaler = super::linear::Standardizer::fit_rows(
            ds.rows.iter().map(|r| r.features.as_slice()),
            ds.feature_names.len(),
        );
        minority
            .iter()
            .map(|r| scaler.transform_row(&r.features))
            .collect()
    } else {
        minority.iter().map(|r| r.features.clone()).collect()
    };

    // k nearest minority neighbors per minority row, ties by index.
    let neighbors: Vec<Vec<usize>> = (0..minority.len())
        .map(|i| {
            let mut dists: Vec<(f64, usize)> = (0..minority.len())
                .filter(|&j| j != i)
                .map(|j| {
                    let d: f64 = space[i]
                        .iter()
                        .zip(&space[j])
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    (d, j)
                })
                .collect();
            dists.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite").then(a.1.cmp(&b.1)));
            dists.into_iter().take(k_eff).map(|(_, j)| j).collect()
        })
        .collect();

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut rows = ds.rows.clone();
    for i in 0..need {
        let base_idx = i % minority.len();
        let base = minority[base_idx];
        let nn = minority[neighbors[base_idx][rng.gen_range(0..k_eff)]];
        let lambda: f64 = rng.gen();
        let features: Vec<f64> = base
            .features
            .iter()
            .zip(&nn.features)
            .map(|(&x, &y)| x + lambda * (y - x))
            .collect();
        rows.push(DataRow {
            features,
            label: minority_label,
            year: base.year,
            author_id: format!("smote-{i}"),
            synthetic: true,
        });
    }
    Ok(SmoteResult {
        dataset: Dataset {
            feature_names: ds.feature_names.clone(),
            rows,
        },
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::Dataset;

    fn dataset(points: &[(Vec<f64>, u8)]) -> Dataset {
        Dataset {
            feature_names: (0..points[0].0.len()).map(|i| format!("f{i}")).collect(),
            rows: points
                .iter()
                .enumerate()
                .map(|(i, (features, label))| DataRow {
                    features: features.clone(),
                    label: *label,
                    year: 2006,
                    author_id: format!("a{i}"),
                    synthetic: false,
                })
                .collect(),
        }
    }

    #[test]
    fn segment_interpolation_has_equal_coordinates() {
        // Minority {(0,0),(1,1)} with k=1: synthetics lie on the diagonal.
        let ds = dataset(&[
            (vec![0.0, 0.0], 1),
            (vec![1.0, 1.0], 1),
            (vec![5.0, 0.0], 0),
            (vec![6.0, 0.0], 0),
            (vec![7.0, 0.0], 0),
            (vec![8.0, 0.0], 0),
        ]);
        let out = smote(&ds, 1, 7).unwrap().dataset;
        for row in out.rows.iter().filter(|r| r.synthetic) {
            assert!((row.features[0] - row.features[1]).abs() < 1e-12);
            assert!((0.0..=1.0).contains(&row.features[0]));
        }
    }

    #[test]
    fn balanced_input_is_unchanged() {
        let ds = dataset(&[(vec![0.0], 1), (vec![1.0], 0)]);
        let out = smote(&ds, 3, 1).unwrap();
        assert_eq!(out.dataset.rows.len(), 2);
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn balances_ten_vs_three() {
        let mut points: Vec<(Vec<f64>, u8)> =
            (0..10).map(|i| (vec![i as f64, 0.0], 0)).collect();
        points.extend([
            (vec![0.0, 5.0], 1),
            (vec![1.0, 5.0], 1),
            (vec![0.5, 6.0], 1),
        ]);
        let ds = dataset(&points);
        let out = smote(&ds, 5, 3).unwrap();
        let pos = out.dataset.rows.iter().filter(|r| r.label == 1).count();
        let neg = out.dataset.rows.iter().filter(|r| r.label == 0).count();
        assert_eq!(pos, 10);
        assert_eq!(neg, 10);
        // k was clamped to minority-1 = 2.
        assert_eq!(out.warnings.len(), 1);
        // Originals preserved.
        for (i, row) in ds.rows.iter().enumerate() {
            assert_eq!(&out.dataset.rows[i], row);
        }
    }

    #[test]
    fn minority_of_one_errors() {
        let ds = dataset(&[(vec![0.0], 1), (vec![1.0], 0), (vec![2.0], 0)]);
        assert!(matches!(
            smote(&ds, 5, 1),
            Err(LearnError::MinorityTooSmall { count: 1 })
        ));
    }

    #[test]
    fn deterministic_under_seed() {
        let ds = dataset(&[
            (vec![0.0, 0.0], 1),
            (vec![1.0, 1.0], 1),
            (vec![0.5, 0.2], 1),
            (vec![5.0, 0.0], 0),
            (vec![6.0, 0.0], 0),
            (vec![7.0, 0.0], 0),
            (vec![8.0, 1.0], 0),
            (vec![9.0, 1.0], 0),
        ]);
        let a = smote(&ds, 2, 42).unwrap().dataset;
        let b = smote(&ds, 2, 42).unwrap().dataset;
        assert_eq!(a.rows, b.rows);
        let c = smote(&ds, 2, 43).unwrap().dataset;
        assert_ne!(a.rows, c.rows);
    }

    #[test]
    fn synthetic_points_stay_in_minority_bounding_box() {
        let ds = dataset(&[
            (vec![1.0, 2.0], 1),
            (vec![3.0, 4.0], 1),
            (vec![2.0, 2.5], 1),
            (vec![-9.0, -9.0], 0),
            (vec![-8.0, -9.0], 0),
            (vec![-7.0, -9.0], 0),
            (vec![-6.0, -9.0], 0),
            (vec![-5.0, -9.0], 0),
        ]);
        let out = smote(&ds, 2, 11).unwrap().dataset;
        for row in out.rows.iter().filter(|r| r.synthetic) {
            assert!((1.0..=3.0).contains(&row.features[0]));
            assert!((2.0..=4.0).contains(&row.features[1]));
        }
    }
}
