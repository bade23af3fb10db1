//! Recursive feature elimination: refit, drop the single least-important
//! feature, repeat until `target_k` remain.

use super::{train, Dataset, LearnError, MlParams, ModelKind};

/// Returns (surviving column indices ascending, elimination order). On
/// importance ties the higher-index feature is dropped, matching the
/// descending-importance, ties-by-index ranking convention.
pub fn rfe(
    ds: &Dataset,
    kind: ModelKind,
    target_k: usize,
    params: &MlParams,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), LearnError> {
    let dims = ds.feature_names.len();
    if target_k == 0 || target_k > dims {
        return Err(LearnError::InvalidParameter(format!(
            "rfe target_k {target_k} outside 1..={dims}"
        )));
    }
    let mut remaining: Vec<usize> = (0..dims).collect();
    let mut eliminated = Vec::new();
    while remaining.len() > target_k {
        let model = train(&ds.project(&remaining), kind, params, seed)?;
        let importances = model.importances();
        let mut drop_at = 0usize;
        for i in 1..importances.len() {
            if importances[i] <= importances[drop_at] {
                drop_at = i;
            }
        }
        eliminated.push(remaining.remove(drop_at));
    }
    Ok((remaining, eliminated))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::DataRow;
    use rand::{Rng, SeedableRng};

    fn planted_signal_dataset(seed: u64, noise_features: usize) -> Dataset {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
        let rows = (0..80)
            .map(|i| {
                let label = (i % 2) as u8;
                let mut features = vec![f64::from(label) + rng.gen_range(-0.05..0.05)];
                for _ in 0..noise_features {
                    features.push(rng.gen_range(-1.0..1.0));
                }
                DataRow {
                    features,
                    label,
                    year: 2006,
                    author_id: format!("a{i}"),
                    synthetic: false,
                }
            })
            .collect();
        Dataset {
            feature_names: (0..=noise_features).map(|i| format!("f{i}")).collect(),
            rows,
        }
    }

    #[test]
    fn noise_feature_is_eliminated_first() {
        let ds = planted_signal_dataset(3, 1);
        let (selected, order) = rfe(&ds, ModelKind::Lr, 1, &MlParams::default(), 1).unwrap();
        assert_eq!(selected, vec![0]);
        assert_eq!(order, vec![1]);
    }

    #[test]
    fn identity_selection_when_target_is_dimensionality() {
        let ds = planted_signal_dataset(4, 3);
        let (selected, order) = rfe(&ds, ModelKind::Gnb, 4, &MlParams::default(), 1).unwrap();
        assert_eq!(selected, vec![0, 1, 2, 3]);
        assert!(order.is_empty());
    }

    #[test]
    fn target_one_leaves_exactly_one_survivor() {
        let ds = planted_signal_dataset(5, 4);
        let (selected, order) = rfe(&ds, ModelKind::Rf, 1, &MlParams::small_rf(), 2).unwrap();
        assert_eq!(selected.len(), 1);
        assert_eq!(order.len(), 4);
    }

    #[test]
    fn out_of_range_target_errors() {
        let ds = planted_signal_dataset(6, 2);
        assert!(rfe(&ds, ModelKind::Lr, 0, &MlParams::default(), 1).is_err());
        assert!(rfe(&ds, ModelKind::Lr, 9, &MlParams::default(), 1).is_err());
    }
}
