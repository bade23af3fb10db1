//! Expanding-window temporal cross-validation plans.

use super::LearnError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// One fold: train on every year in `train_years`, validate on `val_years`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train_years: BTreeSet<i32>,
    pub val_years: BTreeSet<i32>,
}

/// The full plan: nested ascending training sets, one validation year per
/// fold, and a test set strictly after every other year.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub folds: Vec<Fold>,
    pub test_years: BTreeSet<i32>,
}

impl FoldPlan {
    /// Checks the temporal-safety invariant: every validation year strictly
    /// greater than every train year of its fold, and test years beyond all
    /// fold years.
    pub fn is_temporally_safe(&self) -> bool {
        let folds_ok = self.folds.iter().all(|fold| {
            let max_train = fold.train_years.iter().max();
            let min_val = fold.val_years.iter().min();
            match (max_train, min_val) {
                (Some(&t), Some(&v)) => v > t,
                _ => false,
            }
        });
        let min_test = self.test_years.iter().min();
        let test_ok = self.folds.iter().all(|fold| {
            fold.train_years
                .iter()
                .chain(fold.val_years.iter())
                .all(|&y| min_test.map_or(true, |&t| y < t))
        });
        folds_ok && test_ok
    }
}

/// Builds the expanding-window plan over `years` with `test_years` held out:
/// with non-test years w1..wm the folds are (w1; w2), (w1+w2; w3), ...,
/// (w1..wm-1; wm). Test years must lie strictly after every non-test year.
pub fn expanding_window_folds(
    years: &[i32],
    test_years: &BTreeSet<i32>,
) -> Result<FoldPlan, LearnError> {
    let mut distinct: Vec<i32> = years.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let non_test: Vec<i32> = distinct
        .iter()
        .copied()
        .filter(|y| !test_years.contains(y))
        .collect();
    if non_test.len() < 2 {
        return Err(LearnError::TooFewYears {
            non_test: non_test.len(),
        });
    }
    if let (Some(&max_non_test), Some(&min_test)) =
        (non_test.iter().max(), test_years.iter().min())
    {
        if min_test <= max_non_test {
            return Err(LearnError::TestYearInsideTrainingRange {
                test_year: min_test,
            });
        }
    }
    let mut folds = Vec::new();
    for i in 1..non_test.len() {
        folds.push(Fold {
            train_years: non_test[..i].iter().copied().collect(),
            val_years: BTreeSet::from([non_test[i]]),
        });
    }
    let plan = FoldPlan {
        folds,
        test_years: test_years.clone(),
    };
    debug_assert!(plan.is_temporally_safe());
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn years(range: std::ops::RangeInclusive<i32>) -> Vec<i32> {
        range.collect()
    }

    #[test]
    fn five_years_one_test_gives_three_folds() {
        let plan =
            expanding_window_folds(&years(2006..=2010), &BTreeSet::from([2010])).unwrap();
        assert_eq!(plan.folds.len(), 3);
        assert_eq!(plan.folds[0].train_years, BTreeSet::from([2006]));
        assert_eq!(plan.folds[0].val_years, BTreeSet::from([2007]));
        assert_eq!(plan.folds[1].train_years, BTreeSet::from([2006, 2007]));
        assert_eq!(plan.folds[1].val_years, BTreeSet::from([2008]));
        assert_eq!(
            plan.folds[2].train_years,
            BTreeSet::from([2006, 2007, 2008])
        );
        assert_eq!(plan.folds[2].val_years, BTreeSet::from([2009]));
        assert!(plan.is_temporally_safe());
    }

    #[test]
    fn two_non_test_years_give_one_fold() {
        let plan = expanding_window_folds(&[2006, 2007, 2008], &BTreeSet::from([2008])).unwrap();
        assert_eq!(plan.folds.len(), 1);
    }

    #[test]
    fn test_year_inside_training_range_errors() {
        let err = expanding_window_folds(&years(2006..=2010), &BTreeSet::from([2008]));
        assert!(matches!(
            err,
            Err(LearnError::TestYearInsideTrainingRange { test_year: 2008 })
        ));
    }

    #[test]
    fn too_few_years_errors() {
        assert!(matches!(
            expanding_window_folds(&[2006, 2007], &BTreeSet::from([2007])),
            Err(LearnError::TooFewYears { non_test: 1 })
        ));
    }

    #[test]
    fn exhaustive_safety_over_small_ranges() {
        for len in 3..=10 {
            let all: Vec<i32> = (2000..2000 + len).collect();
            // Every valid suffix split into test years.
            for split in 1..len {
                let test: BTreeSet<i32> = all[split as usize..].iter().copied().collect();
                match expanding_window_folds(&all, &test) {
                    Ok(plan) => assert!(plan.is_temporally_safe()),
                    Err(LearnError::TooFewYears { .. }) => assert!(split < 2),
                    Err(e) => panic!("unexpected error {e:?}"),
                }
            }
        }
    }
}
