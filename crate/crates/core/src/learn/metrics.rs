//! Classification metrics: F1/precision/recall at a threshold, ROC points,
//! and AUC via the Mann-Whitney midrank formulation (ties credit 1/2).

use super::LearnError;

/// Confusion counts for binary predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

pub fn confusion(predictions: &[u8], labels: &[u8]) -> Result<Confusion, LearnError> {
    if predictions.len() != labels.len() {
        return Err(LearnError::LengthMismatch {
            left: predictions.len(),
            right: labels.len(),
        });
    }
    if predictions.is_empty() {
        return Err(LearnError::EmptyInput);
    }
    let mut c = Confusion::default();
    for (&p, &y) in predictions.iter().zip(labels) {
        match (p, y) {
            (1, 1) => c.tp += 1,
            (1, 0) => c.fp += 1,
            (0, 0) => c.tn += 1,
            (0, 1) => c.fn_ += 1,
            _ => return Err(LearnError::NonBinaryLabel),
        }
    }
    Ok(c)
}

pub fn precision(c: &Confusion) -> f64 {
    if c.tp + c.fp == 0 {
        0.0
    } else {
        c.tp as f64 / (c.tp + c.fp) as f64
    }
}

pub fn recall(c: &Confusion) -> f64 {
    if c.tp + c.fn_ == 0 {
        0.0
    } else {
        c.tp as f64 / (c.tp + c.fn_) as f64
    }
}

/// 2PR/(P+R), defined as 0 when P + R = 0.
pub fn f1_score(predictions: &[u8], labels: &[u8]) -> Result<f64, LearnError> {
    let c = confusion(predictions, labels)?;
    let p = precision(&c);
    let r = recall(&c);
    Ok(if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) })
}

/// Probability that a random positive outscores a random negative, ties
/// counted 1/2 (midrank Mann-Whitney). Equals the trapezoidal ROC area.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64, LearnError> {
    if scores.len() != labels.len() {
        return Err(LearnError::LengthMismatch {
            left: scores.len(),
            right: labels.len(),
        });
    }
    let pos = labels.iter().filter(|&&y| y == 1).count();
    let neg = labels.iter().filter(|&&y| y == 0).count();
    if pos + neg != labels.len() {
        return Err(LearnError::NonBinaryLabel);
    }
    if pos == 0 || neg == 0 {
        return Err(LearnError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("finite scores"));

    // Midranks: tied scores share the average of their 1-based ranks.
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            if labels[idx] == 1 {
                rank_sum_pos += midrank;
            }
        }
        i = j + 1;
    }
    let u = rank_sum_pos - (pos * (pos + 1)) as f64 / 2.0;
    Ok(u / (pos as f64 * neg as f64))
}

/// ROC points (fpr, tpr) sweeping every distinct score threshold from
/// strictest to loosest; starts at (0,0) and ends at (1,1), monotone in fpr.
pub fn roc_points(scores: &[f64], labels: &[u8]) -> Result<Vec<(f64, f64)>, LearnError> {
    if scores.len() != labels.len() {
        return Err(LearnError::LengthMismatch {
            left: scores.len(),
            right: labels.len(),
        });
    }
    let pos = labels.iter().filter(|&&y| y == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(LearnError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).expect("finite scores"));

    let mut points = vec![(0.0, 0.0)];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        for &idx in &order[i..=j] {
            if labels[idx] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
        i = j + 1;
    }
    Ok(points)
}

/// Trapezoidal area under an ROC point list.
pub fn trapezoid_area(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn perfect_predictions_f1_one() {
        assert_abs_diff_eq!(f1_score(&[1, 0, 1, 0], &[1, 0, 1, 0]).unwrap(), 1.0);
    }

    #[test]
    fn balanced_errors_f1_half() {
        // tp=1, fp=1, fn=1 -> P = R = 0.5 -> F1 = 0.5
        assert_abs_diff_eq!(f1_score(&[1, 1, 0], &[1, 0, 1]).unwrap(), 0.5);
    }

    #[test]
    fn no_positive_predictions_f1_zero() {
        assert_abs_diff_eq!(f1_score(&[0, 0, 0], &[1, 0, 1]).unwrap(), 0.0);
    }

    #[test]
    fn f1_length_mismatch_errors() {
        assert!(matches!(
            f1_score(&[1, 0], &[1]),
            Err(LearnError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn auc_perfect_separation() {
        let auc = auc(&[0.9, 0.8, 0.7, 0.1], &[1, 1, 0, 0]).unwrap();
        assert_abs_diff_eq!(auc, 1.0);
    }

    #[test]
    fn auc_perfect_inversion() {
        assert_abs_diff_eq!(auc(&[0.3, 0.7], &[1, 0]).unwrap(), 0.0);
    }

    #[test]
    fn auc_all_ties_is_half() {
        assert_abs_diff_eq!(auc(&[0.5; 6], &[1, 0, 1, 0, 0, 1]).unwrap(), 0.5);
    }

    #[test]
    fn auc_single_class_errors() {
        assert!(matches!(
            auc(&[0.1, 0.2], &[1, 1]),
            Err(LearnError::SingleClass)
        ));
    }

    /// Brute-force pairwise oracle with half credit for ties.
    pub(crate) fn auc_pairwise(scores: &[f64], labels: &[u8]) -> f64 {
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for (i, &yi) in labels.iter().enumerate() {
            if yi != 1 {
                continue;
            }
            for (j, &yj) in labels.iter().enumerate() {
                if yj != 0 {
                    continue;
                }
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
        wins / pairs
    }

    proptest! {
        #[test]
        fn auc_matches_pairwise_and_trapezoid(
            scores in proptest::collection::vec(0u8..8, 8..60),
            flips in proptest::collection::vec(any::<bool>(), 8..60),
        ) {
            // Quantized scores force plenty of ties.
            let n = scores.len().min(flips.len());
            let scores: Vec<f64> = scores[..n].iter().map(|&s| s as f64 / 7.0).collect();
            let mut labels: Vec<u8> = flips[..n].iter().map(|&b| u8::from(b)).collect();
            labels[0] = 1;
            labels[1] = 0;
            let fast = auc(&scores, &labels).unwrap();
            let slow = auc_pairwise(&scores, &labels);
            prop_assert!((fast - slow).abs() < 1e-12);
            let roc = roc_points(&scores, &labels).unwrap();
            prop_assert!((fast - trapezoid_area(&roc)).abs() < 1e-12);
        }

        #[test]
        fn auc_invariant_under_monotone_transform(
            raw in proptest::collection::vec(-3.0f64..3.0, 8..40),
            flips in proptest::collection::vec(any::<bool>(), 8..40),
        ) {
            let n = raw.len().min(flips.len());
            let scores = &raw[..n];
            let mut labels: Vec<u8> = flips[..n].iter().map(|&b| u8::from(b)).collect();
            labels[0] = 1;
            labels[1] = 0;
            let base = auc(scores, &labels).unwrap();
            let squashed: Vec<f64> = scores.iter().map(|&s| (2.5 * s + 1.0).tanh()).collect();
            let transformed = auc(&squashed, &labels).unwrap();
            prop_assert!((base - transformed).abs() < 1e-12);
        }
    }

    #[test]
    fn roc_is_monotone_in_fpr() {
        let scores = [0.9, 0.5, 0.5, 0.3, 0.2, 0.1];
        let labels = [1, 1, 0, 0, 1, 0];
        let roc = roc_points(&scores, &labels).unwrap();
        assert_eq!(roc.first(), Some(&(0.0, 0.0)));
        assert_eq!(roc.last(), Some(&(1.0, 1.0)));
        for w in roc.windows(2) {
            assert!(w[1].0 >= w[0].0);
            assert!(w[1].1 >= w[0].1);
        }
    }
}
