//! Gaussian naive Bayes with per-class feature means and population
//! variances, floored for numerical safety.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GnbParams {
    pub var_floor: f64,
}

impl Default for GnbParams {
    fn default() -> Self {
        GnbParams { var_floor: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnbModel {
    pub log_prior: [f64; 2],
    /// Per class, per feature.
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
}

pub fn train_gnb(xs: &[Vec<f64>], ys: &[u8], params: &GnbParams) -> GnbModel {
    let dims = xs.first().map_or(0, Vec::len);
    let mut means = [vec![0.0f64; dims], vec![0.0f64; dims]];
    let mut variances = [vec![0.0f64; dims], vec![0.0f64; dims]];
    let mut counts = [0usize; 2];
    for (x, &y) in xs.iter().zip(ys) {
        let c = y as usize;
        counts[c] += 1;
        for (m, &v) in means[c].iter_mut().zip(x) {
            *m += v;
        }
    }
    for c in 0..2 {
        for m in &mut means[c] {
            *m /= counts[c].max(1) as f64;
        }
    }
    for (x, &y) in xs.iter().zip(ys) {
        let c = y as usize;
        for ((var, &m), &v) in variances[c].iter_mut().zip(&means[c]).zip(x) {
            *var += (v - m) * (v - m);
        }
    }
    for c in 0..2 {
        for var in &mut variances[c] {
            *var = (*var / counts[c].max(1) as f64).max(params.var_floor);
        }
    }
    let total = (counts[0] + counts[1]) as f64;
    GnbModel {
        log_prior: [
            (counts[0] as f64 / total).ln(),
            (counts[1] as f64 / total).ln(),
        ],
        means,
        variances,
    }
}

impl GnbModel {
    fn log_joint(&self, class: usize, row: &[f64]) -> f64 {
        let mut log_p = self.log_prior[class];
        for ((&m, &var), &x) in self.means[class]
            .iter()
            .zip(&self.variances[class])
            .zip(row)
        {
            log_p += -0.5 * ((2.0 * std::f64::consts::PI * var).ln() + (x - m) * (x - m) / var);
        }
        log_p
    }

    /// Posterior probability of class 1.
    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        let l0 = self.log_joint(0, row);
        let l1 = self.log_joint(1, row);
        let max = l0.max(l1);
        let e0 = (l0 - max).exp();
        let e1 = (l1 - max).exp();
        e1 / (e0 + e1)
    }

    /// Standardized class-mean gap per feature: |mu1 - mu0| / pooled sigma.
    pub fn mean_gap_importances(&self) -> Vec<f64> {
        self.means[0]
            .iter()
            .zip(&self.means[1])
            .zip(self.variances[0].iter().zip(&self.variances[1]))
            .map(|((&m0, &m1), (&v0, &v1))| {
                let pooled = ((v0 + v1) / 2.0).sqrt();
                if pooled > 0.0 {
                    (m1 - m0).abs() / pooled
                } else {
                    0.0
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hand_posterior_case() {
        // class 0 = {-1, -2}, class 1 = {1, 2}: means -/+1.5, population
        // variances 0.25. The point 1.5 sits on the class-1 mean.
        let xs = vec![vec![-1.0], vec![-2.0], vec![1.0], vec![2.0]];
        let ys = vec![0, 0, 1, 1];
        let model = train_gnb(&xs, &ys, &GnbParams::default());
        assert_abs_diff_eq!(model.means[0][0], -1.5);
        assert_abs_diff_eq!(model.means[1][0], 1.5);
        assert_abs_diff_eq!(model.variances[0][0], 0.25);
        let p = model.predict_proba(&[1.5]);
        assert!(p > 0.99, "posterior {p}");
    }

    #[test]
    fn variance_floor_prevents_degeneracy() {
        let xs = vec![vec![1.0], vec![1.0], vec![2.0], vec![2.0]];
        let ys = vec![0, 0, 1, 1];
        let model = train_gnb(&xs, &ys, &GnbParams::default());
        assert!(model.variances[0][0] >= 1e-9);
        assert!(model.predict_proba(&[2.0]).is_finite());
    }

    #[test]
    fn mean_gap_ranks_signal_over_noise() {
        // Feature 0 separates classes; feature 1 is identical in both.
        let xs = vec![
            vec![0.0, 5.0],
            vec![0.1, 5.1],
            vec![1.0, 5.0],
            vec![1.1, 5.1],
        ];
        let ys = vec![0, 0, 1, 1];
        let model = train_gnb(&xs, &ys, &GnbParams::default());
        let imp = model.mean_gap_importances();
        assert!(imp[0] > imp[1]);
    }
}
