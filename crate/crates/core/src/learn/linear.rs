//! Linear models: logistic regression by gradient descent on the log-loss,
//! and a linear SVM by subgradient descent on the hinge loss. Both expect
//! standardized features.

use serde::{Deserialize, Serialize};

/// Per-column affine scaler fitted on training rows: (x - mean) / sigma,
/// with sigma = 1 for constant columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub sigmas: Vec<f64>,
}

impl Standardizer {
    pub fn fit_rows<'a>(rows: impl Iterator<Item = &'a [f64]> + Clone, dims: usize) -> Self {
        let mut means = vec![0.0f64; dims];
        let mut n = 0usize;
        for row in rows.clone() {
            for (m, &x) in means.iter_mut().zip(row) {
                *m += x;
            }
            n += 1;
        }
        for m in &mut means {
            *m /= n.max(1) as f64;
        }
        let mut vars = vec![0.0f64; dims];
        for row in rows {
            for ((v, &m), &x) in vars.iter_mut().zip(&means).zip(row) {
                *v += (x - m) * (x - m);
            }
        }
        let sigmas = vars
            .into_iter()
            .map(|v| {
                let s = (v / n.max(1) as f64).sqrt();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { means, sigmas }
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.sigmas))
            .map(|(&x, (&m, &s))| (x - m) / s)
            .collect()
    }
}

/// Weights and bias of a fitted linear decision function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn raw_score(&self, row: &[f64]) -> f64 {
        self.weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>() + self.bias
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean log-loss plus (l2/2)||w||^2; the bias is not penalized.
pub fn log_loss(weights: &[f64], bias: f64, xs: &[Vec<f64>], ys: &[u8], l2: f64) -> f64 {
    let n = xs.len() as f64;
    let mut loss = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let z: f64 = weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + bias;
        // Stable: ln(1 + e^z) - y z = max(z, 0) - y z + ln(1 + e^{-|z|})
        loss += z.max(0.0) - f64::from(y) * z + (-z.abs()).exp().ln_1p();
    }
    loss / n + 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>()
}

/// Analytic gradient of [`log_loss`] in (weights, bias).
pub fn log_loss_gradient(
    weights: &[f64],
    bias: f64,
    xs: &[Vec<f64>],
    ys: &[u8],
    l2: f64,
) -> (Vec<f64>, f64) {
    let n = xs.len() as f64;
    let mut grad_w = vec![0.0f64; weights.len()];
    let mut grad_b = 0.0f64;
    for (x, &y) in xs.iter().zip(ys) {
        let z: f64 = weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + bias;
        let residual = sigmoid(z) - f64::from(y);
        for (g, &v) in grad_w.iter_mut().zip(x) {
            *g += residual * v;
        }
        grad_b += residual;
    }
    for (g, &w) in grad_w.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    (grad_w, grad_b / n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LrParams {
    pub learning_rate: f64,
    pub l2: f64,
    pub epochs: usize,
}

impl Default for LrParams {
    fn default() -> Self {
        LrParams {
            learning_rate: 0.1,
            l2: 1e-4,
            epochs: 2000,
        }
    }
}

/// Full-batch gradient descent from zero weights; deterministic.
pub fn train_lr(xs: &[Vec<f64>], ys: &[u8], params: &LrParams) -> LinearModel {
    let dims = xs.first().map_or(0, Vec::len);
    let mut model = LinearModel {
        weights: vec![0.0; dims],
        bias: 0.0,
    };
    for _ in 0..params.epochs {
        let (grad_w, grad_b) = log_loss_gradient(&model.weights, model.bias, xs, ys, params.l2);
        for (w, g) in model.weights.iter_mut().zip(&grad_w) {
            *w -= params.learning_rate * g;
        }
        model.bias -= params.learning_rate * grad_b;
    }
    model
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub lambda: f64,
    pub epochs: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            lambda: 1e-3,
            epochs: 2000,
        }
    }
}

/// Full-batch subgradient descent on lambda/2 ||w||^2 + mean hinge loss,
/// with the 1/(lambda t) step schedule; deterministic.
pub fn train_svm(xs: &[Vec<f64>], ys: &[u8], params: &SvmParams) -> LinearModel {
    let dims = xs.first().map_or(0, Vec::len);
    let n = xs.len() as f64;
    let mut model = LinearModel {
        weights: vec![0.0; dims],
        bias: 0.0,
    };
    for t in 1..=params.epochs {
        let eta = 1.0 / (params.lambda * t as f64);
        let mut sub_w = vec![0.0f64; dims];
        let mut sub_b = 0.0f64;
        for (x, &y) in xs.iter().zip(ys) {
            let signed = if y == 1 { 1.0 } else { -1.0 };
            if signed * model.raw_score(x) < 1.0 {
                for (s, &v) in sub_w.iter_mut().zip(x) {
                    *s += signed * v;
                }
                sub_b += signed;
            }
        }
        for (w, s) in model.weights.iter_mut().zip(&sub_w) {
            *w = (1.0 - eta * params.lambda) * *w + eta * s / n;
        }
        model.bias += eta * sub_b / n;
    }
    model
}
