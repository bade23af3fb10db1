//! Random forest: bagged CART trees with Gini splits and sqrt(d) feature
//! subsampling. Each tree owns an RNG derived from (seed, tree index), so
//! the fit is deterministic for any parallelism degree.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RfParams {
    pub trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub bootstrap: bool,
}

impl Default for RfParams {
    fn default() -> Self {
        RfParams {
            trees: 200,
            max_depth: None,
            min_samples_split: 2,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf { p1: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<TreeNode>,
}

impl DecisionTree {
    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            match self.nodes[at] {
                TreeNode::Leaf { p1 } => return p1,
                TreeNode::Split { feature, threshold, left, right } => {
                    at = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<DecisionTree>,
    /// Mean impurity decrease per feature, normalized to sum 1.
    pub importances: Vec<f64>,
}

impl ForestModel {
    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict_proba(row)).sum();
        sum / self.trees.len() as f64
    }
}

fn gini(pos: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = pos as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

struct TreeBuilder<'a> {
    xs: &'a [Vec<f64>],
    ys: &'a [u8],
    dims: usize,
    features_per_split: usize,
    params: &'a RfParams,
    nodes: Vec<TreeNode>,
    importance: Vec<f64>,
    n_root: usize,
}

impl<'a> TreeBuilder<'a> {
    fn build(&mut self, samples: Vec<usize>, depth: usize, rng: &mut ChaCha20Rng) -> usize {
        let total = samples.len();
        let pos = samples.iter().filter(|&&i| self.ys[i] == 1).count();
        let node_gini = gini(pos, total);

        let depth_reached = self.params.max_depth.map_or(false, |d| depth >= d);
        if pos == 0 || pos == total || total < self.params.min_samples_split || depth_reached {
            return self.leaf(pos, total);
        }

        let candidates = self.sample_features(rng);
        let mut best: Option<(f64, usize, f64)> = None; // (weighted gini, feature, threshold)
        for &f in &candidates {
            let mut values: Vec<(f64, u8)> =
                samples.iter().map(|&i| (self.xs[i][f], self.ys[i])).collect();
            values.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite feature"));
            let mut left_pos = 0usize;
            let mut left_n = 0usize;
            for w in 0..total - 1 {
                left_pos += usize::from(values[w].1 == 1);
                left_n += 1;
                if values[w].0 == values[w + 1].0 {
                    continue;
                }
                let right_n = total - left_n;
                let right_pos = pos - left_pos;
                let weighted = (left_n as f64 * gini(left_pos, left_n)
                    + right_n as f64 * gini(right_pos, right_n))
                    / total as f64;
                if best.map_or(true, |(g, _, _)| weighted < g) {
                    let threshold = (values[w].0 + values[w + 1].0) / 2.0;
                    best = Some((weighted, f, threshold));
                }
            }
        }

        let Some((weighted, feature, threshold)) = best else {
            return self.leaf(pos, total);
        };
        if weighted >= node_gini {
            return self.leaf(pos, total);
        }
        self.importance[feature] += total as f64 / self.n_root as f64 * (node_gini - weighted);

        let (left_samples, right_samples): (Vec<usize>, Vec<usize>) = samples
            .into_iter()
            .partition(|&i| self.xs[i][feature] <= threshold);
        let slot = self.nodes.len();
        self.nodes.push(TreeNode::Leaf { p1: 0.0 }); // placeholder
        let left = self.build(left_samples, depth + 1, rng);
        let right = self.build(right_samples, depth + 1, rng);
        self.nodes[slot] = TreeNode::Split { feature, threshold, left, right };
        slot
    }

    fn leaf(&mut self, pos: usize, total: usize) -> usize {
        self.nodes.push(TreeNode::Leaf {
            p1: if total == 0 { 0.0 } else { pos as f64 / total as f64 },
        });
        self.nodes.len() - 1
    }

    /// Distinct feature indices by partial Fisher-Yates.
    fn sample_features(&self, rng: &mut ChaCha20Rng) -> Vec<usize> {
        let mut pool: Vec<usize> = (0..self.dims).collect();
        for i in 0..self.features_per_split.min(self.dims) {
            let j = rng.gen_range(i..self.dims);
            pool.swap(i, j);
        }
        pool.truncate(self.features_per_split.min(self.dims));
        pool
    }
}

fn build_tree(
    xs: &[Vec<f64>],
    ys: &[u8],
    params: &RfParams,
    seed: u64,
    tree_index: usize,
) -> (DecisionTree, Vec<f64>) {
    let dims = xs.first().map_or(0, Vec::len);
    let mut rng = ChaCha20Rng::seed_from_u64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(tree_index as u64 + 1)));
    let samples: Vec<usize> = if params.bootstrap {
        (0..xs.len()).map(|_| rng.gen_range(0..xs.len())).collect()
    } else {
        (0..xs.len()).collect()
    };
    let features_per_split = (dims as f64).sqrt().floor().max(1.0) as usize;
    let mut builder = TreeBuilder {
        xs,
        ys,
        dims,
        features_per_split,
        params,
        nodes: Vec::new(),
        importance: vec![0.0; dims],
        n_root: samples.len().max(1),
    };
    let root = builder.build(samples, 0, &mut rng);
    debug_assert_eq!(root, 0);
    (
        DecisionTree { nodes: builder.nodes },
        builder.importance,
    )
}

pub fn train_rf(xs: &[Vec<f64>], ys: &[u8], params: &RfParams, seed: u64) -> ForestModel {
    let dims = xs.first().map_or(0, Vec::len);
    let built: Vec<(DecisionTree, Vec<f64>)> = (0..params.trees)
        .into_par_iter()
        .map(|t| build_tree(xs, ys, params, seed, t))
        .collect();
    let mut importances = vec![0.0f64; dims];
    let mut trees = Vec::with_capacity(params.trees);
    for (tree, contrib) in built {
        for (acc, c) in importances.iter_mut().zip(&contrib) {
            *acc += c;
        }
        trees.push(tree);
    }
    let total: f64 = importances.iter().sum();
    if total > 0.0 {
        for i in &mut importances {
            *i /= total;
        }
    }
    ForestModel { trees, importances }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn xor_like() -> (Vec<Vec<f64>>, Vec<u8>) {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..40 {
            let a = f64::from(i % 2);
            let b = f64::from((i / 2) % 2);
            let jitter = (i as f64) * 0.001;
            xs.push(vec![a + jitter, b - jitter]);
            ys.push(u8::from(a != b));
        }
        (xs, ys)
    }

    #[test]
    fn single_unbootstrapped_tree_memorizes() {
        let (xs, ys) = xor_like();
        let params = RfParams {
            trees: 1,
            bootstrap: false,
            ..RfParams::default()
        };
        let model = train_rf(&xs, &ys, &params, 3);
        for (x, &y) in xs.iter().zip(&ys) {
            assert_eq!(u8::from(model.predict_proba(x) >= 0.5), y);
        }
    }

    #[test]
    fn forest_learns_nonlinear_boundary() {
        let (xs, ys) = xor_like();
        let params = RfParams {
            trees: 30,
            ..RfParams::default()
        };
        let model = train_rf(&xs, &ys, &params, 7);
        let correct = xs
            .iter()
            .zip(&ys)
            .filter(|(x, &y)| u8::from(model.predict_proba(x) >= 0.5) == y)
            .count();
        assert!(correct >= 38, "correct {correct}/40");
    }

    #[test]
    fn importances_normalize_and_rank_signal() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(11);
        let xs: Vec<Vec<f64>> = (0..120)
            .map(|i| vec![f64::from(i % 2), rng.gen_range(-1.0..1.0)])
            .collect();
        let ys: Vec<u8> = (0..120).map(|i| (i % 2) as u8).collect();
        let model = train_rf(&xs, &ys, &RfParams { trees: 25, ..RfParams::default() }, 5);
        assert_abs_diff_eq!(model.importances.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
        assert!(model.importances[0] > model.importances[1]);
    }

    #[test]
    fn deterministic_across_rayon_pools() {
        let (xs, ys) = xor_like();
        let params = RfParams { trees: 12, ..RfParams::default() };
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| train_rf(&xs, &ys, &params, 21));
        let multi = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| train_rf(&xs, &ys, &params, 21));
        assert_eq!(single, multi);
    }

    #[test]
    fn positive_affine_rescale_leaves_predictions_unchanged() {
        let (xs, ys) = xor_like();
        let params = RfParams { trees: 15, ..RfParams::default() };
        let base = train_rf(&xs, &ys, &params, 9);
        let rescaled: Vec<Vec<f64>> = xs
            .iter()
            .map(|r| vec![10.0 * r[0] - 3.0, 0.25 * r[1] + 8.0])
            .collect();
        let refit = train_rf(&rescaled, &ys, &params, 9);
        for (orig, scaled) in xs.iter().zip(&rescaled) {
            assert_abs_diff_eq!(
                base.predict_proba(orig),
                refit.predict_proba(scaled),
                epsilon = 1e-12
            );
        }
    }
}
