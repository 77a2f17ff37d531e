//! Bagged CART regression trees with variance-reduction splits.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::standardize::check_matrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum TreeNode {
    Leaf {
        value: f64,
        samples: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value, .. } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaves(&self) -> Vec<(f64, usize)> {
        match self {
            TreeNode::Leaf { value, samples } => vec![(*value, *samples)],
            TreeNode::Split { left, right, .. } => {
                let mut v = left.leaves();
                v.extend(right.leaves());
                v
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfConfig {
    pub n_estimators: usize,
    /// `None` grows trees until leaves are pure or cannot be split.
    pub max_depth: Option<usize>,
    /// Candidate features per node; `None` means ceil(d / 3).
    pub max_features: Option<usize>,
    pub min_leaf: usize,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for RfConfig {
    fn default() -> Self {
        Self {
            n_estimators: 100,
            max_depth: None,
            max_features: None,
            min_leaf: 1,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfModel {
    pub config: RfConfig,
    pub n_features: usize,
    pub trees: Vec<TreeNode>,
}

impl RfModel {
    pub fn fit(x: &[Vec<f64>], y: &[f64], config: &RfConfig) -> Result<Self> {
        let d = check_matrix(x)?;
        if x.len() != y.len() {
            return Err(Error::InvalidInput(format!(
                "{} rows but {} labels",
                x.len(),
                y.len()
            )));
        }
        if x.len() < 2 {
            return Err(Error::InvalidInput("random forest needs at least 2 rows".into()));
        }
        if config.n_estimators == 0 || config.min_leaf == 0 {
            return Err(Error::InvalidConfig(
                "n_estimators and min_leaf must be positive".into(),
            ));
        }
        let mtry = config.max_features.unwrap_or(d.div_ceil(3)).clamp(1, d);
        let trees = (0..config.n_estimators)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(t as u64);
                let n = x.len();
                let idx: Vec<usize> = if config.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                let builder = TreeBuilder {
                    x,
                    y,
                    mtry,
                    max_depth: config.max_depth,
                    min_leaf: config.min_leaf,
                };
                builder.grow(idx, 0, &mut rng)
            })
            .collect();
        Ok(Self {
            config: config.clone(),
            n_features: d,
            trees,
        })
    }

    /// Mean of the per-tree leaf values.
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    mtry: usize,
    max_depth: Option<usize>,
    min_leaf: usize,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl TreeBuilder<'_> {
    fn leaf(&self, idx: &[usize]) -> TreeNode {
        let value = idx.iter().map(|&i| self.y[i]).sum::<f64>() / idx.len() as f64;
        TreeNode::Leaf {
            value,
            samples: idx.len(),
        }
    }

    fn grow(&self, idx: Vec<usize>, depth: usize, rng: &mut ChaCha8Rng) -> TreeNode {
        let first = self.y[idx[0]];
        let pure = idx.iter().all(|&i| self.y[i] == first);
        if pure || idx.len() < 2 * self.min_leaf || self.max_depth.is_some_and(|m| depth >= m) {
            return self.leaf(&idx);
        }
        let Some(best) = self.best_split(&idx, rng) else {
            return self.leaf(&idx);
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.x[i][best.feature] <= best.threshold);
        TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: Box::new(self.grow(l, depth + 1, rng)),
            right: Box::new(self.grow(r, depth + 1, rng)),
        }
    }

    // Features are visited in random order; constant ones are skipped
    // without counting toward mtry, so a split is found whenever any
    // feature varies in the node.
    fn best_split(&self, idx: &[usize], rng: &mut ChaCha8Rng) -> Option<BestSplit> {
        let d = self.x[0].len();
        let mut features: Vec<usize> = (0..d).collect();
        features.shuffle(rng);
        let mut visited = 0;
        let mut best: Option<BestSplit> = None;
        let total: f64 = idx.iter().map(|&i| self.y[i]).sum();
        let n = idx.len();
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n);
        for f in features {
            if visited >= self.mtry && best.is_some() {
                break;
            }
            pairs.clear();
            pairs.extend(idx.iter().map(|&i| (self.x[i][f], self.y[i])));
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            if pairs[0].0 == pairs[n - 1].0 {
                continue;
            }
            visited += 1;
            let mut left_sum = 0.0;
            for k in 0..n - 1 {
                left_sum += pairs[k].1;
                let nl = k + 1;
                if pairs[k].0 == pairs[k + 1].0 || nl < self.min_leaf || n - nl < self.min_leaf {
                    continue;
                }
                let right_sum = total - left_sum;
                // maximizing this is equivalent to minimizing child SSE
                let score = left_sum * left_sum / nl as f64 + right_sum * right_sum / (n - nl) as f64;
                if best.as_ref().is_none_or(|b| score > b.score) {
                    let (a, b) = (pairs[k].0, pairs[k + 1].0);
                    let mut threshold = a + (b - a) / 2.0;
                    if threshold >= b {
                        threshold = a;
                    }
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        score,
                    });
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..5).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let y = (0..n).map(|_| rng.random_range(0..4) as f64).collect();
        (x, y)
    }

    #[test]
    fn single_tree_memorizes() {
        let (x, y) = data(80, 1);
        let cfg = RfConfig {
            n_estimators: 1,
            bootstrap: false,
            ..RfConfig::default()
        };
        let m = RfModel::fit(&x, &y, &cfg).unwrap();
        for (r, l) in x.iter().zip(&y) {
            assert_eq!(m.predict(r), *l);
        }
    }

    #[test]
    fn repeat_fit_identical() {
        let (x, y) = data(60, 2);
        let cfg = RfConfig {
            n_estimators: 20,
            seed: 9,
            ..RfConfig::default()
        };
        let a = RfModel::fit(&x, &y, &cfg).unwrap();
        let b = RfModel::fit(&x, &y, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trees.len(), 20);
    }

    #[test]
    fn constant_labels() {
        let (x, _) = data(30, 3);
        let y = vec![2.0; 30];
        let m = RfModel::fit(&x, &y, &RfConfig { n_estimators: 5, ..RfConfig::default() }).unwrap();
        assert_eq!(m.predict(&[0.0; 5]), 2.0);
    }

    #[test]
    fn depth_cap_and_leaf_sizes() {
        let (x, y) = data(100, 4);
        let cfg = RfConfig {
            n_estimators: 8,
            max_depth: Some(3),
            min_leaf: 4,
            ..RfConfig::default()
        };
        let m = RfModel::fit(&x, &y, &cfg).unwrap();
        for t in &m.trees {
            assert!(t.depth() <= 3);
            assert!(t.leaves().iter().all(|&(_, s)| s >= 4));
        }
    }

    #[test]
    fn mean_of_tree_outputs() {
        let m = RfModel {
            config: RfConfig::default(),
            n_features: 1,
            trees: vec![
                TreeNode::Leaf { value: 1.0, samples: 1 },
                TreeNode::Leaf { value: 2.0, samples: 1 },
            ],
        };
        assert_eq!(m.predict(&[0.0]), 1.5);
    }

    #[test]
    fn serde_nested_nodes() {
        let (x, y) = data(20, 5);
        let m = RfModel::fit(&x, &y, &RfConfig { n_estimators: 2, ..RfConfig::default() }).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains(r#""node":"split""#));
        let back: RfModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
