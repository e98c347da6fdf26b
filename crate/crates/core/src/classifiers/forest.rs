use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, TreeConfig};
use super::{Dataset, TrainConfig};
use crate::rng::substream;

/// Bagged Gini trees; probabilities are the share of trees voting for each class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub classes: usize,
    pub trees: Vec<DecisionTree>,
}

impl RandomForest {
    pub(crate) fn fit(data: &Dataset, cfg: &TrainConfig) -> RandomForest {
        let tree_cfg = TreeConfig {
            max_depth: cfg.max_depth,
            min_leaf: cfg.min_leaf,
            features: cfg.features_per_split.resolve(data.width),
        };
        let n = data.len();
        let trees = (0..cfg.trees)
            .into_par_iter()
            .map(|i| {
                let mut rng = substream(cfg.rng_seed, "tree", i as u64);
                let weights = if cfg.bootstrap {
                    let mut w = vec![0.0; n];
                    for _ in 0..n {
                        w[rng.gen_range(0..n)] += 1.0;
                    }
                    w
                } else {
                    vec![1.0; n]
                };
                DecisionTree::fit_weighted(data, &weights, tree_cfg, &mut rng)
            })
            .collect();
        RandomForest {
            classes: data.class_count(),
            trees,
        }
    }

    pub fn votes(&self, row: &[f64]) -> Vec<usize> {
        let mut votes = vec![0; self.classes];
        for t in &self.trees {
            votes[t.predict(row)] += 1;
        }
        votes
    }

    pub fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        let n = self.trees.len() as f64;
        self.votes(row).into_iter().map(|v| v as f64 / n).collect()
    }
}
