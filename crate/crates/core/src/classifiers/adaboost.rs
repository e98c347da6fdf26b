use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, TreeConfig};
use super::{Dataset, TrainConfig};
use crate::error::{Error, Result};
use crate::rng::substream;

/// Multi-class stagewise boosting (SAMME) over depth-1 trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Samme {
    pub classes: usize,
    pub stumps: Vec<DecisionTree>,
    pub alphas: Vec<f64>,
}

impl Samme {
    pub(crate) fn fit(data: &Dataset, cfg: &TrainConfig) -> Result<Samme> {
        let k = data.class_count();
        let n = data.len();
        let stump = TreeConfig {
            max_depth: 1,
            min_leaf: 1,
            features: data.width,
        };
        let mut w = vec![1.0 / n as f64; n];
        let mut model = Samme {
            classes: k,
            stumps: Vec::new(),
            alphas: Vec::new(),
        };
        for round in 0..cfg.rounds {
            let mut rng = substream(cfg.rng_seed, "adaboost", round as u64);
            let h = DecisionTree::fit_weighted(data, &w, stump, &mut rng);
            let wrong: Vec<bool> = (0..n).map(|i| h.predict(data.row(i)) != data.y[i]).collect();
            let err: f64 = w.iter().zip(&wrong).filter(|(_, &m)| m).map(|(w, _)| w).sum::<f64>() / w.iter().sum::<f64>();
            if err <= 0.0 {
                model.stumps.push(h);
                model.alphas.push(1.0);
                break;
            }
            if err >= 1.0 - 1.0 / k as f64 {
                if model.stumps.is_empty() {
                    return Err(Error::Training(format!(
                        "first stump is no better than chance (weighted error {err:.3})"
                    )));
                }
                break;
            }
            let alpha = ((1.0 - err) / err).ln() + (k as f64 - 1.0).ln();
            for (wi, &m) in w.iter_mut().zip(&wrong) {
                if m {
                    *wi *= alpha.exp();
                }
            }
            let z: f64 = w.iter().sum();
            w.iter_mut().for_each(|wi| *wi /= z);
            model.stumps.push(h);
            model.alphas.push(alpha);
        }
        Ok(model)
    }

    /// Weighted vote per class, normalized by the total weight.
    pub fn votes(&self, row: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.classes];
        for (h, a) in self.stumps.iter().zip(&self.alphas) {
            v[h.predict(row)] += a;
        }
        let total: f64 = self.alphas.iter().sum();
        v.iter_mut().for_each(|x| *x /= total);
        v
    }

    /// Softmax of the symmetric SAMME decision scores.
    pub fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        let k = self.classes as f64;
        let scale = (k - 1.0).max(1.0);
        // vote share s maps to s - (1 - s)/(K-1), then divided by K-1
        let d: Vec<f64> = self.votes(row).iter().map(|s| (s - (1.0 - s) / scale) / scale).collect();
        let max = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = d.iter().map(|x| (x - max).exp()).collect();
        let z: f64 = e.iter().sum();
        e.into_iter().map(|x| x / z).collect()
    }
}
