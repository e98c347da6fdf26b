//! Weighted CART with Gini impurity.
//!
//! Row weights double as bootstrap multiplicities and boosting weights.
//! Thresholds sit halfway between adjacent distinct values; a row goes left
//! when its value is at most the threshold.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{argmax, Dataset};
use crate::rng::StreamRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Leaf {
        dist: Vec<f64>,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeConfig {
    pub max_depth: usize,
    /// Minimum distinct rows on each side of a split.
    pub min_leaf: usize,
    /// Non-constant candidate features examined per split.
    pub features: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

const GAIN_EPS: f64 = 1e-12;

fn gini_mass(counts: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    total - counts.iter().map(|c| c * c).sum::<f64>() / total
}

struct Grower<'a> {
    data: &'a Dataset,
    weights: &'a [f64],
    cfg: TreeConfig,
    rng: &'a mut StreamRng,
    nodes: Vec<Node>,
}

impl Grower<'_> {
    fn counts(&self, rows: &[usize]) -> Vec<f64> {
        let mut c = vec![0.0; self.data.class_count()];
        for &r in rows {
            c[self.data.y[r]] += self.weights[r];
        }
        c
    }

    fn leaf(&mut self, counts: Vec<f64>) -> usize {
        let total: f64 = counts.iter().sum();
        let dist = if total > 0.0 {
            counts.iter().map(|c| c / total).collect()
        } else {
            vec![1.0 / counts.len() as f64; counts.len()]
        };
        self.nodes.push(Node::Leaf { dist });
        self.nodes.len() - 1
    }

    /// Best split on one feature: (child gini mass, threshold), or None when
    /// the feature is constant over `rows`.
    fn scan(&self, rows: &[usize], f: usize, totals: &[f64], buf: &mut Vec<(f64, usize, f64)>) -> Option<Option<(f64, f64)>> {
        buf.clear();
        buf.extend(rows.iter().map(|&r| (self.data.row(r)[f], self.data.y[r], self.weights[r])));
        buf.sort_by(|a, b| a.0.total_cmp(&b.0));
        if buf[0].0 == buf[buf.len() - 1].0 {
            return None;
        }
        let k = totals.len();
        let total: f64 = totals.iter().sum();
        let mut left = vec![0.0; k];
        let mut left_total = 0.0;
        let mut best: Option<(f64, f64)> = None;
        let n = buf.len();
        for i in 0..n - 1 {
            let (v, y, w) = buf[i];
            left[y] += w;
            left_total += w;
            let next = buf[i + 1].0;
            if next == v || i + 1 < self.cfg.min_leaf || n - i - 1 < self.cfg.min_leaf {
                continue;
            }
            let right: Vec<f64> = totals.iter().zip(&left).map(|(t, l)| t - l).collect();
            let score = gini_mass(&left, left_total) + gini_mass(&right, total - left_total);
            if best.is_none_or(|(s, _)| score < s - GAIN_EPS) {
                let mid = v + (next - v) / 2.0;
                let threshold = if mid < next { mid } else { v };
                best = Some((score, threshold));
            }
        }
        Some(best)
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let counts = self.counts(&rows);
        let total: f64 = counts.iter().sum();
        let impurity = gini_mass(&counts, total);
        if depth >= self.cfg.max_depth || impurity <= GAIN_EPS || rows.len() < 2 * self.cfg.min_leaf {
            return self.leaf(counts);
        }

        let mut order: Vec<usize> = (0..self.data.width).collect();
        order.shuffle(self.rng);
        let mut buf = Vec::with_capacity(rows.len());
        let mut best: Option<(f64, usize, f64)> = None;
        let mut seen = 0;
        for f in order {
            if seen >= self.cfg.features {
                break;
            }
            let Some(found) = self.scan(&rows, f, &counts, &mut buf) else {
                continue;
            };
            seen += 1;
            if let Some((score, threshold)) = found {
                if best.is_none_or(|(s, _, _)| score < s - GAIN_EPS) {
                    best = Some((score, f, threshold));
                }
            }
        }

        match best {
            Some((score, feature, threshold)) if score < impurity - GAIN_EPS => {
                let (l, r): (Vec<usize>, Vec<usize>) =
                    rows.into_iter().partition(|&i| self.data.row(i)[feature] <= threshold);
                let at = self.nodes.len();
                self.nodes.push(Node::Leaf { dist: Vec::new() });
                let left = self.grow(l, depth + 1);
                let right = self.grow(r, depth + 1);
                self.nodes[at] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
                at
            }
            _ => self.leaf(counts),
        }
    }
}

impl DecisionTree {
    /// Grows a tree on every row of `data` with unit weights.
    pub fn fit(data: &Dataset, cfg: TreeConfig, rng: &mut StreamRng) -> DecisionTree {
        Self::fit_weighted(data, &vec![1.0; data.len()], cfg, rng)
    }

    /// Rows with zero weight are ignored.
    pub fn fit_weighted(data: &Dataset, weights: &[f64], cfg: TreeConfig, rng: &mut StreamRng) -> DecisionTree {
        let rows: Vec<usize> = (0..data.len()).filter(|&i| weights[i] > 0.0).collect();
        let mut g = Grower {
            data,
            weights,
            cfg,
            rng,
            nodes: Vec::new(),
        };
        g.grow(rows, 0);
        DecisionTree { nodes: g.nodes }
    }

    pub fn leaf_distribution(&self, row: &[f64]) -> &[f64] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { dist } => return dist,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        argmax(self.leaf_distribution(row))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}
