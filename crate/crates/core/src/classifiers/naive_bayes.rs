use serde::{Deserialize, Serialize};

use super::Dataset;

/// Per-class independent Gaussians. Class priors come from row counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub counts: Vec<usize>,
    pub means: Vec<Vec<f64>>,
    /// Variances with the floor already added.
    pub variances: Vec<Vec<f64>>,
}

impl GaussianNb {
    pub(crate) fn fit(data: &Dataset, variance_floor: f64) -> GaussianNb {
        let (k, w) = (data.class_count(), data.width);
        let mut counts = vec![0usize; k];
        let mut means = vec![vec![0.0; w]; k];
        for i in 0..data.len() {
            let c = data.y[i];
            counts[c] += 1;
            for (m, x) in means[c].iter_mut().zip(data.row(i)) {
                *m += x;
            }
        }
        for (m, &n) in means.iter_mut().zip(&counts) {
            if n > 0 {
                m.iter_mut().for_each(|v| *v /= n as f64);
            }
        }
        let mut variances = vec![vec![0.0; w]; k];
        for i in 0..data.len() {
            let c = data.y[i];
            for ((v, x), m) in variances[c].iter_mut().zip(data.row(i)).zip(&means[c]) {
                *v += (x - m) * (x - m);
            }
        }
        for (v, &n) in variances.iter_mut().zip(&counts) {
            v.iter_mut()
                .for_each(|s| *s = if n > 0 { *s / n as f64 } else { 0.0 } + variance_floor);
        }
        GaussianNb {
            counts,
            means,
            variances,
        }
    }

    pub fn log_joint(&self, row: &[f64]) -> Vec<f64> {
        let total: usize = self.counts.iter().sum();
        (0..self.counts.len())
            .map(|c| {
                if self.counts[c] == 0 {
                    return f64::NEG_INFINITY;
                }
                let prior = (self.counts[c] as f64 / total as f64).ln();
                let ll: f64 = row
                    .iter()
                    .zip(&self.means[c])
                    .zip(&self.variances[c])
                    .map(|((x, m), v)| -0.5 * (std::f64::consts::TAU * v).ln() - (x - m) * (x - m) / (2.0 * v))
                    .sum();
                prior + ll
            })
            .collect()
    }

    pub fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        let lj = self.log_joint(row);
        let max = lj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            let present = self.counts.iter().filter(|&&n| n > 0).count() as f64;
            return self
                .counts
                .iter()
                .map(|&n| if n > 0 { 1.0 / present } else { 0.0 })
                .collect();
        }
        let exp: Vec<f64> = lj.iter().map(|l| (l - max).exp()).collect();
        let z: f64 = exp.iter().sum();
        exp.into_iter().map(|e| e / z).collect()
    }
}
