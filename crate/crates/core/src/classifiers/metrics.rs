use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub support: usize,
    pub predicted: usize,
    pub true_positives: usize,
    pub precision: f64,
    pub recall: f64,
    /// Set when nothing was predicted as this class (precision reported as 0).
    pub precision_undefined: bool,
    /// Set when the class has no true rows (recall reported as 0).
    pub recall_undefined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub classes: Vec<ClassMetrics>,
    /// Averages over classes that occur in the truth or the predictions.
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub accuracy: f64,
}

impl ClassReport {
    pub fn get(&self, class: &str) -> Option<&ClassMetrics> {
        self.classes.iter().find(|c| c.class == class)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["class", "support", "predicted", "true_positives", "precision", "recall"])?;
        for c in &self.classes {
            out.write_record([
                c.class.clone(),
                c.support.to_string(),
                c.predicted.to_string(),
                c.true_positives.to_string(),
                c.precision.to_string(),
                c.recall.to_string(),
            ])?;
        }
        out.write_record(["macro", "", "", "", &self.macro_precision.to_string(), &self.macro_recall.to_string()])?;
        out.flush().map_err(|e| Error::io("<class report>", e))?;
        Ok(())
    }
}

/// One-vs-rest precision and recall per class from paired class indices.
pub fn class_report(classes: &[String], truth: &[usize], pred: &[usize]) -> Result<ClassReport> {
    if truth.is_empty() {
        return Err(Error::Evaluation("no rows to evaluate".into()));
    }
    if truth.len() != pred.len() {
        return Err(Error::Evaluation(format!(
            "{} truth labels but {} predictions",
            truth.len(),
            pred.len()
        )));
    }
    let k = classes.len();
    if truth.iter().chain(pred).any(|&c| c >= k) {
        return Err(Error::Evaluation("class index out of range".into()));
    }
    let mut support = vec![0; k];
    let mut predicted = vec![0; k];
    let mut tp = vec![0; k];
    for (&t, &p) in truth.iter().zip(pred) {
        support[t] += 1;
        predicted[p] += 1;
        if t == p {
            tp[t] += 1;
        }
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let rows: Vec<ClassMetrics> = (0..k)
        .map(|c| ClassMetrics {
            class: classes[c].clone(),
            support: support[c],
            predicted: predicted[c],
            true_positives: tp[c],
            precision: ratio(tp[c], predicted[c]),
            recall: ratio(tp[c], support[c]),
            precision_undefined: predicted[c] == 0,
            recall_undefined: support[c] == 0,
        })
        .collect();
    let active: Vec<&ClassMetrics> = rows.iter().filter(|r| r.support + r.predicted > 0).collect();
    let mean = |f: fn(&ClassMetrics) -> f64| active.iter().map(|r| f(r)).sum::<f64>() / active.len() as f64;
    Ok(ClassReport {
        macro_precision: mean(|r| r.precision),
        macro_recall: mean(|r| r.recall),
        accuracy: ratio(tp.iter().sum(), truth.len()),
        classes: rows,
    })
}
