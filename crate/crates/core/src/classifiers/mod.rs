//! Multi-class classifiers behind one train/predict contract.
//!
//! Three kinds are available: Gaussian naive Bayes, a random forest of Gini
//! CART trees, and SAMME boosting over decision stumps. Training is
//! deterministic for a given seed and independent of input row order and
//! thread count.

mod adaboost;
mod forest;
pub mod metrics;
mod naive_bayes;
pub mod tree;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use adaboost::Samme;
pub use forest::RandomForest;
pub use metrics::{class_report, ClassMetrics, ClassReport};
pub use naive_bayes::GaussianNb;
pub use tree::{DecisionTree, TreeConfig};

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    NaiveBayes,
    RandomForest,
    Adaboost,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::NaiveBayes => "naive_bayes",
            ModelKind::RandomForest => "random_forest",
            ModelKind::Adaboost => "adaboost",
        })
    }
}

/// Candidate features examined per split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeaturesPerSplit {
    Sqrt,
    All,
    Count(usize),
}

impl FeaturesPerSplit {
    pub fn resolve(self, width: usize) -> usize {
        let m = match self {
            FeaturesPerSplit::Sqrt => (width as f64).sqrt().round() as usize,
            FeaturesPerSplit::All => width,
            FeaturesPerSplit::Count(k) => k,
        };
        m.clamp(1, width.max(1))
    }
}

impl Serialize for FeaturesPerSplit {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            FeaturesPerSplit::Sqrt => s.serialize_str("sqrt"),
            FeaturesPerSplit::All => s.serialize_str("all"),
            FeaturesPerSplit::Count(k) => s.serialize_u64(*k as u64),
        }
    }
}

impl<'de> Deserialize<'de> for FeaturesPerSplit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(usize),
            Name(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(k) => Ok(FeaturesPerSplit::Count(k)),
            Raw::Name(n) if n == "sqrt" => Ok(FeaturesPerSplit::Sqrt),
            Raw::Name(n) if n == "all" => Ok(FeaturesPerSplit::All),
            Raw::Name(n) => Err(serde::de::Error::custom(format!(
                "features_per_split must be a count, \"sqrt\" or \"all\", got {n:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub kind: ModelKind,
    pub trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub features_per_split: FeaturesPerSplit,
    pub bootstrap: bool,
    pub rounds: usize,
    pub variance_floor: f64,
    /// Supplied by the run seed, never read from config files.
    #[serde(skip)]
    pub rng_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            kind: ModelKind::RandomForest,
            trees: 100,
            max_depth: 12,
            min_leaf: 1,
            features_per_split: FeaturesPerSplit::Sqrt,
            bootstrap: true,
            rounds: 100,
            variance_floor: 1e-6,
            rng_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn with_kind(kind: ModelKind) -> Self {
        TrainConfig {
            kind,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("trees", self.trees),
            ("max_depth", self.max_depth),
            ("min_leaf", self.min_leaf),
            ("rounds", self.rounds),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be at least 1")));
        }
        if self.features_per_split == FeaturesPerSplit::Count(0) {
            return Err(Error::Config("features_per_split must be at least 1".into()));
        }
        if !(self.variance_floor.is_finite() && self.variance_floor > 0.0) {
            return Err(Error::Config("variance_floor must be a positive number".into()));
        }
        Ok(())
    }
}

/// Row-major numeric data with class indices into `classes`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub width: usize,
    pub x: Vec<f64>,
    pub y: Vec<usize>,
    pub classes: Vec<String>,
}

impl Dataset {
    pub fn new(width: usize, x: Vec<f64>, y: Vec<usize>, classes: Vec<String>) -> Result<Self> {
        if x.len() != width * y.len() {
            return Err(Error::Shape {
                expected: width * y.len(),
                got: x.len(),
            });
        }
        if let Some(bad) = y.iter().find(|&&c| c >= classes.len()) {
            return Err(Error::Data(format!(
                "class index {bad} out of range for {} classes",
                classes.len()
            )));
        }
        Ok(Dataset { width, x, y, classes })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.width..(i + 1) * self.width]
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// Same rows sorted by (feature values, class); the order every trainer sees.
    pub fn canonical(&self) -> Dataset {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            self.row(a)
                .iter()
                .zip(self.row(b))
                .map(|(p, q)| p.total_cmp(q))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(self.y[a].cmp(&self.y[b]))
        });
        Dataset {
            width: self.width,
            x: order.iter().flat_map(|&i| self.row(i).iter().copied()).collect(),
            y: order.iter().map(|&i| self.y[i]).collect(),
            classes: self.classes.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelParams {
    NaiveBayes(GaussianNb),
    RandomForest(RandomForest),
    Adaboost(Samme),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub schema_version: u32,
    pub kind: ModelKind,
    pub classes: Vec<String>,
    pub width: usize,
    pub rng_seed: u64,
    pub params: ModelParams,
}

/// Fits a model. Rows are put in canonical order first.
pub fn train(data: &Dataset, cfg: &TrainConfig) -> Result<ClassifierModel> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Training("no training rows".into()));
    }
    if data.x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("training data contains a non-finite value".into()));
    }
    let mut present = vec![false; data.class_count()];
    data.y.iter().for_each(|&c| present[c] = true);
    if present.iter().filter(|&&p| p).count() < 2 {
        return Err(Error::Training("training data holds fewer than two classes".into()));
    }
    let data = data.canonical();
    let params = match cfg.kind {
        ModelKind::NaiveBayes => ModelParams::NaiveBayes(GaussianNb::fit(&data, cfg.variance_floor)),
        ModelKind::RandomForest => ModelParams::RandomForest(RandomForest::fit(&data, cfg)),
        ModelKind::Adaboost => ModelParams::Adaboost(Samme::fit(&data, cfg)?),
    };
    Ok(ClassifierModel {
        schema_version: MODEL_SCHEMA_VERSION,
        kind: cfg.kind,
        classes: data.classes.clone(),
        width: data.width,
        rng_seed: cfg.rng_seed,
        params,
    })
}

/// Index of the largest value; the first one wins ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

impl ClassifierModel {
    fn check_width(&self, row: &[f64]) -> Result<()> {
        if row.len() == self.width {
            Ok(())
        } else {
            Err(Error::Shape {
                expected: self.width,
                got: row.len(),
            })
        }
    }

    pub fn predict_proba(&self, row: &[f64]) -> Result<Vec<f64>> {
        self.check_width(row)?;
        Ok(match &self.params {
            ModelParams::NaiveBayes(m) => m.predict_proba(row),
            ModelParams::RandomForest(m) => m.predict_proba(row),
            ModelParams::Adaboost(m) => m.predict_proba(row),
        })
    }

    /// Class index with the highest probability; ties go to the earlier class.
    pub fn predict(&self, row: &[f64]) -> Result<usize> {
        Ok(argmax(&self.predict_proba(row)?))
    }

    pub fn predict_label(&self, row: &[f64]) -> Result<&str> {
        Ok(&self.classes[self.predict(row)?])
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Probe {
            schema_version: u32,
        }
        let probe: Probe = serde_json::from_str(text)?;
        if probe.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::Version {
                what: "model".into(),
                expected: MODEL_SCHEMA_VERSION,
                found: probe.schema_version,
            });
        }
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Predicts every row of `data` and scores against its labels.
pub fn evaluate(model: &ClassifierModel, data: &Dataset) -> Result<ClassReport> {
    if data.is_empty() {
        return Err(Error::Evaluation("no rows to evaluate".into()));
    }
    if data.classes != model.classes {
        return Err(Error::Evaluation("dataset classes differ from model classes".into()));
    }
    let pred = (0..data.len())
        .map(|i| model.predict(data.row(i)))
        .collect::<Result<Vec<_>>>()?;
    class_report(&data.classes, &data.y, &pred)
}
