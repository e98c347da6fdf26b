//! JSON run configuration shared by every CLI command.
//!
//! Relative paths resolve against the directory holding the config file.
//! Input paths left unset default to files inside `output_dir`, which is
//! where `gen` writes them.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::classifiers::TrainConfig;
use crate::error::{Error, Result};
use crate::features::{load_anchors, AnchorSet, FeatureConfig};
use crate::graph::{load_edges, DirectedGraph};
use crate::labels::{load_labels, LabelTable};
use crate::pipeline::{DefinitionParams, Hypothesis};
use crate::sampler::SamplingConfig;
use crate::synthgen::SynthConfig;

pub const DEFAULT_SEED: u64 = 42;

/// Keys allowed to differ between the two sides of a stability run.
pub const STABILITY_FREE_KEYS: [&str; 2] = ["paths.anchors", "paths.output_dir"];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    pub edges: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub mapping: Option<PathBuf>,
    pub anchors: Option<PathBuf>,
    pub density: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HypothesisConfig {
    pub scope_name: String,
    pub target_classes: Vec<String>,
    pub other_label: String,
    /// Train one target-vs-rest classifier per target class.
    pub one_vs_rest: bool,
}

impl Default for HypothesisConfig {
    fn default() -> Self {
        HypothesisConfig {
            scope_name: "scope".into(),
            target_classes: Vec::new(),
            other_label: "OT".into(),
            one_vs_rest: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub paths: PathsConfig,
    pub synth: Option<SynthConfig>,
    pub hypothesis: HypothesisConfig,
    pub features: FeatureConfig,
    pub sampling: SamplingConfig,
    pub classifier: TrainConfig,
    pub definition: DefinitionParams,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Graph, labels and hypothesis loaded from a config's files.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub graph: DirectedGraph,
    pub labels: LabelTable,
    pub anchors: AnchorSet,
    pub hypothesis: Hypothesis,
}

impl RunConfig {
    pub fn from_json(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid run config: {e}")))?;
        cfg.base_dir = base_dir.into();
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, base).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(self.paths.output_dir.as_deref().unwrap_or(Path::new("out")))
    }

    fn input(&self, given: &Option<PathBuf>, default_name: &str) -> PathBuf {
        match given {
            Some(p) => self.resolve(p),
            None => self.output_dir().join(default_name),
        }
    }

    pub fn edges_path(&self) -> PathBuf {
        self.input(&self.paths.edges, "edges.tsv")
    }

    pub fn labels_path(&self) -> PathBuf {
        self.input(&self.paths.labels, "labels.tsv")
    }

    pub fn anchors_path(&self) -> PathBuf {
        self.input(&self.paths.anchors, "anchors.tsv")
    }

    pub fn truth_path(&self) -> PathBuf {
        self.input(&self.paths.truth, "truth.csv")
    }

    pub fn mapping_path(&self) -> Option<PathBuf> {
        self.paths.mapping.as_deref().map(|p| self.resolve(p))
    }

    pub fn density_path(&self) -> Option<PathBuf> {
        self.paths.density.as_deref().map(|p| self.resolve(p))
    }

    /// Copy written next to outputs: the seed is always spelled out.
    pub fn persisted_json(&self) -> Result<String> {
        let mut copy = self.clone();
        copy.seed = Some(self.seed());
        Ok(serde_json::to_string_pretty(&copy)? + "\n")
    }

    /// Settings with every path resolved, flattened to dotted keys.
    fn comparable(&self) -> Result<BTreeMap<String, Value>> {
        let mut copy = self.clone();
        copy.seed = Some(self.seed());
        copy.paths = PathsConfig {
            edges: Some(self.edges_path()),
            labels: Some(self.labels_path()),
            mapping: self.mapping_path(),
            anchors: Some(self.anchors_path()),
            density: self.density_path(),
            truth: Some(self.truth_path()),
            output_dir: Some(self.output_dir()),
        };
        let mut flat = BTreeMap::new();
        flatten("", &serde_json::to_value(&copy)?, &mut flat);
        Ok(flat)
    }

    /// Loads graph, labels and anchors and builds the hypothesis. Anchors
    /// outside the target classes are dropped.
    pub fn load_inputs(&self) -> Result<Inputs> {
        let (graph, stats) = load_edges(self.edges_path())?;
        log::info!(
            "graph: {} nodes, {} edges ({} duplicates, {} self-loops dropped)",
            graph.node_count(),
            graph.edge_count(),
            stats.duplicates_dropped,
            stats.self_loops_dropped
        );
        let mapping = self.mapping_path();
        let (labels, lstats) = load_labels(self.labels_path(), mapping.as_deref(), &graph)?;
        log::info!("labels: {} labeled, {} excluded", lstats.labeled, lstats.excluded);
        let anchors_all = load_anchors(self.anchors_path(), &graph, &labels)?;

        let h = &self.hypothesis;
        if h.target_classes.is_empty() {
            return Err(Error::Config("hypothesis.target_classes is empty".into()));
        }
        let targets = h
            .target_classes
            .iter()
            .map(|n| labels.require_class(n))
            .collect::<Result<BTreeSet<_>>>()?;
        let anchors = anchors_all.restrict(&targets);
        let hypothesis = Hypothesis::new(
            h.scope_name.clone(),
            targets,
            h.other_label.clone(),
            anchors.clone(),
            self.sampling,
            self.classifier,
            self.features,
            self.seed(),
        );
        Ok(Inputs {
            graph,
            labels,
            anchors,
            hypothesis,
        })
    }

    /// Definition-oracle settings, evaluating the hypothesis' targets unless
    /// the config names classes itself.
    pub fn definition_params(&self) -> DefinitionParams {
        let mut p = self.definition.clone();
        if p.classes.is_none() {
            p.classes = Some(self.hypothesis.target_classes.clone());
        }
        p
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut BTreeMap<String, Value>) {
    match v {
        Value::Object(map) if !map.is_empty() => {
            for (k, child) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, child, out);
            }
        }
        _ => {
            out.insert(prefix.to_owned(), v.clone());
        }
    }
}

/// Fails unless the two configs differ only in anchor file and output directory.
pub fn stability_guard(a: &RunConfig, b: &RunConfig) -> Result<()> {
    let (fa, fb) = (a.comparable()?, b.comparable()?);
    let keys: BTreeSet<&String> = fa.keys().chain(fb.keys()).collect();
    let differing: Vec<&str> = keys
        .into_iter()
        .filter(|k| !STABILITY_FREE_KEYS.contains(&k.as_str()))
        .filter(|k| fa.get(*k) != fb.get(*k))
        .map(String::as_str)
        .collect();
    if differing.is_empty() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "stability configs may differ only in anchors; also differing: {}",
            differing.join(", ")
        )))
    }
}
