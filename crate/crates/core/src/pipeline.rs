//! The four-stage detection flow and the formal definition oracle.
//!
//! Stages: fix anchors, extract features, select polarized training rows,
//! train and score. Every in-scope labeled node is scored; a node predicted
//! as the catch-all class is flagged global.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifiers::{train, ClassifierModel, ModelKind, TrainConfig};
use crate::error::{Error, Result, Stage};
use crate::eval::{set_overlap, SetOverlap};
use crate::features::{compute_sdv, extract_features, AnchorSet, FeatureConfig, FeatureMatrix, RegionSet};
use crate::graph::{DirectedGraph, NodeId};
use crate::labels::{ClassId, LabelTable};
use crate::sampler::{select_biased, SamplingConfig, SamplingPolicy, TrainingSet};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// What counts as "in scope" and how to learn it.
#[derive(Debug, Clone)]
pub struct Hypothesis {
    pub scope_name: String,
    pub other_label: String,
    pub anchors: AnchorSet,
    /// Holds the target classes and the sampling seed.
    pub sampling: SamplingPolicy,
    pub classifier: TrainConfig,
    pub features: FeatureConfig,
}

impl Hypothesis {
    /// Sampling and classifier seeds are both taken from `seed`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        scope_name: impl Into<String>,
        target_classes: impl IntoIterator<Item = ClassId>,
        other_label: impl Into<String>,
        anchors: AnchorSet,
        sampling: SamplingConfig,
        classifier: TrainConfig,
        features: FeatureConfig,
        seed: u64,
    ) -> Self {
        Hypothesis {
            scope_name: scope_name.into(),
            other_label: other_label.into(),
            anchors,
            sampling: SamplingPolicy::new(target_classes, sampling, seed),
            classifier: TrainConfig {
                rng_seed: seed,
                ..classifier
            },
            features,
        }
    }

    pub fn target_classes(&self) -> &BTreeSet<ClassId> {
        &self.sampling.target_classes
    }

    pub fn seed(&self) -> u64 {
        self.sampling.rng_seed
    }

    pub fn validate(&self, labels: &LabelTable) -> Result<()> {
        if self.target_classes().is_empty() {
            return Err(Error::Config("hypothesis has no target classes".into()));
        }
        if let Some(c) = self.target_classes().iter().find(|c| c.index() >= labels.class_count()) {
            return Err(Error::Config(format!("target {c} is not a known class")));
        }
        if labels.class_id(&self.other_label).is_some_and(|c| self.target_classes().contains(&c)) {
            return Err(Error::Config(format!(
                "catch-all label `{}` is also a target class",
                self.other_label
            )));
        }
        self.anchors.ensure_covers(self.target_classes().iter().copied(), labels)?;
        if self.features.cap == 0 || self.features.surrogate() <= self.features.cap {
            return Err(Error::Config("feature cap must be >= 1 and below the surrogate".into()));
        }
        self.sampling.validate()?;
        self.classifier.validate()
    }

    /// The same hypothesis narrowed to one target class, keeping every anchor.
    pub fn for_class(&self, class: ClassId, labels: &LabelTable) -> Hypothesis {
        let mut sub = self.clone();
        sub.scope_name = labels.class_name(class).to_owned();
        sub.sampling.target_classes = [class].into();
        sub
    }

    fn fingerprint(&self, labels: &LabelTable, one_vs_rest: bool) -> serde_json::Value {
        serde_json::json!({
            "scope": self.scope_name,
            "targets": self.target_classes().iter().map(|&c| labels.class_name(c)).collect::<Vec<_>>(),
            "other_label": self.other_label,
            "anchors": self.anchors.anchors().iter().map(|a| (a.id.as_str(), labels.class_name(a.class))).collect::<Vec<_>>(),
            "sampling": self.sampling.config(),
            "classifier": self.classifier,
            "features": self.features,
            "seed": self.seed(),
            "one_vs_rest": one_vs_rest,
        })
    }

    /// SHA-256 of the canonical hypothesis description.
    pub fn config_hash(&self, labels: &LabelTable, one_vs_rest: bool) -> String {
        hex::encode(Sha256::digest(self.fingerprint(labels, one_vs_rest).to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeResult {
    pub node_id: String,
    pub label: String,
    pub predicted: String,
    pub mhop: u32,
    pub is_global: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub class: String,
    pub labeled: usize,
    pub global: usize,
    pub percentage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub scope: String,
    pub classes: Vec<String>,
    pub rows_per_class: Vec<usize>,
    pub local_rows: usize,
    pub global_rows: usize,
    /// SHA-256 over the training node ids, labels and feature bits.
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub config_hash: String,
    pub seed: u64,
    pub classifier: ModelKind,
    pub one_vs_rest: bool,
}

/// Wall-clock seconds per stage; kept out of the report so reports stay byte-stable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub anchors: f64,
    pub features: f64,
    pub sampling: f64,
    pub training: f64,
    pub detection: f64,
}

impl std::ops::AddAssign for Timings {
    fn add_assign(&mut self, o: Timings) {
        self.anchors += o.anchors;
        self.features += o.features;
        self.sampling += o.sampling;
        self.training += o.training;
        self.detection += o.detection;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub schema_version: u32,
    pub scope: String,
    pub other_label: String,
    /// Target class names in class order.
    pub classes: Vec<String>,
    pub nodes: Vec<NodeResult>,
    pub per_class: Vec<ClassSummary>,
    pub total_labeled: usize,
    pub total_global: usize,
    pub training: Vec<TrainingSummary>,
    pub metadata: RunMetadata,
    #[serde(skip)]
    pub timings: Timings,
}

impl DetectionReport {
    pub fn global_ids(&self) -> BTreeSet<&str> {
        self.nodes.iter().filter(|n| n.is_global).map(|n| n.node_id.as_str()).collect()
    }

    pub fn universe(&self) -> BTreeSet<&str> {
        self.nodes.iter().map(|n| n.node_id.as_str()).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Probe {
            schema_version: u32,
        }
        let probe: Probe = serde_json::from_str(text)?;
        if probe.schema_version != REPORT_SCHEMA_VERSION {
            return Err(Error::Version {
                what: "report".into(),
                expected: REPORT_SCHEMA_VERSION,
                found: probe.schema_version,
            });
        }
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn write_nodes_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["node_id", "label", "predicted", "mhop", "is_global"])?;
        for n in &self.nodes {
            out.write_record([
                n.node_id.as_str(),
                &n.label,
                &n.predicted,
                &n.mhop.to_string(),
                if n.is_global { "true" } else { "false" },
            ])?;
        }
        out.flush().map_err(|e| Error::io("<nodes csv>", e))?;
        Ok(())
    }

    /// Writes `report.json`, `nodes.csv` and `timings.json` into `dir`.
    pub fn write_files(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let report = dir.join("report.json");
        fs::write(&report, self.to_json()?).map_err(|e| Error::io(&report, e))?;
        let nodes = dir.join("nodes.csv");
        let f = fs::File::create(&nodes).map_err(|e| Error::io(&nodes, e))?;
        self.write_nodes_csv(std::io::BufWriter::new(f))?;
        let timings = dir.join("timings.json");
        fs::write(&timings, serde_json::to_string_pretty(&self.timings)? + "\n").map_err(|e| Error::io(&timings, e))?;
        Ok(())
    }
}

/// Everything a run produced, for callers that need more than the report.
#[derive(Debug, Clone)]
pub struct DetectionOutcome {
    pub report: DetectionReport,
    /// One model per sub-run, keyed by scope name.
    pub models: Vec<(String, ClassifierModel)>,
    pub training: Vec<TrainingSet>,
}

pub fn training_digest(set: &TrainingSet) -> String {
    let mut h = Sha256::new();
    for (i, id) in set.node_ids.iter().enumerate() {
        h.update((id.len() as u64).to_le_bytes());
        h.update(id.as_bytes());
        h.update(set.data.classes[set.data.y[i]].as_bytes());
        for v in set.data.row(i) {
            h.update(v.to_bits().to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

fn elapsed(t: &mut Instant) -> f64 {
    let s = t.elapsed().as_secs_f64();
    *t = Instant::now();
    s
}

struct StageOutput {
    features: FeatureMatrix,
    training: TrainingSet,
    timings: Timings,
}

fn prepare(g: &DirectedGraph, labels: &LabelTable, hyp: &Hypothesis) -> Result<StageOutput> {
    let mut clock = Instant::now();
    let mut timings = Timings::default();
    hyp.validate(labels).map_err(Error::at(Stage::Anchors))?;
    timings.anchors = elapsed(&mut clock);

    let regions = RegionSet {
        classes: hyp.target_classes().iter().copied().collect(),
        other: Some(hyp.other_label.clone()),
    };
    let features =
        extract_features(g, labels, &hyp.anchors, &regions, &hyp.features).map_err(Error::at(Stage::Features))?;
    timings.features = elapsed(&mut clock);

    let training = select_biased(&features, labels, &hyp.sampling, &hyp.other_label).map_err(Error::at(Stage::Sampling))?;
    timings.sampling = elapsed(&mut clock);
    log::info!(
        "{}: {} training rows over {} classes",
        hyp.scope_name,
        training.len(),
        training.data.classes.len()
    );
    Ok(StageOutput {
        features,
        training,
        timings,
    })
}

/// Runs the anchor, feature and sampling stages only.
pub fn build_training_set(g: &DirectedGraph, labels: &LabelTable, hyp: &Hypothesis) -> Result<TrainingSet> {
    prepare(g, labels, hyp).map(|s| s.training)
}

/// Scores every labeled node of the hypothesis' target classes.
fn score(
    features: &FeatureMatrix,
    labels: &LabelTable,
    hyp: &Hypothesis,
    model: &ClassifierModel,
) -> Result<Vec<(NodeId, NodeResult)>> {
    if model.classes.last() != Some(&hyp.other_label) {
        return Err(Error::Consistency(format!(
            "model's last class is not the catch-all `{}`",
            hyp.other_label
        )));
    }
    let mut out = Vec::new();
    for (row, &node) in features.nodes().iter().enumerate() {
        let Some(class) = labels.class_of(node).filter(|c| hyp.target_classes().contains(c)) else {
            continue;
        };
        let predicted = model.predict_label(features.row(row))?;
        out.push((
            node,
            NodeResult {
                node_id: features.node_id(row).to_owned(),
                label: labels.class_name(class).to_owned(),
                predicted: predicted.to_owned(),
                mhop: features.mhop(row),
                is_global: predicted == hyp.other_label,
            },
        ));
    }
    Ok(out)
}

fn summarize(scope: &str, set: &TrainingSet) -> TrainingSummary {
    TrainingSummary {
        scope: scope.to_owned(),
        classes: set.data.classes.clone(),
        rows_per_class: set.class_counts(),
        local_rows: set.count(crate::sampler::Provenance::Local),
        global_rows: set.count(crate::sampler::Provenance::Global),
        digest: training_digest(set),
    }
}

fn assemble_report(
    labels: &LabelTable,
    hyp: &Hypothesis,
    mut nodes: Vec<(NodeId, NodeResult)>,
    training: Vec<TrainingSummary>,
    one_vs_rest: bool,
    timings: Timings,
) -> DetectionReport {
    nodes.sort_by_key(|(n, _)| *n);
    let nodes: Vec<NodeResult> = nodes.into_iter().map(|(_, r)| r).collect();
    let classes: Vec<String> = hyp.target_classes().iter().map(|&c| labels.class_name(c).to_owned()).collect();
    let per_class: Vec<ClassSummary> = classes
        .iter()
        .map(|c| {
            let labeled = nodes.iter().filter(|n| &n.label == c).count();
            let global = nodes.iter().filter(|n| &n.label == c && n.is_global).count();
            ClassSummary {
                class: c.clone(),
                labeled,
                global,
                percentage: if labeled == 0 { 0.0 } else { 100.0 * global as f64 / labeled as f64 },
            }
        })
        .collect();
    DetectionReport {
        schema_version: REPORT_SCHEMA_VERSION,
        scope: hyp.scope_name.clone(),
        other_label: hyp.other_label.clone(),
        classes,
        total_labeled: nodes.len(),
        total_global: nodes.iter().filter(|n| n.is_global).count(),
        nodes,
        per_class,
        training,
        metadata: RunMetadata {
            config_hash: hyp.config_hash(labels, one_vs_rest),
            seed: hyp.seed(),
            classifier: hyp.classifier.kind,
            one_vs_rest,
        },
        timings,
    }
}

type SingleRun = (Vec<(NodeId, NodeResult)>, ClassifierModel, TrainingSet, Timings);

fn run_single(g: &DirectedGraph, labels: &LabelTable, hyp: &Hypothesis) -> Result<SingleRun> {
    let StageOutput {
        features,
        training,
        mut timings,
    } = prepare(g, labels, hyp)?;
    let mut clock = Instant::now();
    let model = train(&training.data, &hyp.classifier).map_err(Error::at(Stage::Training))?;
    timings.training = elapsed(&mut clock);
    let scored = score(&features, labels, hyp, &model).map_err(Error::at(Stage::Detection))?;
    timings.detection = elapsed(&mut clock);
    Ok((scored, model, training, timings))
}

/// One classifier over all target classes plus the catch-all.
pub fn run_detection_detailed(g: &DirectedGraph, labels: &LabelTable, hyp: &Hypothesis) -> Result<DetectionOutcome> {
    let (nodes, model, training, timings) = run_single(g, labels, hyp)?;
    let summary = vec![summarize(&hyp.scope_name, &training)];
    Ok(DetectionOutcome {
        report: assemble_report(labels, hyp, nodes, summary, false, timings),
        models: vec![(hyp.scope_name.clone(), model)],
        training: vec![training],
    })
}

pub fn run_detection(g: &DirectedGraph, labels: &LabelTable, hyp: &Hypothesis) -> Result<DetectionReport> {
    run_detection_detailed(g, labels, hyp).map(|o| o.report)
}

/// One binary run per target class (that class against everything else),
/// merged into a single report.
pub fn run_one_vs_rest(g: &DirectedGraph, labels: &LabelTable, hyp: &Hypothesis) -> Result<DetectionOutcome> {
    hyp.validate(labels).map_err(Error::at(Stage::Anchors))?;
    let mut nodes = Vec::new();
    let mut summaries = Vec::new();
    let mut models = Vec::new();
    let mut sets = Vec::new();
    let mut timings = Timings::default();
    for &class in hyp.target_classes() {
        let sub = hyp.for_class(class, labels);
        let (scored, model, training, t) = run_single(g, labels, &sub)?;
        nodes.extend(scored);
        summaries.push(summarize(&sub.scope_name, &training));
        models.push((sub.scope_name.clone(), model));
        sets.push(training);
        timings += t;
    }
    Ok(DetectionOutcome {
        report: assemble_report(labels, hyp, nodes, summaries, true, timings),
        models,
        training: sets,
    })
}

/// Scores with an already trained model instead of training one.
pub fn run_with_model(
    g: &DirectedGraph,
    labels: &LabelTable,
    hyp: &Hypothesis,
    model: &ClassifierModel,
) -> Result<DetectionReport> {
    let mut clock = Instant::now();
    let mut timings = Timings::default();
    hyp.validate(labels).map_err(Error::at(Stage::Anchors))?;
    timings.anchors = elapsed(&mut clock);
    let regions = RegionSet {
        classes: hyp.target_classes().iter().copied().collect(),
        other: Some(hyp.other_label.clone()),
    };
    let features =
        extract_features(g, labels, &hyp.anchors, &regions, &hyp.features).map_err(Error::at(Stage::Features))?;
    timings.features = elapsed(&mut clock);
    if features.width() != model.width {
        return Err(Error::at(Stage::Detection)(Error::Shape {
            expected: model.width,
            got: features.width(),
        }));
    }
    let scored = score(&features, labels, hyp, model).map_err(Error::at(Stage::Detection))?;
    timings.detection = elapsed(&mut clock);
    Ok(assemble_report(labels, hyp, scored, Vec::new(), false, timings))
}

/// How the class distance D_pc is read off the anchor hops.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceRule {
    /// min(inward hop, outward hop)
    #[default]
    MinHop,
    InwardHop,
    OutwardHop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DefinitionParams {
    /// Per-class weight by class name; missing classes weigh 1.
    pub weights: BTreeMap<String, f64>,
    pub epsilon: f64,
    /// Defaults to the number of evaluated classes.
    pub k_balance: Option<usize>,
    pub distance: DistanceRule,
    /// Classes to evaluate; defaults to every class owning an anchor.
    pub classes: Option<Vec<String>>,
    pub cap: u32,
}

impl Default for DefinitionParams {
    fn default() -> Self {
        DefinitionParams {
            weights: BTreeMap::new(),
            epsilon: 0.0,
            k_balance: None,
            distance: DistanceRule::MinHop,
            classes: None,
            cap: 15,
        }
    }
}

/// Global nodes by the formal definition.
///
/// For each labeled node p of an evaluated class: D_pc is the smallest hop
/// distance from p to an anchor of class c (surrogate when unreachable),
/// Δ_pk = Σ_{c≠k} ω_c·D_pc, δ_pj = [Δ_pj ≤ min_k Δ_pk + ε], and p is global
/// when Σ_j δ_pj ≥ k_balance.
pub fn definition_oracle(
    g: &DirectedGraph,
    labels: &LabelTable,
    anchors: &AnchorSet,
    params: &DefinitionParams,
) -> Result<BTreeSet<NodeId>> {
    let classes: Vec<ClassId> = match &params.classes {
        Some(names) => {
            let ids = names.iter().map(|n| labels.require_class(n)).collect::<Result<BTreeSet<_>>>()?;
            anchors.ensure_covers(ids.iter().copied(), labels)?;
            ids.into_iter().collect()
        }
        None => anchors.classes().into_iter().collect(),
    };
    let k_balance = params.k_balance.unwrap_or(classes.len());
    if k_balance < 2 {
        return Err(Error::Config(format!("k_balance must be at least 2, got {k_balance}")));
    }
    if !(params.epsilon.is_finite() && params.epsilon >= 0.0) {
        return Err(Error::Config("epsilon must be a non-negative number".into()));
    }
    for (name, &w) in &params.weights {
        labels.require_class(name)?;
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::Config(format!("weight for `{name}` must be positive")));
        }
    }
    if params.cap == 0 {
        return Err(Error::Config("cap must be at least 1".into()));
    }
    let weights: Vec<f64> = classes
        .iter()
        .map(|&c| params.weights.get(labels.class_name(c)).copied().unwrap_or(1.0))
        .collect();

    let scope: BTreeSet<ClassId> = classes.iter().copied().collect();
    let used = anchors.restrict(&scope);
    let surrogate = params.cap + 1;
    let table = compute_sdv(g, &used, params.cap, surrogate)?;
    let columns: Vec<Vec<usize>> = classes
        .iter()
        .map(|&c| {
            used.anchors()
                .iter()
                .enumerate()
                .filter(|(_, a)| a.class == c)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();

    let mut global = BTreeSet::new();
    for p in g.nodes() {
        if !labels.class_of(p).is_some_and(|c| scope.contains(&c)) {
            continue;
        }
        let hop = |maps: &[crate::graph::HopMap], j: usize| maps[j].get(p).unwrap_or(surrogate);
        let d: Vec<f64> = columns
            .iter()
            .map(|cols| {
                cols.iter()
                    .map(|&j| match params.distance {
                        DistanceRule::MinHop => hop(table.inward(), j).min(hop(table.outward(), j)),
                        DistanceRule::InwardHop => hop(table.inward(), j),
                        DistanceRule::OutwardHop => hop(table.outward(), j),
                    })
                    .min()
                    .unwrap_or(surrogate) as f64
            })
            .collect();
        let total: f64 = d.iter().zip(&weights).map(|(d, w)| d * w).sum();
        let delta: Vec<f64> = d.iter().zip(&weights).map(|(d, w)| total - d * w).collect();
        let best = delta.iter().copied().fold(f64::INFINITY, f64::min);
        let count = delta.iter().filter(|&&x| x <= best + params.epsilon).count();
        if count >= k_balance {
            global.insert(p);
        }
    }
    Ok(global)
}

/// Agreement between the classifier's flagged set and the oracle's set.
pub fn compare_detectors(report: &DetectionReport, oracle: &BTreeSet<NodeId>, g: &DirectedGraph) -> Result<SetOverlap> {
    let universe = report.universe();
    let oracle_ids: BTreeSet<&str> = oracle.iter().map(|&n| g.id(n)).collect();
    if let Some(stray) = oracle_ids.iter().find(|id| !universe.contains(*id)) {
        return Err(Error::Consistency(format!(
            "oracle node {stray} is outside the report's node universe"
        )));
    }
    Ok(set_overlap(&report.global_ids(), &oracle_ids))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn star(hops: &[&[u32]]) -> (DirectedGraph, LabelTable, AnchorSet) {
        // Node p plus one anchor per class; a chain of `h` edges joins each
        // anchor to p in both directions.
        let mut b = crate::graph::GraphBuilder::new();
        b.add_node("p");
        let mut names = vec![Some("c0".to_owned())];
        let mut anchors = Vec::new();
        for (c, list) in hops.iter().enumerate() {
            for (j, &h) in list.iter().enumerate() {
                let a = format!("a{c}_{j}");
                b.add_node(&a);
                names.push(Some(format!("c{c}")));
                anchors.push((a.clone(), format!("c{c}")));
                let mut prev = a.clone();
                for step in 1..h {
                    let mid = format!("m{c}_{j}_{step}");
                    b.add_node(&mid);
                    names.push(None);
                    b.add_edge(&prev, &mid);
                    b.add_edge(&mid, &prev);
                    prev = mid;
                }
                b.add_edge(&prev, "p");
                b.add_edge("p", &prev);
            }
        }
        let (g, _) = b.build();
        let labels = LabelTable::from_names(&names).unwrap();
        let anchors = AnchorSet::from_names(&g, &labels, &anchors).unwrap();
        (g, labels, anchors)
    }

    fn is_global(hops: &[&[u32]], params: &DefinitionParams) -> bool {
        let (g, labels, anchors) = star(hops);
        let set = definition_oracle(&g, &labels, &anchors, params).unwrap();
        set.contains(&g.require("p").unwrap())
    }

    #[test]
    fn equidistant_node_is_global() {
        assert!(is_global(&[&[2], &[2], &[2]], &DefinitionParams { k_balance: Some(3), ..Default::default() }));
    }

    #[test]
    fn strict_minimum_is_not_global() {
        assert!(!is_global(&[&[1], &[6]], &DefinitionParams { k_balance: Some(2), ..Default::default() }));
    }

    #[test]
    fn nearest_anchor_of_a_class_counts() {
        // class 1 owns anchors at hops 6 and 2, so D_p1 = 2, same as D_p0.
        assert!(is_global(&[&[2], &[6, 2]], &DefinitionParams::default()));
    }

    #[test]
    fn oracle_errors() {
        let (g, labels, anchors) = star(&[&[1], &[2]]);
        let bad_k = DefinitionParams { k_balance: Some(1), ..Default::default() };
        assert!(matches!(definition_oracle(&g, &labels, &anchors, &bad_k), Err(Error::Config(_))));
        let only = anchors.restrict(&[ClassId(0)].into());
        let needs_both = DefinitionParams { classes: Some(vec!["c0".into(), "c1".into()]), ..Default::default() };
        assert!(matches!(definition_oracle(&g, &labels, &only, &needs_both), Err(Error::Config(_))));
    }

    fn random_case(seed: u64) -> (DirectedGraph, LabelTable, AnchorSet) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = 30u32;
        let ids = (0..n).map(|i| format!("v{i:02}")).collect();
        let edges: Vec<(u32, u32)> = (0..70).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
        let g = DirectedGraph::from_index_edges(ids, edges);
        let names: Vec<Option<String>> = (0..n)
            .map(|i| if i < 3 { Some(format!("c{i}")) } else { Some(format!("c{}", rng.gen_range(0..3))) })
            .collect();
        let labels = LabelTable::from_names(&names).unwrap();
        let anchors = AnchorSet::new(&g, (0..3).map(|i| (NodeId(i), ClassId(i))));
        (g, labels, anchors)
    }

    proptest! {
        #[test]
        fn epsilon_and_k_monotonicity(seed in 0u64..500, e1 in 0.0f64..4.0, de in 0.0f64..4.0) {
            let (g, labels, anchors) = random_case(seed);
            let run = |eps: f64, k: usize| definition_oracle(&g, &labels, &anchors, &DefinitionParams { epsilon: eps, k_balance: Some(k), ..Default::default() }).unwrap();
            prop_assert!(run(e1, 2).is_subset(&run(e1 + de, 2)));
            prop_assert!(run(e1, 3).is_subset(&run(e1, 2)));
        }

        #[test]
        fn common_weight_scale_keeps_the_set(seed in 0u64..500, scale in 0.1f64..10.0) {
            let (g, labels, anchors) = random_case(seed);
            let base = DefinitionParams { k_balance: Some(2), ..Default::default() };
            let scaled = DefinitionParams {
                weights: ["c0", "c1", "c2"].iter().map(|c| (c.to_string(), scale)).collect(),
                ..base.clone()
            };
            let a = definition_oracle(&g, &labels, &anchors, &base).unwrap();
            let b = definition_oracle(&g, &labels, &anchors, &scaled).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn identical_and_disjoint_agreement() {
        let a: BTreeSet<&str> = ["x", "y"].into();
        let b: BTreeSet<&str> = ["z"].into();
        assert_eq!(set_overlap(&a, &a).jaccard, 1.0);
        assert_eq!(set_overlap(&a, &b).jaccard, 0.0);
    }
}
