//! Polarized training-set selection.
//!
//! Very local in-scope nodes keep their class; very distant out-of-scope
//! nodes become the catch-all class. Everything in between is left out of
//! training but is still scored later.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::classifiers::Dataset;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::graph::NodeId;
use crate::labels::{ClassId, LabelTable};
use crate::rng::substream;

/// Threshold block shared by configs and policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub local_threshold: u32,
    pub global_threshold: u32,
    pub max_per_class: Option<usize>,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            local_threshold: 1,
            global_threshold: 3,
            max_per_class: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingPolicy {
    pub target_classes: BTreeSet<ClassId>,
    pub local_threshold: u32,
    pub global_threshold: u32,
    pub max_per_class: Option<usize>,
    pub rng_seed: u64,
}

impl SamplingPolicy {
    pub fn new(target_classes: impl IntoIterator<Item = ClassId>, cfg: SamplingConfig, rng_seed: u64) -> Self {
        SamplingPolicy {
            target_classes: target_classes.into_iter().collect(),
            local_threshold: cfg.local_threshold,
            global_threshold: cfg.global_threshold,
            max_per_class: cfg.max_per_class,
            rng_seed,
        }
    }

    pub fn config(&self) -> SamplingConfig {
        SamplingConfig {
            local_threshold: self.local_threshold,
            global_threshold: self.global_threshold,
            max_per_class: self.max_per_class,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.global_threshold <= self.local_threshold {
            return Err(Error::Config(format!(
                "global threshold {} must exceed local threshold {}",
                self.global_threshold, self.local_threshold
            )));
        }
        if self.max_per_class == Some(0) {
            return Err(Error::Config("max_per_class must be at least 1".into()));
        }
        if self.target_classes.is_empty() {
            return Err(Error::Config("sampling needs at least one target class".into()));
        }
        Ok(())
    }

    pub fn admits_local(&self, class: ClassId, mhop: u32) -> bool {
        self.target_classes.contains(&class) && mhop <= self.local_threshold
    }

    pub fn admits_global(&self, class: ClassId, mhop: u32) -> bool {
        !self.target_classes.contains(&class) && mhop >= self.global_threshold
    }
}

/// Rule that admitted a training row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Local,
    Global,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub nodes: Vec<NodeId>,
    pub node_ids: Vec<String>,
    pub mhop: Vec<u32>,
    pub provenance: Vec<Provenance>,
    /// Feature rows and class indices into `data.classes`; the catch-all class is last.
    pub data: Dataset,
}

impl TrainingSet {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn count(&self, rule: Provenance) -> usize {
        self.provenance.iter().filter(|&&p| p == rule).count()
    }

    /// Rows per class, in class order.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.data.classes.len()];
        for &y in &self.data.y {
            counts[y] += 1;
        }
        counts
    }
}

/// Builds the polarized training set.
///
/// Classes are the target classes that contributed at least one local row,
/// in class order, followed by `other_label`. Target classes with no local
/// rows are dropped with a warning.
pub fn select_biased(
    features: &FeatureMatrix,
    labels: &LabelTable,
    policy: &SamplingPolicy,
    other_label: &str,
) -> Result<TrainingSet> {
    policy.validate()?;
    if policy
        .target_classes
        .iter()
        .any(|&c| labels.class_name(c) == other_label)
    {
        return Err(Error::Config(format!(
            "catch-all label `{other_label}` collides with a target class"
        )));
    }

    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); labels.class_count()];
    let mut others: Vec<usize> = Vec::new();
    let mut seen = 0usize;
    for (row, &node) in features.nodes().iter().enumerate() {
        let Some(class) = labels.class_of(node) else {
            continue;
        };
        seen += 1;
        let mhop = features.mhop(row);
        if policy.admits_local(class, mhop) {
            by_class[class.index()].push(row);
        } else if policy.admits_global(class, mhop) {
            others.push(row);
        }
    }
    let labeled = labels.histogram().iter().sum::<usize>();
    if seen != labeled {
        return Err(Error::Consistency(format!(
            "{} labeled nodes have no feature row",
            labeled - seen
        )));
    }

    let mut classes = Vec::new();
    let mut groups = Vec::new();
    for &c in &policy.target_classes {
        let rows = std::mem::take(&mut by_class[c.index()]);
        if rows.is_empty() {
            log::warn!("target class {} has no local training rows; dropped", labels.class_name(c));
            continue;
        }
        classes.push(labels.class_name(c).to_owned());
        groups.push((rows, Provenance::Local));
    }
    if groups.is_empty() {
        return Err(Error::Sampling(format!(
            "local side is empty: no target node has mhop <= {}",
            policy.local_threshold
        )));
    }
    if others.is_empty() {
        return Err(Error::Sampling(format!(
            "{other_label} side is empty: no out-of-scope node has mhop >= {}",
            policy.global_threshold
        )));
    }
    classes.push(other_label.to_owned());
    groups.push((others, Provenance::Global));

    if let Some(cap) = policy.max_per_class {
        for (k, (rows, _)) in groups.iter_mut().enumerate() {
            if rows.len() > cap {
                let mut rng = substream(policy.rng_seed, "sampling", k as u64);
                let mut keep: Vec<usize> = sample(&mut rng, rows.len(), cap).into_iter().map(|i| rows[i]).collect();
                keep.sort_unstable();
                *rows = keep;
            }
        }
    }

    let mut picked: Vec<(usize, usize, Provenance)> = groups
        .into_iter()
        .enumerate()
        .flat_map(|(y, (rows, p))| rows.into_iter().map(move |r| (r, y, p)))
        .collect();
    picked.sort_unstable_by_key(|&(r, _, _)| r);

    let width = features.width();
    let mut x = Vec::with_capacity(picked.len() * width);
    let mut y = Vec::with_capacity(picked.len());
    let mut set = TrainingSet {
        nodes: Vec::with_capacity(picked.len()),
        node_ids: Vec::with_capacity(picked.len()),
        mhop: Vec::with_capacity(picked.len()),
        provenance: Vec::with_capacity(picked.len()),
        data: Dataset::default(),
    };
    for (row, class, rule) in picked {
        set.nodes.push(features.nodes()[row]);
        set.node_ids.push(features.node_id(row).to_owned());
        set.mhop.push(features.mhop(row));
        set.provenance.push(rule);
        x.extend_from_slice(features.row(row));
        y.push(class);
    }
    set.data = Dataset::new(width, x, y, classes)?;
    Ok(set)
}
