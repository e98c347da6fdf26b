//! Node → class ground truth, optionally resolved through a location mapping.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClassId(pub u32);

impl ClassId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "class#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeLabel {
    Unlabeled,
    Labeled(ClassId),
    /// Dropped because its location resolves to more than one class.
    Excluded,
}

/// Per-node labels over a fixed, sorted list of class names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelTable {
    labels: Vec<NodeLabel>,
    class_names: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelStats {
    pub labeled: usize,
    pub excluded: usize,
    pub unknown_nodes: usize,
}

impl LabelTable {
    /// Builds a table from per-node class names (`None` = unlabeled).
    /// Class ids follow the sorted order of the distinct names.
    pub fn from_names<S: AsRef<str>>(assignments: &[Option<S>]) -> Result<Self> {
        let names: BTreeSet<&str> = assignments.iter().flatten().map(|s| s.as_ref()).collect();
        if names.contains("") {
            return Err(Error::Config("empty class name".into()));
        }
        let class_names: Vec<String> = names.into_iter().map(str::to_owned).collect();
        let lookup: HashMap<&str, ClassId> = class_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), ClassId(i as u32)))
            .collect();
        let labels = assignments
            .iter()
            .map(|a| match a {
                Some(name) => NodeLabel::Labeled(lookup[name.as_ref()]),
                None => NodeLabel::Unlabeled,
            })
            .collect();
        Ok(LabelTable {
            labels,
            class_names,
        })
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, node: NodeId) -> NodeLabel {
        self.labels[node.index()]
    }

    pub fn class_of(&self, node: NodeId) -> Option<ClassId> {
        match self.labels[node.index()] {
            NodeLabel::Labeled(c) => Some(c),
            _ => None,
        }
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_name(&self, class: ClassId) -> &str {
        &self.class_names[class.index()]
    }

    pub fn class_id(&self, name: &str) -> Option<ClassId> {
        self.class_names
            .iter()
            .position(|n| n == name)
            .map(|i| ClassId(i as u32))
    }

    pub fn require_class(&self, name: &str) -> Result<ClassId> {
        self.class_id(name)
            .ok_or_else(|| Error::Config(format!("unknown class `{name}`")))
    }

    pub fn excluded(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == NodeLabel::Excluded)
            .map(|(i, _)| NodeId(i as u32))
    }

    pub fn nodes_in(&self, class: ClassId) -> impl Iterator<Item = NodeId> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter(move |(_, l)| **l == NodeLabel::Labeled(class))
            .map(|(i, _)| NodeId(i as u32))
    }

    /// Number of labeled nodes per class, indexed by class id.
    pub fn histogram(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_names.len()];
        for l in &self.labels {
            if let NodeLabel::Labeled(c) = l {
                counts[c.index()] += 1;
            }
        }
        counts
    }
}

/// Location → class rules. A location listed with several distinct classes is ambiguous.
#[derive(Debug, Clone, Default)]
pub struct LocationMapping {
    rules: BTreeMap<String, BTreeSet<String>>,
}

enum Resolved {
    Class(String),
    Ambiguous,
}

impl LocationMapping {
    pub fn insert(&mut self, location: &str, class: &str) -> Result<()> {
        if class.is_empty() {
            return Err(Error::Config(format!("empty class name for location `{location}`")));
        }
        self.rules
            .entry(location.to_owned())
            .or_default()
            .insert(class.to_owned());
        Ok(())
    }

    pub fn read<R: Read>(reader: R, source_name: &str) -> Result<Self> {
        let mut mapping = LocationMapping::default();
        for (line_no, fields) in tsv_pairs(reader, source_name)? {
            let (loc, class) = fields;
            mapping.insert(&loc, &class).map_err(|e| Error::Config(format!("{source_name}:{line_no}: {e}")))?;
        }
        Ok(mapping)
    }

    /// Follows chained rules (`city → county → state`); `x → x` is terminal.
    fn resolve(&self, location: &str) -> Result<Resolved> {
        let mut current = location.to_owned();
        let mut seen = BTreeSet::new();
        loop {
            let Some(targets) = self.rules.get(&current) else {
                return Ok(Resolved::Class(current));
            };
            if targets.len() > 1 {
                return Ok(Resolved::Ambiguous);
            }
            let next = targets.iter().next().expect("non-empty rule set");
            if *next == current {
                return Ok(Resolved::Class(current));
            }
            if !seen.insert(current.clone()) {
                return Err(Error::Config(format!(
                    "mapping cycle through location `{current}`"
                )));
            }
            current = next.clone();
        }
    }
}

fn tsv_pairs<R: Read>(reader: R, source_name: &str) -> Result<Vec<(u64, (String, String))>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line.map_err(|e| Error::Parse {
            path: source_name.to_owned(),
            line: line_no,
            message: e.to_string(),
        })?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        match line.split_once('\t') {
            Some((a, b)) if !a.trim().is_empty() && !b.contains('\t') => {
                out.push((line_no, (a.trim().to_owned(), b.trim().to_owned())))
            }
            _ => {
                return Err(Error::Parse {
                    path: source_name.to_owned(),
                    line: line_no,
                    message: format!("expected two tab-separated fields, got {line:?}"),
                })
            }
        }
    }
    Ok(out)
}

/// Reads `node_id<TAB>location` lines and resolves locations to classes.
///
/// Without a mapping the location is the class. Nodes missing from the graph
/// are counted in [`LabelStats::unknown_nodes`] and skipped.
pub fn read_labels<R: Read>(
    reader: R,
    source_name: &str,
    mapping: Option<&LocationMapping>,
    graph: &DirectedGraph,
) -> Result<(LabelTable, LabelStats)> {
    let mut stats = LabelStats::default();
    let mut resolved: Vec<Option<Option<String>>> = vec![None; graph.node_count()];
    for (line_no, (node_id, location)) in tsv_pairs(reader, source_name)? {
        let Some(node) = graph.lookup(&node_id) else {
            stats.unknown_nodes += 1;
            continue;
        };
        if location.is_empty() {
            return Err(Error::Config(format!("{source_name}:{line_no}: empty location")));
        }
        let class = match mapping {
            None => Some(location),
            Some(m) => match m.resolve(&location)? {
                Resolved::Class(c) => Some(c),
                Resolved::Ambiguous => None,
            },
        };
        resolved[node.index()] = Some(class);
    }

    let names: Vec<Option<&str>> = resolved
        .iter()
        .map(|r| r.as_ref().and_then(|c| c.as_deref()))
        .collect();
    let mut table = LabelTable::from_names(&names)?;
    for (i, r) in resolved.iter().enumerate() {
        match r {
            Some(Some(_)) => stats.labeled += 1,
            Some(None) => {
                table.labels[i] = NodeLabel::Excluded;
                stats.excluded += 1;
            }
            None => {}
        }
    }
    Ok((table, stats))
}

pub fn load_labels(
    path: impl AsRef<Path>,
    mapping: Option<&Path>,
    graph: &DirectedGraph,
) -> Result<(LabelTable, LabelStats)> {
    let path = path.as_ref();
    let mapping = match mapping {
        Some(mp) => {
            let f = File::open(mp).map_err(|e| Error::io(mp, e))?;
            Some(LocationMapping::read(f, &mp.display().to_string())?)
        }
        None => None,
    };
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let (table, stats) = read_labels(file, &path.display().to_string(), mapping.as_ref(), graph)?;
    if stats.unknown_nodes > 0 {
        log::warn!(
            "{}: {} labels name nodes absent from the graph",
            path.display(),
            stats.unknown_nodes
        );
    }
    Ok((table, stats))
}
