//! Anchor distance vectors, neighborhood region mixes, and the flat
//! feature matrix handed to the classifiers.
//!
//! Column layout is fixed: every `ihop` (anchor order), every `ohop`, every
//! `inp` (region order), every `onp`. MHOP travels alongside the matrix but
//! is not a classifier input.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{bfs_hops, DirectedGraph, Direction, HopMap, NodeId, UNREACHED};
use crate::labels::{ClassId, LabelTable};

/// One anchor node and the class it stands for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Anchor {
    pub node: NodeId,
    pub id: String,
    pub class: ClassId,
}

/// Ordered anchor list; sorted by (class, external id) so columns are stable.
/// A class may own several anchors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnchorSet {
    anchors: Vec<Anchor>,
}

impl AnchorSet {
    pub fn new(graph: &DirectedGraph, entries: impl IntoIterator<Item = (NodeId, ClassId)>) -> Self {
        let mut anchors: Vec<Anchor> = entries
            .into_iter()
            .map(|(node, class)| Anchor {
                node,
                id: graph.id(node).to_owned(),
                class,
            })
            .collect();
        anchors.sort_by(|a, b| (a.class, &a.id).cmp(&(b.class, &b.id)));
        anchors.dedup();
        AnchorSet { anchors }
    }

    /// Resolves `(node id, class name)` pairs; every unknown id is listed in the error.
    pub fn from_names<S: AsRef<str>>(
        graph: &DirectedGraph,
        labels: &LabelTable,
        pairs: &[(S, S)],
    ) -> Result<Self> {
        let mut missing = Vec::new();
        let mut entries = Vec::new();
        for (id, class) in pairs {
            let class = labels.class_id(class.as_ref()).ok_or_else(|| {
                Error::Config(format!(
                    "anchor `{}` names unknown class `{}`",
                    id.as_ref(),
                    class.as_ref()
                ))
            })?;
            match graph.lookup(id.as_ref()) {
                Some(n) => entries.push((n, class)),
                None => missing.push(id.as_ref().to_owned()),
            }
        }
        if !missing.is_empty() {
            return Err(Error::Config(format!(
                "anchors missing from graph: {}",
                missing.join(", ")
            )));
        }
        Ok(AnchorSet::new(graph, entries))
    }

    pub fn read<R: Read>(reader: R, source_name: &str, graph: &DirectedGraph, labels: &LabelTable) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let line = line.map_err(|e| Error::Parse {
                path: source_name.to_owned(),
                line: i as u64 + 1,
                message: e.to_string(),
            })?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (id, class) = line.split_once('\t').ok_or_else(|| Error::Parse {
                path: source_name.to_owned(),
                line: i as u64 + 1,
                message: "expected `node_id<TAB>class`".into(),
            })?;
            pairs.push((id.trim().to_owned(), class.trim().to_owned()));
        }
        Self::from_names(graph, labels, &pairs)
    }

    pub fn write_tsv<W: Write>(&self, labels: &LabelTable, mut w: W) -> std::io::Result<()> {
        for a in &self.anchors {
            writeln!(w, "{}\t{}", a.id, labels.class_name(a.class))?;
        }
        Ok(())
    }

    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    pub fn classes(&self) -> BTreeSet<ClassId> {
        self.anchors.iter().map(|a| a.class).collect()
    }

    /// Keeps only anchors owned by `classes`.
    pub fn restrict(&self, classes: &BTreeSet<ClassId>) -> AnchorSet {
        AnchorSet {
            anchors: self
                .anchors
                .iter()
                .filter(|a| classes.contains(&a.class))
                .cloned()
                .collect(),
        }
    }

    /// Fails unless every class in `classes` owns at least one anchor.
    pub fn ensure_covers(&self, classes: impl IntoIterator<Item = ClassId>, labels: &LabelTable) -> Result<()> {
        let owned = self.classes();
        let uncovered: Vec<&str> = classes
            .into_iter()
            .filter(|c| !owned.contains(c))
            .map(|c| labels.class_name(c))
            .collect();
        if uncovered.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "classes without an anchor: {}",
                uncovered.join(", ")
            )))
        }
    }
}

pub fn load_anchors(path: impl AsRef<Path>, graph: &DirectedGraph, labels: &LabelTable) -> Result<AnchorSet> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    AnchorSet::read(f, &path.display().to_string(), graph, labels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    /// Deepest BFS level explored.
    pub cap: u32,
    /// Stand-in for unreachable anchors; defaults to `cap + 1`.
    pub surrogate: Option<u32>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            cap: 15,
            surrogate: None,
        }
    }
}

impl FeatureConfig {
    pub fn surrogate(&self) -> u32 {
        self.surrogate.unwrap_or(self.cap + 1)
    }
}

/// Minimum over all reached hop values; `surrogate` when nothing was reached.
///
/// Accepts raw values ([`UNREACHED`]) as well as already-substituted ones.
pub fn compute_mhop(hops: impl IntoIterator<Item = u32>, surrogate: u32) -> u32 {
    hops.into_iter()
        .filter(|&h| h != UNREACHED && h < surrogate)
        .min()
        .unwrap_or(surrogate)
}

/// Anchor distance vector of one node; unreachable entries hold the surrogate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sdv {
    pub ihop: Vec<u32>,
    pub ohop: Vec<u32>,
    pub mhop: u32,
}

/// BFS results for every (anchor, direction) pair.
#[derive(Debug, Clone)]
pub struct SdvTable {
    pub anchor_ids: Vec<String>,
    pub surrogate: u32,
    inward: Vec<HopMap>,
    outward: Vec<HopMap>,
    mhop: Vec<u32>,
}

impl SdvTable {
    pub fn node_count(&self) -> usize {
        self.mhop.len()
    }

    pub fn inward(&self) -> &[HopMap] {
        &self.inward
    }

    pub fn outward(&self) -> &[HopMap] {
        &self.outward
    }

    /// MHOP from raw distances (surrogate only when no anchor reaches the node).
    pub fn mhop(&self, node: NodeId) -> u32 {
        self.mhop[node.index()]
    }

    pub fn row(&self, node: NodeId) -> Sdv {
        let sub = |m: &HopMap| m.get(node).unwrap_or(self.surrogate);
        Sdv {
            ihop: self.inward.iter().map(sub).collect(),
            ohop: self.outward.iter().map(sub).collect(),
            mhop: self.mhop[node.index()],
        }
    }
}

/// Runs one inward and one outward BFS per anchor. Jobs run in parallel and
/// are merged in anchor order.
pub fn compute_sdv(g: &DirectedGraph, anchors: &AnchorSet, cap: u32, surrogate: u32) -> Result<SdvTable> {
    if surrogate <= cap {
        return Err(Error::Config(format!(
            "surrogate {surrogate} must exceed the BFS cap {cap}"
        )));
    }
    let offenders: Vec<&str> = anchors
        .anchors()
        .iter()
        .filter(|a| a.node.index() >= g.node_count() || g.id(a.node) != a.id)
        .map(|a| a.id.as_str())
        .collect();
    if !offenders.is_empty() {
        return Err(Error::Config(format!(
            "anchors missing from graph: {}",
            offenders.join(", ")
        )));
    }

    let jobs: Vec<(NodeId, Direction)> = [Direction::Inward, Direction::Outward]
        .into_iter()
        .flat_map(|d| anchors.anchors().iter().map(move |a| (a.node, d)))
        .collect();
    let maps = jobs
        .par_iter()
        .map(|&(src, dir)| bfs_hops(g, src, dir, cap))
        .collect::<Result<Vec<_>>>()?;
    let (inward, outward) = {
        let mut maps = maps;
        let outward = maps.split_off(anchors.len());
        (maps, outward)
    };

    let mut mhop = vec![surrogate; g.node_count()];
    for map in inward.iter().chain(&outward) {
        for (slot, &h) in mhop.iter_mut().zip(map.raw()) {
            if h < *slot {
                *slot = h;
            }
        }
    }

    Ok(SdvTable {
        anchor_ids: anchors.anchors().iter().map(|a| a.id.clone()).collect(),
        surrogate,
        inward,
        outward,
        mhop,
    })
}

/// Regions the neighborhood mix is measured over: explicit classes plus an
/// optional bucket catching every other labeled class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionSet {
    pub classes: Vec<ClassId>,
    pub other: Option<String>,
}

impl RegionSet {
    pub fn len(&self) -> usize {
        self.classes.len() + usize::from(self.other.is_some())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn names(&self, labels: &LabelTable) -> Vec<String> {
        self.classes
            .iter()
            .map(|&c| labels.class_name(c).to_owned())
            .chain(self.other.clone())
            .collect()
    }

    fn slot_table(&self, labels: &LabelTable) -> Vec<Option<usize>> {
        let other = self.other.as_ref().map(|_| self.classes.len());
        let mut slots = vec![other; labels.class_count()];
        for (i, c) in self.classes.iter().enumerate() {
            slots[c.index()] = Some(i);
        }
        slots
    }
}

/// Neighborhood region mix of one node.
#[derive(Debug, Clone, PartialEq)]
pub struct Snp {
    pub inp: Vec<f64>,
    pub onp: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SnpTable {
    pub region_names: Vec<String>,
    width: usize,
    inp: Vec<f64>,
    onp: Vec<f64>,
}

impl SnpTable {
    pub fn row(&self, node: NodeId) -> Snp {
        let r = node.index() * self.width..(node.index() + 1) * self.width;
        Snp {
            inp: self.inp[r.clone()].to_vec(),
            onp: self.onp[r].to_vec(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.inp.len().checked_div(self.width).unwrap_or(0)
    }
}

/// Share of each region among a node's labeled in-neighbors (INP) and
/// out-neighbors (ONP). Unlabeled and excluded neighbors count for nothing;
/// a node with no labeled neighbors in a direction gets an all-zero vector.
pub fn compute_snp(g: &DirectedGraph, labels: &LabelTable, regions: &RegionSet) -> Result<SnpTable> {
    if regions.is_empty() {
        return Err(Error::Config("neighborhood features need at least one region".into()));
    }
    if labels.node_count() != g.node_count() {
        return Err(Error::Consistency(format!(
            "label table covers {} nodes, graph has {}",
            labels.node_count(),
            g.node_count()
        )));
    }
    let width = regions.len();
    let slots = regions.slot_table(labels);
    let fill = |dir: Direction| -> Vec<f64> {
        let mut out = vec![0.0; g.node_count() * width];
        out.par_chunks_mut(width).enumerate().for_each(|(v, row)| {
            let mut total = 0u32;
            for &u in g.neighbors(NodeId(v as u32), dir) {
                if let Some(slot) = labels.class_of(NodeId(u)).and_then(|c| slots[c.index()]) {
                    row[slot] += 1.0;
                    total += 1;
                }
            }
            if total > 0 {
                let t = f64::from(total);
                row.iter_mut().for_each(|x| *x /= t);
            }
        });
        out
    };
    Ok(SnpTable {
        region_names: regions.names(labels),
        width,
        inp: fill(Direction::Inward),
        onp: fill(Direction::Outward),
    })
}

/// Column naming for a feature matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureLayout {
    pub anchor_ids: Vec<String>,
    pub region_names: Vec<String>,
}

impl FeatureLayout {
    pub fn width(&self) -> usize {
        2 * self.anchor_ids.len() + 2 * self.region_names.len()
    }

    pub fn column_names(&self) -> Vec<String> {
        let a = &self.anchor_ids;
        let r = &self.region_names;
        a.iter()
            .map(|x| format!("ihop_{x}"))
            .chain(a.iter().map(|x| format!("ohop_{x}")))
            .chain(r.iter().map(|x| format!("inp_{x}")))
            .chain(r.iter().map(|x| format!("onp_{x}")))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub node: NodeId,
    pub sdv: Sdv,
    pub snp: Snp,
}

impl FeatureRow {
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.sdv.ihop.len() + 2 * self.snp.inp.len());
        v.extend(self.sdv.ihop.iter().map(|&h| f64::from(h)));
        v.extend(self.sdv.ohop.iter().map(|&h| f64::from(h)));
        v.extend_from_slice(&self.snp.inp);
        v.extend_from_slice(&self.snp.onp);
        v
    }
}

/// Row-major feature matrix in canonical (dense index) node order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub layout: FeatureLayout,
    nodes: Vec<NodeId>,
    node_ids: Vec<String>,
    values: Vec<f64>,
    mhop: Vec<u32>,
}

impl FeatureMatrix {
    pub fn width(&self) -> usize {
        self.layout.width()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn node_id(&self, row: usize) -> &str {
        &self.node_ids[row]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let w = self.width();
        &self.values[row * w..(row + 1) * w]
    }

    pub fn mhop(&self, row: usize) -> u32 {
        self.mhop[row]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Row index of `node`, if present.
    pub fn position(&self, node: NodeId) -> Option<usize> {
        self.nodes.binary_search(&node).ok()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["node_id".to_owned()];
        header.extend(self.layout.column_names());
        header.push("mhop".to_owned());
        out.write_record(&header)?;
        let mut rec = Vec::with_capacity(header.len());
        for i in 0..self.len() {
            rec.clear();
            rec.push(self.node_ids[i].clone());
            rec.extend(self.row(i).iter().map(|x| x.to_string()));
            rec.push(self.mhop[i].to_string());
            out.write_record(&rec)?;
        }
        out.flush().map_err(|e| Error::io("<feature csv>", e))?;
        Ok(())
    }

    /// Parses a matrix written by [`FeatureMatrix::write_csv`]; node ids are
    /// resolved against `graph`.
    pub fn read_csv<R: Read>(r: R, graph: &DirectedGraph) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        let bad = |m: String| Error::Input(format!("feature csv: {m}"));
        if header.first().map(String::as_str) != Some("node_id") || header.last().map(String::as_str) != Some("mhop") {
            return Err(bad("header must start with node_id and end with mhop".into()));
        }
        let cols = &header[1..header.len() - 1];
        let strip = |prefix: &str| -> Vec<String> {
            cols.iter()
                .filter_map(|c| c.strip_prefix(prefix).map(str::to_owned))
                .collect()
        };
        let layout = FeatureLayout {
            anchor_ids: strip("ihop_"),
            region_names: strip("inp_"),
        };
        if layout.column_names() != cols {
            return Err(bad("columns are not in ihop/ohop/inp/onp order".into()));
        }
        let width = layout.width();
        let mut rows: Vec<(NodeId, String, Vec<f64>, u32)> = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let id = rec.get(0).unwrap_or_default().to_owned();
            let node = graph.require(&id)?;
            let vals = (1..=width)
                .map(|i| rec[i].parse::<f64>().map_err(|e| bad(format!("{id}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let mhop = rec[width + 1].parse::<u32>().map_err(|e| bad(format!("{id}: {e}")))?;
            rows.push((node, id, vals, mhop));
        }
        rows.sort_by_key(|r| r.0);
        let mut m = FeatureMatrix {
            layout,
            nodes: Vec::with_capacity(rows.len()),
            node_ids: Vec::with_capacity(rows.len()),
            values: Vec::with_capacity(rows.len() * width),
            mhop: Vec::with_capacity(rows.len()),
        };
        for (node, id, vals, mhop) in rows {
            m.nodes.push(node);
            m.node_ids.push(id);
            m.values.extend(vals);
            m.mhop.push(mhop);
        }
        Ok(m)
    }
}

/// Joins per-node SDV and SNP rows into one matrix, sorted by node index.
/// Both inputs must cover exactly the same nodes.
pub fn assemble_features(
    graph: &DirectedGraph,
    layout: FeatureLayout,
    mut sdvs: Vec<(NodeId, Sdv)>,
    mut snps: Vec<(NodeId, Snp)>,
) -> Result<FeatureMatrix> {
    sdvs.sort_by_key(|(n, _)| *n);
    snps.sort_by_key(|(n, _)| *n);
    let same_nodes = sdvs.len() == snps.len() && sdvs.iter().zip(&snps).all(|(a, b)| a.0 == b.0);
    if !same_nodes {
        return Err(Error::Consistency(
            "SDV and SNP rows cover different node sets".into(),
        ));
    }
    let width = layout.width();
    let mut m = FeatureMatrix {
        layout,
        nodes: Vec::with_capacity(sdvs.len()),
        node_ids: Vec::with_capacity(sdvs.len()),
        values: Vec::with_capacity(sdvs.len() * width),
        mhop: Vec::with_capacity(sdvs.len()),
    };
    for ((node, sdv), (_, snp)) in sdvs.into_iter().zip(snps) {
        let row = FeatureRow { node, sdv, snp };
        let flat = row.flatten();
        if flat.len() != width {
            return Err(Error::Consistency(format!(
                "row for {} has {} columns, layout expects {width}",
                graph.id(node),
                flat.len()
            )));
        }
        m.nodes.push(node);
        m.node_ids.push(graph.id(node).to_owned());
        m.values.extend(flat);
        m.mhop.push(row.sdv.mhop);
    }
    Ok(m)
}

/// Computes SDV and SNP for every node and assembles the matrix.
pub fn extract_features(
    g: &DirectedGraph,
    labels: &LabelTable,
    anchors: &AnchorSet,
    regions: &RegionSet,
    cfg: &FeatureConfig,
) -> Result<FeatureMatrix> {
    let sdv = compute_sdv(g, anchors, cfg.cap, cfg.surrogate())?;
    let snp = compute_snp(g, labels, regions)?;
    features_from_tables(g, &sdv, &snp)
}

pub fn features_from_tables(g: &DirectedGraph, sdv: &SdvTable, snp: &SnpTable) -> Result<FeatureMatrix> {
    let layout = FeatureLayout {
        anchor_ids: sdv.anchor_ids.clone(),
        region_names: snp.region_names.clone(),
    };
    if sdv.node_count() != g.node_count() || snp.node_count() != g.node_count() {
        return Err(Error::Consistency("feature tables were built for another graph".into()));
    }
    let sdvs = g.nodes().map(|v| (v, sdv.row(v))).collect();
    let snps = g.nodes().map(|v| (v, snp.row(v))).collect();
    assemble_features(g, layout, sdvs, snps)
}

/// Convenience lookup from external id to feature row index.
pub fn row_index(m: &FeatureMatrix) -> HashMap<&str, usize> {
    (0..m.len()).map(|i| (m.node_id(i), i)).collect()
}
