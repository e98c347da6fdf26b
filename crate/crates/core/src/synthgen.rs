//! Seeded planted-partition graphs with known global nodes and dedicated
//! anchor hubs.
//!
//! Members of a region link to each other with probability `p_in` and to
//! other regions with `p_out`. Planted globals keep their region label but
//! link everywhere with `global_spread`. Each anchor family adds one hub per
//! region, tied in both directions to `anchor_degree` non-global members of
//! that region and to nothing else.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::AnchorSet;
use crate::graph::{DirectedGraph, NodeId};
use crate::labels::{ClassId, LabelTable};
use crate::rng::substream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub regions: usize,
    pub nodes_per_region: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub global_fraction: f64,
    pub global_spread: f64,
    /// Planted globals per region, overriding `global_fraction`.
    pub planted_per_region: Option<Vec<usize>>,
    pub anchor_degree: usize,
    /// Independent anchor hub sets; family 0 is the primary one.
    pub anchor_families: usize,
    /// Defaults to R00, R01, ...
    pub region_names: Option<Vec<String>>,
    /// Overwritten by the run seed when driven from a config file.
    pub rng_seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            regions: 3,
            nodes_per_region: 200,
            p_in: 0.05,
            p_out: 0.002,
            global_fraction: 0.05,
            global_spread: 0.02,
            planted_per_region: None,
            anchor_degree: 20,
            anchor_families: 1,
            region_names: None,
            rng_seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn region_names(&self) -> Vec<String> {
        match &self.region_names {
            Some(names) => names.clone(),
            None => {
                let width = (self.regions.saturating_sub(1)).to_string().len().max(2);
                (0..self.regions).map(|r| format!("R{r:0width$}")).collect()
            }
        }
    }

    /// Planted globals in region `r`.
    pub fn globals_in(&self, r: usize) -> usize {
        match &self.planted_per_region {
            Some(counts) => counts.get(r).copied().unwrap_or(0),
            None => (self.global_fraction * self.nodes_per_region as f64 + 1e-9).floor() as usize,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("synth: {m}")));
        let prob = |p: f64| p.is_finite() && (0.0..=1.0).contains(&p);
        if self.regions < 2 {
            return bad(format!("need at least 2 regions, got {}", self.regions));
        }
        if self.nodes_per_region == 0 {
            return bad("nodes_per_region must be at least 1".into());
        }
        if !(prob(self.p_in) && prob(self.p_out) && self.p_out <= self.p_in) {
            return bad(format!(
                "need 0 <= p_out <= p_in <= 1, got p_in={} p_out={}",
                self.p_in, self.p_out
            ));
        }
        if !(self.global_fraction.is_finite() && (0.0..1.0).contains(&self.global_fraction)) {
            return bad(format!("global_fraction must lie in [0, 1), got {}", self.global_fraction));
        }
        if !prob(self.global_spread) {
            return bad(format!("global_spread must lie in [0, 1], got {}", self.global_spread));
        }
        if self.anchor_families == 0 {
            return bad("anchor_families must be at least 1".into());
        }
        if let Some(counts) = &self.planted_per_region {
            if counts.len() != self.regions {
                return bad(format!("{} planted counts for {} regions", counts.len(), self.regions));
            }
            if counts.iter().any(|&c| c >= self.nodes_per_region) {
                return bad("a region needs at least one non-global member".into());
            }
        }
        let locals = (0..self.regions).map(|r| self.nodes_per_region - self.globals_in(r)).min().unwrap_or(0);
        if self.anchor_degree == 0 || self.anchor_degree > locals {
            return bad(format!(
                "anchor_degree {} must lie in 1..={locals} (non-global members per region)",
                self.anchor_degree
            ));
        }
        let names = self.region_names();
        if names.len() != self.regions {
            return bad(format!("{} region names for {} regions", names.len(), self.regions));
        }
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != names.len() || names.iter().any(|n| n.is_empty() || n.contains(['\t', '\n'])) {
            return bad("region names must be unique, non-empty and tab-free".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthRow {
    pub node_id: String,
    pub region: String,
    pub planted_global: bool,
    pub is_anchor: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PlantedTruth {
    rows: Vec<TruthRow>,
    index: BTreeMap<String, usize>,
}

impl PlantedTruth {
    pub fn new(rows: Vec<TruthRow>) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, r) in rows.iter().enumerate() {
            if index.insert(r.node_id.clone(), i).is_some() {
                return Err(Error::Input(format!("duplicate truth row for {}", r.node_id)));
            }
        }
        Ok(PlantedTruth { rows, index })
    }

    pub fn rows(&self) -> &[TruthRow] {
        &self.rows
    }

    pub fn get(&self, node_id: &str) -> Option<&TruthRow> {
        self.index.get(node_id).map(|&i| &self.rows[i])
    }

    pub fn planted_globals(&self) -> impl Iterator<Item = &TruthRow> {
        self.rows.iter().filter(|r| r.planted_global)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(r)?;
        }
        out.flush().map_err(|e| Error::io("<truth csv>", e))?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let rows = rdr.deserialize().collect::<std::result::Result<Vec<TruthRow>, _>>()?;
        Self::new(rows)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(f)
    }
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub graph: DirectedGraph,
    pub labels: LabelTable,
    pub truth: PlantedTruth,
    /// One anchor set per family; `anchor_families[0]` is the primary set.
    pub anchor_families: Vec<AnchorSet>,
}

impl SynthOutput {
    pub fn anchors(&self) -> &AnchorSet {
        &self.anchor_families[0]
    }

    /// Writes `edges.tsv`, `labels.tsv`, `anchors.tsv` (plus `anchors_<k>.tsv`
    /// for extra families) and `truth.csv`; returns the written paths.
    pub fn write_files(&self, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        let mut create = |name: String, body: &dyn Fn(&mut dyn Write) -> Result<()>| -> Result<()> {
            let path = dir.join(name);
            let f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            let mut w = BufWriter::new(f);
            body(&mut w)?;
            w.flush().map_err(|e| Error::io(&path, e))?;
            written.push(path);
            Ok(())
        };
        let io = |e: std::io::Error| Error::io(dir, e);
        create("edges.tsv".into(), &|w| {
            for (a, b) in self.graph.edges() {
                writeln!(w, "{}\t{}", self.graph.id(a), self.graph.id(b)).map_err(io)?;
            }
            Ok(())
        })?;
        create("labels.tsv".into(), &|w| {
            for v in self.graph.nodes() {
                if let Some(c) = self.labels.class_of(v) {
                    writeln!(w, "{}\t{}", self.graph.id(v), self.labels.class_name(c)).map_err(io)?;
                }
            }
            Ok(())
        })?;
        for (k, family) in self.anchor_families.iter().enumerate() {
            let name = if k == 0 { "anchors.tsv".to_owned() } else { format!("anchors_{k}.tsv") };
            create(name, &|w| family.write_tsv(&self.labels, w).map_err(io))?;
        }
        create("truth.csv".into(), &|w| self.truth.write_csv(w))?;
        Ok(written)
    }
}

/// Draws a graph. Identical configs give identical output.
pub fn generate(cfg: &SynthConfig) -> Result<SynthOutput> {
    cfg.validate()?;
    let names = cfg.region_names();
    let (r_count, n) = (cfg.regions, cfg.nodes_per_region);
    let members = r_count * n;

    let mut planted = vec![false; members];
    let mut rng = substream(cfg.rng_seed, "synth", 0);
    for r in 0..r_count {
        for i in sample(&mut rng, n, cfg.globals_in(r)) {
            planted[r * n + i] = true;
        }
    }

    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut rng = substream(cfg.rng_seed, "synth", 1);
    for u in 0..members {
        for v in 0..members {
            if u == v {
                continue;
            }
            let p = if planted[u] || planted[v] {
                cfg.global_spread
            } else if u / n == v / n {
                cfg.p_in
            } else {
                cfg.p_out
            };
            if rng.gen::<f64>() < p {
                edges.push((u as u32, v as u32));
            }
        }
    }

    let mut ids: Vec<String> = (0..members).map(|m| format!("{}_m{:04}", names[m / n], m % n)).collect();
    let mut region_of: Vec<usize> = (0..members).map(|m| m / n).collect();
    let mut family_nodes = Vec::new();
    for f in 0..cfg.anchor_families {
        let mut rng = substream(cfg.rng_seed, "synth-anchors", f as u64);
        let mut hubs = Vec::new();
        for (r, name) in names.iter().enumerate() {
            let hub = ids.len() as u32;
            ids.push(format!("{name}_anchor{f}"));
            region_of.push(r);
            let locals: Vec<usize> = (r * n..(r + 1) * n).filter(|&m| !planted[m]).collect();
            for i in sample(&mut rng, locals.len(), cfg.anchor_degree) {
                let m = locals[i] as u32;
                edges.push((hub, m));
                edges.push((m, hub));
            }
            hubs.push((NodeId(hub), ClassId(r as u32)));
        }
        family_nodes.push(hubs);
    }

    let graph = DirectedGraph::from_index_edges(ids, edges);
    // Class ids follow sorted names; map region index to class id through names.
    let assignments: Vec<Option<&str>> = region_of.iter().map(|&r| Some(names[r].as_str())).collect();
    let labels = LabelTable::from_names(&assignments)?;
    let class_of_region: Vec<ClassId> = names.iter().map(|nm| labels.class_id(nm).expect("region class")).collect();
    let anchor_families = family_nodes
        .into_iter()
        .map(|hubs| AnchorSet::new(&graph, hubs.into_iter().map(|(node, r)| (node, class_of_region[r.index()]))))
        .collect();
    let truth = PlantedTruth::new(
        graph
            .nodes()
            .map(|v| TruthRow {
                node_id: graph.id(v).to_owned(),
                region: names[region_of[v.index()]].clone(),
                planted_global: v.index() < members && planted[v.index()],
                is_anchor: v.index() >= members,
            })
            .collect(),
    )?;
    Ok(SynthOutput {
        graph,
        labels,
        truth,
        anchor_families,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{bfs_hops, Direction};

    fn minimal() -> SynthConfig {
        SynthConfig {
            regions: 2,
            nodes_per_region: 1,
            p_in: 0.0,
            p_out: 0.0,
            global_fraction: 0.0,
            global_spread: 0.0,
            anchor_degree: 1,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn minimal_case_has_only_anchor_edges() {
        let out = generate(&minimal()).unwrap();
        assert_eq!(out.graph.node_count(), 4);
        assert_eq!(out.graph.edge_count(), 4);
        for (a, b) in out.graph.edges() {
            assert!(out.truth.get(out.graph.id(a)).unwrap().is_anchor || out.truth.get(out.graph.id(b)).unwrap().is_anchor);
        }
    }

    #[test]
    fn disconnected_blocks_reach_only_their_own_anchor() {
        let cfg = SynthConfig {
            regions: 3,
            nodes_per_region: 30,
            p_in: 0.2,
            p_out: 0.0,
            global_fraction: 0.0,
            anchor_degree: 5,
            ..SynthConfig::default()
        };
        let out = generate(&cfg).unwrap();
        for a in out.anchors().anchors() {
            let hops = bfs_hops(&out.graph, a.node, Direction::Outward, 100).unwrap();
            for v in out.graph.nodes() {
                let same = out.labels.class_of(v) == Some(a.class);
                if !same {
                    assert_eq!(hops.get(v), None);
                }
            }
        }
    }

    #[test]
    fn densities_match_block_probabilities() {
        let cfg = SynthConfig {
            regions: 3,
            nodes_per_region: 300,
            p_in: 0.02,
            p_out: 0.001,
            global_fraction: 0.05,
            global_spread: 0.02,
            anchor_degree: 10,
            rng_seed: 42,
            ..SynthConfig::default()
        };
        let out = generate(&cfg).unwrap();
        let t = &out.truth;
        let (mut intra, mut inter) = (0usize, 0usize);
        for (a, b) in out.graph.edges() {
            let (ra, rb) = (t.get(out.graph.id(a)).unwrap(), t.get(out.graph.id(b)).unwrap());
            if ra.is_anchor || rb.is_anchor || ra.planted_global || rb.planted_global {
                continue;
            }
            if ra.region == rb.region {
                intra += 1;
            } else {
                inter += 1;
            }
        }
        let locals = 300 - cfg.globals_in(0);
        let intra_pairs = 3 * locals * (locals - 1);
        let inter_pairs = 3 * 2 * locals * locals;
        let di = intra as f64 / intra_pairs as f64;
        let dx = inter as f64 / inter_pairs as f64;
        assert!((di / 0.02 - 1.0).abs() < 0.2, "intra density {di}");
        assert!((dx / 0.001 - 1.0).abs() < 0.2, "inter density {dx}");
    }

    #[test]
    fn planted_counts_and_labels() {
        let cfg = SynthConfig {
            regions: 4,
            nodes_per_region: 50,
            global_fraction: 0.1,
            anchor_degree: 5,
            ..SynthConfig::default()
        };
        let out = generate(&cfg).unwrap();
        let hist = out.labels.histogram();
        assert!(hist.iter().all(|&c| c == 51));
        for name in cfg.region_names() {
            let planted = out.truth.planted_globals().filter(|r| r.region == name).count();
            assert_eq!(planted, 5);
        }
        assert!(out.truth.rows().iter().all(|r| !(r.is_anchor && r.planted_global)));
    }

    #[test]
    fn per_region_planted_counts() {
        let cfg = SynthConfig {
            nodes_per_region: 40,
            anchor_degree: 4,
            planted_per_region: Some(vec![9, 3, 0]),
            ..SynthConfig::default()
        };
        let out = generate(&cfg).unwrap();
        for (name, want) in cfg.region_names().iter().zip([9, 3, 0]) {
            assert_eq!(out.truth.planted_globals().filter(|r| &r.region == name).count(), want);
        }
        let short = SynthConfig { planted_per_region: Some(vec![1]), ..cfg };
        assert!(matches!(generate(&short), Err(Error::Config(_))));
    }

    #[test]
    fn anchors_only_touch_local_members_of_their_region() {
        let cfg = SynthConfig {
            anchor_families: 2,
            anchor_degree: 7,
            nodes_per_region: 60,
            ..SynthConfig::default()
        };
        let out = generate(&cfg).unwrap();
        assert_eq!(out.anchor_families.len(), 2);
        for fam in &out.anchor_families {
            for a in fam.anchors() {
                let region = &out.truth.get(&a.id).unwrap().region;
                assert_eq!(out.graph.successors(a.node).len(), 7);
                assert_eq!(out.graph.predecessors(a.node).len(), 7);
                for &m in out.graph.successors(a.node) {
                    let row = out.truth.get(out.graph.id(NodeId(m))).unwrap();
                    assert_eq!(&row.region, region);
                    assert!(!row.planted_global && !row.is_anchor);
                }
            }
        }
    }

    #[test]
    fn seed_determinism_and_validation() {
        let cfg = SynthConfig {
            nodes_per_region: 40,
            anchor_degree: 4,
            ..SynthConfig::default()
        };
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a.graph, b.graph);
        let c = generate(&SynthConfig { rng_seed: 1, ..cfg.clone() }).unwrap();
        assert_ne!(a.graph, c.graph);
        for bad in [
            SynthConfig { regions: 1, ..cfg.clone() },
            SynthConfig { p_out: 0.5, p_in: 0.1, ..cfg.clone() },
            SynthConfig { global_fraction: 1.0, ..cfg.clone() },
            SynthConfig { anchor_degree: 39, ..cfg.clone() },
        ] {
            assert!(matches!(generate(&bad), Err(Error::Config(_))));
        }
    }

    #[test]
    fn planted_global_outreach_beats_local_intra_degree() {
        // With global_spread = p_in / R, a planted global's expected
        // out-degree over all regions matches a local's intra-region
        // out-degree up to the few links locals get from other globals.
        let cfg = SynthConfig {
            regions: 3,
            nodes_per_region: 100,
            p_in: 0.06,
            p_out: 0.002,
            global_fraction: 0.1,
            global_spread: 0.02,
            anchor_degree: 5,
            ..SynthConfig::default()
        };
        let (mut global_out, mut local_intra) = (0.0, 0.0);
        for seed in 0..20 {
            let out = generate(&SynthConfig { rng_seed: seed, ..cfg.clone() }).unwrap();
            let t = &out.truth;
            for (a, b) in out.graph.edges() {
                let (ra, rb) = (t.get(out.graph.id(a)).unwrap(), t.get(out.graph.id(b)).unwrap());
                if rb.is_anchor || ra.is_anchor {
                    continue;
                }
                if ra.planted_global {
                    global_out += 1.0 / (10.0 * 3.0);
                } else if ra.region == rb.region {
                    local_intra += 1.0 / (90.0 * 3.0);
                }
            }
        }
        assert!(global_out >= local_intra, "global {global_out} local {local_intra}");
    }
}
