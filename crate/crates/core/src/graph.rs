//! Directed graph storage, edge-list ingestion and directional BFS.
//!
//! Nodes are re-indexed densely at load time; external string ids only
//! appear at I/O boundaries. Both the forward and the inverse adjacency are
//! kept in compressed sparse row form so that inward and outward searches
//! cost the same.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense node index into a [`DirectedGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Which edges a BFS follows away from its source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Follow in-edges: reaches nodes that have a directed path *to* the source.
    Inward,
    /// Follow out-edges: reaches nodes the source has a directed path to.
    Outward,
}

/// Marker for nodes a BFS did not reach within its cap.
pub const UNREACHED: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
struct Csr {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Csr {
    fn build(node_count: usize, edges: &[(u32, u32)]) -> Self {
        let mut offsets = vec![0usize; node_count + 1];
        for &(src, _) in edges {
            offsets[src as usize + 1] += 1;
        }
        for i in 0..node_count {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut targets = vec![0u32; edges.len()];
        for &(src, dst) in edges {
            targets[cursor[src as usize]] = dst;
            cursor[src as usize] += 1;
        }
        Csr { offsets, targets }
    }

    #[inline]
    fn row(&self, node: usize) -> &[u32] {
        &self.targets[self.offsets[node]..self.offsets[node + 1]]
    }
}

/// Immutable directed graph with forward and inverse adjacency.
///
/// No self-loops, no parallel edges. Neighbor lists are sorted by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    ids: Vec<String>,
    index: HashMap<String, NodeId>,
    out_adj: Csr,
    in_adj: Csr,
}

/// Counters reported while building a graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub edge_lines: usize,
    pub duplicates_dropped: usize,
    pub self_loops_dropped: usize,
}

/// Accumulates nodes and edges, then freezes them into a [`DirectedGraph`].
#[derive(Debug, Default)]
pub struct GraphBuilder {
    ids: Vec<String>,
    index: HashMap<String, NodeId>,
    edges: Vec<(u32, u32)>,
    stats: IngestStats,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a node (idempotent) and returns its dense index.
    pub fn add_node(&mut self, id: &str) -> NodeId {
        if let Some(&n) = self.index.get(id) {
            return n;
        }
        let n = NodeId(self.ids.len() as u32);
        self.ids.push(id.to_owned());
        self.index.insert(id.to_owned(), n);
        n
    }

    pub fn add_edge(&mut self, src: &str, dst: &str) {
        let a = self.add_node(src);
        let b = self.add_node(dst);
        self.add_edge_ix(a, b);
    }

    pub fn add_edge_ix(&mut self, src: NodeId, dst: NodeId) {
        self.stats.edge_lines += 1;
        if src == dst {
            self.stats.self_loops_dropped += 1;
        } else {
            self.edges.push((src.0, dst.0));
        }
    }

    pub fn build(mut self) -> (DirectedGraph, IngestStats) {
        self.edges.sort_unstable();
        let before = self.edges.len();
        self.edges.dedup();
        self.stats.duplicates_dropped = before - self.edges.len();

        let n = self.ids.len();
        let out_adj = Csr::build(n, &self.edges);
        let mut reversed: Vec<(u32, u32)> = self.edges.iter().map(|&(a, b)| (b, a)).collect();
        reversed.sort_unstable();
        let in_adj = Csr::build(n, &reversed);
        let graph = DirectedGraph {
            ids: self.ids,
            index: self.index,
            out_adj,
            in_adj,
        };
        (graph, self.stats)
    }
}

impl DirectedGraph {
    /// Builds a graph from external ids and index pairs. Used by generators and tests.
    pub fn from_index_edges(ids: Vec<String>, edges: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut b = GraphBuilder::new();
        for id in &ids {
            b.add_node(id);
        }
        assert_eq!(b.ids.len(), ids.len(), "node ids must be unique");
        for (s, t) in edges {
            b.add_edge_ix(NodeId(s), NodeId(t));
        }
        b.build().0
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out_adj.targets.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.ids.len() as u32).map(NodeId)
    }

    pub fn id(&self, node: NodeId) -> &str {
        &self.ids[node.index()]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn lookup(&self, id: &str) -> Option<NodeId> {
        self.index.get(id).copied()
    }

    pub fn require(&self, id: &str) -> Result<NodeId> {
        self.lookup(id)
            .ok_or_else(|| Error::Lookup(format!("unknown node id `{id}`")))
    }

    #[inline]
    pub fn successors(&self, node: NodeId) -> &[u32] {
        self.out_adj.row(node.index())
    }

    #[inline]
    pub fn predecessors(&self, node: NodeId) -> &[u32] {
        self.in_adj.row(node.index())
    }

    #[inline]
    pub fn neighbors(&self, node: NodeId, direction: Direction) -> &[u32] {
        match direction {
            Direction::Outward => self.successors(node),
            Direction::Inward => self.predecessors(node),
        }
    }

    pub fn has_edge(&self, src: NodeId, dst: NodeId) -> bool {
        self.successors(src).binary_search(&dst.0).is_ok()
    }

    /// All edges in (source, target) index order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes()
            .flat_map(move |u| self.successors(u).iter().map(move |&v| (u, NodeId(v))))
    }

    /// Same node set with every edge flipped.
    pub fn reversed(&self) -> DirectedGraph {
        DirectedGraph {
            ids: self.ids.clone(),
            index: self.index.clone(),
            out_adj: self.in_adj.clone(),
            in_adj: self.out_adj.clone(),
        }
    }

    /// Copy of this graph with one extra edge (no-op if present or a self-loop).
    pub fn with_edge(&self, src: NodeId, dst: NodeId) -> DirectedGraph {
        let edges = self
            .edges()
            .map(|(a, b)| (a.0, b.0))
            .chain(std::iter::once((src.0, dst.0)));
        DirectedGraph::from_index_edges(self.ids.clone(), edges)
    }
}

/// Reads a `src<TAB>dst` edge list. `#` lines and blank lines are skipped.
pub fn read_edges<R: Read>(reader: R, source_name: &str) -> Result<(DirectedGraph, IngestStats)> {
    let mut builder = GraphBuilder::new();
    let reader = BufReader::new(reader);
    for (i, line) in reader.lines().enumerate() {
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
        let mut fields = line.split('\t');
        let (src, dst) = match (fields.next(), fields.next(), fields.next()) {
            (Some(s), Some(d), None) if !s.trim().is_empty() && !d.trim().is_empty() => {
                (s.trim(), d.trim())
            }
            _ => {
                return Err(Error::Parse {
                    path: source_name.to_owned(),
                    line: line_no,
                    message: format!("expected `src<TAB>dst`, got {line:?}"),
                })
            }
        };
        builder.add_edge(src, dst);
    }
    if builder.stats.edge_lines == 0 {
        return Err(Error::EmptyGraph(source_name.to_owned()));
    }
    Ok(builder.build())
}

pub fn load_edges(path: impl AsRef<Path>) -> Result<(DirectedGraph, IngestStats)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let (graph, stats) = read_edges(file, &path.display().to_string())?;
    log::info!(
        "{}: {} nodes, {} edges ({} duplicates, {} self-loops dropped)",
        path.display(),
        graph.node_count(),
        graph.edge_count(),
        stats.duplicates_dropped,
        stats.self_loops_dropped
    );
    Ok((graph, stats))
}

/// Result of one capped breadth-first search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HopMap {
    pub source: NodeId,
    pub direction: Direction,
    pub cap: u32,
    hops: Vec<u32>,
}

impl HopMap {
    /// Hop count to `node`, or `None` if unreached within the cap.
    #[inline]
    pub fn get(&self, node: NodeId) -> Option<u32> {
        match self.hops[node.index()] {
            UNREACHED => None,
            h => Some(h),
        }
    }

    /// Raw values, with [`UNREACHED`] for unreached nodes.
    pub fn raw(&self) -> &[u32] {
        &self.hops
    }

    pub fn reached(&self) -> usize {
        self.hops.iter().filter(|&&h| h != UNREACHED).count()
    }
}

/// Shortest directed hop counts from `source`, explored up to `cap` hops.
pub fn bfs_hops(g: &DirectedGraph, source: NodeId, direction: Direction, cap: u32) -> Result<HopMap> {
    if source.index() >= g.node_count() {
        return Err(Error::Lookup(format!("source {source} not in graph")));
    }
    if cap == 0 {
        return Err(Error::Config("BFS cap must be at least 1".into()));
    }
    let mut hops = vec![UNREACHED; g.node_count()];
    hops[source.index()] = 0;
    let mut frontier = vec![source.0];
    let mut next = Vec::new();
    let mut depth = 0;
    while !frontier.is_empty() && depth < cap {
        depth += 1;
        for &u in &frontier {
            for &v in g.neighbors(NodeId(u), direction) {
                let slot = &mut hops[v as usize];
                if *slot == UNREACHED {
                    *slot = depth;
                    next.push(v);
                }
            }
        }
        std::mem::swap(&mut frontier, &mut next);
        next.clear();
    }
    Ok(HopMap {
        source,
        direction,
        cap,
        hops,
    })
}
