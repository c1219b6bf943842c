//! Undirected graph storage plus node-set bookkeeping.
//!
//! Graphs are simple (no self-loops, no parallel edges) and immutable once
//! built. Adjacency is compressed sparse row with each list sorted
//! ascending, which the triangle and sweep passes rely on for merge-based
//! intersection. External node ids from input files are remapped to
//! contiguous internal ids; the mapping is kept so results can be reported
//! in the caller's id space.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

pub type NodeId = usize;

/// Immutable simple undirected graph in CSR form.
#[derive(Clone, Debug)]
pub struct Graph {
    offsets: Vec<usize>,
    adjacency: Vec<NodeId>,
    labels: Vec<u64>,
    label_index: HashMap<u64, NodeId>,
    median_degree: usize,
}

/// What the edge-list loader dropped while building the graph.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub self_loops_dropped: usize,
    pub duplicate_edges_dropped: usize,
}

impl Graph {
    /// Builds a graph over internal ids `0..node_count`. Self-loops and
    /// duplicate edges are dropped silently; ids must be in range.
    pub fn from_edges(node_count: usize, edges: &[(NodeId, NodeId)]) -> Result<Graph> {
        if node_count == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut list = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= node_count {
                return Err(Error::NodeOutOfRange(u, node_count));
            }
            if v >= node_count {
                return Err(Error::NodeOutOfRange(v, node_count));
            }
            if u != v {
                list.push((u.min(v), u.max(v)));
            }
        }
        let labels = (0..node_count as u64).collect();
        Ok(Self::build(node_count, list, labels).0)
    }

    /// Parses a whitespace-separated edge list (`u v` per line, `#` starts a
    /// comment line). External ids are remapped in order of first appearance.
    pub fn load_edge_list<R: BufRead>(reader: R) -> Result<(Graph, LoadReport)> {
        let mut labels: Vec<u64> = Vec::new();
        let mut index: HashMap<u64, NodeId> = HashMap::new();
        let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
        let mut report = LoadReport::default();
        let intern = |ext: u64, labels: &mut Vec<u64>, index: &mut HashMap<u64, NodeId>| {
            *index.entry(ext).or_insert_with(|| {
                labels.push(ext);
                labels.len() - 1
            })
        };
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let text = line.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let mut it = text.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<u64> {
                tok.ok_or_else(|| Error::Parse {
                    line: lineno + 1,
                    msg: "expected two node ids".into(),
                })?
                .parse()
                .map_err(|e| Error::Parse {
                    line: lineno + 1,
                    msg: format!("{e}"),
                })
            };
            let a = parse(it.next())?;
            let b = parse(it.next())?;
            if a == b {
                report.self_loops_dropped += 1;
                // still a sighting: the node exists even if the loop is dropped
                intern(a, &mut labels, &mut index);
                continue;
            }
            let u = intern(a, &mut labels, &mut index);
            let v = intern(b, &mut labels, &mut index);
            edges.push((u.min(v), u.max(v)));
        }
        if labels.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let n = labels.len();
        let (graph, dups) = Self::build(n, edges, labels);
        report.duplicate_edges_dropped = dups;
        Ok((graph, report))
    }

    fn build(node_count: usize, mut edges: Vec<(NodeId, NodeId)>, labels: Vec<u64>) -> (Graph, usize) {
        edges.sort_unstable();
        let before = edges.len();
        edges.dedup();
        let duplicates = before - edges.len();

        let mut offsets = vec![0usize; node_count + 1];
        for &(u, v) in &edges {
            offsets[u + 1] += 1;
            offsets[v + 1] += 1;
        }
        for i in 0..node_count {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor: Vec<usize> = offsets[..node_count].to_vec();
        let mut adjacency = vec![0 as NodeId; edges.len() * 2];
        // One pass over the (min, max)-sorted edges leaves every list sorted:
        // all of a node's smaller neighbors arrive before its larger ones.
        for &(u, v) in &edges {
            adjacency[cursor[u]] = v;
            cursor[u] += 1;
            adjacency[cursor[v]] = u;
            cursor[v] += 1;
        }

        let mut degs: Vec<usize> = (0..node_count).map(|u| offsets[u + 1] - offsets[u]).collect();
        let median_degree = lower_median(&mut degs);
        let label_index = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        (
            Graph { offsets, adjacency, labels, label_index, median_degree },
            duplicates,
        )
    }

    /// Writes the graph back out as one `u v` line per edge, in external ids.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for u in 0..self.node_count() {
            for &v in self.neighbors(u) {
                if v > u {
                    writeln!(w, "{} {}", self.labels[u], self.labels[v])?;
                }
            }
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.len() / 2
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.adjacency[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        let (a, b) = if self.degree(u) <= self.degree(v) { (u, v) } else { (v, u) };
        self.neighbors(a).binary_search(&b).is_ok()
    }

    /// Lower median of the degree multiset (even count picks the smaller of
    /// the two middle values).
    pub fn median_degree(&self) -> usize {
        self.median_degree
    }

    pub fn external_id(&self, u: NodeId) -> u64 {
        self.labels[u]
    }

    pub fn internal_id(&self, external: u64) -> Option<NodeId> {
        self.label_index.get(&external).copied()
    }
}

fn lower_median(values: &mut [usize]) -> usize {
    values.sort_unstable();
    values[(values.len() - 1) / 2]
}

/// Non-empty set of member nodes, kept sorted and duplicate-free.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeSet {
    members: Vec<NodeId>,
    pub label: Option<String>,
}

impl NodeSet {
    pub fn new(mut members: Vec<NodeId>) -> NodeSet {
        members.sort_unstable();
        members.dedup();
        assert!(!members.is_empty(), "node set must not be empty");
        NodeSet { members, label: None }
    }

    pub fn with_label(members: Vec<NodeId>, label: impl Into<String>) -> NodeSet {
        let mut set = Self::new(members);
        set.label = Some(label.into());
        set
    }

    pub fn members(&self) -> &[NodeId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, u: NodeId) -> bool {
        self.members.binary_search(&u).is_ok()
    }

    pub fn validate(&self, graph: &Graph) -> Result<()> {
        match self.members.last() {
            Some(&top) if top >= graph.node_count() => {
                Err(Error::NodeOutOfRange(top, graph.node_count()))
            }
            _ => Ok(()),
        }
    }
}

/// Where a collection of communities came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    GroundTruth,
    Detected,
    Perturbed,
}

/// A list of communities sharing one provenance.
#[derive(Clone, Debug)]
pub struct CommunitySet {
    pub communities: Vec<NodeSet>,
    pub source: Source,
}

impl CommunitySet {
    pub fn new(communities: Vec<NodeSet>, source: Source) -> CommunitySet {
        CommunitySet { communities, source }
    }

    pub fn len(&self) -> usize {
        self.communities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.communities.is_empty()
    }
}

/// What the community loader skipped.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CommunityLoadReport {
    pub unknown_ids_dropped: usize,
    pub groups_dropped: usize,
}

/// Parses one community per line (whitespace-separated external node ids).
/// Ids absent from the graph are dropped and counted; lines left without any
/// known id are dropped as whole groups.
pub fn load_communities<R: BufRead>(
    reader: R,
    graph: &Graph,
) -> Result<(CommunitySet, CommunityLoadReport)> {
    let mut report = CommunityLoadReport::default();
    let mut communities = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let mut members = Vec::new();
        for tok in text.split_whitespace() {
            let ext: u64 = tok.parse().map_err(|e| Error::Parse {
                line: lineno + 1,
                msg: format!("{e}"),
            })?;
            match graph.internal_id(ext) {
                Some(u) => members.push(u),
                None => report.unknown_ids_dropped += 1,
            }
        }
        if members.is_empty() {
            report.groups_dropped += 1;
        } else {
            communities.push(NodeSet::new(members));
        }
    }
    Ok((CommunitySet::new(communities, Source::GroundTruth), report))
}

/// Size, internal edges, boundary edges and volume of one node set.
///
/// `internal_degrees` and `total_degrees` are aligned with the sorted
/// member order of the set they were computed from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetStats {
    pub n_s: usize,
    pub m_s: u64,
    pub c_s: u64,
    pub volume: u64,
    pub internal_degrees: Vec<u32>,
    pub total_degrees: Vec<u32>,
}

pub fn set_stats(graph: &Graph, set: &NodeSet) -> SetStats {
    let members = set.members();
    let mut internal_degrees = Vec::with_capacity(members.len());
    let mut total_degrees = Vec::with_capacity(members.len());
    let mut volume = 0u64;
    let mut internal_sum = 0u64;
    for &u in members {
        let mut int_deg = 0u32;
        for &v in graph.neighbors(u) {
            if set.contains(v) {
                int_deg += 1;
            }
        }
        internal_degrees.push(int_deg);
        total_degrees.push(graph.degree(u) as u32);
        volume += graph.degree(u) as u64;
        internal_sum += int_deg as u64;
    }
    let stats = SetStats {
        n_s: members.len(),
        m_s: internal_sum / 2,
        c_s: volume - internal_sum,
        volume,
        internal_degrees,
        total_degrees,
    };
    debug_assert_eq!(stats.volume, 2 * stats.m_s + stats.c_s);
    stats
}

/// The subgraph spanned by a node set. Local ids follow the sorted member
/// order; `parent_ids[local]` maps back to the parent's internal ids, and
/// external labels are carried over from the parent.
#[derive(Clone, Debug)]
pub struct InducedSubgraph {
    pub graph: Graph,
    pub parent_ids: Vec<NodeId>,
}

pub fn induced_subgraph(graph: &Graph, set: &NodeSet) -> InducedSubgraph {
    let members = set.members();
    let mut edges = Vec::new();
    for (local, &u) in members.iter().enumerate() {
        for &v in graph.neighbors(u) {
            if v > u {
                if let Ok(w) = members.binary_search(&v) {
                    edges.push((local, w));
                }
            }
        }
    }
    let labels = members.iter().map(|&u| graph.external_id(u)).collect();
    let (sub, _) = Graph::build(members.len(), edges, labels);
    InducedSubgraph { graph: sub, parent_ids: members.to_vec() }
}

/// Connected components of the subgraph spanned by `members`, each sorted,
/// ordered by smallest member.
pub fn components_within(graph: &Graph, members: &[NodeId]) -> Vec<Vec<NodeId>> {
    let mut sorted = members.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut seen = vec![false; sorted.len()];
    let mut components = Vec::new();
    for start in 0..sorted.len() {
        if seen[start] {
            continue;
        }
        let mut queue = vec![start];
        seen[start] = true;
        let mut comp = Vec::new();
        while let Some(i) = queue.pop() {
            comp.push(sorted[i]);
            for &v in graph.neighbors(sorted[i]) {
                if let Ok(j) = sorted.binary_search(&v) {
                    if !seen[j] {
                        seen[j] = true;
                        queue.push(j);
                    }
                }
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }
    components
}

pub fn is_connected_set(graph: &Graph, members: &[NodeId]) -> bool {
    components_within(graph, members).len() == 1
}

/// Splits every community into the connected components of its induced
/// subgraph, keeping the original group order (components within a group
/// ordered by smallest member).
pub fn preprocess_communities(graph: &Graph, communities: &CommunitySet) -> CommunitySet {
    let mut out = Vec::with_capacity(communities.len());
    for set in &communities.communities {
        for comp in components_within(graph, set.members()) {
            let mut piece = NodeSet::new(comp);
            piece.label = set.label.clone();
            out.push(piece);
        }
    }
    CommunitySet::new(out, communities.source)
}


#[cfg(test)]
mod tests {
    use super::fixtures::g1;
    use super::*;

    #[test]
    fn g1_shape() {
        let g = g1();
        assert_eq!(g.node_count(), 6);
        assert_eq!(g.edge_count(), 7);
        let degs: Vec<usize> = (0..6).map(|u| g.degree(u)).collect();
        assert_eq!(degs, vec![2, 2, 3, 3, 2, 2]);
        assert_eq!(g.neighbors(2), &[0, 1, 3]);
        assert_eq!(g.neighbors(3), &[2, 4, 5]);
        assert!(g.has_edge(2, 3));
        assert!(!g.has_edge(0, 5));
        let degree_sum: usize = (0..6).map(|u| g.degree(u)).sum();
        assert_eq!(degree_sum, 2 * g.edge_count());
    }

    #[test]
    fn loader_drops_loops_and_duplicates() {
        let text = "# toy\n0 1\n1 0\n2 2\n0 2\n\n1 2\n";
        let (g, report) = Graph::load_edge_list(text.as_bytes()).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(report.self_loops_dropped, 1);
        assert_eq!(report.duplicate_edges_dropped, 1);
    }

    #[test]
    fn loader_remaps_sparse_ids() {
        let text = "10 700\n700 3\n";
        let (g, _) = Graph::load_edge_list(text.as_bytes()).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.external_id(0), 10);
        assert_eq!(g.external_id(1), 700);
        assert_eq!(g.internal_id(3), Some(2));
        assert_eq!(g.internal_id(11), None);
    }

    #[test]
    fn loader_rejects_empty_and_garbage() {
        assert!(matches!(
            Graph::load_edge_list("# nothing\n".as_bytes()),
            Err(Error::EmptyGraph)
        ));
        match Graph::load_edge_list("0 1\nx y\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        match Graph::load_edge_list("0\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn median_is_lower_median() {
        assert_eq!(lower_median(&mut [1, 2, 2, 3]), 2);
        assert_eq!(lower_median(&mut [1, 3]), 1);
        assert_eq!(lower_median(&mut [5]), 5);
        assert_eq!(g1().median_degree(), 2);
    }

    #[test]
    fn stats_on_g1() {
        let g = g1();
        let s = set_stats(&g, &NodeSet::new(vec![0, 1, 2]));
        assert_eq!((s.n_s, s.m_s, s.c_s, s.volume), (3, 3, 1, 7));
        assert_eq!(s.internal_degrees, vec![2, 2, 2]);
        assert_eq!(s.total_degrees, vec![2, 2, 3]);

        let single = set_stats(&g, &NodeSet::new(vec![0]));
        assert_eq!((single.n_s, single.m_s, single.c_s, single.volume), (1, 0, 2, 2));

        let whole = set_stats(&g, &NodeSet::new((0..6).collect()));
        assert_eq!((whole.m_s, whole.c_s, whole.volume), (7, 0, 14));
    }

    #[test]
    fn induced_subgraphs() {
        let g = g1();
        let sub = induced_subgraph(&g, &NodeSet::new(vec![0, 1, 2, 3]));
        assert_eq!(sub.graph.node_count(), 4);
        assert_eq!(sub.graph.edge_count(), 4);
        assert_eq!(sub.parent_ids, vec![0, 1, 2, 3]);

        let sparse = induced_subgraph(&g, &NodeSet::new(vec![0, 3]));
        assert_eq!(sparse.graph.node_count(), 2);
        assert_eq!(sparse.graph.edge_count(), 0);
    }

    #[test]
    fn preprocessing_splits_disconnected_groups() {
        let g = g1();
        let raw = CommunitySet::new(vec![NodeSet::new(vec![0, 1, 4, 5])], Source::GroundTruth);
        let cooked = preprocess_communities(&g, &raw);
        assert_eq!(cooked.len(), 2);
        assert_eq!(cooked.communities[0].members(), &[0, 1]);
        assert_eq!(cooked.communities[1].members(), &[4, 5]);

        let connected = CommunitySet::new(vec![NodeSet::new(vec![0, 1, 2])], Source::GroundTruth);
        assert_eq!(preprocess_communities(&g, &connected).len(), 1);
    }

    #[test]
    fn community_loader_reports_drops() {
        let g = g1(); // external ids 0..6
        let text = "0 1 2\n7 8\n3 4 9\n";
        let (cs, report) = load_communities(text.as_bytes(), &g).unwrap();
        assert_eq!(cs.len(), 2);
        assert_eq!(cs.communities[1].members(), &[3, 4]);
        assert_eq!(report.unknown_ids_dropped, 3);
        assert_eq!(report.groups_dropped, 1);
    }

    #[test]
    fn edge_list_round_trip() {
        let g = g1();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let (back, report) = Graph::load_edge_list(&buf[..]).unwrap();
        assert_eq!(report, LoadReport::default());
        assert_eq!(back.node_count(), g.node_count());
        assert_eq!(back.edge_count(), g.edge_count());
        for u in 0..g.node_count() {
            for &v in g.neighbors(u) {
                let bu = back.internal_id(g.external_id(u)).unwrap();
                let bv = back.internal_id(g.external_id(v)).unwrap();
                assert!(back.has_edge(bu, bv));
            }
        }
    }
}
