//! Community goodness metrics: separability, density, cohesiveness and the
//! induced clustering coefficient. All four read higher-is-better.
//!
//! Cohesiveness is the hardest internal cut of the community's induced
//! subgraph, measured as cut size over the smaller side's volume. The exact
//! form enumerates all 2^(|S|-1) - 1 bipartitions (bounded to 20 members);
//! the approximate form sweeps personalized-PageRank orderings inside the
//! subgraph from a handful of high-degree seeds and upper-bounds the exact
//! value with a concrete witness cut.

use crate::detect::{approximate_ppr, sweep_order, DEFAULT_EPSILON, DEFAULT_TELEPORT};
use crate::error::{Error, Result};
use crate::graph::{induced_subgraph, set_stats, Graph, NodeId, NodeSet};
use crate::scoring;

/// Identifier for one goodness metric.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GoodnessId {
    Separability,
    Density,
    Cohesiveness,
    ClusteringCoefficient,
}

impl GoodnessId {
    pub const ALL: [GoodnessId; 4] = [
        GoodnessId::Separability,
        GoodnessId::Density,
        GoodnessId::Cohesiveness,
        GoodnessId::ClusteringCoefficient,
    ];

    pub fn token(self) -> &'static str {
        match self {
            GoodnessId::Separability => "separability",
            GoodnessId::Density => "density",
            GoodnessId::Cohesiveness => "cohesiveness",
            GoodnessId::ClusteringCoefficient => "ccf",
        }
    }

    pub fn from_token(tok: &str) -> Result<GoodnessId> {
        GoodnessId::ALL
            .into_iter()
            .find(|id| id.token() == tok)
            .ok_or_else(|| Error::UnknownGoodness(tok.to_string()))
    }
}

impl std::fmt::Display for GoodnessId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.token())
    }
}

impl std::str::FromStr for GoodnessId {
    type Err = Error;

    fn from_str(s: &str) -> Result<GoodnessId> {
        GoodnessId::from_token(s)
    }
}

/// How cohesiveness is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CohesivenessMode {
    /// Exhaustive over all internal bipartitions; limited to 20 members.
    Exact,
    /// PageRank sweeps from up to eight high-degree seeds; an upper bound.
    Approx,
}

/// Largest member count the exact cut enumeration accepts.
pub const EXACT_CUT_LIMIT: usize = 20;
/// Seeds used by the approximate cohesiveness sweep.
pub const APPROX_SEEDS: usize = 8;

/// Ratio of internal to boundary edges; infinite for a set without boundary.
pub fn separability(graph: &Graph, set: &NodeSet) -> f64 {
    let stats = set_stats(graph, set);
    if stats.c_s == 0 {
        f64::INFINITY
    } else {
        stats.m_s as f64 / stats.c_s as f64
    }
}

/// Fraction of possible internal edges present (0 for singletons).
pub fn density(graph: &Graph, set: &NodeSet) -> f64 {
    let stats = set_stats(graph, set);
    scoring::internal_density(stats.n_s, stats.m_s)
}

/// Mean local clustering coefficient of the induced subgraph; members with
/// fewer than two internal neighbors contribute 0.
pub fn clustering_coefficient(graph: &Graph, set: &NodeSet) -> f64 {
    let h = induced_subgraph(graph, set).graph;
    let k = h.node_count();
    let mut sum = 0.0;
    for v in 0..k {
        let d = h.degree(v);
        if d < 2 {
            continue;
        }
        let mut closed_twice = 0u64;
        for &w in h.neighbors(v) {
            closed_twice += intersection_size(h.neighbors(v), h.neighbors(w));
        }
        let pairs = (d as u64 * (d as u64 - 1)) / 2;
        sum += (closed_twice / 2) as f64 / pairs as f64;
    }
    sum / k as f64
}

fn intersection_size(a: &[NodeId], b: &[NodeId]) -> u64 {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        if a[i] < b[j] {
            i += 1;
        } else if b[j] < a[i] {
            j += 1;
        } else {
            count += 1;
            i += 1;
            j += 1;
        }
    }
    count
}

/// Worst-cut internal conductance of the community. Sets with fewer than two
/// members or a disconnected interior score 0.
pub fn cohesiveness(graph: &Graph, set: &NodeSet, mode: CohesivenessMode) -> Result<f64> {
    match mode {
        CohesivenessMode::Exact => {
            if set.len() > EXACT_CUT_LIMIT {
                return Err(Error::SetTooLarge { size: set.len(), max: EXACT_CUT_LIMIT });
            }
            let h = induced_subgraph(graph, set).graph;
            if set.len() < 2 || !connected(&h) {
                return Ok(0.0);
            }
            Ok(exact_min_cut_conductance(&h))
        }
        CohesivenessMode::Approx => {
            Ok(cohesiveness_approx_witness(graph, set)?.map_or(0.0, |w| w.value))
        }
    }
}

/// A concrete internal cut and its min-side conductance.
#[derive(Clone, Debug)]
pub struct CutWitness {
    pub value: f64,
    /// One side of the cut, in parent-graph node ids.
    pub side: Vec<NodeId>,
}

/// Approximate cohesiveness with the cut that realized it. `None` marks the
/// degenerate cases (fewer than two members or disconnected interior) that
/// score 0 by convention.
pub fn cohesiveness_approx_witness(graph: &Graph, set: &NodeSet) -> Result<Option<CutWitness>> {
    let sub = induced_subgraph(graph, set);
    let h = &sub.graph;
    let k = h.node_count();
    if k < 2 || !connected(h) {
        return Ok(None);
    }
    let vol_h: u64 = (0..k).map(|v| h.degree(v) as u64).sum();

    // highest internal degree first, ties toward the smaller id
    let mut by_degree: Vec<NodeId> = (0..k).collect();
    by_degree.sort_unstable_by(|&a, &b| h.degree(b).cmp(&h.degree(a)).then(a.cmp(&b)));

    let mut best: Option<(f64, usize, Vec<NodeId>)> = None;
    for &seed in by_degree.iter().take(APPROX_SEEDS) {
        let ppr = approximate_ppr(h, seed, DEFAULT_TELEPORT, DEFAULT_EPSILON)?;
        let mut order = vec![seed];
        order.extend(sweep_order(h, &ppr).into_iter().filter(|&u| u != seed));

        let mut in_prefix = vec![false; k];
        let mut vol_a = 0u64;
        let mut cut = 0i64;
        for (idx, &v) in order.iter().enumerate() {
            let d = h.degree(v) as i64;
            let inside = h.neighbors(v).iter().filter(|&&w| in_prefix[w]).count() as i64;
            cut += d - 2 * inside;
            vol_a += d as u64;
            in_prefix[v] = true;
            let prefix_len = idx + 1;
            if prefix_len == k {
                break; // not a cut
            }
            let vol_b = vol_h - vol_a;
            let phi = cut as f64 / vol_a.min(vol_b) as f64;
            if best.as_ref().map_or(true, |b| phi < b.0) {
                best = Some((phi, prefix_len, order[..prefix_len].to_vec()));
            }
        }
    }
    let (value, _, side_local) = best.expect("connected subgraph of size >= 2 has a cut");
    let side = side_local.into_iter().map(|v| sub.parent_ids[v]).collect();
    Ok(Some(CutWitness { value, side }))
}

/// Min-side conductance of the cut (`side`, rest) inside the subgraph induced
/// by `set`. Used to check witnesses independently of the sweep bookkeeping.
pub fn internal_cut_conductance(graph: &Graph, set: &NodeSet, side: &[NodeId]) -> f64 {
    let sub = induced_subgraph(graph, set);
    let h = &sub.graph;
    let in_side: Vec<bool> = {
        let mut mask = vec![false; h.node_count()];
        for &p in side {
            let local = sub.parent_ids.binary_search(&p).expect("side node outside set");
            mask[local] = true;
        }
        mask
    };
    let mut cut = 0u64;
    let mut vol_a = 0u64;
    let mut vol_b = 0u64;
    for v in 0..h.node_count() {
        if in_side[v] {
            vol_a += h.degree(v) as u64;
            cut += h.neighbors(v).iter().filter(|&&w| !in_side[w]).count() as u64;
        } else {
            vol_b += h.degree(v) as u64;
        }
    }
    cut as f64 / vol_a.min(vol_b) as f64
}

fn connected(h: &Graph) -> bool {
    let k = h.node_count();
    let mut seen = vec![false; k];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in h.neighbors(v) {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == k
}

/// Minimum over all bipartitions of cut size over smaller-side volume,
/// walking the bipartitions in Gray-code order so each step flips one node.
fn exact_min_cut_conductance(h: &Graph) -> f64 {
    let k = h.node_count();
    let vol_h: u64 = (0..k).map(|v| h.degree(v) as u64).sum();
    let mut in_a = vec![false; k];
    let mut vol_a = 0u64;
    let mut cut = 0i64;
    let mut best = f64::INFINITY;
    let mut prev_gray = 0u64;
    // node k-1 stays on the fixed side, so each unordered cut appears once
    for i in 1..(1u64 << (k - 1)) {
        let gray = i ^ (i >> 1);
        let flip = (gray ^ prev_gray).trailing_zeros() as usize;
        prev_gray = gray;
        let d = h.degree(flip) as i64;
        let inside = h.neighbors(flip).iter().filter(|&&w| in_a[w]).count() as i64;
        if in_a[flip] {
            in_a[flip] = false;
            vol_a -= d as u64;
            cut -= d - 2 * inside;
        } else {
            in_a[flip] = true;
            vol_a += d as u64;
            cut += d - 2 * inside;
        }
        let vol_b = vol_h - vol_a;
        let phi = cut as f64 / vol_a.min(vol_b) as f64;
        if phi < best {
            best = phi;
        }
    }
    best
}

/// Evaluates one goodness metric.
pub fn compute_goodness(
    graph: &Graph,
    set: &NodeSet,
    id: GoodnessId,
    mode: CohesivenessMode,
) -> Result<f64> {
    match id {
        GoodnessId::Separability => Ok(separability(graph, set)),
        GoodnessId::Density => Ok(density(graph, set)),
        GoodnessId::Cohesiveness => cohesiveness(graph, set, mode),
        GoodnessId::ClusteringCoefficient => Ok(clustering_coefficient(graph, set)),
    }
}
