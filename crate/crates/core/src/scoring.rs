//! The thirteen community scoring functions.
//!
//! Every formula bottoms out in a small evaluator that takes plain integer
//! aggregates (member count, internal edges, boundary edges, ...). The sweep
//! machinery maintains those same aggregates incrementally and calls the same
//! evaluators, so a swept prefix scores bit-identically to scoring the
//! materialized set.
//!
//! Division-by-zero corners are pinned rather than left to NaN: a singleton
//! has internal density 0, a zero-volume set has conductance and normalized
//! cut 1 (worst), a member of degree zero contributes 0 to the ODF family,
//! and cut ratio of the full node set is 0.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{set_stats, CommunitySet, Graph, NodeId, NodeSet, SetStats};

/// Identifier for one scoring function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScoreId {
    InternalDensity,
    EdgesInside,
    AverageDegree,
    Fomd,
    Tpr,
    Expansion,
    CutRatio,
    Conductance,
    NormalizedCut,
    MaxOdf,
    AvgOdf,
    FlakeOdf,
    Modularity,
}

/// Structural family a score judges a community by.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScoreClass {
    /// Internal connectivity only.
    Internal,
    /// External (boundary) connectivity only.
    External,
    /// Internal and external connectivity combined.
    Combined,
    /// Deviation from a network null model.
    NetworkModel,
}

/// Which direction of raw values marks a better community.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    BetterHigh,
    BetterLow,
}

impl ScoreId {
    pub const ALL: [ScoreId; 13] = [
        ScoreId::InternalDensity,
        ScoreId::EdgesInside,
        ScoreId::AverageDegree,
        ScoreId::Fomd,
        ScoreId::Tpr,
        ScoreId::Expansion,
        ScoreId::CutRatio,
        ScoreId::Conductance,
        ScoreId::NormalizedCut,
        ScoreId::MaxOdf,
        ScoreId::AvgOdf,
        ScoreId::FlakeOdf,
        ScoreId::Modularity,
    ];

    pub fn class(self) -> ScoreClass {
        use ScoreId::*;
        match self {
            InternalDensity | EdgesInside | AverageDegree | Fomd | Tpr => ScoreClass::Internal,
            Expansion | CutRatio => ScoreClass::External,
            Conductance | NormalizedCut | MaxOdf | AvgOdf | FlakeOdf => ScoreClass::Combined,
            Modularity => ScoreClass::NetworkModel,
        }
    }

    pub fn orientation(self) -> Orientation {
        use ScoreId::*;
        match self {
            InternalDensity | EdgesInside | AverageDegree | Fomd | Tpr | Modularity => {
                Orientation::BetterHigh
            }
            Expansion | CutRatio | Conductance | NormalizedCut | MaxOdf | AvgOdf | FlakeOdf => {
                Orientation::BetterLow
            }
        }
    }

    /// Maps a raw value onto the shared lower-is-better axis.
    pub fn oriented(self, raw: f64) -> f64 {
        match self.orientation() {
            Orientation::BetterLow => raw,
            Orientation::BetterHigh => -raw,
        }
    }

    pub fn token(self) -> &'static str {
        use ScoreId::*;
        match self {
            InternalDensity => "internal-density",
            EdgesInside => "edges-inside",
            AverageDegree => "average-degree",
            Fomd => "fomd",
            Tpr => "tpr",
            Expansion => "expansion",
            CutRatio => "cut-ratio",
            Conductance => "conductance",
            NormalizedCut => "normalized-cut",
            MaxOdf => "max-odf",
            AvgOdf => "avg-odf",
            FlakeOdf => "flake-odf",
            Modularity => "modularity",
        }
    }

    pub fn from_token(tok: &str) -> Result<ScoreId> {
        ScoreId::ALL
            .into_iter()
            .find(|id| id.token() == tok)
            .ok_or_else(|| Error::UnknownScore(tok.to_string()))
    }
}

impl std::fmt::Display for ScoreId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.token())
    }
}

impl std::str::FromStr for ScoreId {
    type Err = Error;

    fn from_str(s: &str) -> Result<ScoreId> {
        ScoreId::from_token(s)
    }
}

// ---------------------------------------------------------------------------
// Formula evaluators over integer aggregates.

pub(crate) fn internal_density(n_s: usize, m_s: u64) -> f64 {
    if n_s < 2 {
        return 0.0;
    }
    let pairs = (n_s as u64 * (n_s as u64 - 1)) / 2;
    m_s as f64 / pairs as f64
}

pub(crate) fn edges_inside(m_s: u64) -> f64 {
    m_s as f64
}

pub(crate) fn average_degree(n_s: usize, m_s: u64) -> f64 {
    2.0 * m_s as f64 / n_s as f64
}

pub(crate) fn fomd(above_median: usize, n_s: usize) -> f64 {
    above_median as f64 / n_s as f64
}

pub(crate) fn tpr(in_triad: usize, n_s: usize) -> f64 {
    in_triad as f64 / n_s as f64
}

pub(crate) fn expansion(c_s: u64, n_s: usize) -> f64 {
    c_s as f64 / n_s as f64
}

pub(crate) fn cut_ratio(c_s: u64, n_s: usize, n: usize) -> f64 {
    if n_s == n {
        return 0.0;
    }
    c_s as f64 / (n_s as u64 * (n - n_s) as u64) as f64
}

pub(crate) fn conductance(c_s: u64, volume: u64) -> f64 {
    if volume == 0 {
        return 1.0;
    }
    c_s as f64 / volume as f64
}

pub(crate) fn normalized_cut(c_s: u64, volume: u64, m_s: u64, m: u64) -> f64 {
    if volume == 0 {
        return 1.0;
    }
    let rest = 2 * (m - m_s) + c_s;
    let second = if rest == 0 { 0.0 } else { c_s as f64 / rest as f64 };
    c_s as f64 / volume as f64 + second
}

pub(crate) fn max_odf(members: impl Iterator<Item = (u32, u32)>) -> f64 {
    let mut best = 0.0f64;
    for (int_deg, deg) in members {
        if deg > 0 {
            best = best.max((deg - int_deg) as f64 / deg as f64);
        }
    }
    best
}

pub(crate) fn avg_odf(members: impl Iterator<Item = (u32, u32)>, n_s: usize) -> f64 {
    let mut sum = 0.0f64;
    for (int_deg, deg) in members {
        if deg > 0 {
            sum += (deg - int_deg) as f64 / deg as f64;
        }
    }
    sum / n_s as f64
}

pub(crate) fn flake_odf(below_half: usize, n_s: usize) -> f64 {
    below_half as f64 / n_s as f64
}

/// A member counts toward FlakeODF when it has strictly fewer internal edges
/// than half its degree; exact halves do not count.
pub(crate) fn flake_condition(int_deg: u32, deg: u32) -> bool {
    2 * int_deg < deg
}

pub(crate) fn modularity(m_s: u64, volume: u64, sum_deg_sq: u64, m: u64) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let expected = (volume as f64 * volume as f64 - sum_deg_sq as f64) / (4.0 * m as f64);
    (m_s as f64 - expected) / 4.0
}

/// Counts the members that sit in at least one triangle whose three corners
/// all lie in `members` (sorted, duplicate-free).
pub(crate) fn triad_member_count(graph: &Graph, members: &[NodeId]) -> usize {
    let nbrs: Vec<Vec<NodeId>> = members
        .iter()
        .map(|&u| {
            graph
                .neighbors(u)
                .iter()
                .copied()
                .filter(|v| members.binary_search(v).is_ok())
                .collect()
        })
        .collect();
    let mut in_triad = vec![false; members.len()];
    for (i, &u) in members.iter().enumerate() {
        for &v in &nbrs[i] {
            if v <= u {
                continue;
            }
            let j = members.binary_search(&v).unwrap();
            // Triangles u < v < w via sorted-list intersection.
            let (mut a, mut b) = (0, 0);
            while a < nbrs[i].len() && b < nbrs[j].len() {
                let (x, y) = (nbrs[i][a], nbrs[j][b]);
                if x < y {
                    a += 1;
                } else if y < x {
                    b += 1;
                } else {
                    if x > v {
                        let k = members.binary_search(&x).unwrap();
                        in_triad[i] = true;
                        in_triad[j] = true;
                        in_triad[k] = true;
                    }
                    a += 1;
                    b += 1;
                }
            }
        }
    }
    in_triad.iter().filter(|&&t| t).count()
}

fn eval(graph: &Graph, set: &NodeSet, stats: &SetStats, triads: &mut Option<usize>, id: ScoreId) -> f64 {
    let m = graph.edge_count() as u64;
    match id {
        ScoreId::InternalDensity => internal_density(stats.n_s, stats.m_s),
        ScoreId::EdgesInside => edges_inside(stats.m_s),
        ScoreId::AverageDegree => average_degree(stats.n_s, stats.m_s),
        ScoreId::Fomd => {
            let median = graph.median_degree();
            let above = stats
                .internal_degrees
                .iter()
                .filter(|&&d| d as usize > median)
                .count();
            fomd(above, stats.n_s)
        }
        ScoreId::Tpr => {
            let count = *triads.get_or_insert_with(|| triad_member_count(graph, set.members()));
            tpr(count, stats.n_s)
        }
        ScoreId::Expansion => expansion(stats.c_s, stats.n_s),
        ScoreId::CutRatio => cut_ratio(stats.c_s, stats.n_s, graph.node_count()),
        ScoreId::Conductance => conductance(stats.c_s, stats.volume),
        ScoreId::NormalizedCut => normalized_cut(stats.c_s, stats.volume, stats.m_s, m),
        ScoreId::MaxOdf => max_odf(
            stats
                .internal_degrees
                .iter()
                .zip(&stats.total_degrees)
                .map(|(&i, &d)| (i, d)),
        ),
        ScoreId::AvgOdf => avg_odf(
            stats
                .internal_degrees
                .iter()
                .zip(&stats.total_degrees)
                .map(|(&i, &d)| (i, d)),
            stats.n_s,
        ),
        ScoreId::FlakeOdf => {
            let below = stats
                .internal_degrees
                .iter()
                .zip(&stats.total_degrees)
                .filter(|&(&i, &d)| flake_condition(i, d))
                .count();
            flake_odf(below, stats.n_s)
        }
        ScoreId::Modularity => {
            let sum_sq: u64 = stats.total_degrees.iter().map(|&d| d as u64 * d as u64).sum();
            modularity(stats.m_s, stats.volume, sum_sq, m)
        }
    }
}

/// Scores one community.
pub fn compute_score(graph: &Graph, set: &NodeSet, id: ScoreId) -> f64 {
    let stats = set_stats(graph, set);
    eval(graph, set, &stats, &mut None, id)
}

/// Community-by-score matrix in row-major order.
#[derive(Clone, Debug)]
pub struct ScoreMatrix {
    score_ids: Vec<ScoreId>,
    rows: usize,
    values: Vec<f64>,
}

impl ScoreMatrix {
    pub fn from_rows(score_ids: Vec<ScoreId>, rows: Vec<Vec<f64>>) -> ScoreMatrix {
        let n = rows.len();
        let mut values = Vec::with_capacity(n * score_ids.len());
        for row in rows {
            assert_eq!(row.len(), score_ids.len(), "row width mismatch");
            values.extend(row);
        }
        ScoreMatrix { score_ids, rows: n, values }
    }

    pub fn score_ids(&self) -> &[ScoreId] {
        &self.score_ids
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.score_ids.len() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let w = self.score_ids.len();
        &self.values[row * w..(row + 1) * w]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }
}

/// Scores every community against every requested function. Communities are
/// processed in parallel; the output ordering matches the input ordering
/// regardless of thread count.
pub fn score_all(graph: &Graph, communities: &CommunitySet, ids: &[ScoreId]) -> ScoreMatrix {
    let rows: Vec<Vec<f64>> = communities
        .communities
        .par_iter()
        .map(|set| {
            let stats = set_stats(graph, set);
            let mut triads = None;
            ids.iter().map(|&id| eval(graph, set, &stats, &mut triads, id)).collect()
        })
        .collect();
    ScoreMatrix::from_rows(ids.to_vec(), rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::g1;
    use crate::graph::Source;

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }

    #[test]
    fn triangle_community_on_g1() {
        let g = g1();
        let s = NodeSet::new(vec![0, 1, 2]);
        let expect = [
            (ScoreId::InternalDensity, 1.0),
            (ScoreId::EdgesInside, 3.0),
            (ScoreId::AverageDegree, 2.0),
            (ScoreId::Fomd, 0.0),
            (ScoreId::Tpr, 1.0),
            (ScoreId::Expansion, 1.0 / 3.0),
            (ScoreId::CutRatio, 1.0 / 9.0),
            (ScoreId::Conductance, 1.0 / 7.0),
            (ScoreId::NormalizedCut, 1.0 / 7.0 + 1.0 / 9.0),
            (ScoreId::MaxOdf, 1.0 / 3.0),
            (ScoreId::AvgOdf, 1.0 / 9.0),
            (ScoreId::FlakeOdf, 0.0),
            (ScoreId::Modularity, 13.0 / 28.0),
        ];
        for (id, want) in expect {
            close(compute_score(&g, &s, id), want);
        }
    }

    #[test]
    fn bridge_pair_on_g1() {
        let g = g1();
        let s = NodeSet::new(vec![2, 3]);
        close(compute_score(&g, &s, ScoreId::Conductance), 4.0 / 6.0);
        close(compute_score(&g, &s, ScoreId::InternalDensity), 1.0);
        close(compute_score(&g, &s, ScoreId::Tpr), 0.0);
        close(compute_score(&g, &s, ScoreId::MaxOdf), 2.0 / 3.0);
        close(compute_score(&g, &s, ScoreId::FlakeOdf), 1.0);
    }

    #[test]
    fn whole_graph_has_no_boundary() {
        let g = g1();
        let s = NodeSet::new((0..6).collect());
        close(compute_score(&g, &s, ScoreId::Conductance), 0.0);
        close(compute_score(&g, &s, ScoreId::NormalizedCut), 0.0);
        close(compute_score(&g, &s, ScoreId::CutRatio), 0.0);
        close(compute_score(&g, &s, ScoreId::Expansion), 0.0);
        close(compute_score(&g, &s, ScoreId::Tpr), 1.0);
    }

    #[test]
    fn isolated_nodes_hit_the_pinned_conventions() {
        let g = Graph::from_edges(3, &[(0, 1)]).unwrap();
        let s = NodeSet::new(vec![2]);
        close(compute_score(&g, &s, ScoreId::Conductance), 1.0);
        close(compute_score(&g, &s, ScoreId::NormalizedCut), 1.0);
        close(compute_score(&g, &s, ScoreId::InternalDensity), 0.0);
        close(compute_score(&g, &s, ScoreId::MaxOdf), 0.0);
        close(compute_score(&g, &s, ScoreId::AvgOdf), 0.0);
        close(compute_score(&g, &s, ScoreId::FlakeOdf), 0.0);
        close(compute_score(&g, &s, ScoreId::Modularity), 0.0);
        for id in ScoreId::ALL {
            assert!(compute_score(&g, &s, id).is_finite());
        }
    }

    #[test]
    fn boundary_growth_cannot_improve_conductance() {
        let g = g1();
        let base = compute_score(&g, &NodeSet::new(vec![0, 1, 2]), ScoreId::Conductance);
        // node 4 has no edge into {0,1,2}: boundary and volume both grow
        let grown = compute_score(&g, &NodeSet::new(vec![0, 1, 2, 4]), ScoreId::Conductance);
        assert!(grown >= base);
        close(grown, 3.0 / 9.0);
    }

    #[test]
    fn orientation_registry() {
        use Orientation::*;
        let low = [
            ScoreId::Expansion,
            ScoreId::CutRatio,
            ScoreId::Conductance,
            ScoreId::NormalizedCut,
            ScoreId::MaxOdf,
            ScoreId::AvgOdf,
            ScoreId::FlakeOdf,
        ];
        for id in ScoreId::ALL {
            let want = if low.contains(&id) { BetterLow } else { BetterHigh };
            assert_eq!(id.orientation(), want, "{id}");
        }
        close(ScoreId::Conductance.oriented(0.25), 0.25);
        close(ScoreId::Tpr.oriented(0.25), -0.25);
    }

    #[test]
    fn tokens_round_trip() {
        for id in ScoreId::ALL {
            assert_eq!(ScoreId::from_token(id.token()).unwrap(), id);
        }
        assert!(ScoreId::from_token("triangle-rate").is_err());
    }

    #[test]
    fn score_all_matches_single_calls() {
        let g = g1();
        let cs = CommunitySet::new(
            vec![NodeSet::new(vec![0, 1, 2]), NodeSet::new(vec![3, 4, 5]), NodeSet::new(vec![2, 3])],
            Source::GroundTruth,
        );
        let matrix = score_all(&g, &cs, &ScoreId::ALL);
        assert_eq!(matrix.rows(), 3);
        for (r, set) in cs.communities.iter().enumerate() {
            for (c, &id) in matrix.score_ids().iter().enumerate() {
                assert_eq!(matrix.get(r, c), compute_score(&g, set, id), "{id}");
            }
        }
    }

    #[test]
    fn fomd_counts_strictly_above_median() {
        // Star plus pendant: lower median of degrees [5,1,1,1,1,2,1] is 1;
        // only nodes with internal degree > 1 count.
        let g = Graph::from_edges(7, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (5, 6)]).unwrap();
        assert_eq!(g.median_degree(), 1);
        let s = NodeSet::new(vec![0, 1, 2]);
        // internal degrees: node 0 -> 2, nodes 1,2 -> 1 (ties excluded)
        close(compute_score(&g, &s, ScoreId::Fomd), 1.0 / 3.0);
    }
}
