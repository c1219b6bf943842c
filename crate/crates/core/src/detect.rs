//! Seed-anchored community detection: approximate personalized PageRank,
//! ordered sweeps, and local-minimum extraction from sweep curves.
//!
//! The walk is the lazy variant (probability 1/2 of staying put), pushed
//! until every residual drops below `epsilon * degree`. Sweep curves store
//! values on the shared lower-is-better axis so one minimum rule serves all
//! scores; curves over aggregates that can go non-positive are shifted before
//! the multiplicative confirmation test, which preserves argmins.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, NodeSet};
use crate::scoring::{self, ScoreId};

/// Teleport probability of the personalized walk.
pub const DEFAULT_TELEPORT: f64 = 0.15;
/// Residual threshold per unit of degree.
pub const DEFAULT_EPSILON: f64 = 1e-5;
/// A candidate minimum is confirmed once the curve rises above
/// `DEFAULT_CONFIRMATION` times its value.
pub const DEFAULT_CONFIRMATION: f64 = 1.2;

/// Knobs for the detection pipeline.
#[derive(Clone, Copy, Debug)]
pub struct DetectOptions {
    pub teleport: f64,
    pub epsilon: f64,
    pub confirmation: f64,
}

impl Default for DetectOptions {
    fn default() -> Self {
        DetectOptions {
            teleport: DEFAULT_TELEPORT,
            epsilon: DEFAULT_EPSILON,
            confirmation: DEFAULT_CONFIRMATION,
        }
    }
}

/// Sparse approximate personalized PageRank vector.
#[derive(Clone, Debug)]
pub struct PprVector {
    pub seed: NodeId,
    pub teleport: f64,
    pub epsilon: f64,
    entries: Vec<(NodeId, f64)>,
    pushes: usize,
}

impl PprVector {
    /// Support entries sorted by node id; every score is positive.
    pub fn entries(&self) -> &[(NodeId, f64)] {
        &self.entries
    }

    pub fn score(&self, u: NodeId) -> f64 {
        match self.entries.binary_search_by_key(&u, |e| e.0) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0.0,
        }
    }

    pub fn support(&self) -> usize {
        self.entries.len()
    }

    /// Total approximated mass; at most 1.
    pub fn mass(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Number of push operations spent building the vector.
    pub fn pushes(&self) -> usize {
        self.pushes
    }
}

/// Runs the push walk from `seed` until all residuals fall below
/// `epsilon * degree`. An isolated seed keeps all mass on itself.
pub fn approximate_ppr(
    graph: &Graph,
    seed: NodeId,
    teleport: f64,
    epsilon: f64,
) -> Result<PprVector> {
    if seed >= graph.node_count() {
        return Err(Error::NodeOutOfRange(seed, graph.node_count()));
    }
    if !(teleport > 0.0 && teleport < 1.0) {
        return Err(Error::BadTeleport(teleport));
    }
    if !(epsilon > 0.0) {
        return Err(Error::BadEpsilon(epsilon));
    }

    let mut mass: HashMap<NodeId, f64> = HashMap::new();
    let mut residual: HashMap<NodeId, f64> = HashMap::new();
    let mut queued: HashMap<NodeId, bool> = HashMap::new();
    let mut queue: VecDeque<NodeId> = VecDeque::new();
    residual.insert(seed, 1.0);
    queue.push_back(seed);
    queued.insert(seed, true);
    let mut pushes = 0usize;

    while let Some(u) = queue.pop_front() {
        queued.insert(u, false);
        let d = graph.degree(u);
        let r_u = residual.get(&u).copied().unwrap_or(0.0);
        if d == 0 {
            // nowhere to spread: absorb outright
            if r_u > 0.0 {
                *mass.entry(u).or_insert(0.0) += r_u;
                residual.insert(u, 0.0);
                pushes += 1;
            }
            continue;
        }
        let threshold = epsilon * d as f64;
        if r_u < threshold {
            continue; // stale queue entry
        }
        pushes += 1;
        *mass.entry(u).or_insert(0.0) += teleport * r_u;
        let kept = (1.0 - teleport) * r_u * 0.5;
        residual.insert(u, kept);
        let share = kept / d as f64;
        for &v in graph.neighbors(u) {
            let r_v = residual.entry(v).or_insert(0.0);
            *r_v += share;
            if *r_v >= epsilon * graph.degree(v) as f64 && !queued.get(&v).copied().unwrap_or(false)
            {
                queue.push_back(v);
                queued.insert(v, true);
            }
        }
        if kept >= threshold && !queued.get(&u).copied().unwrap_or(false) {
            queue.push_back(u);
            queued.insert(u, true);
        }
    }

    let mut entries: Vec<(NodeId, f64)> = mass.into_iter().filter(|e| e.1 > 0.0).collect();
    entries.sort_unstable_by_key(|e| e.0);
    Ok(PprVector { seed, teleport, epsilon, entries, pushes })
}

/// Support nodes ordered by descending degree-normalized mass, ties by
/// ascending node id.
pub fn sweep_order(graph: &Graph, ppr: &PprVector) -> Vec<NodeId> {
    let mut ranked: Vec<(f64, NodeId)> = ppr
        .entries()
        .iter()
        .map(|&(u, p)| {
            let d = graph.degree(u);
            let ratio = if d == 0 { f64::INFINITY } else { p / d as f64 };
            (ratio, u)
        })
        .collect();
    ranked.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    ranked.into_iter().map(|(_, u)| u).collect()
}

/// Score of every prefix of a node ordering, on the lower-is-better axis.
#[derive(Clone, Debug)]
pub struct SweepCurve {
    score_id: ScoreId,
    order: Vec<NodeId>,
    values: Vec<f64>,
    boundary_free: Vec<bool>,
    graph_nodes: usize,
}

impl SweepCurve {
    pub fn score_id(&self) -> ScoreId {
        self.score_id
    }

    pub fn order(&self) -> &[NodeId] {
        &self.order
    }

    /// Oriented per-prefix values; `values()[k-1]` belongs to the k-prefix.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn prefix(&self, k: usize) -> &[NodeId] {
        &self.order[..k]
    }

    /// True when the k-prefix has no boundary edge (its conductance-style
    /// values are vacuously perfect).
    pub fn boundary_free(&self, k: usize) -> bool {
        self.boundary_free[k - 1]
    }

    /// A boundary-free prefix that swallows the whole graph says nothing
    /// about community structure; it is skipped by minimum selection.
    pub fn is_vacuous(&self, k: usize) -> bool {
        self.boundary_free[k - 1] && k == self.graph_nodes
    }

    #[cfg(test)]
    pub(crate) fn synthetic(values: Vec<f64>, boundary_free: Vec<bool>, graph_nodes: usize) -> SweepCurve {
        let order = (0..values.len()).collect();
        SweepCurve { score_id: ScoreId::Conductance, order, values, boundary_free, graph_nodes }
    }
}

struct SweepState<'g> {
    graph: &'g Graph,
    in_prefix: Vec<bool>,
    int_deg: Vec<u32>,
    in_triad: Vec<bool>,
    members: Vec<NodeId>, // sorted; maintained only when the score needs it
    keep_members: bool,
    m_s: u64,
    c_s: u64,
    volume: u64,
    sum_deg_sq: u64,
    triad_count: usize,
    fomd_count: usize,
    flake_count: usize,
    len: usize,
}

impl<'g> SweepState<'g> {
    fn new(graph: &'g Graph, id: ScoreId) -> Self {
        let n = graph.node_count();
        SweepState {
            graph,
            in_prefix: vec![false; n],
            int_deg: vec![0; n],
            in_triad: vec![false; n],
            members: Vec::new(),
            keep_members: matches!(id, ScoreId::MaxOdf | ScoreId::AvgOdf),
            m_s: 0,
            c_s: 0,
            volume: 0,
            sum_deg_sq: 0,
            triad_count: 0,
            fomd_count: 0,
            flake_count: 0,
            len: 0,
        }
    }

    fn add(&mut self, u: NodeId) {
        assert!(!self.in_prefix[u], "duplicate node {u} in sweep order");
        let d = self.graph.degree(u) as u32;
        let median = self.graph.median_degree();
        let nbrs_in: Vec<NodeId> = self
            .graph
            .neighbors(u)
            .iter()
            .copied()
            .filter(|&v| self.in_prefix[v])
            .collect();
        let int_u = nbrs_in.len() as u32;

        self.m_s += int_u as u64;
        self.volume += d as u64;
        self.c_s = self.volume - 2 * self.m_s;
        self.sum_deg_sq += d as u64 * d as u64;

        if int_u as usize > median {
            self.fomd_count += 1;
        }
        if scoring::flake_condition(int_u, d) {
            self.flake_count += 1;
        }
        for &v in &nbrs_in {
            let old = self.int_deg[v];
            let dv = self.graph.degree(v) as u32;
            if old as usize == median {
                self.fomd_count += 1;
            }
            if scoring::flake_condition(old, dv) && !scoring::flake_condition(old + 1, dv) {
                self.flake_count -= 1;
            }
            self.int_deg[v] = old + 1;
        }
        self.int_deg[u] = int_u;

        // new triangles all involve u and two established prefix members
        for &v in &nbrs_in {
            let (mut a, mut b) = (0, 0);
            let adj_v = self.graph.neighbors(v);
            while a < nbrs_in.len() && b < adj_v.len() {
                let (x, y) = (nbrs_in[a], adj_v[b]);
                if x < y {
                    a += 1;
                } else if y < x {
                    b += 1;
                } else {
                    for node in [u, v, x] {
                        if !self.in_triad[node] {
                            self.in_triad[node] = true;
                            self.triad_count += 1;
                        }
                    }
                    a += 1;
                    b += 1;
                }
            }
        }

        self.in_prefix[u] = true;
        if self.keep_members {
            let pos = self.members.binary_search(&u).unwrap_err();
            self.members.insert(pos, u);
        }
        self.len += 1;
    }

    fn raw_value(&self, id: ScoreId) -> f64 {
        let m = self.graph.edge_count() as u64;
        let n = self.graph.node_count();
        match id {
            ScoreId::InternalDensity => scoring::internal_density(self.len, self.m_s),
            ScoreId::EdgesInside => scoring::edges_inside(self.m_s),
            ScoreId::AverageDegree => scoring::average_degree(self.len, self.m_s),
            ScoreId::Fomd => scoring::fomd(self.fomd_count, self.len),
            ScoreId::Tpr => scoring::tpr(self.triad_count, self.len),
            ScoreId::Expansion => scoring::expansion(self.c_s, self.len),
            ScoreId::CutRatio => scoring::cut_ratio(self.c_s, self.len, n),
            ScoreId::Conductance => scoring::conductance(self.c_s, self.volume),
            ScoreId::NormalizedCut => {
                scoring::normalized_cut(self.c_s, self.volume, self.m_s, m)
            }
            ScoreId::MaxOdf => scoring::max_odf(
                self.members
                    .iter()
                    .map(|&v| (self.int_deg[v], self.graph.degree(v) as u32)),
            ),
            ScoreId::AvgOdf => scoring::avg_odf(
                self.members
                    .iter()
                    .map(|&v| (self.int_deg[v], self.graph.degree(v) as u32)),
                self.len,
            ),
            ScoreId::FlakeOdf => scoring::flake_odf(self.flake_count, self.len),
            ScoreId::Modularity => {
                scoring::modularity(self.m_s, self.volume, self.sum_deg_sq, m)
            }
        }
    }
}

/// Scores every prefix of `order` incrementally. Each prefix value equals
/// `compute_score` on the materialized prefix set exactly.
pub fn sweep_curve(graph: &Graph, order: &[NodeId], id: ScoreId) -> SweepCurve {
    assert!(!order.is_empty(), "sweep order must not be empty");
    let mut state = SweepState::new(graph, id);
    let mut values = Vec::with_capacity(order.len());
    let mut boundary_free = Vec::with_capacity(order.len());
    for &u in order {
        assert!(u < graph.node_count(), "sweep node {u} out of range");
        state.add(u);
        values.push(id.oriented(state.raw_value(id)));
        boundary_free.push(state.c_s == 0);
    }
    SweepCurve {
        score_id: id,
        order: order.to_vec(),
        values,
        boundary_free,
        graph_nodes: graph.node_count(),
    }
}

/// Confirmed local minima of a sweep curve, as 1-based prefix sizes.
///
/// The scan keeps a running-minimum candidate; a strictly lower value
/// replaces the candidate, and a rise above `confirmation` times the
/// candidate's value confirms it. If nothing ever confirms, the global
/// minimum is emitted as a fallback. Vacuous whole-graph prefixes never
/// participate.
pub fn find_local_minima(curve: &SweepCurve, confirmation: f64) -> Result<Vec<usize>> {
    if !(confirmation > 1.0) {
        return Err(Error::BadConfirmation(confirmation));
    }
    if curve.len() < 2 {
        return Ok(vec![1]);
    }
    let eligible: Vec<usize> = (1..=curve.len()).filter(|&k| !curve.is_vacuous(k)).collect();
    if eligible.is_empty() {
        return Ok(vec![1]);
    }

    // A multiplicative rise test needs positive values; shifting the whole
    // curve above zero keeps every argmin in place.
    let raw = curve.values();
    let vmin = eligible.iter().map(|&k| raw[k - 1]).fold(f64::INFINITY, f64::min);
    let offset = if vmin <= 0.0 { 1.0 - vmin } else { 0.0 };
    let value = |k: usize| raw[k - 1] + offset;

    let mut confirmed = Vec::new();
    let mut candidate: Option<usize> = None;
    for &k in &eligible {
        match candidate {
            None => candidate = Some(k),
            Some(c) => {
                if value(k) < value(c) {
                    candidate = Some(k);
                } else if value(k) > confirmation * value(c) {
                    confirmed.push(c);
                    candidate = Some(k);
                }
            }
        }
    }
    if confirmed.is_empty() {
        // fall back to the global minimum (first prefix attaining it)
        let mut best = eligible[0];
        for &k in &eligible {
            if value(k) < value(best) {
                best = k;
            }
        }
        confirmed.push(best);
    }
    Ok(confirmed)
}

/// All communities found along one sweep, smallest first (they are nested).
#[derive(Clone, Debug)]
pub struct DetectedCommunities {
    pub communities: Vec<NodeSet>,
    pub minima: Vec<usize>,
    pub curve: SweepCurve,
}

fn seeded_order(graph: &Graph, seed: NodeId, opts: &DetectOptions) -> Result<Vec<NodeId>> {
    let ppr = approximate_ppr(graph, seed, opts.teleport, opts.epsilon)?;
    let mut order = vec![seed];
    order.extend(sweep_order(graph, &ppr).into_iter().filter(|&u| u != seed));
    Ok(order)
}

/// Community of `seed` at the first confirmed sweep minimum.
pub fn detect_community(
    graph: &Graph,
    seed: NodeId,
    id: ScoreId,
    opts: &DetectOptions,
) -> Result<NodeSet> {
    let all = detect_all_communities(graph, seed, id, opts)?;
    Ok(all.communities.into_iter().next().expect("at least one minimum"))
}

/// Communities at every confirmed sweep minimum (nested by construction).
pub fn detect_all_communities(
    graph: &Graph,
    seed: NodeId,
    id: ScoreId,
    opts: &DetectOptions,
) -> Result<DetectedCommunities> {
    let order = seeded_order(graph, seed, opts)?;
    let curve = sweep_curve(graph, &order, id);
    let minima = find_local_minima(&curve, opts.confirmation)?;
    let communities = minima
        .iter()
        .map(|&k| NodeSet::new(curve.prefix(k).to_vec()))
        .collect();
    Ok(DetectedCommunities { communities, minima, curve })
}

/// Baseline that takes the globally best conductance prefix of the sweep
/// instead of the first confirmed local minimum.
pub fn detect_lc_baseline(graph: &Graph, seed: NodeId, opts: &DetectOptions) -> Result<NodeSet> {
    let order = seeded_order(graph, seed, opts)?;
    let curve = sweep_curve(graph, &order, ScoreId::Conductance);
    if curve.len() < 2 {
        return Ok(NodeSet::new(curve.prefix(1).to_vec()));
    }
    let mut best: Option<usize> = None;
    for k in 1..=curve.len() {
        if curve.is_vacuous(k) {
            continue;
        }
        if best.map_or(true, |b| curve.values()[k - 1] < curve.values()[b - 1]) {
            best = Some(k);
        }
    }
    let k = best.unwrap_or(1);
    Ok(NodeSet::new(curve.prefix(k).to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::g1;

    fn two_triangles() -> Graph {
        Graph::from_edges(6, &[(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)]).unwrap()
    }

    #[test]
    fn push_on_single_edge() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let ppr = approximate_ppr(&g, 0, 0.5, 1e-6).unwrap();
        let p0 = ppr.score(0);
        let p1 = ppr.score(1);
        assert!(p0 > p1 && p1 > 0.0);
        assert!(ppr.mass() <= 1.0);
        assert!(ppr.pushes() <= (1.0 / (1e-6 * 0.5)) as usize + ppr.support());
    }

    #[test]
    fn isolated_seed_keeps_all_mass() {
        let g = Graph::from_edges(3, &[(0, 1)]).unwrap();
        let ppr = approximate_ppr(&g, 2, 0.15, 1e-5).unwrap();
        assert_eq!(ppr.entries(), &[(2, 1.0)]);
    }

    #[test]
    fn push_parameter_validation() {
        let g = g1();
        assert!(matches!(approximate_ppr(&g, 9, 0.15, 1e-5), Err(Error::NodeOutOfRange(9, 6))));
        assert!(matches!(approximate_ppr(&g, 0, 0.0, 1e-5), Err(Error::BadTeleport(_))));
        assert!(matches!(approximate_ppr(&g, 0, 1.0, 1e-5), Err(Error::BadTeleport(_))));
        assert!(matches!(approximate_ppr(&g, 0, 0.15, 0.0), Err(Error::BadEpsilon(_))));
    }

    #[test]
    fn g1_mass_stays_near_the_seed() {
        let g = g1();
        let ppr = approximate_ppr(&g, 0, 0.15, 1e-6).unwrap();
        let p: Vec<f64> = (0..6).map(|u| ppr.score(u)).collect();
        for u in 1..6 {
            assert!(p[0] >= p[u]);
        }
        assert!(p[1].min(p[2]) > p[4].max(p[5]), "bridge should throttle mass");
        // the seed's triangle fills the first three positions of the sweep
        let order = sweep_order(&g, &ppr);
        assert_eq!(order[0], 0);
        let mut head = order[..3].to_vec();
        head.sort_unstable();
        assert_eq!(head, vec![0, 1, 2]);
    }

    #[test]
    fn sweep_order_ranks_by_normalized_score() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let ppr = PprVector {
            seed: 0,
            teleport: 0.15,
            epsilon: 1e-5,
            entries: vec![(0, 0.6), (1, 0.2), (2, 0.2)],
            pushes: 0,
        };
        // equal ratios for 1 and 2 break toward the smaller id
        assert_eq!(sweep_order(&g, &ppr), vec![0, 1, 2]);
    }

    #[test]
    fn conductance_sweep_on_g1() {
        let g = g1();
        let curve = sweep_curve(&g, &[0, 1, 2, 3, 4, 5], ScoreId::Conductance);
        let want = [1.0, 0.5, 1.0 / 7.0, 0.2, 1.0 / 6.0, 0.0];
        for (got, want) in curve.values().iter().zip(want) {
            assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
        }
        assert!(curve.boundary_free(6));
        assert!(curve.is_vacuous(6));
        assert!(!curve.is_vacuous(3));
    }

    #[test]
    fn tpr_sweep_on_g1_is_oriented() {
        let g = g1();
        let curve = sweep_curve(&g, &[0, 1, 2, 3, 4, 5], ScoreId::Tpr);
        let want = [0.0, 0.0, -1.0, -0.75, -0.6, -1.0];
        for (got, want) in curve.values().iter().zip(want) {
            assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
        }
        let minima = find_local_minima(&curve, 1.2).unwrap();
        assert_eq!(minima, vec![3]);
    }

    #[test]
    fn minima_on_the_g1_conductance_curve() {
        let g = g1();
        let curve = sweep_curve(&g, &[0, 1, 2, 3, 4, 5], ScoreId::Conductance);
        assert_eq!(find_local_minima(&curve, 1.2).unwrap(), vec![3]);
    }

    #[test]
    fn minima_fallback_and_edge_cases() {
        let falling = SweepCurve::synthetic(vec![0.5, 0.3, 0.1], vec![false; 3], 100);
        assert_eq!(find_local_minima(&falling, 1.2).unwrap(), vec![3]);

        let shallow = SweepCurve::synthetic(
            vec![0.5, 0.1, 0.11, 0.105, 0.3],
            vec![false; 5],
            100,
        );
        assert_eq!(find_local_minima(&shallow, 1.2).unwrap(), vec![2]);

        let single = SweepCurve::synthetic(vec![0.4], vec![false], 100);
        assert_eq!(find_local_minima(&single, 1.2).unwrap(), vec![1]);

        let curve = SweepCurve::synthetic(vec![0.5, 0.4], vec![false; 2], 100);
        assert!(matches!(find_local_minima(&curve, 1.0), Err(Error::BadConfirmation(_))));
    }

    #[test]
    fn a_discarded_candidate_is_replaced_by_the_new_low() {
        let curve = SweepCurve::synthetic(
            vec![1.0, 0.1, 0.115, 0.05, 0.3],
            vec![false; 5],
            100,
        );
        // the curve never rises 20% above 0.1 before 0.05 undercuts it,
        // so only the later minimum confirms
        assert_eq!(find_local_minima(&curve, 1.2).unwrap(), vec![4]);
    }

    #[test]
    fn detection_on_g1() {
        let g = g1();
        let opts = DetectOptions::default();
        let found = detect_community(&g, 0, ScoreId::Conductance, &opts).unwrap();
        assert_eq!(found.members(), &[0, 1, 2]);

        let all = detect_all_communities(&g, 0, ScoreId::Conductance, &opts).unwrap();
        assert_eq!(all.communities[0].members(), &[0, 1, 2]);
        assert_eq!(all.minima[0], 3);

        let lc = detect_lc_baseline(&g, 0, &opts).unwrap();
        assert_eq!(lc.members(), &[0, 1, 2]);
    }

    #[test]
    fn detection_returns_an_entire_separated_component() {
        let g = two_triangles();
        let opts = DetectOptions::default();
        let found = detect_community(&g, 0, ScoreId::Conductance, &opts).unwrap();
        assert_eq!(found.members(), &[0, 1, 2]);
        let found = detect_community(&g, 4, ScoreId::Conductance, &opts).unwrap();
        assert_eq!(found.members(), &[3, 4, 5]);
        let lc = detect_lc_baseline(&g, 0, &opts).unwrap();
        assert_eq!(lc.members(), &[0, 1, 2]);
    }

    #[test]
    fn detection_from_an_isolated_seed() {
        let g = Graph::from_edges(4, &[(0, 1), (0, 2)]).unwrap();
        let opts = DetectOptions::default();
        let found = detect_community(&g, 3, ScoreId::Conductance, &opts).unwrap();
        assert_eq!(found.members(), &[3]);
        let lc = detect_lc_baseline(&g, 3, &opts).unwrap();
        assert_eq!(lc.members(), &[3]);
    }
}
