//! Community perturbation strategies and the robustness Z-score that
//! compares true communities against their perturbed variants.
//!
//! A perturbation applies `ceil(intensity * |S|)` random edit steps to a
//! copy of the set. Steps that cannot apply (no boundary edge, set already
//! covers the graph, set about to become empty) are skipped but counted.
//! The Z-score orients every score so that larger means better, averages
//! each community's score over independent perturbation trials, and reports
//! how many standard deviations the true communities sit above the
//! population of perturbed means.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{CommunitySet, Graph, NodeId, NodeSet};
use crate::rng;
use crate::scoring::{compute_score, Orientation, ScoreId};

/// Default number of perturbation trials per community.
pub const DEFAULT_TRIALS: usize = 20;
/// Variances below this are treated as zero and flagged degenerate.
pub const VARIANCE_FLOOR: f64 = 1e-12;
/// Intensities compared by [`zscore_increment`].
pub const INCREMENT_LOW: f64 = 0.05;
pub const INCREMENT_HIGH: f64 = 0.2;

/// One way of randomly editing a community.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Pick a uniform boundary edge (u in S, v outside); remove u, add v.
    NodeSwap,
    /// Swap a uniform member with a uniform non-member.
    Random,
    /// Pick a uniform boundary edge and add its outside endpoint.
    Expand,
    /// Pick a uniform boundary edge and remove its inside endpoint.
    Shrink,
}

impl Strategy {
    pub const ALL: [Strategy; 4] =
        [Strategy::NodeSwap, Strategy::Random, Strategy::Expand, Strategy::Shrink];

    pub fn token(self) -> &'static str {
        match self {
            Strategy::NodeSwap => "nodeswap",
            Strategy::Random => "random",
            Strategy::Expand => "expand",
            Strategy::Shrink => "shrink",
        }
    }

    pub fn from_token(tok: &str) -> Result<Strategy> {
        Strategy::ALL
            .into_iter()
            .find(|s| s.token() == tok)
            .ok_or_else(|| Error::UnknownStrategy(tok.to_string()))
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.token())
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Strategy> {
        Strategy::from_token(s)
    }
}

/// Parameters of one robustness experiment.
#[derive(Clone, Copy, Debug)]
pub struct PerturbSpec {
    pub strategy: Strategy,
    /// Fraction of the community size turned into edit steps, in (0, 1].
    pub intensity: f64,
    pub trials: usize,
    pub rng_seed: u64,
}

impl PerturbSpec {
    pub fn new(strategy: Strategy, intensity: f64) -> PerturbSpec {
        PerturbSpec { strategy, intensity, trials: DEFAULT_TRIALS, rng_seed: 0 }
    }

    pub fn with_trials(mut self, trials: usize) -> PerturbSpec {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, rng_seed: u64) -> PerturbSpec {
        self.rng_seed = rng_seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.intensity > 0.0 && self.intensity <= 1.0) {
            return Err(Error::BadIntensity(self.intensity));
        }
        if self.trials == 0 {
            return Err(Error::NoTrials);
        }
        Ok(())
    }
}

/// A perturbed copy of a community.
#[derive(Clone, Debug)]
pub struct Perturbed {
    pub set: NodeSet,
    /// Steps that could not apply and were skipped.
    pub skipped_steps: usize,
}

/// Applies `ceil(intensity * |set|)` sequential edit steps.
pub fn perturb(
    graph: &Graph,
    set: &NodeSet,
    strategy: Strategy,
    intensity: f64,
    rng: &mut impl Rng,
) -> Result<Perturbed> {
    if !(intensity > 0.0 && intensity <= 1.0) {
        return Err(Error::BadIntensity(intensity));
    }
    set.validate(graph)?;
    let n = graph.node_count();
    let steps = (intensity * set.len() as f64).ceil() as usize;

    let mut members: Vec<NodeId> = set.members().to_vec();
    let mut in_set = vec![false; n];
    for &u in &members {
        in_set[u] = true;
    }
    let mut skipped = 0usize;

    for _ in 0..steps {
        match strategy {
            Strategy::NodeSwap => {
                let boundary = boundary_edges(graph, &members, &in_set);
                if boundary.is_empty() {
                    skipped += 1;
                    continue;
                }
                let (u, v) = boundary[rng.gen_range(0..boundary.len())];
                remove_member(&mut members, &mut in_set, u);
                add_member(&mut members, &mut in_set, v);
            }
            Strategy::Random => {
                if members.len() == n {
                    skipped += 1;
                    continue;
                }
                let u = members[rng.gen_range(0..members.len())];
                let v = loop {
                    let candidate = rng.gen_range(0..n);
                    if !in_set[candidate] {
                        break candidate;
                    }
                };
                remove_member(&mut members, &mut in_set, u);
                add_member(&mut members, &mut in_set, v);
            }
            Strategy::Expand => {
                let boundary = boundary_edges(graph, &members, &in_set);
                if boundary.is_empty() {
                    skipped += 1;
                    continue;
                }
                let (_, v) = boundary[rng.gen_range(0..boundary.len())];
                add_member(&mut members, &mut in_set, v);
            }
            Strategy::Shrink => {
                if members.len() == 1 {
                    skipped += 1;
                    continue;
                }
                let boundary = boundary_edges(graph, &members, &in_set);
                if boundary.is_empty() {
                    skipped += 1;
                    continue;
                }
                let (u, _) = boundary[rng.gen_range(0..boundary.len())];
                remove_member(&mut members, &mut in_set, u);
            }
        }
    }

    let mut out = NodeSet::new(members);
    out.label = set.label.clone();
    Ok(Perturbed { set: out, skipped_steps: skipped })
}

/// Boundary edges (member, non-member) in ascending member order.
fn boundary_edges(graph: &Graph, members: &[NodeId], in_set: &[bool]) -> Vec<(NodeId, NodeId)> {
    let mut edges = Vec::new();
    for &u in members {
        for &v in graph.neighbors(u) {
            if !in_set[v] {
                edges.push((u, v));
            }
        }
    }
    edges
}

fn add_member(members: &mut Vec<NodeId>, in_set: &mut [bool], v: NodeId) {
    if !in_set[v] {
        in_set[v] = true;
        let pos = members.binary_search(&v).unwrap_err();
        members.insert(pos, v);
    }
}

fn remove_member(members: &mut Vec<NodeId>, in_set: &mut [bool], u: NodeId) {
    if in_set[u] {
        in_set[u] = false;
        let pos = members.binary_search(&u).unwrap();
        members.remove(pos);
    }
}

/// The pieces of a Z-score computed from already-oriented samples.
#[derive(Clone, Copy, Debug)]
pub struct ZAggregate {
    pub z: f64,
    pub mean_true: f64,
    pub mean_perturbed: f64,
    pub variance_perturbed: f64,
    /// True when the perturbed means carry (almost) no variance; z is 0.
    pub degenerate: bool,
}

/// Z-score of the true scores against per-community perturbed means. Both
/// slices must already be oriented so that larger means better.
pub fn zscore_from_samples(true_values: &[f64], perturbed_means: &[f64]) -> ZAggregate {
    assert_eq!(true_values.len(), perturbed_means.len());
    let n = true_values.len();
    let mean_true = mean(true_values);
    let mean_perturbed = mean(perturbed_means);
    if n < 2 {
        return ZAggregate {
            z: 0.0,
            mean_true,
            mean_perturbed,
            variance_perturbed: 0.0,
            degenerate: true,
        };
    }
    let variance = perturbed_means
        .iter()
        .map(|&x| (x - mean_perturbed) * (x - mean_perturbed))
        .sum::<f64>()
        / (n - 1) as f64;
    if variance < VARIANCE_FLOOR {
        return ZAggregate {
            z: 0.0,
            mean_true,
            mean_perturbed,
            variance_perturbed: variance,
            degenerate: true,
        };
    }
    ZAggregate {
        z: (mean_true - mean_perturbed) / variance.sqrt(),
        mean_true,
        mean_perturbed,
        variance_perturbed: variance,
        degenerate: false,
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Result of one robustness experiment.
#[derive(Clone, Debug)]
pub struct ZScoreReport {
    pub score_id: ScoreId,
    pub spec: PerturbSpec,
    pub z: f64,
    pub mean_true: f64,
    pub mean_perturbed: f64,
    pub variance_perturbed: f64,
    pub communities: usize,
    pub degenerate: bool,
}

/// Orients a raw score onto the larger-is-better axis.
fn gain(id: ScoreId, raw: f64) -> f64 {
    match id.orientation() {
        Orientation::BetterHigh => raw,
        Orientation::BetterLow => -raw,
    }
}

/// Runs the robustness experiment for one score over a community set.
pub fn zscore(
    graph: &Graph,
    communities: &CommunitySet,
    id: ScoreId,
    spec: &PerturbSpec,
) -> Result<ZScoreReport> {
    spec.validate()?;
    let sets = &communities.communities;
    if sets.len() < 2 {
        return Err(Error::TooFewCommunities(sets.len()));
    }
    let samples: Result<Vec<(f64, f64)>> = sets
        .par_iter()
        .enumerate()
        .map(|(i, set)| {
            let truth = gain(id, compute_score(graph, set, id));
            let mut sum = 0.0;
            for trial in 0..spec.trials {
                let mut rng = rng::stream(spec.rng_seed, i as u64, trial as u64);
                let out = perturb(graph, set, spec.strategy, spec.intensity, &mut rng)?;
                sum += gain(id, compute_score(graph, &out.set, id));
            }
            Ok((truth, sum / spec.trials as f64))
        })
        .collect();
    let samples = samples?;
    let true_values: Vec<f64> = samples.iter().map(|&(t, _)| t).collect();
    let perturbed_means: Vec<f64> = samples.iter().map(|&(_, p)| p).collect();
    let agg = zscore_from_samples(&true_values, &perturbed_means);
    Ok(ZScoreReport {
        score_id: id,
        spec: *spec,
        z: agg.z,
        mean_true: agg.mean_true,
        mean_perturbed: agg.mean_perturbed,
        variance_perturbed: agg.variance_perturbed,
        communities: sets.len(),
        degenerate: agg.degenerate,
    })
}

/// Z-score change when the intensity grows from 0.05 to 0.2 under one
/// strategy, using the same seed for both runs.
#[derive(Clone, Debug)]
pub struct ZIncrement {
    pub low: ZScoreReport,
    pub high: ZScoreReport,
    pub value: f64,
    pub degenerate: bool,
}

pub fn zscore_increment(
    graph: &Graph,
    communities: &CommunitySet,
    id: ScoreId,
    strategy: Strategy,
    rng_seed: u64,
) -> Result<ZIncrement> {
    let low_spec = PerturbSpec::new(strategy, INCREMENT_LOW).with_seed(rng_seed);
    let high_spec = PerturbSpec::new(strategy, INCREMENT_HIGH).with_seed(rng_seed);
    let low = zscore(graph, communities, id, &low_spec)?;
    let high = zscore(graph, communities, id, &high_spec)?;
    let degenerate = low.degenerate || high.degenerate;
    Ok(ZIncrement { value: high.z - low.z, low, high, degenerate })
}
