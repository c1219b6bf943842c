//! Planted-partition graph synthesis. Nodes are grouped into blocks; each
//! intra-block pair becomes an edge with probability `p_in`, each
//! inter-block pair with probability `p_out`. Pairs are visited implicitly
//! through geometric skip-sampling, so sparse graphs cost time proportional
//! to the edges drawn rather than the pairs considered.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{CommunitySet, Graph, NodeSet, Source};

/// Largest node count the generator accepts.
pub const MAX_NODES: usize = 1_000_000;

/// Equal-sized planted partition.
#[derive(Clone, Copy, Debug)]
pub struct PlantedPartitionSpec {
    pub num_communities: usize,
    pub community_size: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub rng_seed: u64,
}

/// Generates the graph and its ground-truth blocks from an equal-size spec.
pub fn synth_planted_partition(spec: &PlantedPartitionSpec) -> Result<(Graph, CommunitySet)> {
    let sizes = vec![spec.community_size; spec.num_communities];
    planted_partition_with_sizes(&sizes, spec.p_in, spec.p_out, spec.rng_seed)
}

/// Planted partition with explicit block sizes.
pub fn planted_partition_with_sizes(
    sizes: &[usize],
    p_in: f64,
    p_out: f64,
    rng_seed: u64,
) -> Result<(Graph, CommunitySet)> {
    if sizes.is_empty() || sizes.iter().any(|&s| s == 0) {
        return Err(Error::BadSynthesis("block sizes must all be positive".into()));
    }
    let n: usize = sizes.iter().sum();
    if n > MAX_NODES {
        return Err(Error::BadSynthesis(format!("{n} nodes exceeds the limit of {MAX_NODES}")));
    }
    if !(0.0..=1.0).contains(&p_in) || !(0.0..=1.0).contains(&p_out) {
        return Err(Error::BadSynthesis(format!(
            "probabilities must lie in [0, 1], got p_in={p_in} p_out={p_out}"
        )));
    }
    if p_out > p_in {
        return Err(Error::BadSynthesis(format!(
            "inter-block probability {p_out} exceeds intra-block probability {p_in}"
        )));
    }

    let offsets: Vec<usize> = sizes
        .iter()
        .scan(0usize, |acc, &s| {
            let start = *acc;
            *acc += s;
            Some(start)
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut edges: Vec<(usize, usize)> = Vec::new();

    for (b, &s) in sizes.iter().enumerate() {
        let off = offsets[b];
        let pairs = (s as u64 * (s as u64 - 1)) / 2;
        sample_pair_indices(pairs, p_in, &mut rng, |t| {
            let (i, j) = triangular_decode(t, s as u64);
            edges.push((off + i as usize, off + j as usize));
        });
    }
    for a in 0..sizes.len() {
        for b in (a + 1)..sizes.len() {
            let pairs = sizes[a] as u64 * sizes[b] as u64;
            sample_pair_indices(pairs, p_out, &mut rng, |t| {
                let i = (t / sizes[b] as u64) as usize;
                let j = (t % sizes[b] as u64) as usize;
                edges.push((offsets[a] + i, offsets[b] + j));
            });
        }
    }

    if edges.is_empty() {
        return Err(Error::BadSynthesis("parameters produced a graph with no edges".into()));
    }
    let graph = Graph::from_edges(n, &edges)?;
    let communities = CommunitySet {
        communities: sizes
            .iter()
            .enumerate()
            .map(|(b, &s)| {
                NodeSet::with_label((offsets[b]..offsets[b] + s).collect(), format!("block{b}"))
            })
            .collect(),
        source: Source::GroundTruth,
    };
    Ok((graph, communities))
}

/// Visits each index in `0..total` independently with probability `p`,
/// jumping between hits with geometric gaps.
fn sample_pair_indices(total: u64, p: f64, rng: &mut impl Rng, mut hit: impl FnMut(u64)) {
    if p <= 0.0 || total == 0 {
        return;
    }
    if p >= 1.0 {
        for t in 0..total {
            hit(t);
        }
        return;
    }
    let ln_q = (1.0 - p).ln();
    let mut position = 0u64;
    loop {
        let u: f64 = rng.gen();
        let gap = ((1.0 - u).ln() / ln_q).floor();
        position = position.saturating_add(if gap >= u64::MAX as f64 { u64::MAX } else { gap as u64 });
        if position >= total {
            return;
        }
        hit(position);
        position += 1;
    }
}

/// Maps a linear index over the pairs {(i, j) : i < j < s}, ordered by row,
/// back to the pair.
fn triangular_decode(t: u64, s: u64) -> (u64, u64) {
    // row i covers indices [base(i), base(i) + s - 1 - i)
    let base = |i: u64| i * (2 * s - i - 1) / 2;
    let guess = s as f64 - 0.5 - ((s as f64 - 0.5).powi(2) - 2.0 * t as f64).max(0.0).sqrt();
    let mut i = (guess.max(0.0) as u64).min(s - 2);
    while i + 1 < s - 1 && base(i + 1) <= t {
        i += 1;
    }
    while base(i) > t {
        i -= 1;
    }
    let j = i + 1 + (t - base(i));
    (i, j)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangular_decode_enumerates_every_pair() {
        for s in 2..=12u64 {
            let mut expected = Vec::new();
            for i in 0..s {
                for j in (i + 1)..s {
                    expected.push((i, j));
                }
            }
            let decoded: Vec<(u64, u64)> =
                (0..s * (s - 1) / 2).map(|t| triangular_decode(t, s)).collect();
            assert_eq!(decoded, expected, "s={s}");
        }
    }

    #[test]
    fn saturated_probabilities_build_a_complete_graph() {
        let spec = PlantedPartitionSpec {
            num_communities: 2,
            community_size: 3,
            p_in: 1.0,
            p_out: 1.0,
            rng_seed: 1,
        };
        let (g, cs) = synth_planted_partition(&spec).unwrap();
        assert_eq!(g.node_count(), 6);
        assert_eq!(g.edge_count(), 15);
        assert!((0..6).all(|v| g.degree(v) == 5));
        assert_eq!(cs.communities.len(), 2);
        assert_eq!(cs.communities[0].members(), &[0, 1, 2]);
        assert_eq!(cs.communities[1].members(), &[3, 4, 5]);
    }

    #[test]
    fn isolated_blocks_have_no_cross_edges() {
        let spec = PlantedPartitionSpec {
            num_communities: 2,
            community_size: 3,
            p_in: 1.0,
            p_out: 0.0,
            rng_seed: 1,
        };
        let (g, cs) = synth_planted_partition(&spec).unwrap();
        assert_eq!(g.edge_count(), 6);
        for set in &cs.communities {
            for &u in set.members() {
                for &v in g.neighbors(u) {
                    assert!(set.contains(v));
                }
            }
        }
    }

    #[test]
    fn generation_is_deterministic_in_the_seed() {
        let spec = PlantedPartitionSpec {
            num_communities: 4,
            community_size: 25,
            p_in: 0.4,
            p_out: 0.05,
            rng_seed: 77,
        };
        let (a, _) = synth_planted_partition(&spec).unwrap();
        let (b, _) = synth_planted_partition(&spec).unwrap();
        let mut buf_a = Vec::new();
        let mut buf_b = Vec::new();
        a.write_edge_list(&mut buf_a).unwrap();
        b.write_edge_list(&mut buf_b).unwrap();
        assert_eq!(buf_a, buf_b);

        let shifted = PlantedPartitionSpec { rng_seed: 78, ..spec };
        let (c, _) = synth_planted_partition(&shifted).unwrap();
        let mut buf_c = Vec::new();
        c.write_edge_list(&mut buf_c).unwrap();
        assert_ne!(buf_a, buf_c);
    }

    #[test]
    fn edge_counts_track_the_densities() {
        // one block of 200 nodes at p = 0.3: mean 5970, sd ~ 64.6
        let (g, _) = planted_partition_with_sizes(&[200], 0.3, 0.0, 5).unwrap();
        let m = g.edge_count() as f64;
        assert!((m - 5970.0).abs() < 5.0 * 64.7, "m = {m}");
    }

    #[test]
    fn uneven_blocks_are_labeled_in_order() {
        let (g, cs) = planted_partition_with_sizes(&[2, 3, 4], 1.0, 0.0, 3).unwrap();
        assert_eq!(g.node_count(), 9);
        assert_eq!(cs.communities[1].label.as_deref(), Some("block1"));
        assert_eq!(cs.communities[2].members(), &[5, 6, 7, 8]);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(planted_partition_with_sizes(&[], 0.5, 0.1, 0).is_err());
        assert!(planted_partition_with_sizes(&[3, 0], 0.5, 0.1, 0).is_err());
        assert!(planted_partition_with_sizes(&[3, 3], 0.1, 0.5, 0).is_err());
        assert!(planted_partition_with_sizes(&[3, 3], 1.2, 0.1, 0).is_err());
        assert!(planted_partition_with_sizes(&[3, 3], 0.5, -0.1, 0).is_err());
        // no edges possible
        assert!(planted_partition_with_sizes(&[3, 3], 0.0, 0.0, 0).is_err());
    }
}
