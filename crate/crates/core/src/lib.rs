//! Community analysis for undirected graphs.
//!
//! The crate covers the full loop of working with communities at desk
//! scale:
//!
//! - [`graph`]: compact undirected graphs, node sets, community sets and
//!   their loaders.
//! - [`scoring`]: thirteen community scoring functions over a shared set of
//!   integer aggregates, each tagged with the direction that reads better.
//! - [`goodness`]: four structural goodness metrics (separability, density,
//!   cohesiveness, clustering coefficient) used to judge the scores
//!   themselves.
//! - [`rank`]: rank communities by score, accumulate goodness along the
//!   ranking, compare against the best achievable curve, average ranks
//!   across metrics, and correlate/cluster the scores.
//! - [`perturb`]: random community edits and the Z-score protocol that
//!   measures how sharply a score separates real communities from their
//!   perturbed variants.
//! - [`detect`]: seed-anchored community detection via truncated
//!   personalized PageRank and score sweeps.
//! - [`evaluate`]: precision/recall/F1 and optimal matching between
//!   detected and reference communities.
//! - [`synth`]: planted-partition benchmark graphs.

pub mod detect;
pub mod error;
pub mod evaluate;
pub mod goodness;
pub mod graph;
pub mod perturb;
pub mod rank;
mod rng;
pub mod scoring;
pub mod synth;

pub use detect::{
    approximate_ppr, detect_all_communities, detect_community, detect_lc_baseline,
    find_local_minima, sweep_curve, sweep_order, DetectOptions, DetectedCommunities, PprVector,
    SweepCurve, DEFAULT_CONFIRMATION, DEFAULT_EPSILON, DEFAULT_TELEPORT,
};
pub use error::{Error, Result};
pub use evaluate::{eval_seed_run, hungarian_match, prf, Matching, PrfTriple};
pub use goodness::{
    cohesiveness, cohesiveness_approx_witness, clustering_coefficient, compute_goodness, density,
    internal_cut_conductance, separability, CohesivenessMode, CutWitness, GoodnessId,
};
pub use graph::{
    induced_subgraph, load_communities, preprocess_communities, set_stats, CommunitySet, Graph,
    NodeId, NodeSet, SetStats, Source,
};
pub use perturb::{
    perturb, zscore, zscore_from_samples, zscore_increment, PerturbSpec, Perturbed, Strategy,
    ZAggregate, ZIncrement, ZScoreReport, DEFAULT_TRIALS,
};
pub use rank::{
    average_rank_table, correlation_matrix, cumulative_goodness_curve, downsample_indices,
    rank_communities, threshold_clusters, top_k_by_average_rank, upper_bound_curve, AvgRankTable,
    CorrelationMatrix, CurveId, RankCurve, DEFAULT_CORRELATION_THRESHOLD, DEFAULT_TOP_K,
};
pub use scoring::{compute_score, score_all, Orientation, ScoreClass, ScoreId, ScoreMatrix};
pub use synth::{planted_partition_with_sizes, synth_planted_partition, PlantedPartitionSpec};
