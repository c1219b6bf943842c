//! Subcommand implementations: input loading with dropped-data warnings,
//! node-id translation at the process boundary, and TSV emission.
//!
//! All internal work runs on contiguous internal ids; files and stdout use
//! the external ids they came with. Row and column orders are fixed by the
//! inputs, so output bytes never depend on the worker-thread count.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use commscore_core::detect::{
    detect_all_communities, detect_community, detect_lc_baseline, DetectOptions,
};
use commscore_core::evaluate::{eval_seed_run, prf};
use commscore_core::goodness::{compute_goodness, CohesivenessMode, GoodnessId, EXACT_CUT_LIMIT};
use commscore_core::graph::{
    load_communities as parse_communities, preprocess_communities, CommunitySet, Graph, NodeId,
    NodeSet,
};
use commscore_core::perturb::{zscore, PerturbSpec, Strategy};
use commscore_core::rank::{
    average_rank_table, correlation_matrix, cumulative_goodness_curve, downsample_indices,
    rank_communities, threshold_clusters, top_k_by_average_rank, upper_bound_curve, CurveId,
    RankCurve,
};
use commscore_core::scoring::{score_all, ScoreId};
use commscore_core::synth::{
    planted_partition_with_sizes, synth_planted_partition, PlantedPartitionSpec,
};

use crate::{
    CohesionMode, CorrelateArgs, DetectArgs, EvalSeedArgs, GoodnessArgs, PerturbArgs, RankArgs,
    ScoreArgs, StatsArgs, SynthArgs,
};

fn load_graph(path: &Path) -> Result<Graph> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let (graph, report) = Graph::load_edge_list(BufReader::new(file))
        .with_context(|| format!("loading {}", path.display()))?;
    if report.self_loops_dropped > 0 || report.duplicate_edges_dropped > 0 {
        eprintln!(
            "warning: {}: dropped {} self-loop(s) and {} duplicate edge(s)",
            path.display(),
            report.self_loops_dropped,
            report.duplicate_edges_dropped
        );
    }
    Ok(graph)
}

/// Loads, splits into connected components, and applies the size filter.
fn load_community_file(path: &Path, graph: &Graph, min_size: usize) -> Result<CommunitySet> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let (raw, report) = parse_communities(BufReader::new(file), graph)
        .with_context(|| format!("loading {}", path.display()))?;
    if report.unknown_ids_dropped > 0 || report.groups_dropped > 0 {
        eprintln!(
            "warning: {}: dropped {} unknown node id(s) and {} empty group(s)",
            path.display(),
            report.unknown_ids_dropped,
            report.groups_dropped
        );
    }
    let split = preprocess_communities(graph, &raw);
    let kept: Vec<NodeSet> =
        split.communities.into_iter().filter(|s| s.len() >= min_size).collect();
    if kept.is_empty() {
        bail!("{}: no communities of size >= {min_size} after splitting", path.display());
    }
    Ok(CommunitySet::new(kept, split.source))
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Members of a set as a sorted external-id line.
fn external_line(graph: &Graph, set: &NodeSet) -> String {
    let mut ids: Vec<u64> = set.members().iter().map(|&u| graph.external_id(u)).collect();
    ids.sort_unstable();
    let id_strings: Vec<String> = ids.iter().map(u64::to_string).collect();
    id_strings.join(" ")
}

fn scores_or_all(selected: &[ScoreId]) -> Vec<ScoreId> {
    if selected.is_empty() {
        ScoreId::ALL.to_vec()
    } else {
        selected.to_vec()
    }
}

fn metrics_or_all(selected: &[GoodnessId]) -> Vec<GoodnessId> {
    if selected.is_empty() {
        GoodnessId::ALL.to_vec()
    } else {
        selected.to_vec()
    }
}

fn strategies_or_all(selected: &[Strategy]) -> Vec<Strategy> {
    if selected.is_empty() {
        Strategy::ALL.to_vec()
    } else {
        selected.to_vec()
    }
}

fn cohesion_mode(choice: CohesionMode, size: usize) -> CohesivenessMode {
    match choice {
        CohesionMode::Exact => CohesivenessMode::Exact,
        CohesionMode::Approx => CohesivenessMode::Approx,
        CohesionMode::Auto => {
            if size <= EXACT_CUT_LIMIT {
                CohesivenessMode::Exact
            } else {
                CohesivenessMode::Approx
            }
        }
    }
}

/// One goodness metric for every community, in community order.
fn goodness_column(
    graph: &Graph,
    comms: &CommunitySet,
    id: GoodnessId,
    choice: CohesionMode,
) -> Result<Vec<f64>> {
    let values: commscore_core::Result<Vec<f64>> = comms
        .communities
        .par_iter()
        .map(|set| compute_goodness(graph, set, id, cohesion_mode(choice, set.len())))
        .collect();
    Ok(values?)
}

pub(crate) fn score(args: ScoreArgs) -> Result<()> {
    let graph = load_graph(&args.graph.graph)?;
    let comms =
        load_community_file(&args.communities.communities, &graph, args.communities.min_size)?;
    let ids = scores_or_all(&args.scores);
    let matrix = score_all(&graph, &comms, &ids);

    let mut out = open_out(args.out.as_deref())?;
    write!(out, "community\tsize")?;
    for id in &ids {
        write!(out, "\t{id}")?;
    }
    writeln!(out)?;
    for (i, set) in comms.communities.iter().enumerate() {
        write!(out, "{i}\t{}", set.len())?;
        for j in 0..ids.len() {
            write!(out, "\t{}", matrix.get(i, j))?;
        }
        writeln!(out)?;
    }
    Ok(out.flush()?)
}

pub(crate) fn goodness(args: GoodnessArgs) -> Result<()> {
    let graph = load_graph(&args.graph.graph)?;
    let comms =
        load_community_file(&args.communities.communities, &graph, args.communities.min_size)?;
    let ids = metrics_or_all(&args.metrics);
    let columns: Vec<Vec<f64>> = ids
        .iter()
        .map(|&id| goodness_column(&graph, &comms, id, args.cohesiveness))
        .collect::<Result<_>>()?;

    let mut out = open_out(args.out.as_deref())?;
    write!(out, "community\tsize")?;
    for id in &ids {
        write!(out, "\t{id}")?;
    }
    writeln!(out)?;
    for (i, set) in comms.communities.iter().enumerate() {
        write!(out, "{i}\t{}", set.len())?;
        for column in &columns {
            write!(out, "\t{}", column[i])?;
        }
        writeln!(out)?;
    }
    Ok(out.flush()?)
}

pub(crate) fn rank(args: RankArgs) -> Result<()> {
    let graph = load_graph(&args.graph.graph)?;
    let mut comms =
        load_community_file(&args.communities.communities, &graph, args.communities.min_size)?;
    let score_ids = scores_or_all(&args.scores);
    let metric_ids = metrics_or_all(&args.metrics);

    let mut matrix = score_all(&graph, &comms, &score_ids);
    if let Some(k) = args.top_k {
        let keep = top_k_by_average_rank(&matrix, k);
        let subset: Vec<NodeSet> = keep.iter().map(|&i| comms.communities[i].clone()).collect();
        comms = CommunitySet::new(subset, comms.source);
        matrix = score_all(&graph, &comms, &score_ids);
    }
    let population = comms.len();

    let orderings: Vec<Vec<usize>> = score_ids
        .iter()
        .enumerate()
        .map(|(j, &sid)| rank_communities(&matrix.column(j), sid.orientation()))
        .collect();

    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    let rows = downsample_indices(population, args.max_points);

    let mut table_columns: Vec<(GoodnessId, Vec<RankCurve>)> = Vec::new();
    for &gid in &metric_ids {
        let g = goodness_column(&graph, &comms, gid, args.cohesiveness)?;
        let upper = upper_bound_curve(&g);
        let curves: Vec<RankCurve> = score_ids
            .iter()
            .enumerate()
            .map(|(j, &sid)| cumulative_goodness_curve(&orderings[j], &g, CurveId::Score(sid)))
            .collect();

        let path = args.out_dir.join(format!("rank_{gid}.tsv"));
        let mut out = BufWriter::new(
            File::create(&path).with_context(|| format!("creating {}", path.display()))?,
        );
        write!(out, "k\t{}", upper.curve_id)?;
        for curve in &curves {
            write!(out, "\t{}", curve.curve_id)?;
        }
        writeln!(out)?;
        for &i in &rows {
            write!(out, "{}\t{}", upper.k_values[i], upper.cum_avg[i])?;
            for curve in &curves {
                write!(out, "\t{}", curve.cum_avg[i])?;
            }
            writeln!(out)?;
        }
        out.flush()?;
        table_columns.push((gid, curves));
    }

    let table = average_rank_table(&table_columns)?;
    let path = args.out_dir.join("avg_rank.tsv");
    let mut out = BufWriter::new(
        File::create(&path).with_context(|| format!("creating {}", path.display()))?,
    );
    write!(out, "score")?;
    for gid in &table.goodness_ids {
        write!(out, "\t{gid}")?;
    }
    writeln!(out)?;
    for (si, sid) in table.score_ids.iter().enumerate() {
        write!(out, "{sid}")?;
        for gi in 0..table.goodness_ids.len() {
            write!(out, "\t{}", table.entries[si][gi])?;
        }
        writeln!(out)?;
    }
    Ok(out.flush()?)
}

pub(crate) fn correlate(args: CorrelateArgs) -> Result<()> {
    let graph = load_graph(&args.graph.graph)?;
    let comms =
        load_community_file(&args.communities.communities, &graph, args.communities.min_size)?;
    let ids = scores_or_all(&args.scores);
    let matrix = score_all(&graph, &comms, &ids);
    let corr = correlation_matrix(&matrix);
    let groups = threshold_clusters(&corr, args.tau);

    let mut out = open_out(args.out.as_deref())?;
    write!(out, "score")?;
    for id in &ids {
        write!(out, "\t{id}")?;
    }
    writeln!(out)?;
    for (i, id) in ids.iter().enumerate() {
        write!(out, "{id}")?;
        for j in 0..ids.len() {
            write!(out, "\t{}", corr.get(i, j))?;
        }
        writeln!(out)?;
    }
    out.flush()?;

    let mut gout = open_out(args.groups_out.as_deref())?;
    if args.out.is_none() && args.groups_out.is_none() {
        writeln!(gout)?;
    }
    writeln!(gout, "group\tscores")?;
    for (gi, members) in groups.iter().enumerate() {
        let tokens: Vec<&str> = members.iter().map(|&i| ids[i].token()).collect();
        writeln!(gout, "{gi}\t{}", tokens.join(" "))?;
    }
    Ok(gout.flush()?)
}

pub(crate) fn perturb(args: PerturbArgs) -> Result<()> {
    let graph = load_graph(&args.graph.graph)?;
    let comms =
        load_community_file(&args.communities.communities, &graph, args.communities.min_size)?;
    let ids = scores_or_all(&args.score);
    let strategies = strategies_or_all(&args.strategy);

    let mut out = open_out(args.out.as_deref())?;
    writeln!(out, "score\tstrategy\tp\tz\tdegenerate")?;
    for &id in &ids {
        for &strategy in &strategies {
            for &p in &args.grid.0 {
                let spec = PerturbSpec::new(strategy, p)
                    .with_trials(args.trials)
                    .with_seed(args.common.seed_rng);
                let report = zscore(&graph, &comms, id, &spec)?;
                writeln!(out, "{id}\t{strategy}\t{p}\t{}\t{}", report.z, report.degenerate)?;
            }
        }
    }
    Ok(out.flush()?)
}

pub(crate) fn detect(args: DetectArgs) -> Result<()> {
    let graph = load_graph(&args.graph.graph)?;
    let seed = graph
        .internal_id(args.seed)
        .ok_or_else(|| anyhow!("seed node {} is not in the graph", args.seed))?;
    let opts =
        DetectOptions { teleport: args.alpha_pr, epsilon: args.eps, confirmation: args.alpha };
    let score = if args.lc { ScoreId::Conductance } else { args.score };
    let found = detect_all_communities(&graph, seed, score, &opts)?;

    if let Some(path) = &args.curve {
        let mut out = BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        );
        writeln!(out, "k\t{}", found.curve.score_id())?;
        for (i, value) in found.curve.values().iter().enumerate() {
            writeln!(out, "{}\t{value}", i + 1)?;
        }
        out.flush()?;
    }

    let mut out = open_out(None)?;
    if args.lc {
        let set = detect_lc_baseline(&graph, seed, &opts)?;
        writeln!(out, "{}", external_line(&graph, &set))?;
    } else if args.all {
        for set in &found.communities {
            writeln!(out, "{}", external_line(&graph, set))?;
        }
    } else {
        writeln!(out, "{}", external_line(&graph, &found.communities[0]))?;
    }
    Ok(out.flush()?)
}

struct SeedRow {
    seed: u64,
    truth: usize,
    detected: usize,
    precision: f64,
    recall: f64,
    f1: f64,
    f1_over_truth: f64,
}

pub(crate) fn eval_seed(args: EvalSeedArgs) -> Result<()> {
    let graph = load_graph(&args.graph.graph)?;
    let comms =
        load_community_file(&args.communities.communities, &graph, args.communities.min_size)?;
    let opts =
        DetectOptions { teleport: args.alpha_pr, epsilon: args.eps, confirmation: args.alpha };

    let mut containing: Vec<Vec<usize>> = vec![Vec::new(); graph.node_count()];
    for (ci, set) in comms.communities.iter().enumerate() {
        for &u in set.members() {
            containing[u].push(ci);
        }
    }

    let seeds: Vec<NodeId> = match args.seed {
        Some(ext) => {
            let s = graph
                .internal_id(ext)
                .ok_or_else(|| anyhow!("seed node {ext} is not in the graph"))?;
            if containing[s].is_empty() {
                bail!("seed node {ext} belongs to no community");
            }
            vec![s]
        }
        None => {
            let eligible: Vec<NodeId> =
                (0..graph.node_count()).filter(|&u| !containing[u].is_empty()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(args.common.seed_rng);
            let mut chosen: Vec<NodeId> =
                eligible.choose_multiple(&mut rng, args.seeds).copied().collect();
            chosen.sort_unstable_by_key(|&u| graph.external_id(u));
            chosen
        }
    };

    let rows: commscore_core::Result<Vec<SeedRow>> = seeds
        .par_iter()
        .map(|&s| {
            let truth: Vec<NodeSet> =
                containing[s].iter().map(|&ci| comms.communities[ci].clone()).collect();
            let detected: Vec<NodeSet> = if args.all {
                detect_all_communities(&graph, s, args.score, &opts)?.communities
            } else {
                vec![detect_community(&graph, s, args.score, &opts)?]
            };
            let matching = eval_seed_run(&truth, &detected);
            let mut precision = 0.0;
            let mut recall = 0.0;
            for &(r, c) in &matching.pairs {
                let triple = prf(&detected[c], &truth[r]);
                precision += triple.precision;
                recall += triple.recall;
            }
            let pairs = matching.pairs.len().max(1) as f64;
            Ok(SeedRow {
                seed: graph.external_id(s),
                truth: truth.len(),
                detected: detected.len(),
                precision: precision / pairs,
                recall: recall / pairs,
                f1: matching.total_f1,
                f1_over_truth: matching.total_f1 * matching.pairs.len() as f64
                    / truth.len() as f64,
            })
        })
        .collect();
    let rows = rows?;

    let mut out = open_out(args.out.as_deref())?;
    writeln!(out, "seed\ttruth\tdetected\tprecision\trecall\tf1\tf1_over_truth")?;
    for row in &rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            row.seed, row.truth, row.detected, row.precision, row.recall, row.f1,
            row.f1_over_truth
        )?;
    }
    let n = rows.len() as f64;
    let mean = |f: fn(&SeedRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
    writeln!(
        out,
        "mean\t{}\t{}\t{}\t{}\t{}\t{}",
        mean(|r| r.truth as f64),
        mean(|r| r.detected as f64),
        mean(|r| r.precision),
        mean(|r| r.recall),
        mean(|r| r.f1),
        mean(|r| r.f1_over_truth)
    )?;
    Ok(out.flush()?)
}

pub(crate) fn synth(args: SynthArgs) -> Result<()> {
    let (graph, comms) = if args.sizes.is_empty() {
        synth_planted_partition(&PlantedPartitionSpec {
            num_communities: args.blocks,
            community_size: args.block_size,
            p_in: args.p_in,
            p_out: args.p_out,
            rng_seed: args.common.seed_rng,
        })?
    } else {
        planted_partition_with_sizes(&args.sizes, args.p_in, args.p_out, args.common.seed_rng)?
    };

    let mut gout = BufWriter::new(
        File::create(&args.graph_out)
            .with_context(|| format!("creating {}", args.graph_out.display()))?,
    );
    graph.write_edge_list(&mut gout)?;
    gout.flush()?;

    let mut cout = BufWriter::new(
        File::create(&args.communities_out)
            .with_context(|| format!("creating {}", args.communities_out.display()))?,
    );
    for set in &comms.communities {
        writeln!(cout, "{}", external_line(&graph, set))?;
    }
    cout.flush()?;

    let mut out = open_out(None)?;
    writeln!(out, "nodes\tedges\tcommunities")?;
    writeln!(out, "{}\t{}\t{}", graph.node_count(), graph.edge_count(), comms.len())?;
    Ok(out.flush()?)
}

pub(crate) fn stats(args: StatsArgs) -> Result<()> {
    let graph = load_graph(&args.graph.graph)?;
    let mut out = open_out(args.out.as_deref())?;
    match &args.communities {
        None => {
            writeln!(out, "nodes\tedges\tmedian_degree")?;
            writeln!(
                out,
                "{}\t{}\t{}",
                graph.node_count(),
                graph.edge_count(),
                graph.median_degree()
            )?;
        }
        Some(path) => {
            let comms = load_community_file(path, &graph, args.min_size)?;
            let sizes: Vec<usize> = comms.communities.iter().map(NodeSet::len).collect();
            let mean = sizes.iter().sum::<usize>() as f64 / sizes.len() as f64;
            writeln!(
                out,
                "nodes\tedges\tmedian_degree\tcommunities\tmin_size\tmax_size\tmean_size"
            )?;
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{mean}",
                graph.node_count(),
                graph.edge_count(),
                graph.median_degree(),
                comms.len(),
                sizes.iter().min().unwrap(),
                sizes.iter().max().unwrap()
            )?;
        }
    }
    Ok(out.flush()?)
}
