//! Command-line frontend: scoring, goodness metrics, ranking curves,
//! score correlation, perturbation robustness, seed-set detection,
//! detection evaluation and a planted-partition generator.
//!
//! Every table is TSV with a header row. `--seed-rng` pins all random
//! choices; `--threads` (or `COMMSCORE_THREADS`) only changes how fast
//! answers arrive, never what they are. Exit codes: 0 success, 1 I/O or
//! data error, 2 usage error.

mod commands;

use std::num::NonZeroUsize;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use commscore_core::detect::{DEFAULT_CONFIRMATION, DEFAULT_EPSILON, DEFAULT_TELEPORT};
use commscore_core::goodness::GoodnessId;
use commscore_core::perturb::{Strategy, DEFAULT_TRIALS};
use commscore_core::rank::DEFAULT_CORRELATION_THRESHOLD;
use commscore_core::scoring::ScoreId;

#[derive(Parser)]
#[command(name = "commscore", version, about = "Community scoring, robustness and detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score communities with the scoring functions (TSV to stdout).
    Score(ScoreArgs),
    /// Evaluate goodness metrics over communities (TSV to stdout).
    Goodness(GoodnessArgs),
    /// Cumulative goodness curves per score ordering plus the average-rank
    /// table, written into a directory.
    Rank(RankArgs),
    /// Correlation matrix of the scoring functions and its threshold groups.
    Correlate(CorrelateArgs),
    /// Robustness Z-scores under community perturbation over an intensity
    /// grid.
    Perturb(PerturbArgs),
    /// Detect the community of a seed node (node-id line to stdout).
    Detect(DetectArgs),
    /// Detect from seed nodes and compare against ground truth.
    EvalSeed(EvalSeedArgs),
    /// Generate a planted-partition benchmark graph and its ground truth.
    Synth(SynthArgs),
    /// Graph and community summary statistics.
    Stats(StatsArgs),
}

/// Flags shared by every subcommand.
#[derive(Args, Clone)]
struct Common {
    /// Seed for every random choice the command makes.
    #[arg(long, default_value_t = 0)]
    seed_rng: u64,
    /// Worker threads (default: COMMSCORE_THREADS, else all cores).
    #[arg(long)]
    threads: Option<NonZeroUsize>,
}

#[derive(Args)]
struct GraphInput {
    /// Edge-list file: one `u v` pair per line, `#` starts a comment.
    #[arg(long)]
    graph: PathBuf,
}

#[derive(Args)]
struct CommunityInput {
    /// Community file: one community per line, whitespace-separated node
    /// ids. Groups are split into connected components on load.
    #[arg(long)]
    communities: PathBuf,
    /// Drop communities smaller than this after splitting.
    #[arg(long, default_value_t = 1)]
    min_size: usize,
}

/// How the cohesiveness metric resolves its internal minimum cut.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CohesionMode {
    /// Exact for small communities, sweep-based above the exact limit.
    Auto,
    /// Exhaustive cut enumeration; errors on large communities.
    Exact,
    /// Sweep-based upper bound for any size.
    Approx,
}

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    graph: GraphInput,
    #[command(flatten)]
    communities: CommunityInput,
    /// Comma-separated score names (default: all).
    #[arg(long, value_delimiter = ',')]
    scores: Vec<ScoreId>,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct GoodnessArgs {
    #[command(flatten)]
    graph: GraphInput,
    #[command(flatten)]
    communities: CommunityInput,
    /// Comma-separated metric names (default: all).
    #[arg(long, value_delimiter = ',')]
    metrics: Vec<GoodnessId>,
    /// Minimum-cut mode for cohesiveness.
    #[arg(long, value_enum, default_value_t = CohesionMode::Auto)]
    cohesiveness: CohesionMode,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct RankArgs {
    #[command(flatten)]
    graph: GraphInput,
    #[command(flatten)]
    communities: CommunityInput,
    /// Comma-separated score names (default: all).
    #[arg(long, value_delimiter = ',')]
    scores: Vec<ScoreId>,
    /// Comma-separated goodness metric names (default: all).
    #[arg(long, value_delimiter = ',')]
    metrics: Vec<GoodnessId>,
    /// Minimum-cut mode for cohesiveness.
    #[arg(long, value_enum, default_value_t = CohesionMode::Auto)]
    cohesiveness: CohesionMode,
    /// Restrict the population to the k communities with the best mean
    /// rank across the selected scores (default: full population).
    #[arg(long, value_parser = positive_usize)]
    top_k: Option<usize>,
    /// Downsample curve files above this many rows.
    #[arg(long, default_value_t = 10_000, value_parser = at_least_two)]
    max_points: usize,
    /// Directory for the per-metric curve files and avg_rank.tsv.
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CorrelateArgs {
    #[command(flatten)]
    graph: GraphInput,
    #[command(flatten)]
    communities: CommunityInput,
    /// Comma-separated score names (default: all).
    #[arg(long, value_delimiter = ',')]
    scores: Vec<ScoreId>,
    /// Correlation threshold for grouping.
    #[arg(long, default_value_t = DEFAULT_CORRELATION_THRESHOLD)]
    tau: f64,
    /// Write the correlation matrix here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the threshold groups here instead of stdout.
    #[arg(long)]
    groups_out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct PerturbArgs {
    #[command(flatten)]
    graph: GraphInput,
    #[command(flatten)]
    communities: CommunityInput,
    /// Comma-separated score names (default: all).
    #[arg(long, value_delimiter = ',')]
    score: Vec<ScoreId>,
    /// Comma-separated strategy names (default: all).
    #[arg(long, value_delimiter = ',')]
    strategy: Vec<Strategy>,
    /// Intensity grid `lo:hi:n`, linearly spaced in (0, 1].
    #[arg(long, value_parser = parse_grid, default_value = "0.01:0.6:12")]
    grid: Grid,
    /// Perturbed samples per community and intensity.
    #[arg(long, default_value_t = DEFAULT_TRIALS, value_parser = positive_usize)]
    trials: usize,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    graph: GraphInput,
    /// Seed node (external id).
    #[arg(long)]
    seed: u64,
    /// Score driving the sweep.
    #[arg(long, default_value_t = ScoreId::Conductance)]
    score: ScoreId,
    /// Emit every nested community, one line each, smallest first.
    #[arg(long)]
    all: bool,
    /// Baseline: the globally best conductance prefix instead of the first
    /// confirmed local minimum.
    #[arg(long, conflicts_with = "all")]
    lc: bool,
    /// Teleport probability of the random walk.
    #[arg(long, default_value_t = DEFAULT_TELEPORT)]
    alpha_pr: f64,
    /// Per-degree residual truncation threshold.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    eps: f64,
    /// Confirmation factor for sweep minima.
    #[arg(long, default_value_t = DEFAULT_CONFIRMATION)]
    alpha: f64,
    /// Also write the sweep curve as a (k, value) TSV file.
    #[arg(long)]
    curve: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct EvalSeedArgs {
    #[command(flatten)]
    graph: GraphInput,
    #[command(flatten)]
    communities: CommunityInput,
    /// Number of seed nodes sampled from community members.
    #[arg(long, default_value_t = 30, value_parser = positive_usize)]
    seeds: usize,
    /// Evaluate this one seed node (external id) instead of sampling.
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Score driving the sweep.
    #[arg(long, default_value_t = ScoreId::Conductance)]
    score: ScoreId,
    /// Match every nested detected community, not just the first.
    #[arg(long)]
    all: bool,
    /// Teleport probability of the random walk.
    #[arg(long, default_value_t = DEFAULT_TELEPORT)]
    alpha_pr: f64,
    /// Per-degree residual truncation threshold.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    eps: f64,
    /// Confirmation factor for sweep minima.
    #[arg(long, default_value_t = DEFAULT_CONFIRMATION)]
    alpha: f64,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SynthArgs {
    /// Number of planted blocks.
    #[arg(long, default_value_t = 10, value_parser = positive_usize)]
    blocks: usize,
    /// Nodes per block.
    #[arg(long, default_value_t = 20, value_parser = positive_usize)]
    block_size: usize,
    /// Explicit comma-separated block sizes (overrides --blocks/--block-size).
    #[arg(long, value_delimiter = ',', value_parser = positive_usize)]
    sizes: Vec<usize>,
    /// Edge probability inside a block.
    #[arg(long, default_value_t = 0.5)]
    p_in: f64,
    /// Edge probability between blocks.
    #[arg(long, default_value_t = 0.01)]
    p_out: f64,
    /// Where to write the edge list.
    #[arg(long)]
    graph_out: PathBuf,
    /// Where to write the ground-truth communities.
    #[arg(long)]
    communities_out: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    graph: GraphInput,
    /// Optional community file to summarize alongside the graph.
    #[arg(long)]
    communities: Option<PathBuf>,
    /// Drop communities smaller than this after splitting.
    #[arg(long, default_value_t = 1)]
    min_size: usize,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

/// A parsed `lo:hi:n` intensity grid.
#[derive(Clone, Debug)]
struct Grid(Vec<f64>);

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        return Err(format!("expected lo:hi:n, got `{s}`"));
    };
    let lo: f64 = lo.parse().map_err(|e| format!("bad grid start: {e}"))?;
    let hi: f64 = hi.parse().map_err(|e| format!("bad grid end: {e}"))?;
    let n: usize = n.parse().map_err(|e| format!("bad grid count: {e}"))?;
    if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
        return Err(format!("grid must satisfy 0 < lo <= hi <= 1, got {lo}:{hi}"));
    }
    if n == 0 {
        return Err("grid needs at least one point".into());
    }
    if n == 1 {
        return Ok(Grid(vec![lo]));
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok(Grid((0..n).map(|i| lo + step * i as f64).collect()))
}

fn positive_usize(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|e| format!("{e}"))?;
    if v == 0 {
        return Err("must be positive".into());
    }
    Ok(v)
}

fn at_least_two(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|e| format!("{e}"))?;
    if v < 2 {
        return Err("must be at least 2".into());
    }
    Ok(v)
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Score(a) => &a.common,
            Command::Goodness(a) => &a.common,
            Command::Rank(a) => &a.common,
            Command::Correlate(a) => &a.common,
            Command::Perturb(a) => &a.common,
            Command::Detect(a) => &a.common,
            Command::EvalSeed(a) => &a.common,
            Command::Synth(a) => &a.common,
            Command::Stats(a) => &a.common,
        }
    }
}

fn thread_count(cli: Option<NonZeroUsize>) -> Result<Option<usize>> {
    if let Some(t) = cli {
        return Ok(Some(t.get()));
    }
    match std::env::var("COMMSCORE_THREADS") {
        Ok(v) => {
            let t: NonZeroUsize =
                v.parse().with_context(|| format!("COMMSCORE_THREADS=`{v}`"))?;
            Ok(Some(t.get()))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(e).context("COMMSCORE_THREADS"),
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Score(a) => commands::score(a),
        Command::Goodness(a) => commands::goodness(a),
        Command::Rank(a) => commands::rank(a),
        Command::Correlate(a) => commands::correlate(a),
        Command::Perturb(a) => commands::perturb(a),
        Command::Detect(a) => commands::detect(a),
        Command::EvalSeed(a) => commands::eval_seed(a),
        Command::Synth(a) => commands::synth(a),
        Command::Stats(a) => commands::stats(a),
    }
}

fn run(command: Command) -> Result<()> {
    match thread_count(command.common().threads)? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building the worker pool")?
            .install(|| dispatch(command)),
        None => dispatch(command),
    }
}

/// True when the root cause is the read end of a pipe going away, e.g.
/// `commscore score ... | head`.
fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        cause
            .downcast_ref::<std::io::Error>()
            .is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe)
    })
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli.command) {
        if is_broken_pipe(&err) {
            return;
        }
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
