//! Rank-based evaluation of scoring functions: order communities by a
//! score, accumulate a goodness metric along that order, compare against
//! the best possible order, and condense many such curves into average
//! ranks. Also Pearson correlation between score columns and grouping of
//! scores by correlation threshold.

use crate::error::{Error, Result};
use crate::goodness::GoodnessId;
use crate::scoring::{Orientation, ScoreId, ScoreMatrix};

/// Default population cap when selecting communities by average rank.
pub const DEFAULT_TOP_K: usize = 5000;
/// Default correlation needed to place two scores in the same group.
pub const DEFAULT_CORRELATION_THRESHOLD: f64 = 0.6;

/// Community indices ordered best-first under the given orientation.
/// Equal values keep their input order.
pub fn rank_communities(values: &[f64], orientation: Orientation) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    match orientation {
        Orientation::BetterLow => idx.sort_by(|&a, &b| values[a].total_cmp(&values[b])),
        Orientation::BetterHigh => idx.sort_by(|&a, &b| values[b].total_cmp(&values[a])),
    }
    idx
}

/// What produced a rank curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveId {
    Score(ScoreId),
    /// The pointwise-best achievable curve for the goodness values.
    UpperBound,
}

impl std::fmt::Display for CurveId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CurveId::Score(id) => f.write_str(id.token()),
            CurveId::UpperBound => f.write_str("upper-bound"),
        }
    }
}

/// Running average of a goodness metric over the first k communities of
/// some ordering, for k = 1..=n.
#[derive(Clone, Debug)]
pub struct RankCurve {
    pub curve_id: CurveId,
    pub k_values: Vec<usize>,
    pub cum_avg: Vec<f64>,
}

/// Accumulates `goodness` along `ordering`. `ordering` must be a
/// permutation of the community indices.
pub fn cumulative_goodness_curve(
    ordering: &[usize],
    goodness: &[f64],
    curve_id: CurveId,
) -> RankCurve {
    assert_eq!(ordering.len(), goodness.len(), "ordering does not cover the population");
    debug_assert!({
        let mut seen = vec![false; goodness.len()];
        ordering.iter().all(|&i| i < goodness.len() && !std::mem::replace(&mut seen[i], true))
    });
    let mut sum = 0.0;
    let mut cum_avg = Vec::with_capacity(ordering.len());
    for (k, &i) in ordering.iter().enumerate() {
        sum += goodness[i];
        cum_avg.push(sum / (k + 1) as f64);
    }
    RankCurve { curve_id, k_values: (1..=ordering.len()).collect(), cum_avg }
}

/// The best cumulative curve any ordering can achieve: sort the goodness
/// values themselves in decreasing order and accumulate.
pub fn upper_bound_curve(goodness: &[f64]) -> RankCurve {
    let ordering = rank_communities(goodness, Orientation::BetterHigh);
    cumulative_goodness_curve(&ordering, goodness, CurveId::UpperBound)
}

/// Average rank of each score under each goodness metric, over all prefix
/// sizes k: at each k the score curves are ranked by cumulative average
/// (higher is better, ties share the mean position) and the ranks averaged.
#[derive(Clone, Debug)]
pub struct AvgRankTable {
    pub score_ids: Vec<ScoreId>,
    pub goodness_ids: Vec<GoodnessId>,
    /// entries[score][goodness]
    pub entries: Vec<Vec<f64>>,
}

pub fn average_rank_table(columns: &[(GoodnessId, Vec<RankCurve>)]) -> Result<AvgRankTable> {
    let first = columns.first().ok_or(Error::GridMismatch)?;
    let score_ids: Vec<ScoreId> = first
        .1
        .iter()
        .map(|c| match c.curve_id {
            CurveId::Score(id) => Ok(id),
            CurveId::UpperBound => Err(Error::GridMismatch),
        })
        .collect::<Result<_>>()?;
    let grid = &first.1.first().ok_or(Error::GridMismatch)?.k_values;
    for (_, curves) in columns {
        if curves.len() != score_ids.len() {
            return Err(Error::GridMismatch);
        }
        for (curve, &id) in curves.iter().zip(&score_ids) {
            if curve.curve_id != CurveId::Score(id) || &curve.k_values != grid {
                return Err(Error::GridMismatch);
            }
        }
    }

    let goodness_ids: Vec<GoodnessId> = columns.iter().map(|&(g, _)| g).collect();
    let mut entries = vec![vec![0.0; goodness_ids.len()]; score_ids.len()];
    for (gi, (_, curves)) in columns.iter().enumerate() {
        let mut sums = vec![0.0; score_ids.len()];
        for ki in 0..grid.len() {
            let at_k: Vec<f64> = curves.iter().map(|c| c.cum_avg[ki]).collect();
            for (si, rank) in fractional_ranks(&at_k).into_iter().enumerate() {
                sums[si] += rank;
            }
        }
        for (si, sum) in sums.into_iter().enumerate() {
            entries[si][gi] = sum / grid.len() as f64;
        }
    }
    Ok(AvgRankTable { score_ids, goodness_ids, entries })
}

/// 1-based ranks with higher values first; tied values share the mean of
/// the positions they occupy.
fn fractional_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let shared = (i + 1 + j + 1) as f64 / 2.0;
        for t in i..=j {
            ranks[idx[t]] = shared;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation between every pair of score columns.
#[derive(Clone, Debug)]
pub struct CorrelationMatrix {
    pub score_ids: Vec<ScoreId>,
    /// Row-major, score_ids.len() squared.
    pub values: Vec<f64>,
}

impl CorrelationMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.score_ids.len() + j]
    }
}

/// Correlates raw score columns. The diagonal is exactly 1; a column with
/// zero variance correlates 0 with everything else.
pub fn correlation_matrix(matrix: &ScoreMatrix) -> CorrelationMatrix {
    let s = matrix.score_ids().len();
    let n = matrix.rows();
    let centered: Vec<Vec<f64>> = (0..s)
        .map(|j| {
            let col = matrix.column(j);
            let mean = col.iter().sum::<f64>() / n.max(1) as f64;
            col.into_iter().map(|x| x - mean).collect()
        })
        .collect();
    let norms: Vec<f64> =
        centered.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let mut values = vec![0.0; s * s];
    for i in 0..s {
        for j in 0..s {
            values[i * s + j] = if i == j {
                1.0
            } else if norms[i] == 0.0 || norms[j] == 0.0 {
                0.0
            } else {
                let dot: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
                dot / (norms[i] * norms[j])
            };
        }
    }
    CorrelationMatrix { score_ids: matrix.score_ids().to_vec(), values }
}

/// Connected components of the graph whose edges join score pairs with
/// correlation at least `tau`. Components are sorted internally and listed
/// by their smallest member.
pub fn threshold_clusters(corr: &CorrelationMatrix, tau: f64) -> Vec<Vec<usize>> {
    let s = corr.score_ids.len();
    let mut seen = vec![false; s];
    let mut clusters = Vec::new();
    for start in 0..s {
        if seen[start] {
            continue;
        }
        let mut component = vec![start];
        seen[start] = true;
        let mut frontier = vec![start];
        while let Some(i) = frontier.pop() {
            for j in 0..s {
                if !seen[j] && corr.get(i, j) >= tau {
                    seen[j] = true;
                    component.push(j);
                    frontier.push(j);
                }
            }
        }
        component.sort_unstable();
        clusters.push(component);
    }
    clusters
}

/// Indices of the `k` communities with the best (smallest) mean 1-based
/// rank position across all score columns; ties break toward the smaller
/// index.
pub fn top_k_by_average_rank(matrix: &ScoreMatrix, k: usize) -> Vec<usize> {
    let n = matrix.rows();
    let mut sums = vec![0.0; n];
    for (j, id) in matrix.score_ids().iter().enumerate() {
        let order = rank_communities(&matrix.column(j), id.orientation());
        for (pos, &c) in order.iter().enumerate() {
            sums[c] += (pos + 1) as f64;
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| sums[a].total_cmp(&sums[b]).then(a.cmp(&b)));
    idx.truncate(k.min(n));
    idx
}

/// At most `max_points` indices into a curve of length `len`, spaced
/// geometrically and always keeping the first and last point.
pub fn downsample_indices(len: usize, max_points: usize) -> Vec<usize> {
    assert!(max_points >= 2);
    if len <= max_points {
        return (0..len).collect();
    }
    let mut out = Vec::with_capacity(max_points);
    for i in 0..max_points {
        let t = i as f64 / (max_points - 1) as f64;
        let x = (len as f64).powf(t);
        let idx = (x.round() as usize).min(len) - 1;
        if out.last() != Some(&idx) {
            out.push(idx);
        }
    }
    out
}
