//! Agreement between detected and ground-truth communities: per-pair
//! precision/recall/F1 and an optimal one-to-one assignment between the two
//! collections that maximizes total F1.

use crate::graph::NodeSet;

/// Precision, recall and F1 of a detected set against a reference set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrfTriple {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Overlap-based precision/recall/F1. Precision is the fraction of the
/// detected set inside the reference; recall the fraction of the reference
/// covered. F1 is 0 when both are 0.
pub fn prf(detected: &NodeSet, reference: &NodeSet) -> PrfTriple {
    let inter = intersection_size(detected.members(), reference.members()) as f64;
    let precision = inter / detected.len() as f64;
    let recall = inter / reference.len() as f64;
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    PrfTriple { precision, recall, f1 }
}

fn intersection_size(a: &[usize], b: &[usize]) -> usize {
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

/// An optimal assignment between reference rows and detected columns.
#[derive(Clone, Debug)]
pub struct Matching {
    /// (row, column) pairs sorted by row; min(rows, cols) of them.
    pub pairs: Vec<(usize, usize)>,
    /// Mean F1 over the matched pairs; 0 when nothing was matched.
    pub total_f1: f64,
}

/// Maximum-total-F1 one-to-one assignment over an F1 matrix (rows =
/// reference communities, columns = detected). Every row entry must lie in
/// [0, 1]. The smaller collection is matched completely.
pub fn hungarian_match(f1: &[Vec<f64>]) -> Matching {
    let rows = f1.len();
    let cols = f1.first().map_or(0, |r| r.len());
    if rows == 0 || cols == 0 {
        return Matching { pairs: Vec::new(), total_f1: 0.0 };
    }
    debug_assert!(f1.iter().all(|r| r.len() == cols));
    debug_assert!(f1.iter().flatten().all(|&x| (0.0..=1.0).contains(&x)));

    // assignment minimizes cost 1 - F1 with rows <= cols; transpose if needed
    let transposed = rows > cols;
    let (n, m) = if transposed { (cols, rows) } else { (rows, cols) };
    let cost = |i: usize, j: usize| {
        if transposed {
            1.0 - f1[j][i]
        } else {
            1.0 - f1[i][j]
        }
    };
    let row_to_col = assign_min_cost(n, m, cost);

    let mut pairs: Vec<(usize, usize)> = row_to_col
        .into_iter()
        .enumerate()
        .map(|(i, j)| if transposed { (j, i) } else { (i, j) })
        .collect();
    pairs.sort_unstable();
    let total: f64 = pairs.iter().map(|&(r, c)| f1[r][c]).sum();
    Matching { total_f1: total / pairs.len() as f64, pairs }
}

/// Jonker-style shortest augmenting path assignment with row/column
/// potentials; O(n^2 m) for n rows and m >= n columns.
fn assign_min_cost(n: usize, m: usize, cost: impl Fn(usize, usize) -> f64) -> Vec<usize> {
    // 1-based arrays; p[j] holds the row matched to column j (0 = free)
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![usize::MAX; n];
    for j in 1..=m {
        if p[j] != 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    row_to_col
}

/// Scores a detection run against ground truth: builds the F1 matrix
/// (reference rows, detected columns) and matches it optimally. An empty
/// detected collection scores 0 with no pairs.
pub fn eval_seed_run(reference: &[NodeSet], detected: &[NodeSet]) -> Matching {
    let f1: Vec<Vec<f64>> =
        reference.iter().map(|t| detected.iter().map(|d| prf(d, t).f1).collect()).collect();
    hungarian_match(&f1)
}
