//! Nearest-neighbour baseline on shared-parasite counts.
//!
//! For cell `(h, j)` the neighbourhood of `h` is every other host whose
//! count of parasites shared with `h` (parasite `j` excluded) is among the
//! `k` highest distinct positive counts. The prediction is the fraction of
//! the neighbourhood documented on `j`, or 0 for an empty neighbourhood.

use rayon::prelude::*;

use crate::interactions::InteractionMatrix;

use super::roc::mann_whitney_auc;
use super::EvalError;

fn shared_counts(z: &InteractionMatrix) -> Vec<u32> {
    let h_n = z.n_hosts();
    let mut s = vec![0u32; h_n * h_n];
    for j in 0..z.n_parasites() {
        let ones = z.column_ones(j);
        for &a in &ones {
            for &b in &ones {
                if a != b {
                    s[a * h_n + b] += 1;
                }
            }
        }
    }
    s
}

/// Predictions for `cells` at every `k` in `1..=k_max`; `out[k - 1][c]`.
pub fn nn_predict_all_k(z: &InteractionMatrix, cells: &[(usize, usize)], k_max: usize) -> Vec<Vec<f64>> {
    let h_n = z.n_hosts();
    let shared = shared_counts(z);
    let per_cell: Vec<Vec<f64>> = cells
        .par_iter()
        .map(|&(h, j)| {
            let zh = z.get(h, j);
            // (count, documented on j), for hosts with a positive count.
            let mut nbrs: Vec<(u32, bool)> = (0..h_n)
                .filter(|&i| i != h)
                .filter_map(|i| {
                    let zi = z.get(i, j);
                    let c = shared[h * h_n + i] - u32::from(zh && zi);
                    (c > 0).then_some((c, zi))
                })
                .collect();
            nbrs.sort_unstable_by(|a, b| b.0.cmp(&a.0));
            let mut out = Vec::with_capacity(k_max);
            let (mut n, mut ones, mut i) = (0usize, 0usize, 0usize);
            for _ in 0..k_max {
                if i < nbrs.len() {
                    let level = nbrs[i].0;
                    while i < nbrs.len() && nbrs[i].0 == level {
                        n += 1;
                        ones += usize::from(nbrs[i].1);
                        i += 1;
                    }
                }
                out.push(if n == 0 { 0.0 } else { ones as f64 / n as f64 });
            }
            out
        })
        .collect();
    (0..k_max)
        .map(|k| per_cell.iter().map(|c| c[k]).collect())
        .collect()
}

/// Nearest-neighbour predictions for `cells` of `z` at a fixed `k ≥ 1`.
pub fn nn_baseline(z: &InteractionMatrix, cells: &[(usize, usize)], k: usize) -> Vec<f64> {
    nn_predict_all_k(z, cells, k.max(1)).pop().unwrap_or_default()
}

/// The `k` in `1..=k_max` with the highest AUC over every cell of the
/// training matrix `z`; the smallest such `k` on ties.
pub fn nn_select_k(z: &InteractionMatrix, k_max: usize) -> Result<usize, EvalError> {
    if k_max == 0 {
        return Err(EvalError::InvalidGrid("k range is empty".into()));
    }
    let cells: Vec<(usize, usize)> = (0..z.n_hosts())
        .flat_map(|h| (0..z.n_parasites()).map(move |j| (h, j)))
        .collect();
    let truth: Vec<bool> = cells.iter().map(|&(h, j)| z.get(h, j)).collect();
    let preds = nn_predict_all_k(z, &cells, k_max);
    let mut best = (1, f64::NEG_INFINITY);
    for (k, p) in preds.iter().enumerate() {
        let auc = mann_whitney_auc(p, &truth)?;
        if auc > best.1 {
            best = (k + 1, auc);
        }
    }
    Ok(best.0)
}
