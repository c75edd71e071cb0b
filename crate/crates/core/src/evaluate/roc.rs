//! ROC curves with vertical averaging across folds.

use std::io::Write;

use super::{EvalError, FoldPredictions};

/// Thresholds at which every fold's TPR and FPR are evaluated.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum RocThresholds {
    /// `n` evenly spaced points in [0, 1].
    Uniform(usize),
    /// Every distinct predicted value across all folds.
    #[default]
    Exact,
}

impl RocThresholds {
    pub fn uniform_default() -> Self {
        RocThresholds::Uniform(201)
    }

    /// Thresholds in decreasing order.
    fn grid(&self, folds: &[FoldPredictions]) -> Result<Vec<f64>, EvalError> {
        let mut t: Vec<f64> = match self {
            RocThresholds::Uniform(n) if *n < 2 => {
                return Err(EvalError::InvalidGrid(format!("need at least 2 thresholds, got {n}")))
            }
            RocThresholds::Uniform(n) => (0..*n).map(|i| i as f64 / (*n - 1) as f64).collect(),
            RocThresholds::Exact => folds.iter().flat_map(|f| f.pred.iter().copied()).collect(),
        };
        t.sort_by(|a, b| b.total_cmp(a));
        t.dedup();
        Ok(t)
    }
}

/// Fold-averaged ROC curve. Points run from (0, 0) at threshold +∞ to the
/// lowest threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub thresholds: Vec<f64>,
    pub tpr: Vec<f64>,
    pub fpr: Vec<f64>,
    pub auc: f64,
    /// Threshold maximizing `TPR − FPR` on the averaged curve, i.e. the
    /// single operating point with the largest ROC area.
    pub best_threshold: f64,
    /// Percent of held-out ones predicted as ones at `best_threshold`.
    pub pct_ones_recovered: f64,
}

impl RocCurve {
    /// `threshold,tpr,fpr`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        w.write_record(["threshold", "tpr", "fpr"])?;
        for i in 0..self.thresholds.len() {
            w.write_record([
                format!("{}", self.thresholds[i]),
                format!("{:.8}", self.tpr[i]),
                format!("{:.8}", self.fpr[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Rates at each threshold (predictions `≥ t` are called positive).
fn fold_rates(fold: &FoldPredictions, thresholds: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut cells: Vec<(f64, bool)> = fold.pred.iter().copied().zip(fold.truth.iter().copied()).collect();
    cells.sort_by(|a, b| b.0.total_cmp(&a.0));
    let pos = cells.iter().filter(|c| c.1).count() as f64;
    let neg = cells.len() as f64 - pos;
    let mut tpr = Vec::with_capacity(thresholds.len());
    let mut fpr = Vec::with_capacity(thresholds.len());
    let (mut tp, mut fp, mut i) = (0.0, 0.0, 0);
    for &t in thresholds {
        while i < cells.len() && cells[i].0 >= t {
            if cells[i].1 {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            i += 1;
        }
        tpr.push(tp / pos);
        fpr.push(fp / neg);
    }
    (tpr, fpr)
}

/// ROC over the test cells of every fold, vertically averaged at shared
/// thresholds, with the AUC by the trapezoid rule.
pub fn roc_auc(folds: &[FoldPredictions], thresholds: &RocThresholds) -> Result<RocCurve, EvalError> {
    if folds.is_empty() || folds.iter().any(FoldPredictions::is_empty) {
        return Err(EvalError::EmptyTestSet);
    }
    for (k, f) in folds.iter().enumerate() {
        let p = f.positives();
        if p == 0 || p == f.len() {
            return Err(EvalError::DegenerateTruth { fold: k });
        }
    }
    let grid = thresholds.grid(folds)?;
    let k = folds.len() as f64;
    let mut tpr = vec![0.0; grid.len() + 1];
    let mut fpr = vec![0.0; grid.len() + 1];
    for f in folds {
        let (t, fp) = fold_rates(f, &grid);
        for i in 0..grid.len() {
            tpr[i + 1] += t[i] / k;
            fpr[i + 1] += fp[i] / k;
        }
    }
    let mut all_thresholds = Vec::with_capacity(grid.len() + 1);
    all_thresholds.push(f64::INFINITY);
    all_thresholds.extend_from_slice(&grid);
    // Close the curve at (1, 1) when the grid does not reach every cell.
    if fpr.last() != Some(&1.0) || tpr.last() != Some(&1.0) {
        all_thresholds.push(f64::NEG_INFINITY);
        tpr.push(1.0);
        fpr.push(1.0);
    }
    let mut auc = 0.0;
    for i in 1..tpr.len() {
        auc += (fpr[i] - fpr[i - 1]) * (tpr[i] + tpr[i - 1]) / 2.0;
    }
    let mut best = 0;
    for i in 1..tpr.len() {
        if tpr[i] - fpr[i] > tpr[best] - fpr[best] {
            best = i;
        }
    }
    Ok(RocCurve {
        best_threshold: all_thresholds[best],
        pct_ones_recovered: 100.0 * tpr[best],
        thresholds: all_thresholds,
        tpr,
        fpr,
        auc,
    })
}

/// Probability that a random positive outscores a random negative, ties
/// counted half, via midranks.
pub fn mann_whitney_auc(pred: &[f64], truth: &[bool]) -> Result<f64, EvalError> {
    if pred.len() != truth.len() {
        return Err(EvalError::LengthMismatch {
            what: "predictions and truth",
            left: pred.len(),
            right: truth.len(),
        });
    }
    let n_pos = truth.iter().filter(|&&t| t).count();
    let n_neg = truth.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvalError::DegenerateTruth { fold: 0 });
    }
    let mut idx: Vec<usize> = (0..pred.len()).collect();
    idx.sort_by(|&a, &b| pred[a].total_cmp(&pred[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && pred[idx[j + 1]] == pred[idx[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &c in &idx[i..=j] {
            if truth[c] {
                rank_sum += mid;
            }
        }
        i = j + 1;
    }
    let (p, n) = (n_pos as f64, n_neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}
