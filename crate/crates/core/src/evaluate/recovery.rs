//! Cumulative recovery of true ones along descending predicted probability.

use super::EvalError;

/// Entry `x − 1` is the number of true ones among the `x` highest-scoring
/// cells, for `x = 1..=x_max`. Ties keep input order.
pub fn top_x_recovery(pred: &[f64], truth: &[bool], x_max: usize) -> Result<Vec<usize>, EvalError> {
    if pred.len() != truth.len() {
        return Err(EvalError::LengthMismatch {
            what: "predictions and truth",
            left: pred.len(),
            right: truth.len(),
        });
    }
    if x_max > pred.len() {
        return Err(EvalError::TooManyCells {
            x_max,
            cells: pred.len(),
        });
    }
    let mut order: Vec<usize> = (0..pred.len()).collect();
    order.sort_by(|&a, &b| pred[b].total_cmp(&pred[a]));
    let mut found = 0;
    Ok(order[..x_max]
        .iter()
        .map(|&c| {
            found += usize::from(truth[c]);
            found
        })
        .collect())
}
