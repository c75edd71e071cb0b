//! Cross-validation folds over documented cells with a per-column floor.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::interactions::InteractionMatrix;

use super::EvalError;

/// Disjoint held-out sets of one-cells. Removing any single fold leaves at
/// least `floor` ones in every column that started with more than `floor`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    floor: usize,
    folds: Vec<Vec<(usize, usize)>>,
}

impl FoldPlan {
    pub fn from_folds(floor: usize, folds: Vec<Vec<(usize, usize)>>) -> Self {
        FoldPlan { floor, folds }
    }

    pub fn len(&self) -> usize {
        self.folds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.folds.is_empty()
    }

    pub fn floor(&self) -> usize {
        self.floor
    }

    pub fn held_out(&self, k: usize) -> &[(usize, usize)] {
        &self.folds[k]
    }

    pub fn total_held_out(&self) -> usize {
        self.folds.iter().map(Vec::len).sum()
    }

    /// Training matrix for fold `k`.
    pub fn train(&self, z: &InteractionMatrix, k: usize) -> InteractionMatrix {
        z.with_cleared(&self.folds[k])
    }

    /// Every cell that is zero in the fold-`k` training matrix, row-major.
    pub fn test_cells(&self, z: &InteractionMatrix, k: usize) -> Vec<(usize, usize)> {
        let train = self.train(z, k);
        let mut cells = Vec::new();
        for h in 0..z.n_hosts() {
            for j in 0..z.n_parasites() {
                if !train.get(h, j) {
                    cells.push((h, j));
                }
            }
        }
        cells
    }
}

/// Spread the one-cells of `z` over `k` folds.
///
/// Cells are visited in random order and offered to a random fold, then to
/// the remaining folds in random order; a fold accepts a cell of column `j`
/// only while it holds fewer than `n_j − floor` cells of that column. Cells
/// no fold accepts stay in training.
pub fn make_folds<R: Rng + ?Sized>(
    z: &InteractionMatrix,
    k: usize,
    floor: usize,
    rng: &mut R,
) -> Result<FoldPlan, EvalError> {
    if k < 2 {
        return Err(EvalError::InvalidFolds(format!("need at least 2 folds, got {k}")));
    }
    let caps: Vec<usize> = (0..z.n_parasites())
        .map(|j| z.col_sum(j).saturating_sub(floor))
        .collect();
    if caps.iter().all(|&c| c == 0) {
        return Err(EvalError::InfeasibleFloor { floor });
    }
    let mut cells = z.ones();
    cells.shuffle(rng);
    let mut used = vec![vec![0usize; z.n_parasites()]; k];
    let mut folds = vec![Vec::new(); k];
    let mut order: Vec<usize> = (0..k).collect();
    for (h, j) in cells {
        if caps[j] == 0 {
            continue;
        }
        order.shuffle(rng);
        if let Some(&f) = order.iter().find(|&&f| used[f][j] < caps[j]) {
            used[f][j] += 1;
            folds[f].push((h, j));
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(FoldPlan { floor, folds })
}
