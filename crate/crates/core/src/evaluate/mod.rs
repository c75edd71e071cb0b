//! Held-out evaluation: folds, proper scores, ROC/AUC, recovery curves,
//! the nearest-neighbour baseline and the paired signed-rank test.

pub mod crossval;
pub mod folds;
pub mod nn;
pub mod recovery;
pub mod roc;
pub mod scoring;
pub mod wilcoxon;

use thiserror::Error;

pub use self::crossval::{cross_validate, write_summary_csv, CrossValConfig, CrossValError, ModelEvaluation, ModelKind};
pub use self::folds::{make_folds, FoldPlan};
pub use self::nn::{nn_baseline, nn_predict_all_k, nn_select_k};
pub use self::recovery::top_x_recovery;
pub use self::roc::{mann_whitney_auc, roc_auc, RocCurve, RocThresholds};
pub use self::scoring::{default_theta_grid, elementary_score, murphy_diagram, ScoreCurve};
pub use self::wilcoxon::wilcoxon_paired_one_sided;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("test set is empty")]
    EmptyTestSet,
    #[error("fold {fold} has only one truth class")]
    DegenerateTruth { fold: usize },
    #[error("{what}: lengths {left} and {right} differ")]
    LengthMismatch { what: &'static str, left: usize, right: usize },
    #[error("prediction {0} is not a probability")]
    InvalidProbability(f64),
    #[error("no one-cell can be held out while keeping {floor} ones per column")]
    InfeasibleFloor { floor: usize },
    #[error("invalid fold setup: {0}")]
    InvalidFolds(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("x_max {x_max} exceeds the {cells} available cells")]
    TooManyCells { x_max: usize, cells: usize },
    #[error("signed-rank test needs at least {min} pairs, got {got}")]
    TooFewPairs { got: usize, min: usize },
    #[error("every paired difference is zero")]
    AllZeroDifferences,
}

/// Predicted probabilities and truth for one fold's test cells.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldPredictions {
    pub pred: Vec<f64>,
    pub truth: Vec<bool>,
}

impl FoldPredictions {
    pub fn new(pred: Vec<f64>, truth: Vec<bool>) -> Result<Self, EvalError> {
        if pred.len() != truth.len() {
            return Err(EvalError::LengthMismatch {
                what: "predictions and truth",
                left: pred.len(),
                right: truth.len(),
            });
        }
        if let Some(&bad) = pred.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(EvalError::InvalidProbability(bad));
        }
        Ok(FoldPredictions { pred, truth })
    }

    pub fn len(&self) -> usize {
        self.pred.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pred.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.truth.iter().filter(|&&t| t).count()
    }
}
