//! K-fold comparison of the model variants and the nearest-neighbour
//! baseline on held-out documented cells.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::interactions::InteractionMatrix;
use crate::model::ModelFlags;
use crate::newick::PairwiseMrcaDepths;
use crate::sampler::{posterior_predict, run_mcmc, SamplerConfig, SamplerError};

use super::folds::{make_folds, FoldPlan};
use super::nn::{nn_baseline, nn_select_k};
use super::roc::{roc_auc, RocCurve, RocThresholds};
use super::scoring::{default_theta_grid, murphy_diagram, ScoreCurve};
use super::{EvalError, FoldPredictions};

#[derive(Debug, Error)]
pub enum CrossValError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("fold {fold}, model {model}: {source}")]
    Sampler {
        fold: usize,
        model: ModelKind,
        source: SamplerError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Affinity,
    Phylogeny,
    Full,
    NearestNeighbour,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Affinity => "affinity",
            ModelKind::Phylogeny => "phylo",
            ModelKind::Full => "full",
            ModelKind::NearestNeighbour => "nn",
        }
    }

    /// Model flags for the Bayesian variants.
    pub fn flags(self, with_g: bool) -> Option<ModelFlags> {
        let f = match self {
            ModelKind::Affinity => ModelFlags::affinity_only(),
            ModelKind::Phylogeny => ModelFlags::phylogeny_only(),
            ModelKind::Full => ModelFlags::full(),
            ModelKind::NearestNeighbour => return None,
        };
        Some(f.with_uncertainty(with_g))
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "affinity" => Ok(ModelKind::Affinity),
            "phylo" | "phylogeny" => Ok(ModelKind::Phylogeny),
            "full" => Ok(ModelKind::Full),
            "nn" => Ok(ModelKind::NearestNeighbour),
            other => Err(format!("unknown model {other:?} (affinity, phylo, full, nn)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValConfig {
    pub folds: usize,
    /// Minimum ones kept per column in every training matrix.
    pub floor: usize,
    /// Seeds the fold assignment; fold `k` of model `m` runs its sampler
    /// with `sampler.seed + 1000·m + k`.
    pub seed: u64,
    pub sampler: SamplerConfig,
    pub with_g: bool,
    pub thresholds: RocThresholds,
    pub theta_grid: Vec<f64>,
    pub nn_k_max: usize,
}

impl Default for CrossValConfig {
    fn default() -> Self {
        CrossValConfig {
            folds: 5,
            floor: 2,
            seed: 0,
            sampler: SamplerConfig::default(),
            with_g: false,
            thresholds: RocThresholds::uniform_default(),
            theta_grid: default_theta_grid(),
            nn_k_max: 10,
        }
    }
}

/// Held-out performance of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelEvaluation {
    pub model: ModelKind,
    pub per_fold: Vec<FoldPredictions>,
    pub roc: RocCurve,
    pub murphy: ScoreCurve,
    /// Single-fold AUCs, for paired tests between models.
    pub fold_auc: Vec<f64>,
}

/// Predictions on every training-zero cell of one fold.
fn predict_fold(
    model: ModelKind,
    model_index: usize,
    fold: usize,
    z: &InteractionMatrix,
    depths: Option<&PairwiseMrcaDepths>,
    plan: &FoldPlan,
    config: &CrossValConfig,
) -> Result<FoldPredictions, CrossValError> {
    let train = plan.train(z, fold);
    let cells = plan.test_cells(z, fold);
    let truth: Vec<bool> = cells.iter().map(|&(h, j)| z.get(h, j)).collect();
    let pred = match model.flags(config.with_g) {
        None => {
            let k = nn_select_k(&train, config.nn_k_max)?;
            nn_baseline(&train, &cells, k)
        }
        Some(flags) => {
            let wrap = |source| CrossValError::Sampler { fold, model, source };
            let mut sc = config.sampler.clone();
            sc.flags = flags;
            sc.seed = sc.seed.wrapping_add(1000 * model_index as u64 + fold as u64);
            let d = if flags.use_phylogeny { depths } else { None };
            let trace = run_mcmc(&train, d, &sc).map_err(wrap)?;
            let p = posterior_predict(&trace, &train, d, sc.delta_default).map_err(wrap)?;
            cells.iter().map(|&(h, j)| p.get(h, j)).collect()
        }
    };
    Ok(FoldPredictions::new(pred, truth)?)
}

/// Build one fold plan and evaluate every model on it. Model × fold jobs run
/// on the rayon pool.
pub fn cross_validate(
    z: &InteractionMatrix,
    depths: Option<&PairwiseMrcaDepths>,
    models: &[ModelKind],
    config: &CrossValConfig,
) -> Result<(FoldPlan, Vec<ModelEvaluation>), CrossValError> {
    let plan = make_folds(z, config.folds, config.floor, &mut ChaCha8Rng::seed_from_u64(config.seed))?;
    let jobs: Vec<(usize, usize)> = (0..models.len())
        .flat_map(|m| (0..plan.len()).map(move |k| (m, k)))
        .collect();
    let results: Vec<FoldPredictions> = jobs
        .par_iter()
        .map(|&(m, k)| predict_fold(models[m], m, k, z, depths, &plan, config))
        .collect::<Result<_, _>>()?;
    let mut out = Vec::with_capacity(models.len());
    for (m, &model) in models.iter().enumerate() {
        let per_fold: Vec<FoldPredictions> = results[m * plan.len()..(m + 1) * plan.len()].to_vec();
        let roc = roc_auc(&per_fold, &config.thresholds)?;
        let murphy = murphy_diagram(&per_fold, &config.theta_grid)?;
        let fold_auc = per_fold
            .iter()
            .map(|f| roc_auc(std::slice::from_ref(f), &config.thresholds).map(|r| r.auc))
            .collect::<Result<_, _>>()?;
        out.push(ModelEvaluation {
            model,
            per_fold,
            roc,
            murphy,
            fold_auc,
        });
    }
    Ok((plan, out))
}

/// `model,auc,pct_ones_recovered`.
pub fn write_summary_csv<W: Write>(writer: W, evals: &[ModelEvaluation]) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    w.write_record(["model", "auc", "pct_ones_recovered"])?;
    for e in evals {
        w.write_record([
            e.model.name().to_string(),
            format!("{:.6}", e.roc.auc),
            format!("{:.2}", e.roc.pct_ones_recovered),
        ])?;
    }
    w.flush()?;
    Ok(())
}
