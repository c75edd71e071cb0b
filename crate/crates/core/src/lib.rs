//! Bayesian link prediction for bipartite host–parasite networks.
//!
//! Interactions are scored by `P(z_hj = 1) = 1 − exp(−γ_h ρ_j δ_hj(η))`,
//! combining host and parasite affinities with a phylogenetic neighbourhood
//! weight under an early-burst rescaling of the host tree. Posterior
//! inference runs a row-sweep Gibbs sampler over zero-inflated Gumbel latent
//! scores, with an optional term for undocumented interactions.
//!
//! Modules, bottom up:
//! - [`newick`]: tree parsing and pairwise MRCA depths
//! - [`interactions`]: interaction records and binary matrices
//! - [`transforms`]: distance rescalings and their AUC scan
//! - [`model`]: probabilities, δ weights and latent-score densities
//! - [`sampler`]: MCMC, traces and posterior prediction
//! - [`evaluate`]: folds, scores, ROC, baselines and tests

pub mod evaluate;
pub mod interactions;
pub mod model;
pub mod newick;
pub mod sampler;
pub mod transforms;

use thiserror::Error;

pub use interactions::{InteractionMatrix, InteractionRecord};
pub use model::{Hyperparams, ModelFlags, ModelState};
pub use newick::{pairwise_depths, parse_newick, PairwiseMrcaDepths, PhyloTree};
pub use sampler::{posterior_predict, run_mcmc, PosteriorTrace, SamplerConfig};
pub use transforms::TransformSpec;

/// Any error raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Newick(#[from] newick::NewickError),
    #[error(transparent)]
    Interaction(#[from] interactions::InteractionError),
    #[error(transparent)]
    Transform(#[from] transforms::TransformError),
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error(transparent)]
    Sampler(#[from] sampler::SamplerError),
    #[error(transparent)]
    Eval(#[from] evaluate::EvalError),
    #[error(transparent)]
    CrossVal(#[from] evaluate::CrossValError),
}
