//! Probabilistic kernel: phylogenetic neighbourhood weights, interaction
//! probabilities, and the zero-inflated / truncated Gumbel latent score.

use rand::Rng;
use rand_distr::Open01;
use thiserror::Error;

use crate::interactions::InteractionMatrix;
use crate::newick::PairwiseMrcaDepths;
use crate::transforms::DistanceMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("non-positive distance between hosts {0} and {1}")]
    NonPositiveDistance(usize, usize),
    #[error("negative interaction rate {0}")]
    NegativeRate(f64),
    #[error("hyperparameter {name} = {value} must be strictly positive")]
    InvalidHyperparameter { name: &'static str, value: f64 },
    #[error("model must use the phylogeny, the affinities, or both")]
    EmptyModel,
}

/// Gamma(shape, rate) priors on host (γ) and parasite (ρ) affinities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    pub alpha_gamma: f64,
    pub rate_gamma: f64,
    pub alpha_rho: f64,
    pub rate_rho: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            alpha_gamma: 1.0,
            rate_gamma: 1.0,
            alpha_rho: 1.0,
            rate_rho: 1.0,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, value) in [
            ("alpha_gamma", self.alpha_gamma),
            ("rate_gamma", self.rate_gamma),
            ("alpha_rho", self.alpha_rho),
            ("rate_rho", self.rate_rho),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::InvalidHyperparameter { name, value });
            }
        }
        Ok(())
    }
}

/// Which parts of the model are switched on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelFlags {
    pub use_phylogeny: bool,
    pub use_affinities: bool,
    pub use_uncertainty: bool,
}

impl ModelFlags {
    pub const fn full() -> Self {
        ModelFlags {
            use_phylogeny: true,
            use_affinities: true,
            use_uncertainty: false,
        }
    }

    pub const fn affinity_only() -> Self {
        ModelFlags {
            use_phylogeny: false,
            use_affinities: true,
            use_uncertainty: false,
        }
    }

    pub const fn phylogeny_only() -> Self {
        ModelFlags {
            use_phylogeny: true,
            use_affinities: false,
            use_uncertainty: false,
        }
    }

    pub const fn with_uncertainty(mut self, on: bool) -> Self {
        self.use_uncertainty = on;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.use_phylogeny || self.use_affinities {
            Ok(())
        } else {
            Err(ModelError::EmptyModel)
        }
    }
}

/// δ assigned to a cell whose column has no other documented host.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DeltaDefault {
    #[default]
    One,
    /// Mean normalized pairwise distance of the tree.
    MeanDistance,
}

impl DeltaDefault {
    pub fn value(&self, depths: &PairwiseMrcaDepths) -> f64 {
        match self {
            DeltaDefault::One => 1.0,
            DeltaDefault::MeanDistance => depths.mean_distance(),
        }
    }
}

/// `δ_hj = Σ_{i≠h, z_ij=1} 1/φ(T_hi)`, or `default` when no other host in
/// the column is documented.
pub fn delta_weight(
    h: usize,
    column: &[bool],
    distances: &DistanceMatrix,
    default: f64,
) -> Result<f64, ModelError> {
    let mut sum = 0.0;
    let mut any = false;
    for (i, &z) in column.iter().enumerate() {
        if i == h || !z {
            continue;
        }
        let d = distances.get(h, i);
        if !(d > 0.0) {
            return Err(ModelError::NonPositiveDistance(h, i));
        }
        sum += 1.0 / d;
        any = true;
    }
    Ok(if any { sum } else { default })
}

/// `1 − e^{−τ}`.
pub fn interaction_prob(tau: f64) -> Result<f64, ModelError> {
    if tau < 0.0 || tau.is_nan() {
        return Err(ModelError::NegativeRate(tau));
    }
    Ok(interaction_prob_unchecked(tau))
}

#[inline]
pub fn interaction_prob_unchecked(tau: f64) -> f64 {
    -(-tau).exp_m1()
}

/// Log density of the zero-inflated Gumbel latent score: `log τ − s − τe^{−s}`
/// on `s > 0`, and the log of the atom `e^{−τ}` at `s = 0`.
pub fn gumbel_zero_inflated_logpdf(s: f64, tau: f64) -> f64 {
    if s > 0.0 {
        tau.ln() - s - tau * (-s).exp()
    } else {
        -tau
    }
}

/// CDF of the zero-truncated unit-scale Gumbel with location `log_tau`.
pub fn truncated_gumbel_cdf(s: f64, log_tau: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let tau = log_tau.exp();
    // (exp(−τe^{−s}) − e^{−τ}) / (1 − e^{−τ})
    let num = (-tau * (-s).exp()).exp() - (-tau).exp();
    num / interaction_prob_unchecked(tau)
}

/// Draw from the unit-scale Gumbel with location `log_tau`, conditioned on
/// being positive.
///
/// Inverse CDF with `v = 1 − uψ`, `ψ = 1 − e^{−τ}`, evaluated as
/// `log τ − log(−log1p(−uψ))`, which stays accurate when `e^{−τ}` is close
/// to 1.
pub fn sample_truncated_gumbel<R: Rng + ?Sized>(log_tau: f64, rng: &mut R) -> f64 {
    debug_assert!(log_tau.is_finite(), "location must be finite");
    let psi = -(-log_tau.exp()).exp_m1();
    loop {
        let u: f64 = rng.sample(Open01);
        let s = log_tau - (-(-u * psi).ln_1p()).ln();
        if s > 0.0 && s.is_finite() {
            return s;
        }
    }
}

/// δ for every cell under a fixed set of inverse distances. Stored
/// column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaCache {
    n_hosts: usize,
    n_parasites: usize,
    values: Vec<f64>,
}

impl DeltaCache {
    /// `weights` is the row-major `H × H` matrix of `1/φ` with zero diagonal.
    pub fn build(z: &InteractionMatrix, weights: &[f64], default: f64) -> Self {
        let h_n = z.n_hosts();
        let j_n = z.n_parasites();
        debug_assert_eq!(weights.len(), h_n * h_n);
        let mut values = vec![0.0; h_n * j_n];
        for j in 0..j_n {
            let ones = z.column_ones(j);
            let col = &mut values[j * h_n..(j + 1) * h_n];
            for (h, v) in col.iter_mut().enumerate() {
                let row = &weights[h * h_n..(h + 1) * h_n];
                let mut any = false;
                let mut sum = 0.0;
                for &i in &ones {
                    if i != h {
                        sum += row[i];
                        any = true;
                    }
                }
                *v = if any { sum } else { default };
            }
        }
        DeltaCache {
            n_hosts: h_n,
            n_parasites: j_n,
            values,
        }
    }

    /// Every cell set to `value`; the affinity-only model uses 1.
    pub fn constant(n_hosts: usize, n_parasites: usize, value: f64) -> Self {
        DeltaCache {
            n_hosts,
            n_parasites,
            values: vec![value; n_hosts * n_parasites],
        }
    }

    #[inline]
    pub fn get(&self, h: usize, j: usize) -> f64 {
        self.values[j * self.n_hosts + h]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.values[j * self.n_hosts..(j + 1) * self.n_hosts]
    }

    pub fn row(&self, h: usize) -> Vec<f64> {
        (0..self.n_parasites).map(|j| self.get(h, j)).collect()
    }
}

/// Column one-lists of `z`, for recomputing a single row of δ quickly.
#[derive(Debug, Clone)]
pub struct ColumnIndex {
    ones: Vec<Vec<usize>>,
}

impl ColumnIndex {
    pub fn new(z: &InteractionMatrix) -> Self {
        ColumnIndex {
            ones: (0..z.n_parasites()).map(|j| z.column_ones(j)).collect(),
        }
    }

    pub fn column(&self, j: usize) -> &[usize] {
        &self.ones[j]
    }

    /// δ for row `h` given that host's inverse distances.
    pub fn row_delta(&self, h: usize, inverse_row: &[f64], default: f64, out: &mut [f64]) {
        for (j, v) in out.iter_mut().enumerate() {
            let mut any = false;
            let mut sum = 0.0;
            for &i in &self.ones[j] {
                if i != h {
                    sum += inverse_row[i];
                    any = true;
                }
            }
            *v = if any { sum } else { default };
        }
    }
}

/// Current values of every sampled quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub gamma: Vec<f64>,
    pub rho: Vec<f64>,
    pub eta: f64,
    pub g: f64,
    /// Row-major `H × J` latent scores.
    pub latent: Vec<f64>,
    pub hyper: Hyperparams,
    pub flags: ModelFlags,
}

impl ModelState {
    /// Unit affinities, latent score 1 on documented cells and 0 elsewhere.
    pub fn initial(z: &InteractionMatrix, hyper: Hyperparams, flags: ModelFlags, eta: f64) -> Self {
        let latent = (0..z.n_hosts())
            .flat_map(|h| z.row(h).iter().map(|&v| if v { 1.0 } else { 0.0 }).collect::<Vec<_>>())
            .collect();
        ModelState {
            gamma: vec![1.0; z.n_hosts()],
            rho: vec![1.0; z.n_parasites()],
            eta,
            g: 0.0,
            latent,
            hyper,
            flags,
        }
    }

    pub fn n_parasites(&self) -> usize {
        self.rho.len()
    }

    #[inline]
    pub fn latent(&self, h: usize, j: usize) -> f64 {
        self.latent[h * self.rho.len() + j]
    }

    pub fn latent_row(&self, h: usize) -> &[f64] {
        let n = self.rho.len();
        &self.latent[h * n..(h + 1) * n]
    }

    /// `τ_hj = γ_h ρ_j δ_hj`.
    #[inline]
    pub fn tau(&self, h: usize, j: usize, delta: f64) -> f64 {
        self.gamma[h] * self.rho[j] * delta
    }
}
