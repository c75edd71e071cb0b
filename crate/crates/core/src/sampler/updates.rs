//! Single-site conditional updates used by the row sweep.
//!
//! Every function works on one host row: its documented cells, its latent
//! scores, its δ values and the current parasite affinities.

use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, Normal};

use crate::model::{sample_truncated_gumbel, ColumnIndex, Hyperparams};
use crate::newick::PairwiseMrcaDepths;
use crate::transforms::eb_inverse_row;

/// Which conjugate draw an observer is being told about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConjugateSite {
    Gamma { h: usize },
    /// Row-`h` partial draw of `ρ_j`, or the full-column draw when `h` is
    /// `None`.
    Rho { h: Option<usize>, j: usize },
}

/// Hook for auditing conjugate updates.
pub trait UpdateObserver {
    fn on_gamma_draw(&mut self, _site: ConjugateSite, _shape: f64, _rate: f64) {}
}

pub struct NoObserver;

impl UpdateObserver for NoObserver {}

/// Inputs of row `h` that stay fixed while the row is updated.
#[derive(Debug, Clone, Copy)]
pub struct RowInputs<'a> {
    pub h: usize,
    pub z: &'a [bool],
    pub rho: &'a [f64],
    pub delta: &'a [f64],
    pub hyper: &'a Hyperparams,
}

/// Draw from Gamma(shape, rate), floored at the smallest positive double so
/// log-space updates never see 0.
#[inline]
pub fn draw_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    let d = Gamma::new(shape, 1.0 / rate).expect("gamma parameters are positive and finite");
    d.sample(rng).max(f64::MIN_POSITIVE)
}

pub fn draw_beta<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    Beta::new(a, b).expect("beta parameters are positive").sample(rng)
}

/// `log τ_hj`, floored so a vanishing δ never yields −∞.
#[inline]
pub fn log_tau(gamma: f64, rho: f64, delta: f64) -> f64 {
    (gamma.ln() + rho.ln() + delta.ln()).max(-700.0)
}

/// Shape and rate of the full conditional of `γ_h`:
/// `Gamma(α_γ + #{s_hj > 0}, τ_γ + Σ_j ρ_j δ_hj e^{−s_hj})`.
/// Without uncertainty the count is exactly `n_h`.
pub fn gamma_conditional(row: &RowInputs<'_>, latent: &[f64]) -> (f64, f64) {
    let mut count = 0usize;
    let mut rate = row.hyper.rate_gamma;
    for (j, &s) in latent.iter().enumerate() {
        if s > 0.0 {
            count += 1;
        }
        rate += row.rho[j] * row.delta[j] * (-s).exp();
    }
    (row.hyper.alpha_gamma + count as f64, rate)
}

pub fn update_gamma<R: Rng + ?Sized>(
    row: &RowInputs<'_>,
    latent: &[f64],
    rng: &mut R,
    observer: &mut dyn UpdateObserver,
) -> f64 {
    let (shape, rate) = gamma_conditional(row, latent);
    observer.on_gamma_draw(ConjugateSite::Gamma { h: row.h }, shape, rate);
    draw_gamma(shape, rate, rng)
}

/// Row-`h` partial draws `ρ_j^{(h)} ~ Gamma(α_ρ + I{s_hj>0},
/// τ_ρ + γ_h δ_hj e^{−s_hj})`, written into `out`.
pub fn update_rho_row<R: Rng + ?Sized>(
    row: &RowInputs<'_>,
    gamma: f64,
    latent: &[f64],
    rng: &mut R,
    observer: &mut dyn UpdateObserver,
    out: &mut [f64],
) {
    for (j, o) in out.iter_mut().enumerate() {
        let s = latent[j];
        let shape = row.hyper.alpha_rho + if s > 0.0 { 1.0 } else { 0.0 };
        let rate = row.hyper.rate_rho + gamma * row.delta[j] * (-s).exp();
        observer.on_gamma_draw(ConjugateSite::Rho { h: Some(row.h), j }, shape, rate);
        *o = draw_gamma(shape, rate, rng);
    }
}

/// Probability that an undocumented cell carries a positive latent score:
/// `gψ / (gψ + 1 − ψ)` with `ψ = 1 − e^{−τ}`.
#[inline]
pub fn undocumented_positive_prob(g: f64, tau: f64) -> f64 {
    let psi = -(-tau).exp_m1();
    let num = g * psi;
    if num == 0.0 {
        0.0
    } else {
        num / (num + (-tau).exp())
    }
}

/// New latent score for one cell.
///
/// Documented cells draw from the zero-truncated Gumbel at `log τ`.
/// Undocumented cells are 0 unless `g > 0`, in which case they are positive
/// with probability `gψ/(gψ + 1 − ψ)`. With `g = 0` no random number is
/// consumed, so such a chain matches the no-uncertainty chain exactly.
pub fn update_latent<R: Rng + ?Sized>(documented: bool, log_tau: f64, g: f64, rng: &mut R) -> f64 {
    if documented {
        return sample_truncated_gumbel(log_tau, rng);
    }
    if g == 0.0 {
        return 0.0;
    }
    let p = undocumented_positive_prob(g, log_tau.exp());
    let u: f64 = rng.sample(Open01);
    if u < p {
        sample_truncated_gumbel(log_tau, rng)
    } else {
        0.0
    }
}

/// `(N₋₊, N₊₊)`: undocumented and documented cells with a positive latent
/// score.
pub fn g_counts(z: &[bool], latent: &[f64]) -> (usize, usize) {
    let mut neg_pos = 0;
    let mut pos_pos = 0;
    for (&zv, &s) in z.iter().zip(latent) {
        if s > 0.0 {
            if zv {
                pos_pos += 1;
            } else {
                neg_pos += 1;
            }
        }
    }
    (neg_pos, pos_pos)
}

/// `g ~ Beta(N₋₊ + 1, N₊₊ + 1)` under a uniform prior.
pub fn update_g<R: Rng + ?Sized>(counts: (usize, usize), rng: &mut R) -> f64 {
    draw_beta(counts.0 as f64 + 1.0, counts.1 as f64 + 1.0, rng)
}

/// η-dependent part of the row log likelihood:
/// `Σ_j [I{s_hj>0} log δ_hj − γ_h ρ_j δ_hj e^{−s_hj}]`.
pub fn row_log_likelihood(gamma: f64, rho: &[f64], latent: &[f64], delta: &[f64]) -> f64 {
    let mut ll = 0.0;
    for (j, &d) in delta.iter().enumerate() {
        let s = latent[j];
        if s > 0.0 {
            ll += d.ln();
        }
        ll -= gamma * rho[j] * d * (-s).exp();
    }
    ll
}

/// Phylogenetic inputs needed to re-evaluate δ under a proposed η.
#[derive(Clone, Copy)]
pub struct PhyloContext<'a> {
    pub depths: &'a PairwiseMrcaDepths,
    pub columns: &'a ColumnIndex,
    pub default_delta: f64,
}

/// Reusable buffers for δ under a proposed η.
#[derive(Debug, Clone, Default)]
pub struct EtaScratch {
    weights: Vec<f64>,
    delta: Vec<f64>,
}

impl EtaScratch {
    pub fn new(n_hosts: usize, n_parasites: usize) -> Self {
        EtaScratch {
            weights: vec![0.0; n_hosts],
            delta: vec![0.0; n_parasites],
        }
    }

    /// δ row `h` at `eta`, or `None` when a distance degenerates.
    pub fn row_delta(&mut self, h: usize, eta: f64, phylo: &PhyloContext<'_>) -> Option<&[f64]> {
        eb_inverse_row(phylo.depths, h, eta, &mut self.weights).ok()?;
        phylo
            .columns
            .row_delta(h, &self.weights, phylo.default_delta, &mut self.delta);
        if self.delta.iter().all(|d| d.is_finite()) {
            Some(&self.delta)
        } else {
            None
        }
    }
}

/// Metropolis accept step on a log ratio; always consumes one uniform.
pub fn mh_accept<R: Rng + ?Sized>(log_ratio: f64, rng: &mut R) -> bool {
    let u: f64 = rng.sample(Open01);
    log_ratio.is_finite() && u.ln() < log_ratio
}

/// One random-walk MH step for η targeting the row-`h` conditional under a
/// flat prior. Non-finite proposals are rejected. Returns the new η and
/// whether the proposal was accepted.
#[allow(clippy::too_many_arguments)]
pub fn update_eta<R: Rng + ?Sized>(
    row: &RowInputs<'_>,
    gamma: f64,
    latent: &[f64],
    eta: f64,
    phylo: &PhyloContext<'_>,
    proposal_sd: f64,
    scratch: &mut EtaScratch,
    rng: &mut R,
) -> (f64, bool) {
    let step: f64 = Normal::new(0.0, proposal_sd).expect("finite sd").sample(rng);
    let proposal = eta + step;
    let current = row_log_likelihood(gamma, row.rho, latent, row.delta);
    let proposed = match scratch.row_delta(row.h, proposal, phylo) {
        Some(d) => row_log_likelihood(gamma, row.rho, latent, d),
        None => f64::NEG_INFINITY,
    };
    let accepted = mh_accept(proposed - current, rng);
    (if accepted { proposal } else { eta }, accepted)
}

/// Adaptive random-walk proposal scale for η.
///
/// The proposal variance is `2.38² · var + ε` over the chain history,
/// refreshed every `window` sweeps while adapting and frozen after burn-in.
#[derive(Debug, Clone)]
pub struct EtaAdapter {
    sd: f64,
    window: usize,
    epsilon: f64,
    /// Multiplier on the history variance. The row-averaged sweep records a
    /// mean of H row draws whose spread is about H times smaller than that
    /// of a single row conditional.
    variance_inflation: f64,
    adapting: bool,
    count: u64,
    mean: f64,
    m2: f64,
    sweeps_in_window: usize,
    proposed: u64,
    accepted: u64,
}

impl EtaAdapter {
    pub const SCALE: f64 = 2.38 * 2.38;
    pub const EPSILON: f64 = 1e-6;

    pub fn new(initial_sd: f64, window: usize) -> Self {
        EtaAdapter {
            sd: initial_sd,
            window: window.max(1),
            epsilon: Self::EPSILON,
            variance_inflation: 1.0,
            adapting: true,
            count: 0,
            mean: 0.0,
            m2: 0.0,
            sweeps_in_window: 0,
            proposed: 0,
            accepted: 0,
        }
    }

    pub fn with_variance_inflation(mut self, factor: f64) -> Self {
        self.variance_inflation = factor;
        self
    }

    pub fn proposal_sd(&self) -> f64 {
        self.sd
    }

    pub fn is_adapting(&self) -> bool {
        self.adapting
    }

    /// Record the chain value after a sweep; adapt at window ends.
    pub fn end_sweep(&mut self, eta: f64) {
        if !self.adapting {
            return;
        }
        self.count += 1;
        let d = eta - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (eta - self.mean);
        self.sweeps_in_window += 1;
        if self.sweeps_in_window >= self.window {
            self.sweeps_in_window = 0;
            if self.count >= 2 {
                let var = self.m2 / (self.count - 1) as f64 * self.variance_inflation;
                self.sd = (Self::SCALE * var + self.epsilon).sqrt();
            }
        }
    }

    /// Stop adapting and reset the acceptance counters.
    pub fn freeze(&mut self) {
        self.adapting = false;
        self.proposed = 0;
        self.accepted = 0;
    }

    pub fn record(&mut self, proposed: u64, accepted: u64) {
        self.proposed += proposed;
        self.accepted += accepted;
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}
