//! Row-sweep Gibbs sampler with adaptive Metropolis steps for η.

pub mod diagnostics;
pub mod synthetic;
pub mod trace;
pub mod updates;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::interactions::InteractionMatrix;
use crate::model::{ColumnIndex, DeltaCache, DeltaDefault, Hyperparams, ModelError, ModelFlags, ModelState};
use crate::newick::PairwiseMrcaDepths;
use crate::transforms::{eb_inverse_row, TransformError};

pub use self::synthetic::{draw_affinities, generate_synthetic, SyntheticParams};
pub use self::trace::{posterior_predict, PosteriorTrace, PredictiveMatrix, TraceSummary};
pub use self::updates::{ConjugateSite, EtaAdapter, NoObserver, UpdateObserver};

use self::updates::{EtaScratch, PhyloContext, RowInputs};

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(String),
    #[error("host labels of the interaction matrix and the phylogeny differ")]
    LabelMismatch,
    #[error("the phylogeny is required when use_phylogeny is set")]
    MissingPhylogeny,
    #[error("phylogeny-only model cannot handle single-host parasites ({} columns, first {:?})", .0.len(), .0[0])]
    SingleHostColumns(Vec<String>),
    #[error("empty trace")]
    EmptyTrace,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// How the per-row draws of ρ, η and g become one sample per sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RowAveraging {
    /// Each row draws its own ρ, η and g against the sweep-start state; the
    /// sweep keeps their mean. The mean is not a posterior draw, so interval
    /// estimates come out too narrow.
    Literal,
    /// One draw per sweep from the full conditional using every row.
    #[default]
    SingleDraw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub adapt_window: usize,
    pub eta_init: f64,
    /// Proposal sd for η until the first adaptation.
    pub eta_proposal_sd: f64,
    /// Keep η at `eta_init`.
    pub fix_eta: bool,
    pub flags: ModelFlags,
    pub hyper: Hyperparams,
    pub delta_default: DeltaDefault,
    pub averaging: RowAveraging,
    /// Replace the g update by a constant.
    pub fixed_g: Option<f64>,
    /// Update rows concurrently, each with its own generator seeded from the
    /// chain's generator.
    pub parallel_rows: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            iterations: 20_000,
            burn_in: 20_000,
            thin: 1,
            seed: 0,
            adapt_window: 50,
            eta_init: 0.0,
            eta_proposal_sd: 0.5,
            fix_eta: false,
            flags: ModelFlags::full(),
            hyper: Hyperparams::default(),
            delta_default: DeltaDefault::One,
            averaging: RowAveraging::SingleDraw,
            fixed_g: None,
            parallel_rows: false,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<(), SamplerError> {
        let bad = |m: String| Err(SamplerError::InvalidConfig(m));
        if self.iterations == 0 {
            return bad("iterations must be positive".into());
        }
        if self.thin == 0 {
            return bad("thin must be positive".into());
        }
        if self.iterations % self.thin != 0 {
            return bad(format!("thin {} does not divide iterations {}", self.thin, self.iterations));
        }
        if self.burn_in + self.iterations < 2 {
            return bad("burn_in + iterations must be at least 2".into());
        }
        if self.adapt_window == 0 {
            return bad("adapt_window must be positive".into());
        }
        if !(self.eta_proposal_sd > 0.0 && self.eta_proposal_sd.is_finite()) {
            return bad(format!("eta_proposal_sd {} must be positive", self.eta_proposal_sd));
        }
        if !self.eta_init.is_finite() {
            return bad("eta_init must be finite".into());
        }
        if let Some(g) = self.fixed_g {
            if !(0.0..=1.0).contains(&g) {
                return bad(format!("fixed g {g} outside [0, 1]"));
            }
            if !self.flags.use_uncertainty {
                return bad("fixed g requires use_uncertainty".into());
            }
        }
        self.flags.validate()?;
        self.hyper.validate()?;
        Ok(())
    }

    pub fn recorded_len(&self) -> usize {
        self.iterations / self.thin
    }
}

/// Full `H × H` row-major matrix of inverse EB distances at `eta`.
pub fn eb_weights(depths: &PairwiseMrcaDepths, eta: f64) -> Result<Vec<f64>, TransformError> {
    let n = depths.len();
    let mut w = vec![0.0; n * n];
    for (h, row) in w.chunks_mut(n).enumerate() {
        eb_inverse_row(depths, h, eta, row)?;
    }
    Ok(w)
}

/// δ for every cell of `z` at `eta`, or all ones when the phylogeny is off.
pub fn delta_cache_for(
    z: &InteractionMatrix,
    depths: Option<&PairwiseMrcaDepths>,
    eta: f64,
    default: DeltaDefault,
) -> Result<DeltaCache, TransformError> {
    match depths {
        Some(d) => Ok(DeltaCache::build(z, &eb_weights(d, eta)?, default.value(d))),
        None => Ok(DeltaCache::constant(z.n_hosts(), z.n_parasites(), 1.0)),
    }
}

/// Per-sweep bookkeeping returned by [`Sampler::sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepStats {
    /// Undocumented cells with a positive latent score.
    pub neg_pos: usize,
    /// Documented cells with a positive latent score.
    pub pos_pos: usize,
    pub eta_proposed: u64,
    pub eta_accepted: u64,
}

struct Phylo<'a> {
    depths: &'a PairwiseMrcaDepths,
    columns: ColumnIndex,
    default_delta: f64,
}

/// What one row contributes to a sweep.
#[derive(Debug, Clone, Default)]
struct RowOutcome {
    rho: Vec<f64>,
    eta: Option<(f64, bool)>,
    g: Option<f64>,
    counts: (usize, usize),
}

/// One Markov chain over [`ModelState`].
pub struct Sampler<'a> {
    z: &'a InteractionMatrix,
    phylo: Option<Phylo<'a>>,
    config: SamplerConfig,
    state: ModelState,
    delta: DeltaCache,
    delta_eta: f64,
    adapter: EtaAdapter,
    rng: ChaCha8Rng,
}

impl<'a> Sampler<'a> {
    pub fn new(
        z: &'a InteractionMatrix,
        depths: Option<&'a PairwiseMrcaDepths>,
        config: SamplerConfig,
    ) -> Result<Self, SamplerError> {
        config.validate()?;
        let flags = config.flags;
        let phylo = if flags.use_phylogeny {
            let d = depths.ok_or(SamplerError::MissingPhylogeny)?;
            if d.labels() != z.hosts() {
                return Err(SamplerError::LabelMismatch);
            }
            if !flags.use_affinities {
                let single: Vec<String> = (0..z.n_parasites())
                    .filter(|&j| z.col_sum(j) == 1)
                    .map(|j| z.parasites()[j].clone())
                    .collect();
                if !single.is_empty() {
                    return Err(SamplerError::SingleHostColumns(single));
                }
            }
            Some(Phylo {
                depths: d,
                columns: ColumnIndex::new(z),
                default_delta: config.delta_default.value(d),
            })
        } else {
            None
        };
        let mut state = ModelState::initial(z, config.hyper, flags, config.eta_init);
        if flags.use_uncertainty {
            state.g = config.fixed_g.unwrap_or(0.5);
        }
        let delta = delta_cache_for(z, phylo.as_ref().map(|p| p.depths), state.eta, config.delta_default)?;
        let inflation = match config.averaging {
            RowAveraging::Literal => z.n_hosts() as f64,
            RowAveraging::SingleDraw => 1.0,
        };
        let adapter = EtaAdapter::new(config.eta_proposal_sd, config.adapt_window).with_variance_inflation(inflation);
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Ok(Sampler {
            z,
            delta_eta: state.eta,
            phylo,
            config,
            state,
            delta,
            adapter,
            rng,
        })
    }

    pub fn state(&self) -> &ModelState {
        &self.state
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    pub fn adapter(&self) -> &EtaAdapter {
        &self.adapter
    }

    /// Replace γ, ρ, η and g, e.g. to start at known values. Latent scores
    /// are kept.
    pub fn set_parameters(&mut self, gamma: &[f64], rho: &[f64], eta: f64, g: f64) -> Result<(), SamplerError> {
        if gamma.len() != self.state.gamma.len() || rho.len() != self.state.rho.len() {
            return Err(SamplerError::InvalidConfig("parameter lengths differ from the matrix".into()));
        }
        if gamma.iter().chain(rho).any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(SamplerError::InvalidConfig("affinities must be positive".into()));
        }
        self.state.gamma.copy_from_slice(gamma);
        self.state.rho.copy_from_slice(rho);
        self.state.eta = eta;
        if self.state.flags.use_uncertainty {
            self.state.g = g;
        }
        self.refresh_delta()?;
        Ok(())
    }

    pub fn freeze_adaptation(&mut self) {
        self.adapter.freeze();
    }

    fn refresh_delta(&mut self) -> Result<(), SamplerError> {
        if let Some(p) = &self.phylo {
            if self.state.eta != self.delta_eta {
                self.delta = DeltaCache::build(self.z, &eb_weights(p.depths, self.state.eta)?, p.default_delta);
                self.delta_eta = self.state.eta;
            }
        }
        Ok(())
    }

    /// One pass over every host row, followed by the sweep-level updates.
    pub fn sweep(&mut self, observer: &mut dyn UpdateObserver) -> Result<SweepStats, SamplerError> {
        let outcomes = self.row_pass(observer);
        let stats = match self.config.averaging {
            RowAveraging::Literal => self.combine_literal(&outcomes),
            RowAveraging::SingleDraw => self.single_draw_updates(&outcomes, observer),
        };
        self.refresh_delta()?;
        self.adapter.record(stats.eta_proposed, stats.eta_accepted);
        self.adapter.end_sweep(self.state.eta);
        Ok(stats)
    }

    fn row_pass(&mut self, observer: &mut dyn UpdateObserver) -> Vec<RowOutcome> {
        let n_par = self.z.n_parasites();
        let literal = self.config.averaging == RowAveraging::Literal;
        let ctx = RowContext {
            z: self.z,
            rho: &self.state.rho,
            eta: self.state.eta,
            g: if self.state.flags.use_uncertainty { self.state.g } else { 0.0 },
            flags: self.state.flags,
            hyper: &self.state.hyper,
            delta: &self.delta,
            phylo: self.phylo.as_ref().map(|p| PhyloContext {
                depths: p.depths,
                columns: &p.columns,
                default_delta: p.default_delta,
            }),
            eta_sd: self.adapter.proposal_sd(),
            update_eta: literal && !self.config.fix_eta,
            update_g: literal && self.config.fixed_g.is_none(),
            row_draws: literal,
        };
        let gamma = &mut self.state.gamma;
        let latent = &mut self.state.latent;
        if self.config.parallel_rows {
            let seeds: Vec<u64> = (0..gamma.len()).map(|_| self.rng.random()).collect();
            latent
                .par_chunks_mut(n_par)
                .zip(gamma.par_iter_mut())
                .zip(seeds.par_iter())
                .enumerate()
                .map(|(h, ((lat, gam), &seed))| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    ctx.row_step(h, lat, gam, &mut rng, &mut NoObserver)
                })
                .collect()
        } else {
            let rng = &mut self.rng;
            latent
                .chunks_mut(n_par)
                .zip(gamma.iter_mut())
                .enumerate()
                .map(|(h, (lat, gam))| ctx.row_step(h, lat, gam, rng, observer))
                .collect()
        }
    }

    fn combine_literal(&mut self, outcomes: &[RowOutcome]) -> SweepStats {
        let n_rows = outcomes.len() as f64;
        let mut stats = SweepStats::default();
        if self.state.flags.use_affinities {
            let mut rho = vec![0.0; self.state.rho.len()];
            for o in outcomes {
                for (acc, r) in rho.iter_mut().zip(&o.rho) {
                    *acc += r;
                }
            }
            for r in &mut rho {
                *r /= n_rows;
            }
            self.state.rho = rho;
        }
        let mut eta_sum = 0.0;
        let mut g_sum = 0.0;
        let mut any_eta = false;
        let mut any_g = false;
        for o in outcomes {
            stats.neg_pos += o.counts.0;
            stats.pos_pos += o.counts.1;
            if let Some((eta, acc)) = o.eta {
                any_eta = true;
                eta_sum += eta;
                stats.eta_proposed += 1;
                stats.eta_accepted += u64::from(acc);
            }
            if let Some(g) = o.g {
                any_g = true;
                g_sum += g;
            }
        }
        if any_eta {
            self.state.eta = eta_sum / n_rows;
        }
        if any_g {
            self.state.g = g_sum / n_rows;
        }
        stats
    }

    fn single_draw_updates(&mut self, outcomes: &[RowOutcome], observer: &mut dyn UpdateObserver) -> SweepStats {
        let mut stats = SweepStats::default();
        for o in outcomes {
            stats.neg_pos += o.counts.0;
            stats.pos_pos += o.counts.1;
        }
        let h_n = self.z.n_hosts();
        let j_n = self.z.n_parasites();
        if self.state.flags.use_affinities {
            let hyper = self.state.hyper;
            for j in 0..j_n {
                let mut count = 0usize;
                let mut rate = hyper.rate_rho;
                for h in 0..h_n {
                    let s = self.state.latent(h, j);
                    if s > 0.0 {
                        count += 1;
                    }
                    rate += self.state.gamma[h] * self.delta.get(h, j) * (-s).exp();
                }
                let shape = hyper.alpha_rho + count as f64;
                observer.on_gamma_draw(ConjugateSite::Rho { h: None, j }, shape, rate);
                self.state.rho[j] = updates::draw_gamma(shape, rate, &mut self.rng);
            }
        }
        if let (Some(p), false) = (&self.phylo, self.config.fix_eta) {
            let proposal =
                self.state.eta + self.adapter.proposal_sd() * rand_distr::Distribution::<f64>::sample(&rand_distr::StandardNormal, &mut self.rng);
            let mut current = 0.0;
            for h in 0..h_n {
                let d = self.delta.row(h);
                current += updates::row_log_likelihood(self.state.gamma[h], &self.state.rho, self.state.latent_row(h), &d);
            }
            let proposed = match eb_weights(p.depths, proposal) {
                Ok(w) => {
                    let cache = DeltaCache::build(self.z, &w, p.default_delta);
                    (0..h_n)
                        .map(|h| {
                            let d = cache.row(h);
                            updates::row_log_likelihood(self.state.gamma[h], &self.state.rho, self.state.latent_row(h), &d)
                        })
                        .sum()
                }
                Err(_) => f64::NEG_INFINITY,
            };
            let accepted = updates::mh_accept(proposed - current, &mut self.rng);
            if accepted {
                self.state.eta = proposal;
            }
            stats.eta_proposed = 1;
            stats.eta_accepted = u64::from(accepted);
        }
        if self.state.flags.use_uncertainty && self.config.fixed_g.is_none() {
            self.state.g = updates::update_g((stats.neg_pos, stats.pos_pos), &mut self.rng);
        }
        stats
    }
}

/// Read-only sweep-start state shared by all rows.
struct RowContext<'s> {
    z: &'s InteractionMatrix,
    rho: &'s [f64],
    eta: f64,
    g: f64,
    flags: ModelFlags,
    hyper: &'s Hyperparams,
    delta: &'s DeltaCache,
    phylo: Option<PhyloContext<'s>>,
    eta_sd: f64,
    update_eta: bool,
    update_g: bool,
    row_draws: bool,
}

impl RowContext<'_> {
    /// Latents, then γ_h, then the row draws of ρ, η and g.
    fn row_step<R: Rng + ?Sized>(
        &self,
        h: usize,
        latent: &mut [f64],
        gamma: &mut f64,
        rng: &mut R,
        observer: &mut dyn UpdateObserver,
    ) -> RowOutcome {
        let z_row = self.z.row(h);
        let delta_row = self.delta.row(h);
        let row = RowInputs {
            h,
            z: z_row,
            rho: self.rho,
            delta: &delta_row,
            hyper: self.hyper,
        };
        for (j, s) in latent.iter_mut().enumerate() {
            let lt = updates::log_tau(*gamma, self.rho[j], delta_row[j]);
            *s = updates::update_latent(z_row[j], lt, self.g, rng);
        }
        if self.flags.use_affinities {
            *gamma = updates::update_gamma(&row, latent, rng, observer);
        }
        let mut out = RowOutcome {
            counts: updates::g_counts(z_row, latent),
            ..RowOutcome::default()
        };
        if !self.row_draws {
            return out;
        }
        if self.flags.use_affinities {
            out.rho = vec![0.0; self.rho.len()];
            updates::update_rho_row(&row, *gamma, latent, rng, observer, &mut out.rho);
        }
        if let (Some(phylo), true) = (&self.phylo, self.update_eta) {
            let mut scratch = EtaScratch::new(self.z.n_hosts(), self.z.n_parasites());
            out.eta = Some(updates::update_eta(
                &row,
                *gamma,
                latent,
                self.eta,
                phylo,
                self.eta_sd,
                &mut scratch,
                rng,
            ));
        }
        if self.flags.use_uncertainty && self.update_g {
            out.g = Some(updates::update_g(out.counts, rng));
        }
        out
    }
}

/// Run burn-in and recording sweeps and collect the trace.
pub fn run_mcmc(
    z: &InteractionMatrix,
    depths: Option<&PairwiseMrcaDepths>,
    config: &SamplerConfig,
) -> Result<PosteriorTrace, SamplerError> {
    run_mcmc_observed(z, depths, config, &mut NoObserver)
}

/// As [`run_mcmc`], reporting every conjugate draw to `observer`. Observers
/// only see draws in sequential mode.
pub fn run_mcmc_observed(
    z: &InteractionMatrix,
    depths: Option<&PairwiseMrcaDepths>,
    config: &SamplerConfig,
    observer: &mut dyn UpdateObserver,
) -> Result<PosteriorTrace, SamplerError> {
    let mut sampler = Sampler::new(z, depths, config.clone())?;
    for _ in 0..config.burn_in {
        sampler.sweep(observer)?;
    }
    sampler.freeze_adaptation();
    record(&mut sampler, observer)
}

/// Run the configured number of recorded sweeps from the sampler's current
/// state, with thinning.
pub fn record(sampler: &mut Sampler<'_>, observer: &mut dyn UpdateObserver) -> Result<PosteriorTrace, SamplerError> {
    let config = sampler.config.clone();
    let mut trace = PosteriorTrace::new(
        sampler.z.hosts().to_vec(),
        sampler.z.parasites().to_vec(),
        config.flags,
        config.recorded_len(),
    );
    for t in 0..config.iterations {
        let stats = sampler.sweep(observer)?;
        if (t + 1) % config.thin == 0 {
            trace.push(&sampler.state, stats);
        }
    }
    trace.eta_acceptance = sampler.adapter.acceptance_rate();
    trace.eta_proposal_sd = sampler.adapter.proposal_sd();
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newick::{pairwise_depths, parse_newick};

    fn toy() -> (InteractionMatrix, PairwiseMrcaDepths) {
        let z = InteractionMatrix::from_bits(&[
            vec![1, 1, 0, 0, 1],
            vec![1, 0, 1, 0, 0],
            vec![0, 1, 1, 1, 0],
            vec![0, 0, 1, 1, 1],
        ])
        .unwrap();
        let t = parse_newick("((h0:1,h1:1):1,(h2:1.5,h3:1.5):0.5);").unwrap();
        (z, pairwise_depths(&t).unwrap())
    }

    fn short(seed: u64) -> SamplerConfig {
        SamplerConfig {
            iterations: 40,
            burn_in: 20,
            seed,
            ..SamplerConfig::default()
        }
    }

    #[test]
    fn invalid_configs() {
        let (z, d) = toy();
        let mut c = short(1);
        c.iterations = 0;
        assert!(matches!(run_mcmc(&z, Some(&d), &c), Err(SamplerError::InvalidConfig(_))));
        let mut c = short(1);
        c.thin = 3;
        assert!(matches!(run_mcmc(&z, Some(&d), &c), Err(SamplerError::InvalidConfig(_))));
        assert!(matches!(run_mcmc(&z, None, &short(1)), Err(SamplerError::MissingPhylogeny)));
    }

    #[test]
    fn label_mismatch() {
        let (z, _) = toy();
        let t = parse_newick("((a:1,b:1):1,(c:1.5,d:1.5):0.5);").unwrap();
        let d = pairwise_depths(&t).unwrap();
        assert!(matches!(run_mcmc(&z, Some(&d), &short(1)), Err(SamplerError::LabelMismatch)));
    }

    #[test]
    fn phylogeny_only_rejects_single_host_columns() {
        let (z, d) = toy();
        let z2 = InteractionMatrix::from_bits(&[vec![1, 1], vec![0, 1], vec![0, 0], vec![0, 0]]).unwrap();
        let mut c = short(1);
        c.flags = ModelFlags::phylogeny_only();
        assert!(matches!(run_mcmc(&z2, Some(&d), &c), Err(SamplerError::SingleHostColumns(_))));
        assert!(run_mcmc(&z, Some(&d), &c).is_ok());
    }

    #[test]
    fn deterministic_and_sized() {
        let (z, d) = toy();
        let mut c = short(7);
        c.thin = 4;
        let a = run_mcmc(&z, Some(&d), &c).unwrap();
        let b = run_mcmc(&z, Some(&d), &c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 10);
        assert!(a.gamma_draws().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn sign_consistency_without_uncertainty() {
        let (z, d) = toy();
        let mut s = Sampler::new(&z, Some(&d), short(3)).unwrap();
        for _ in 0..20 {
            s.sweep(&mut NoObserver).unwrap();
            for h in 0..z.n_hosts() {
                for j in 0..z.n_parasites() {
                    assert_eq!(s.state().latent(h, j) > 0.0, z.get(h, j));
                }
            }
        }
    }

    #[test]
    fn g_identity() {
        let (z, d) = toy();
        let plain = run_mcmc(&z, Some(&d), &short(11)).unwrap();
        let mut c = short(11);
        c.flags = c.flags.with_uncertainty(true);
        c.fixed_g = Some(0.0);
        let with_g = run_mcmc(&z, Some(&d), &c).unwrap();
        assert_eq!(plain.gamma_draws(), with_g.gamma_draws());
        assert_eq!(plain.rho_draws(), with_g.rho_draws());
        assert_eq!(plain.eta_draws(), with_g.eta_draws());
    }

    #[test]
    fn parallel_rows_are_deterministic() {
        let (z, d) = toy();
        let mut c = short(5);
        c.parallel_rows = true;
        let a = run_mcmc(&z, Some(&d), &c).unwrap();
        let b = run_mcmc(&z, Some(&d), &c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn literal_mode_runs() {
        let (z, d) = toy();
        let mut c = short(5);
        c.averaging = RowAveraging::Literal;
        c.flags = c.flags.with_uncertainty(true);
        let t = run_mcmc(&z, Some(&d), &c).unwrap();
        assert!(t.g_draws().iter().all(|&g| (0.0..=1.0).contains(&g)));
    }

    #[test]
    fn affinity_only_keeps_eta() {
        let (z, _) = toy();
        let mut c = short(2);
        c.flags = ModelFlags::affinity_only();
        let t = run_mcmc(&z, None, &c).unwrap();
        assert!(t.eta_draws().iter().all(|&e| e == 0.0));
    }
}
