//! Recorded draws, their summaries, and posterior predictive probabilities.

use std::io::{Read, Write};

use rayon::prelude::*;

use crate::interactions::{read_labelled_grid, InteractionError, InteractionMatrix};
use crate::model::{interaction_prob_unchecked, DeltaDefault, ModelFlags, ModelState};
use crate::newick::PairwiseMrcaDepths;

use super::diagnostics::ParamSummary;
use super::updates::undocumented_positive_prob;
use super::{delta_cache_for, SamplerError, SweepStats};

/// Draws of every scalar parameter, one entry per recorded sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorTrace {
    pub hosts: Vec<String>,
    pub parasites: Vec<String>,
    pub flags: ModelFlags,
    /// Row-major `len × H`.
    gamma: Vec<f64>,
    /// Row-major `len × J`.
    rho: Vec<f64>,
    eta: Vec<f64>,
    g: Vec<f64>,
    /// `N₋₊` summed over rows, per recorded sweep.
    pub neg_pos: Vec<usize>,
    /// `N₊₊` summed over rows, per recorded sweep.
    pub pos_pos: Vec<usize>,
    /// Acceptance rate of the η proposals during recording.
    pub eta_acceptance: f64,
    pub eta_proposal_sd: f64,
}

/// Per-parameter summaries of a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSummary {
    pub gamma: Vec<ParamSummary>,
    pub rho: Vec<ParamSummary>,
    pub eta: Option<ParamSummary>,
    pub g: Option<ParamSummary>,
}

impl TraceSummary {
    pub fn all(&self) -> impl Iterator<Item = &ParamSummary> {
        self.eta.iter().chain(self.g.iter()).chain(&self.gamma).chain(&self.rho)
    }

    /// `name,mean,sd,q025,q975,ess,acf1,acf5,acf10,acf50`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        w.write_record(["name", "mean", "sd", "q025", "q975", "ess", "acf1", "acf5", "acf10", "acf50"])?;
        for p in self.all() {
            let mut rec = vec![p.name.clone()];
            rec.extend([p.mean, p.sd, p.q025, p.q975, p.ess].iter().map(|v| format!("{v:.6}")));
            rec.extend(p.acf.iter().map(|v| format!("{v:.4}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

impl PosteriorTrace {
    pub fn new(hosts: Vec<String>, parasites: Vec<String>, flags: ModelFlags, capacity: usize) -> Self {
        PosteriorTrace {
            gamma: Vec::with_capacity(capacity * hosts.len()),
            rho: Vec::with_capacity(capacity * parasites.len()),
            hosts,
            parasites,
            flags,
            eta: Vec::with_capacity(capacity),
            g: Vec::with_capacity(capacity),
            neg_pos: Vec::with_capacity(capacity),
            pos_pos: Vec::with_capacity(capacity),
            eta_acceptance: 0.0,
            eta_proposal_sd: 0.0,
        }
    }

    pub fn push(&mut self, state: &ModelState, stats: SweepStats) {
        self.gamma.extend_from_slice(&state.gamma);
        self.rho.extend_from_slice(&state.rho);
        self.eta.push(state.eta);
        self.g.push(state.g);
        self.neg_pos.push(stats.neg_pos);
        self.pos_pos.push(stats.pos_pos);
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    pub fn n_hosts(&self) -> usize {
        self.hosts.len()
    }

    pub fn n_parasites(&self) -> usize {
        self.parasites.len()
    }

    pub fn gamma_draws(&self) -> &[f64] {
        &self.gamma
    }

    pub fn rho_draws(&self) -> &[f64] {
        &self.rho
    }

    pub fn eta_draws(&self) -> &[f64] {
        &self.eta
    }

    pub fn g_draws(&self) -> &[f64] {
        &self.g
    }

    pub fn gamma_at(&self, t: usize) -> &[f64] {
        let n = self.n_hosts();
        &self.gamma[t * n..(t + 1) * n]
    }

    pub fn rho_at(&self, t: usize) -> &[f64] {
        let n = self.n_parasites();
        &self.rho[t * n..(t + 1) * n]
    }

    pub fn gamma_chain(&self, h: usize) -> Vec<f64> {
        self.gamma.iter().skip(h).step_by(self.n_hosts()).copied().collect()
    }

    pub fn rho_chain(&self, j: usize) -> Vec<f64> {
        self.rho.iter().skip(j).step_by(self.n_parasites()).copied().collect()
    }

    /// Concatenate another chain's recorded draws.
    pub fn append(&mut self, other: &PosteriorTrace) -> Result<(), SamplerError> {
        if other.hosts != self.hosts || other.parasites != self.parasites {
            return Err(SamplerError::LabelMismatch);
        }
        let n = self.len() as f64;
        let m = other.len() as f64;
        if n + m > 0.0 {
            self.eta_acceptance = (self.eta_acceptance * n + other.eta_acceptance * m) / (n + m);
        }
        self.gamma.extend_from_slice(&other.gamma);
        self.rho.extend_from_slice(&other.rho);
        self.eta.extend_from_slice(&other.eta);
        self.g.extend_from_slice(&other.g);
        self.neg_pos.extend_from_slice(&other.neg_pos);
        self.pos_pos.extend_from_slice(&other.pos_pos);
        Ok(())
    }

    pub fn summary(&self) -> Result<TraceSummary, SamplerError> {
        if self.is_empty() {
            return Err(SamplerError::EmptyTrace);
        }
        let mut out = TraceSummary {
            gamma: Vec::new(),
            rho: Vec::new(),
            eta: None,
            g: None,
        };
        if self.flags.use_affinities {
            out.gamma = (0..self.n_hosts())
                .into_par_iter()
                .map(|h| ParamSummary::from_draws(format!("gamma:{}", self.hosts[h]), &self.gamma_chain(h)))
                .collect();
            out.rho = (0..self.n_parasites())
                .into_par_iter()
                .map(|j| ParamSummary::from_draws(format!("rho:{}", self.parasites[j]), &self.rho_chain(j)))
                .collect();
        }
        if self.flags.use_phylogeny {
            out.eta = Some(ParamSummary::from_draws("eta", &self.eta));
        }
        if self.flags.use_uncertainty {
            out.g = Some(ParamSummary::from_draws("g", &self.g));
        }
        Ok(out)
    }

    /// `sweep,eta,g,gamma:<host>...,rho:<parasite>...`, one row per recorded
    /// sweep.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        let mut header = vec!["sweep".to_string(), "eta".to_string(), "g".to_string()];
        header.extend(self.hosts.iter().map(|h| format!("gamma:{h}")));
        header.extend(self.parasites.iter().map(|p| format!("rho:{p}")));
        w.write_record(&header)?;
        for t in 0..self.len() {
            let mut rec = Vec::with_capacity(header.len());
            rec.push((t + 1).to_string());
            rec.push(format!("{}", self.eta[t]));
            rec.push(format!("{}", self.g[t]));
            rec.extend(self.gamma_at(t).iter().map(|v| format!("{v}")));
            rec.extend(self.rho_at(t).iter().map(|v| format!("{v}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Inverse of [`PosteriorTrace::write_csv`]. Counts and acceptance are not
    /// stored in the CSV and come back as zero.
    pub fn read_csv<R: Read>(reader: R, flags: ModelFlags) -> Result<Self, InteractionError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header = rdr.headers()?.clone();
        let mut hosts = Vec::new();
        let mut parasites = Vec::new();
        for name in header.iter().skip(3) {
            if let Some(h) = name.strip_prefix("gamma:") {
                hosts.push(h.to_string());
            } else if let Some(p) = name.strip_prefix("rho:") {
                parasites.push(p.to_string());
            } else {
                return Err(InteractionError::Shape(format!("unexpected trace column {name:?}")));
            }
        }
        let mut trace = PosteriorTrace::new(hosts, parasites, flags, 0);
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let values: Vec<f64> = rec
                .iter()
                .skip(1)
                .map(|s| s.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| InteractionError::InvalidRecord {
                    row: row + 1,
                    reason: e.to_string(),
                })?;
            let nh = trace.n_hosts();
            trace.eta.push(values[0]);
            trace.g.push(values[1]);
            trace.gamma.extend_from_slice(&values[2..2 + nh]);
            trace.rho.extend_from_slice(&values[2 + nh..]);
            trace.neg_pos.push(0);
            trace.pos_pos.push(0);
        }
        Ok(trace)
    }
}

/// `H × J` matrix of per-cell posterior probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveMatrix {
    pub hosts: Vec<String>,
    pub parasites: Vec<String>,
    values: Vec<f64>,
}

impl PredictiveMatrix {
    pub fn new(hosts: Vec<String>, parasites: Vec<String>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), hosts.len() * parasites.len());
        PredictiveMatrix { hosts, parasites, values }
    }

    pub fn get(&self, h: usize, j: usize) -> f64 {
        self.values[h * self.parasites.len() + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_hosts(&self) -> usize {
        self.hosts.len()
    }

    pub fn n_parasites(&self) -> usize {
        self.parasites.len()
    }

    /// Same layout as an interaction matrix CSV, cells with 6 decimals.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        let mut header = vec!["host"];
        header.extend(self.parasites.iter().map(String::as_str));
        w.write_record(&header)?;
        for (h, host) in self.hosts.iter().enumerate() {
            let mut rec = vec![host.clone()];
            rec.extend((0..self.n_parasites()).map(|j| format!("{:.6}", self.get(h, j))));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self, InteractionError> {
        let (hosts, parasites, grid) = read_labelled_grid(reader)?;
        let mut values = Vec::with_capacity(hosts.len() * parasites.len());
        for (h, row) in grid.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let p: f64 = v.parse().map_err(|_| InteractionError::NonBinaryCell {
                    row: h,
                    col: j,
                    value: v.clone(),
                })?;
                values.push(p);
            }
        }
        Ok(PredictiveMatrix { hosts, parasites, values })
    }
}

const PREDICT_CHUNK: usize = 128;

/// Monte Carlo average over recorded sweeps of `p = 1 − e^{−γ_h ρ_j δ_hj(η)}`.
///
/// With uncertainty on, undocumented cells average `gp / (gp + 1 − p)`
/// instead. δ is computed from `z`.
pub fn posterior_predict(
    trace: &PosteriorTrace,
    z: &InteractionMatrix,
    depths: Option<&PairwiseMrcaDepths>,
    delta_default: DeltaDefault,
) -> Result<PredictiveMatrix, SamplerError> {
    if trace.is_empty() {
        return Err(SamplerError::EmptyTrace);
    }
    if trace.hosts != z.hosts() || trace.parasites != z.parasites() {
        return Err(SamplerError::LabelMismatch);
    }
    let depths = if trace.flags.use_phylogeny {
        let d = depths.ok_or(SamplerError::MissingPhylogeny)?;
        if d.labels() != z.hosts() {
            return Err(SamplerError::LabelMismatch);
        }
        Some(d)
    } else {
        None
    };
    let h_n = z.n_hosts();
    let j_n = z.n_parasites();
    let starts: Vec<usize> = (0..trace.len()).step_by(PREDICT_CHUNK).collect();
    let partials: Vec<Vec<f64>> = starts
        .par_iter()
        .map(|&start| -> Result<Vec<f64>, SamplerError> {
            let mut sum = vec![0.0; h_n * j_n];
            let mut cache = None;
            let mut cache_eta = f64::NAN;
            for t in start..(start + PREDICT_CHUNK).min(trace.len()) {
                let eta = trace.eta[t];
                if cache.is_none() || eta != cache_eta {
                    cache = Some(delta_cache_for(z, depths, eta, delta_default)?);
                    cache_eta = eta;
                }
                let delta = cache.as_ref().expect("cache filled above");
                let gamma = trace.gamma_at(t);
                let rho = trace.rho_at(t);
                let g = trace.g[t];
                for h in 0..h_n {
                    for j in 0..j_n {
                        let tau = gamma[h] * rho[j] * delta.get(h, j);
                        let p = if trace.flags.use_uncertainty && !z.get(h, j) {
                            undocumented_positive_prob(g, tau)
                        } else {
                            interaction_prob_unchecked(tau)
                        };
                        sum[h * j_n + j] += p;
                    }
                }
            }
            Ok(sum)
        })
        .collect::<Result<_, _>>()?;
    let mut values = vec![0.0; h_n * j_n];
    for part in &partials {
        for (v, p) in values.iter_mut().zip(part) {
            *v += p;
        }
    }
    let n = trace.len() as f64;
    for v in &mut values {
        *v /= n;
    }
    Ok(PredictiveMatrix::new(z.hosts().to_vec(), z.parasites().to_vec(), values))
}
