//! Synthetic interaction matrices drawn from the conditional model.

use rand::Rng;

use crate::interactions::InteractionMatrix;
use crate::model::interaction_prob_unchecked;
use crate::newick::PairwiseMrcaDepths;

use super::updates::draw_gamma;
use super::{eb_weights, SamplerError};

pub const MIN_BURN_SWEEPS: usize = 1000;

/// Generating parameters. `eta = None` switches the phylogeny off, leaving
/// independent cells with `p = 1 − e^{−γρ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticParams {
    pub gamma: Vec<f64>,
    pub rho: Vec<f64>,
    pub eta: Option<f64>,
    /// δ for cells whose column has no other documented host.
    pub default_delta: f64,
}

/// `n` independent Gamma(shape, rate) affinities.
pub fn draw_affinities<R: Rng + ?Sized>(n: usize, shape: f64, rate: f64, rng: &mut R) -> Result<Vec<f64>, SamplerError> {
    if !(shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite()) {
        return Err(SamplerError::InvalidConfig(format!(
            "affinity prior Gamma({shape}, {rate}) needs positive parameters"
        )));
    }
    Ok((0..n).map(|_| draw_gamma(shape, rate, rng)).collect())
}

/// Run single-site Gibbs over `Z` with conditionals
/// `P(z_hj = 1 | rest) = 1 − exp(−γ_h ρ_j δ_hj(η))` for `burn_sweeps` passes
/// from a uniformly random start and return the final state. Columns left
/// empty get one uniformly chosen host.
///
/// Host labels come from `depths` when given, else `h0..`; parasites are
/// `p0..`.
pub fn generate_synthetic<R: Rng + ?Sized>(
    depths: Option<&PairwiseMrcaDepths>,
    params: &SyntheticParams,
    burn_sweeps: usize,
    rng: &mut R,
) -> Result<InteractionMatrix, SamplerError> {
    let h_n = params.gamma.len();
    let j_n = params.rho.len();
    if burn_sweeps < MIN_BURN_SWEEPS {
        return Err(SamplerError::InvalidConfig(format!(
            "burn_sweeps {burn_sweeps} below {MIN_BURN_SWEEPS}"
        )));
    }
    if h_n == 0 || j_n == 0 {
        return Err(SamplerError::InvalidConfig("empty parameter vectors".into()));
    }
    if params
        .gamma
        .iter()
        .chain(&params.rho)
        .any(|&v| !(v > 0.0 && v.is_finite()))
    {
        return Err(SamplerError::InvalidConfig("affinities must be positive".into()));
    }
    let weights = match (params.eta, depths) {
        (Some(eta), Some(d)) => {
            if d.len() != h_n {
                return Err(SamplerError::LabelMismatch);
            }
            Some(eb_weights(d, eta)?)
        }
        (Some(_), None) => return Err(SamplerError::MissingPhylogeny),
        (None, _) => None,
    };
    let hosts: Vec<String> = match depths {
        Some(d) if d.len() == h_n => d.labels().to_vec(),
        _ => (0..h_n).map(|i| format!("h{i}")).collect(),
    };

    let mut rows = vec![vec![0u8; j_n]; h_n];
    for row in &mut rows {
        for v in row.iter_mut() {
            *v = u8::from(rng.random_bool(0.5));
        }
    }
    let mut col_sum = vec![0.0; h_n];
    for j in 0..j_n {
        let Some(w) = &weights else {
            for (h, row) in rows.iter_mut().enumerate() {
                let p = interaction_prob_unchecked(params.gamma[h] * params.rho[j]);
                row[j] = u8::from(rng.random::<f64>() < p);
            }
            continue;
        };
        // Column-wise Gibbs: columns are independent given the parameters.
        let mut ones = 0usize;
        col_sum.iter_mut().for_each(|s| *s = 0.0);
        for i in 0..h_n {
            if rows[i][j] == 1 {
                ones += 1;
                for (h, s) in col_sum.iter_mut().enumerate() {
                    *s += w[h * h_n + i];
                }
            }
        }
        for _ in 0..burn_sweeps {
            for h in 0..h_n {
                let here = rows[h][j] == 1;
                let others = ones - usize::from(here);
                let delta = if others == 0 { params.default_delta } else { col_sum[h] };
                let p = interaction_prob_unchecked(params.gamma[h] * params.rho[j] * delta);
                let new = rng.random::<f64>() < p;
                if new != here {
                    let sign = if new { 1.0 } else { -1.0 };
                    for (k, s) in col_sum.iter_mut().enumerate() {
                        *s += sign * w[k * h_n + h];
                    }
                    if new {
                        ones += 1;
                    } else {
                        ones -= 1;
                    }
                    rows[h][j] = u8::from(new);
                }
            }
        }
    }
    for j in 0..j_n {
        if rows.iter().all(|r| r[j] == 0) {
            rows[rng.random_range(0..h_n)][j] = 1;
        }
    }
    let parasites = (0..j_n).map(|j| format!("p{j}")).collect();
    InteractionMatrix::from_rows(hosts, parasites, &rows)
        .map_err(|e| SamplerError::InvalidConfig(format!("synthetic matrix: {e}")))
}
