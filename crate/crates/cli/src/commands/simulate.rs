use std::io::Write;

use phylolink::interactions::write_records_csv;
use phylolink::newick::{pairwise_depths, PhyloTree};
use phylolink::sampler::{draw_affinities, generate_synthetic, SyntheticParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{prepare_out, write_output};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::manifest::Manifest;

pub fn run(config: &RunConfig) -> Result<(), CliError> {
    if config.sim_hosts < 2 || config.sim_parasites < 1 {
        return Err(CliError::Config("sim_hosts must be at least 2 and sim_parasites at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let tree = match config.sim_eta {
        Some(_) => Some(PhyloTree::random_coalescent(config.sim_hosts, &mut rng)?),
        None => None,
    };
    let depths = tree.as_ref().map(pairwise_depths).transpose()?;
    let gamma = draw_affinities(config.sim_hosts, config.sim_gamma_shape, config.sim_gamma_rate, &mut rng)?;
    let rho = draw_affinities(config.sim_parasites, config.sim_rho_shape, config.sim_rho_rate, &mut rng)?;
    let params = SyntheticParams {
        gamma,
        rho,
        eta: config.sim_eta,
        default_delta: depths.as_ref().map_or(1.0, |d| config.delta_default.value(d)),
    };
    let z = generate_synthetic(depths.as_ref(), &params, config.sim_burn_sweeps, &mut rng)?;

    let mut manifest = Manifest::new("simulate", config);
    let density = z.total_ones() as f64 / (z.n_hosts() * z.n_parasites()) as f64;
    manifest.stat("interactions", z.total_ones());
    manifest.stat("density", format!("{density:.6}"));
    let out = &config.out;
    prepare_out(out)?;
    write_output(out, "edges.csv", &mut manifest, |w| write_records_csv(w, &z.to_records()))?;
    write_output(out, "truth.csv", &mut manifest, |w| -> Result<(), csv::Error> {
        let mut c = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        c.write_record(["parameter", "label", "value"])?;
        for (h, v) in z.hosts().iter().zip(&params.gamma) {
            c.write_record(["gamma", h.as_str(), &v.to_string()])?;
        }
        for (p, v) in z.parasites().iter().zip(&params.rho) {
            c.write_record(["rho", p.as_str(), &v.to_string()])?;
        }
        if let Some(eta) = params.eta {
            c.write_record(["eta", "", &eta.to_string()])?;
        }
        c.flush()?;
        Ok(())
    })?;
    if let Some(t) = &tree {
        write_output(out, "tree.nwk", &mut manifest, |w| writeln!(w, "{}", t.to_newick()).map_err(csv::Error::from))?;
    }
    manifest.write(out)?;
    Ok(())
}
