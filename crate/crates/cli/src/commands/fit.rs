use std::path::Path;

use log::info;
use phylolink::evaluate::{roc_auc, FoldPredictions};
use phylolink::interactions::temporal_split;
use phylolink::{posterior_predict, run_mcmc};

use super::{prepare_out, write_output};
use crate::config::RunConfig;
use crate::data;
use crate::error::CliError;
use crate::manifest::Manifest;

pub fn run(config: &RunConfig) -> Result<(), CliError> {
    let edges = RunConfig::check_path("edges", &config.edges)?;
    let flags = config.flags();
    if flags.use_phylogeny && config.tree.is_none() {
        return Err(CliError::Config(format!("tree is required for model {}", config.model)));
    }
    let tree = config.tree.as_ref().map(|_| RunConfig::check_path("tree", &config.tree)).transpose()?;
    let sampler = config.sampler();
    sampler.validate()?;

    let mut manifest = Manifest::new("fit", config);
    let ds = data::load(&edges, tree.as_deref(), config.loose_labels, config.drop_single_host, &mut manifest)?;
    let (truth, train) = match config.temporal_cutoff {
        None => (ds.z.clone(), ds.z),
        Some(cutoff) => {
            let (train, test) = temporal_split(&ds.z, cutoff)?;
            let cols: Vec<usize> = (0..train.n_parasites()).filter(|&j| train.col_sum(j) > 0).collect();
            let rows: Vec<usize> = (0..train.n_hosts()).collect();
            manifest.stat("holdout_ones", test.len());
            manifest.stat("parasites_without_training_ones", train.n_parasites() - cols.len());
            (ds.z.submatrix(&rows, &cols), train.submatrix(&rows, &cols))
        }
    };
    let depths = if flags.use_phylogeny { ds.depths.as_ref() } else { None };

    info!("running {} + {} sweeps", sampler.burn_in, sampler.iterations);
    let trace = run_mcmc(&train, depths, &sampler)?;
    let pred = posterior_predict(&trace, &train, depths, sampler.delta_default)?;
    let summary = trace.summary()?;
    manifest.stat("eta_acceptance", format!("{:.4}", trace.eta_acceptance));
    manifest.stat("eta_proposal_sd", format!("{:.6}", trace.eta_proposal_sd));
    manifest.stat("recorded_sweeps", trace.len());

    let out = &config.out;
    prepare_out(out)?;
    write_output(out, "trace.csv", &mut manifest, |w| trace.write_csv(w))?;
    write_output(out, "predictive.csv", &mut manifest, |w| pred.write_csv(w))?;
    write_output(out, "diagnostics.csv", &mut manifest, |w| summary.write_csv(w))?;
    write_output(out, "train_matrix.csv", &mut manifest, |w| train.write_csv(w))?;
    write_output(out, "truth_matrix.csv", &mut manifest, |w| truth.write_csv(w))?;
    if config.temporal_cutoff.is_some() {
        holdout(out, &train, &truth, &pred, config, &mut manifest)?;
    }
    manifest.write(out)?;
    Ok(())
}

fn holdout(
    out: &Path,
    train: &phylolink::InteractionMatrix,
    truth: &phylolink::InteractionMatrix,
    pred: &phylolink::sampler::PredictiveMatrix,
    config: &RunConfig,
    manifest: &mut Manifest,
) -> Result<(), CliError> {
    let mut p = Vec::new();
    let mut t = Vec::new();
    for h in 0..train.n_hosts() {
        for j in 0..train.n_parasites() {
            if !train.get(h, j) {
                p.push(pred.get(h, j));
                t.push(truth.get(h, j));
            }
        }
    }
    let fold = FoldPredictions::new(p, t)?;
    let n_test = fold.len();
    let n_pos = fold.positives();
    let roc = roc_auc(&[fold], &config.thresholds)?;
    write_output(out, "holdout_summary.csv", manifest, |w| -> Result<(), csv::Error> {
        let mut c = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        c.write_record(["auc", "pct_ones_recovered", "best_threshold", "test_cells", "test_ones"])?;
        c.write_record([
            format!("{:.6}", roc.auc),
            format!("{:.2}", roc.pct_ones_recovered),
            roc.best_threshold.to_string(),
            n_test.to_string(),
            n_pos.to_string(),
        ])?;
        c.flush()?;
        Ok(())
    })?;
    write_output(out, "holdout_roc.csv", manifest, |w| roc.write_csv(w))?;
    Ok(())
}
