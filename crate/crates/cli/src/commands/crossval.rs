use log::{info, warn};
use phylolink::evaluate::{
    cross_validate, default_theta_grid, wilcoxon_paired_one_sided, write_summary_csv, CrossValConfig, ModelEvaluation,
};

use super::{prepare_out, write_output};
use crate::config::RunConfig;
use crate::data;
use crate::error::CliError;
use crate::manifest::Manifest;

pub fn run(config: &RunConfig) -> Result<(), CliError> {
    let edges = RunConfig::check_path("edges", &config.edges)?;
    if config.models.is_empty() {
        return Err(CliError::Config("models: at least one model is required".into()));
    }
    if config.folds < 2 {
        return Err(CliError::Config(format!("folds: need at least 2, got {}", config.folds)));
    }
    let needs_tree = config.needs_tree(&config.models);
    if needs_tree && config.tree.is_none() {
        return Err(CliError::Config("tree is required for the phylo and full models".into()));
    }
    let tree = config.tree.as_ref().map(|_| RunConfig::check_path("tree", &config.tree)).transpose()?;
    let mut sampler = config.sampler();
    for m in &config.models {
        if let Some(f) = m.flags(config.with_g) {
            sampler.flags = f;
            sampler.validate()?;
        }
    }

    let mut manifest = Manifest::new("crossval", config);
    let ds = data::load(&edges, tree.as_deref(), config.loose_labels, config.drop_single_host, &mut manifest)?;
    let cv = CrossValConfig {
        folds: config.folds,
        floor: config.floor(),
        seed: config.seed,
        sampler,
        with_g: config.with_g,
        thresholds: config.thresholds.clone(),
        theta_grid: default_theta_grid(),
        nn_k_max: config.nn_k_max,
    };
    info!("{}-fold cross-validation of {} model(s)", cv.folds, config.models.len());
    let (plan, evals) = cross_validate(&ds.z, ds.depths.as_ref(), &config.models, &cv)?;
    manifest.stat("held_out_ones", plan.total_held_out());

    let out = &config.out;
    prepare_out(out)?;
    write_output(out, "summary.csv", &mut manifest, |w| write_summary_csv(w, &evals))?;
    for e in &evals {
        write_output(out, &format!("roc_{}.csv", e.model), &mut manifest, |w| e.roc.write_csv(w))?;
        write_output(out, &format!("murphy_{}.csv", e.model), &mut manifest, |w| e.murphy.write_csv(w))?;
    }
    write_output(out, "fold_auc.csv", &mut manifest, |w| -> Result<(), csv::Error> {
        let mut c = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        c.write_record(["model", "fold", "auc"])?;
        for e in &evals {
            for (k, a) in e.fold_auc.iter().enumerate() {
                c.write_record([e.model.name().to_string(), k.to_string(), format!("{a:.6}")])?;
            }
        }
        c.flush()?;
        Ok(())
    })?;
    write_output(out, "wilcoxon.csv", &mut manifest, |w| write_wilcoxon(w, &evals))?;
    write_output(out, "folds.csv", &mut manifest, |w| -> Result<(), csv::Error> {
        let mut c = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        c.write_record(["fold", "host", "parasite"])?;
        for k in 0..plan.len() {
            for &(h, j) in plan.held_out(k) {
                c.write_record([k.to_string(), ds.z.hosts()[h].clone(), ds.z.parasites()[j].clone()])?;
            }
        }
        c.flush()?;
        Ok(())
    })?;
    manifest.write(out)?;
    Ok(())
}

/// One row per ordered pair: p-value of `model_a` beating `model_b` on
/// per-fold AUC, `NA` when the test is undefined.
fn write_wilcoxon<W: std::io::Write>(w: W, evals: &[ModelEvaluation]) -> Result<(), csv::Error> {
    let mut c = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    c.write_record(["model_a", "model_b", "p_value"])?;
    for a in evals {
        for b in evals.iter().filter(|b| b.model != a.model) {
            let p = match wilcoxon_paired_one_sided(&a.fold_auc, &b.fold_auc) {
                Ok(p) => format!("{p:.6}"),
                Err(e) => {
                    warn!("wilcoxon {} vs {}: {e}", a.model, b.model);
                    "NA".to_string()
                }
            };
            c.write_record([a.model.name(), b.model.name(), p.as_str()])?;
        }
    }
    c.flush()?;
    Ok(())
}
