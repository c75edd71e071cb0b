use std::collections::BTreeMap;
use std::fs::{self, File};
use std::path::Path;

use phylolink::evaluate::top_x_recovery;
use phylolink::interactions::{degree_distributions, left_order};
use phylolink::sampler::PredictiveMatrix;
use phylolink::{InteractionMatrix, ModelFlags, PosteriorTrace};

use super::{prepare_out, write_output};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::manifest::Manifest;

pub const REQUIRED: [&str; 5] = [
    "predictive.csv",
    "train_matrix.csv",
    "truth_matrix.csv",
    "trace.csv",
    "manifest.json",
];

fn open(dir: &Path, name: &str) -> Result<File, CliError> {
    let path = dir.join(name);
    File::open(&path).map_err(CliError::io(&path))
}

/// Model flags recorded in a fit manifest.
fn run_flags(path: &Path) -> Result<ModelFlags, CliError> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    let v: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let field = |k: &str| {
        v["config"][k]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| CliError::Data(format!("{}: config.{k} missing", path.display())))
    };
    let mut cfg = RunConfig::default();
    cfg.set("model", &field("model")?)?;
    cfg.set("with_g", &field("with_g")?)?;
    Ok(cfg.flags())
}

/// Summaries of a fit directory. Reads the persisted artifacts only.
pub fn run(run_dir: &Path, config: &RunConfig) -> Result<(), CliError> {
    for name in REQUIRED {
        let p = run_dir.join(name);
        if !p.is_file() {
            return Err(CliError::MissingArtifact(p));
        }
    }
    let mut manifest = Manifest::new("report", config);
    for name in REQUIRED {
        manifest.add_input(&run_dir.join(name))?;
    }
    let flags = run_flags(&run_dir.join("manifest.json"))?;
    let pred = PredictiveMatrix::read_csv(open(run_dir, "predictive.csv")?)?;
    let train = InteractionMatrix::read_csv(open(run_dir, "train_matrix.csv")?)?;
    let truth = InteractionMatrix::read_csv(open(run_dir, "truth_matrix.csv")?)?;
    let trace = PosteriorTrace::read_csv(open(run_dir, "trace.csv")?, flags)?;
    for (name, hosts, parasites) in [
        ("predictive.csv", &pred.hosts, &pred.parasites),
        ("truth_matrix.csv", &truth.hosts().to_vec(), &truth.parasites().to_vec()),
        ("trace.csv", &trace.hosts, &trace.parasites),
    ] {
        if hosts != train.hosts() || parasites != train.parasites() {
            return Err(CliError::Data(format!("{name}: labels differ from train_matrix.csv")));
        }
    }

    let out = &config.out;
    prepare_out(out)?;
    degrees(out, &truth, &pred, &mut manifest)?;

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
    let x_max = config.top_x.min(p.len());
    let curve = top_x_recovery(&p, &t, x_max)?;
    manifest.stat("candidate_cells", p.len());
    manifest.stat("held_out_ones", t.iter().filter(|&&b| b).count());
    write_output(out, "top_x.csv", &mut manifest, |w| -> Result<(), csv::Error> {
        let mut c = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        c.write_record(["x", "recovered"])?;
        for (i, r) in curve.iter().enumerate() {
            c.write_record([(i + 1).to_string(), r.to_string()])?;
        }
        c.flush()?;
        Ok(())
    })?;

    let ordered = left_order(&train);
    let col_of: BTreeMap<&str, usize> = train.parasites().iter().enumerate().map(|(j, p)| (p.as_str(), j)).collect();
    let cols: Vec<usize> = ordered.parasites().iter().map(|p| col_of[p.as_str()]).collect();
    let values = (0..pred.n_hosts())
        .flat_map(|h| cols.iter().map(move |&j| (h, j)))
        .map(|(h, j)| pred.get(h, j))
        .collect();
    let ordered_pred = PredictiveMatrix::new(pred.hosts.clone(), ordered.parasites().to_vec(), values);
    write_output(out, "left_ordered_train.csv", &mut manifest, |w| ordered.write_csv(w))?;
    write_output(out, "left_ordered_predictive.csv", &mut manifest, |w| ordered_pred.write_csv(w))?;

    let summary = trace.summary()?;
    write_output(out, "posterior_summary.csv", &mut manifest, |w| summary.write_csv(w))?;
    manifest.write(out)?;
    Ok(())
}

/// Observed degrees next to posterior expected degrees, per label and as
/// histograms (expected degrees rounded).
fn degrees(
    out: &Path,
    truth: &InteractionMatrix,
    pred: &PredictiveMatrix,
    manifest: &mut Manifest,
) -> Result<(), CliError> {
    let obs = degree_distributions(truth);
    let exp_host: Vec<f64> = (0..pred.n_hosts())
        .map(|h| (0..pred.n_parasites()).map(|j| pred.get(h, j)).sum())
        .collect();
    let exp_par: Vec<f64> = (0..pred.n_parasites())
        .map(|j| (0..pred.n_hosts()).map(|h| pred.get(h, j)).sum())
        .collect();
    write_output(out, "degrees.csv", manifest, |w| -> Result<(), csv::Error> {
        let mut c = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        c.write_record(["kind", "label", "observed", "expected"])?;
        for (h, label) in truth.hosts().iter().enumerate() {
            c.write_record(["host", label, &obs.host_degrees[h].to_string(), &format!("{:.4}", exp_host[h])])?;
        }
        for (j, label) in truth.parasites().iter().enumerate() {
            c.write_record(["parasite", label, &obs.parasite_degrees[j].to_string(), &format!("{:.4}", exp_par[j])])?;
        }
        c.flush()?;
        Ok(())
    })?;
    let hist = |d: &[f64]| {
        let mut m: BTreeMap<usize, usize> = BTreeMap::new();
        for v in d {
            *m.entry(v.round() as usize).or_insert(0) += 1;
        }
        m
    };
    let rows = [
        ("host", &obs.host_histogram, hist(&exp_host)),
        ("parasite", &obs.parasite_histogram, hist(&exp_par)),
    ];
    write_output(out, "degree_histogram.csv", manifest, |w| -> Result<(), csv::Error> {
        let mut c = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        c.write_record(["kind", "degree", "observed_count", "expected_count"])?;
        for (kind, o, e) in &rows {
            let keys: std::collections::BTreeSet<usize> = o.keys().chain(e.keys()).copied().collect();
            for k in keys {
                let oc = o.get(&k).copied().unwrap_or(0);
                let ec = e.get(&k).copied().unwrap_or(0);
                c.write_record([kind.to_string(), k.to_string(), oc.to_string(), ec.to_string()])?;
            }
        }
        c.flush()?;
        Ok(())
    })?;
    Ok(())
}
