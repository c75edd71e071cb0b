//! Run configuration: a flat `key = value` file, then command-line
//! overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use phylolink::evaluate::{ModelKind, RocThresholds};
use phylolink::model::{DeltaDefault, Hyperparams, ModelFlags};
use phylolink::sampler::{RowAveraging, SamplerConfig};
use phylolink::transforms::{default_scan_grid, TransformSpec};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub edges: Option<PathBuf>,
    pub tree: Option<PathBuf>,
    pub out: PathBuf,
    pub model: ModelKind,
    pub with_g: bool,
    pub drop_single_host: bool,
    /// Match tree tips to hosts ignoring case and treating `_` as a space.
    pub loose_labels: bool,
    pub seed: u64,
    pub jobs: usize,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub adapt_window: usize,
    pub eta_init: f64,
    pub eta_proposal_sd: f64,
    pub fix_eta: bool,
    pub hyper: Hyperparams,
    pub delta_default: DeltaDefault,
    pub averaging: RowAveraging,
    pub parallel_rows: bool,
    pub temporal_cutoff: Option<i32>,
    pub folds: usize,
    /// Defaults to 2 with `drop_single_host`, else 1.
    pub floor: Option<usize>,
    pub models: Vec<ModelKind>,
    pub thresholds: RocThresholds,
    pub nn_k_max: usize,
    pub grid: Option<Vec<TransformSpec>>,
    pub include_kappa: bool,
    pub top_x: usize,
    pub sim_hosts: usize,
    pub sim_parasites: usize,
    pub sim_gamma_shape: f64,
    pub sim_gamma_rate: f64,
    pub sim_rho_shape: f64,
    pub sim_rho_rate: f64,
    /// `None` simulates without the phylogeny.
    pub sim_eta: Option<f64>,
    pub sim_burn_sweeps: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            edges: None,
            tree: None,
            out: PathBuf::from("phylolink-out"),
            model: ModelKind::Full,
            with_g: false,
            drop_single_host: false,
            loose_labels: true,
            seed: 0,
            jobs: 0,
            iterations: 20_000,
            burn_in: 20_000,
            thin: 1,
            adapt_window: 50,
            eta_init: 0.0,
            eta_proposal_sd: 0.5,
            fix_eta: false,
            hyper: Hyperparams::default(),
            delta_default: DeltaDefault::One,
            averaging: RowAveraging::SingleDraw,
            parallel_rows: false,
            temporal_cutoff: None,
            folds: 5,
            floor: None,
            models: vec![
                ModelKind::Full,
                ModelKind::Affinity,
                ModelKind::Phylogeny,
                ModelKind::NearestNeighbour,
            ],
            thresholds: RocThresholds::uniform_default(),
            nn_k_max: 10,
            grid: None,
            include_kappa: false,
            top_x: 10_000,
            sim_hosts: 50,
            sim_parasites: 100,
            sim_gamma_shape: 2.0,
            sim_gamma_rate: 8.0,
            sim_rho_shape: 2.0,
            sim_rho_rate: 8.0,
            sim_eta: Some(1.0),
            sim_burn_sweeps: 1000,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(CliError::Config(format!("{key}: expected true/false, got {value:?}"))),
    }
}

fn parse_list<T, F>(key: &str, value: &str, f: F) -> Result<Vec<T>, CliError>
where
    F: Fn(&str) -> Result<T, String>,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| f(s).map_err(|e| CliError::Config(format!("{key}: {e}"))))
        .collect()
}

fn fmt_opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

fn path_str(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
}

impl RunConfig {
    /// Parse `key = value` lines; `#` starts a comment.
    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(k.trim(), v.trim())
                .map_err(|e| CliError::Config(format!("line {}: {}", n + 1, strip_prefix(&e))))?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("config file {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    /// Set one key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "edges" => self.edges = (!value.is_empty()).then(|| PathBuf::from(value)),
            "tree" => self.tree = (!value.is_empty()).then(|| PathBuf::from(value)),
            "out" => self.out = PathBuf::from(value),
            "model" => {
                self.model = match value.parse::<ModelKind>().map_err(CliError::Config)? {
                    ModelKind::NearestNeighbour => {
                        return Err(CliError::Config("model: nn is only available in crossval".into()))
                    }
                    m => m,
                }
            }
            "with_g" => self.with_g = parse_bool(key, value)?,
            "drop_single_host" => self.drop_single_host = parse_bool(key, value)?,
            "label_matching" => {
                self.loose_labels = match value {
                    "loose" => true,
                    "exact" => false,
                    _ => return Err(CliError::Config(format!("label_matching: expected loose or exact, got {value:?}"))),
                }
            }
            "seed" => self.seed = parse(key, value)?,
            "jobs" => self.jobs = parse(key, value)?,
            "iterations" => self.iterations = parse(key, value)?,
            "burn_in" => self.burn_in = parse(key, value)?,
            "thin" => self.thin = parse(key, value)?,
            "adapt_window" => self.adapt_window = parse(key, value)?,
            "eta_init" => self.eta_init = parse(key, value)?,
            "eta_proposal_sd" => self.eta_proposal_sd = parse(key, value)?,
            "fix_eta" => self.fix_eta = parse_bool(key, value)?,
            "alpha_gamma" => self.hyper.alpha_gamma = parse(key, value)?,
            "rate_gamma" => self.hyper.rate_gamma = parse(key, value)?,
            "alpha_rho" => self.hyper.alpha_rho = parse(key, value)?,
            "rate_rho" => self.hyper.rate_rho = parse(key, value)?,
            "delta_default" => {
                self.delta_default = match value {
                    "one" => DeltaDefault::One,
                    "mean_distance" => DeltaDefault::MeanDistance,
                    _ => {
                        return Err(CliError::Config(format!(
                            "delta_default: expected one or mean_distance, got {value:?}"
                        )))
                    }
                }
            }
            "averaging" => {
                self.averaging = match value {
                    "literal" => RowAveraging::Literal,
                    "single_draw" => RowAveraging::SingleDraw,
                    _ => {
                        return Err(CliError::Config(format!(
                            "averaging: expected literal or single_draw, got {value:?}"
                        )))
                    }
                }
            }
            "parallel_rows" => self.parallel_rows = parse_bool(key, value)?,
            "temporal_cutoff" => {
                self.temporal_cutoff = if value.is_empty() { None } else { Some(parse(key, value)?) }
            }
            "folds" => self.folds = parse(key, value)?,
            "floor" => self.floor = if value.is_empty() { None } else { Some(parse(key, value)?) },
            "models" => self.models = parse_list(key, value, |s| s.parse::<ModelKind>())?,
            "thresholds" => {
                self.thresholds = match value.split_once(':') {
                    None if value == "exact" => RocThresholds::Exact,
                    Some(("uniform", n)) => RocThresholds::Uniform(parse(key, n)?),
                    _ => {
                        return Err(CliError::Config(format!(
                            "thresholds: expected exact or uniform:N, got {value:?}"
                        )))
                    }
                }
            }
            "nn_k_max" => self.nn_k_max = parse(key, value)?,
            "grid" => {
                self.grid = if value == "default" {
                    None
                } else {
                    Some(parse_list(key, value, |s| s.parse::<TransformSpec>().map_err(|e| e.to_string()))?)
                }
            }
            "include_kappa" => self.include_kappa = parse_bool(key, value)?,
            "top_x" => self.top_x = parse(key, value)?,
            "sim_hosts" => self.sim_hosts = parse(key, value)?,
            "sim_parasites" => self.sim_parasites = parse(key, value)?,
            "sim_gamma_shape" => self.sim_gamma_shape = parse(key, value)?,
            "sim_gamma_rate" => self.sim_gamma_rate = parse(key, value)?,
            "sim_rho_shape" => self.sim_rho_shape = parse(key, value)?,
            "sim_rho_rate" => self.sim_rho_rate = parse(key, value)?,
            "sim_eta" => self.sim_eta = if value == "none" { None } else { Some(parse(key, value)?) },
            "sim_burn_sweeps" => self.sim_burn_sweeps = parse(key, value)?,
            other => return Err(CliError::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Every key with its current value, sorted by key.
    pub fn to_pairs(&self) -> BTreeMap<&'static str, String> {
        let thresholds = match self.thresholds {
            RocThresholds::Exact => "exact".to_string(),
            RocThresholds::Uniform(n) => format!("uniform:{n}"),
        };
        let grid = match &self.grid {
            None => "default".to_string(),
            Some(g) => g.iter().map(ToString::to_string).collect::<Vec<_>>().join(","),
        };
        let models = self.models.iter().map(|m| m.name()).collect::<Vec<_>>().join(",");
        BTreeMap::from([
            ("edges", path_str(&self.edges)),
            ("tree", path_str(&self.tree)),
            ("out", self.out.display().to_string()),
            ("model", self.model.name().to_string()),
            ("with_g", self.with_g.to_string()),
            ("drop_single_host", self.drop_single_host.to_string()),
            ("label_matching", if self.loose_labels { "loose" } else { "exact" }.to_string()),
            ("seed", self.seed.to_string()),
            ("jobs", self.jobs.to_string()),
            ("iterations", self.iterations.to_string()),
            ("burn_in", self.burn_in.to_string()),
            ("thin", self.thin.to_string()),
            ("adapt_window", self.adapt_window.to_string()),
            ("eta_init", self.eta_init.to_string()),
            ("eta_proposal_sd", self.eta_proposal_sd.to_string()),
            ("fix_eta", self.fix_eta.to_string()),
            ("alpha_gamma", self.hyper.alpha_gamma.to_string()),
            ("rate_gamma", self.hyper.rate_gamma.to_string()),
            ("alpha_rho", self.hyper.alpha_rho.to_string()),
            ("rate_rho", self.hyper.rate_rho.to_string()),
            (
                "delta_default",
                match self.delta_default {
                    DeltaDefault::One => "one",
                    DeltaDefault::MeanDistance => "mean_distance",
                }
                .to_string(),
            ),
            (
                "averaging",
                match self.averaging {
                    RowAveraging::Literal => "literal",
                    RowAveraging::SingleDraw => "single_draw",
                }
                .to_string(),
            ),
            ("parallel_rows", self.parallel_rows.to_string()),
            ("temporal_cutoff", fmt_opt(&self.temporal_cutoff)),
            ("folds", self.folds.to_string()),
            ("floor", fmt_opt(&self.floor)),
            ("models", models),
            ("thresholds", thresholds),
            ("nn_k_max", self.nn_k_max.to_string()),
            ("grid", grid),
            ("include_kappa", self.include_kappa.to_string()),
            ("top_x", self.top_x.to_string()),
            ("sim_hosts", self.sim_hosts.to_string()),
            ("sim_parasites", self.sim_parasites.to_string()),
            ("sim_gamma_shape", self.sim_gamma_shape.to_string()),
            ("sim_gamma_rate", self.sim_gamma_rate.to_string()),
            ("sim_rho_shape", self.sim_rho_shape.to_string()),
            ("sim_rho_rate", self.sim_rho_rate.to_string()),
            ("sim_eta", self.sim_eta.map_or("none".to_string(), |e| e.to_string())),
            ("sim_burn_sweeps", self.sim_burn_sweeps.to_string()),
        ])
    }

    pub fn floor(&self) -> usize {
        self.floor.unwrap_or(if self.drop_single_host { 2 } else { 1 })
    }

    pub fn flags(&self) -> ModelFlags {
        self.model.flags(self.with_g).expect("nn is rejected when parsing model")
    }

    pub fn needs_tree(&self, models: &[ModelKind]) -> bool {
        models.iter().any(|m| m.flags(false).is_some_and(|f| f.use_phylogeny))
    }

    pub fn sampler(&self) -> SamplerConfig {
        SamplerConfig {
            iterations: self.iterations,
            burn_in: self.burn_in,
            thin: self.thin,
            seed: self.seed,
            adapt_window: self.adapt_window,
            eta_init: self.eta_init,
            eta_proposal_sd: self.eta_proposal_sd,
            fix_eta: self.fix_eta,
            flags: self.flags(),
            hyper: self.hyper,
            delta_default: self.delta_default,
            averaging: self.averaging,
            fixed_g: None,
            parallel_rows: self.parallel_rows,
        }
    }

    pub fn scan_grid(&self) -> Vec<TransformSpec> {
        self.grid.clone().unwrap_or_else(|| default_scan_grid(self.include_kappa))
    }

    /// Input paths must exist.
    pub fn check_path(key: &str, path: &Option<PathBuf>) -> Result<PathBuf, CliError> {
        let p = path
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("{key} is required")))?;
        if !p.exists() {
            return Err(CliError::Config(format!("{key}: {} does not exist", p.display())));
        }
        Ok(p.clone())
    }
}

fn strip_prefix(e: &CliError) -> String {
    match e {
        CliError::Config(m) => m.clone(),
        other => other.to_string(),
    }
}
