//! `phylolink`: fit, cross-validate, scan, simulate and report.

mod commands;
mod config;
mod data;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;

use config::RunConfig;
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "phylolink", version, about = "Link prediction for host-parasite networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit one model and write its trace and posterior predictive matrix.
    Fit(Common),
    /// K-fold comparison of several models.
    Crossval {
        #[command(flatten)]
        common: Common,
        /// Comma-separated list from affinity, phylo, full, nn.
        #[arg(long)]
        models: Option<String>,
        #[arg(long)]
        folds: Option<usize>,
    },
    /// Phylogeny-only AUC across tree transforms.
    Scan(Common),
    /// Draw a synthetic network from the model.
    Simulate(Common),
    /// Degree, recovery and ordering summaries of a fit directory.
    Report {
        run_dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        top_x: Option<usize>,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    jobs: Option<usize>,
    /// affinity, phylo or full.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    with_g: bool,
    #[arg(long)]
    drop_single_host: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    edges: Option<PathBuf>,
    #[arg(long)]
    tree: Option<PathBuf>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    /// Any configuration key, as KEY=VALUE; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        let mut pairs: Vec<(&str, String)> = Vec::new();
        let mut opt = |k: &'static str, v: Option<String>| {
            if let Some(v) = v {
                pairs.push((k, v));
            }
        };
        opt("seed", self.seed.map(|v| v.to_string()));
        opt("jobs", self.jobs.map(|v| v.to_string()));
        opt("model", self.model.clone());
        opt("with_g", self.with_g.then(|| "true".into()));
        opt("drop_single_host", self.drop_single_host.then(|| "true".into()));
        opt("out", self.out.as_ref().map(|p| p.display().to_string()));
        opt("edges", self.edges.as_ref().map(|p| p.display().to_string()));
        opt("tree", self.tree.as_ref().map(|p| p.display().to_string()));
        opt("iterations", self.iterations.map(|v| v.to_string()));
        opt("burn_in", self.burn_in.map(|v| v.to_string()));
        opt("thin", self.thin.map(|v| v.to_string()));
        for (k, v) in pairs {
            cfg.set(k, &v)?;
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--set {kv:?}: expected KEY=VALUE")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }
}

fn init_pool(jobs: usize) -> Result<(), CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .map_err(|e| CliError::Config(format!("jobs: {e}")))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fit(c) => {
            let cfg = c.resolve()?;
            init_pool(cfg.jobs)?;
            commands::fit::run(&cfg)
        }
        Command::Crossval { common, models, folds } => {
            let mut cfg = common.resolve()?;
            if let Some(m) = models {
                cfg.set("models", &m)?;
            }
            if let Some(k) = folds {
                cfg.folds = k;
            }
            init_pool(cfg.jobs)?;
            commands::crossval::run(&cfg)
        }
        Command::Scan(c) => {
            let cfg = c.resolve()?;
            init_pool(cfg.jobs)?;
            commands::scan::run(&cfg)
        }
        Command::Simulate(c) => {
            let cfg = c.resolve()?;
            init_pool(cfg.jobs)?;
            commands::simulate::run(&cfg)
        }
        Command::Report { run_dir, out, top_x, jobs } => {
            let mut cfg = RunConfig {
                out: out.unwrap_or_else(|| run_dir.join("report")),
                ..RunConfig::default()
            };
            if let Some(x) = top_x {
                cfg.top_x = x;
            }
            init_pool(jobs.unwrap_or(0))?;
            commands::report::run(&run_dir, &cfg)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
