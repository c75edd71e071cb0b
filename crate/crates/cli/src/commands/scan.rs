use phylolink::evaluate::make_folds;
use phylolink::transforms::{transform_scan, write_scan_csv};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{prepare_out, write_output};
use crate::config::RunConfig;
use crate::data;
use crate::error::CliError;
use crate::manifest::Manifest;

pub fn run(config: &RunConfig) -> Result<(), CliError> {
    let edges = RunConfig::check_path("edges", &config.edges)?;
    if config.tree.is_none() {
        return Err(CliError::Config("tree is required for scan".into()));
    }
    let tree = RunConfig::check_path("tree", &config.tree)?;
    let grid = config.scan_grid();
    if grid.is_empty() {
        return Err(CliError::Config("grid: no transforms to scan".into()));
    }
    let mut manifest = Manifest::new("scan", config);
    let ds = data::load(&edges, Some(&tree), config.loose_labels, config.drop_single_host, &mut manifest)?;
    let depths = ds.depths.as_ref().expect("tree was loaded");
    let plan = make_folds(&ds.z, config.folds, config.floor(), &mut ChaCha8Rng::seed_from_u64(config.seed))?;
    let rows = transform_scan(&ds.z, depths, &grid, &plan, &config.thresholds)?;
    prepare_out(&config.out)?;
    write_output(&config.out, "scan.csv", &mut manifest, |w| write_scan_csv(w, &rows))?;
    manifest.write(&config.out)?;
    Ok(())
}
