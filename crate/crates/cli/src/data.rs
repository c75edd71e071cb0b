//! Loading edges and the host tree into aligned model inputs.

use std::collections::HashMap;
use std::fs::{self, File};
use std::path::Path;

use log::{info, warn};
use phylolink::interactions::{build_matrix, drop_single_host_parasites, read_records_csv, LabelNormalization};
use phylolink::newick::{pairwise_depths, parse_newick, PairwiseMrcaDepths, PhyloTree};
use phylolink::InteractionMatrix;

use crate::error::CliError;
use crate::manifest::Manifest;

pub struct Dataset {
    pub z: InteractionMatrix,
    /// Rows follow `z.hosts()`.
    pub depths: Option<PairwiseMrcaDepths>,
}

pub fn read_tree(path: &Path) -> Result<PhyloTree, CliError> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    Ok(parse_newick(&text)?)
}

pub fn read_edges(path: &Path) -> Result<InteractionMatrix, CliError> {
    let file = File::open(path).map_err(CliError::io(path))?;
    let records = read_records_csv(file)?;
    Ok(build_matrix(&records)?)
}

fn drop_empty(z: &InteractionMatrix) -> InteractionMatrix {
    let rows: Vec<usize> = (0..z.n_hosts()).filter(|&h| z.row_sum(h) > 0).collect();
    let cols: Vec<usize> = (0..z.n_parasites()).filter(|&j| z.col_sum(j) > 0).collect();
    z.submatrix(&rows, &cols)
}

/// Keep hosts present in `tree` (labels compared after `norm`), then return
/// the trimmed matrix and depths ordered like its rows.
pub fn align(
    z: &InteractionMatrix,
    tree: &PhyloTree,
    norm: LabelNormalization,
) -> Result<(InteractionMatrix, PairwiseMrcaDepths, Vec<String>), CliError> {
    let mut tips: HashMap<String, String> = HashMap::new();
    for tip in tree.leaf_labels() {
        if let Some(prev) = tips.insert(norm.apply(tip), tip.to_string()) {
            return Err(CliError::Data(format!(
                "tree tips {prev:?} and {tip:?} are indistinguishable after label normalization"
            )));
        }
    }
    let mut rows = Vec::new();
    let mut dropped = Vec::new();
    let mut used: HashMap<&str, &str> = HashMap::new();
    for (h, host) in z.hosts().iter().enumerate() {
        match tips.get(&norm.apply(host)) {
            Some(tip) => {
                if let Some(other) = used.insert(tip.as_str(), host.as_str()) {
                    return Err(CliError::Data(format!(
                        "hosts {other:?} and {host:?} both match tree tip {tip:?}"
                    )));
                }
                rows.push(h);
            }
            None => dropped.push(host.clone()),
        }
    }
    if !dropped.is_empty() {
        warn!("{} host(s) missing from the tree were dropped", dropped.len());
    }
    let cols: Vec<usize> = (0..z.n_parasites()).collect();
    let z = drop_empty(&z.submatrix(&rows, &cols));
    if z.n_hosts() < 2 {
        return Err(CliError::Data(format!(
            "only {} host(s) match tree tips",
            z.n_hosts()
        )));
    }
    let (tree, depths) = host_depths(&z, tree, &tips, norm)?;
    debug_assert_eq!(tree.n_tips(), z.n_hosts());
    Ok((z, depths, dropped))
}

fn host_depths(
    z: &InteractionMatrix,
    tree: &PhyloTree,
    tips: &HashMap<String, String>,
    norm: LabelNormalization,
) -> Result<(PhyloTree, PairwiseMrcaDepths), CliError> {
    let mapping: HashMap<String, String> = z
        .hosts()
        .iter()
        .map(|h| (tips[&norm.apply(h)].clone(), h.clone()))
        .collect();
    let keep: Vec<&String> = mapping.keys().collect();
    let pruned = tree.prune_to(&keep)?.relabel(&mapping)?;
    let depths = pairwise_depths(&pruned)?.select(z.hosts())?;
    Ok((pruned, depths))
}

/// Edges plus, when `tree` is given, the aligned phylogeny. Inputs are
/// digested into `manifest`.
pub fn load(
    edges: &Path,
    tree: Option<&Path>,
    loose_labels: bool,
    drop_single_host: bool,
    manifest: &mut Manifest,
) -> Result<Dataset, CliError> {
    manifest.add_input(edges)?;
    let mut z = read_edges(edges)?;
    manifest.stat("edges_hosts", z.n_hosts());
    manifest.stat("edges_parasites", z.n_parasites());
    let norm = if loose_labels {
        LabelNormalization::default()
    } else {
        LabelNormalization::exact()
    };
    let mut dropped_hosts = Vec::new();
    let mut tree_data = None;
    if let Some(path) = tree {
        manifest.add_input(path)?;
        let t = read_tree(path)?;
        let (aligned, _, dropped) = align(&z, &t, norm)?;
        z = aligned;
        dropped_hosts = dropped;
        tree_data = Some(t);
    }
    if drop_single_host {
        z = drop_single_host_parasites(&z)?;
    }
    let depths = match &tree_data {
        Some(t) => Some(align(&z, t, norm)?.1),
        None => None,
    };
    info!("{} hosts x {} parasites, {} interactions", z.n_hosts(), z.n_parasites(), z.total_ones());
    manifest.stat("hosts", z.n_hosts());
    manifest.stat("parasites", z.n_parasites());
    manifest.stat("interactions", z.total_ones());
    manifest.stat("hosts_dropped_not_in_tree", dropped_hosts.join(";"));
    Ok(Dataset { z, depths })
}
