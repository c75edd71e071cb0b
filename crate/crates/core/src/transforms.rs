//! Single-parameter rescalings of phylogenetic distances and the AUC scan
//! over them.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::evaluate::{self, EvalError, FoldPlan, FoldPredictions, RocThresholds};
use crate::interactions::InteractionMatrix;
use crate::model::{self, DeltaDefault};
use crate::newick::PairwiseMrcaDepths;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("{kind} parameter {value} outside its domain ({domain})")]
    ParameterOutOfDomain {
        kind: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("tips {0} and {1} are at distance zero")]
    DegenerateDistance(usize, usize),
    #[error("pair ({0}, {1}) is not a pair of distinct tips")]
    InvalidPair(usize, usize),
    #[error("transformed distance for ({0}, {1}) is not finite")]
    NonFinite(usize, usize),
    #[error("cannot parse transform {0:?}")]
    Parse(String),
    #[error("transform grid is empty")]
    EmptyGrid,
    #[error("matrix hosts do not match the distance labels")]
    LabelMismatch,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransformKind {
    Identity,
    EarlyBurst,
    Lambda,
    Delta,
    OrnsteinUhlenbeck,
    Kappa,
}

impl TransformKind {
    pub fn name(self) -> &'static str {
        match self {
            TransformKind::Identity => "identity",
            TransformKind::EarlyBurst => "eb",
            TransformKind::Lambda => "lambda",
            TransformKind::Delta => "delta",
            TransformKind::OrnsteinUhlenbeck => "ou",
            TransformKind::Kappa => "kappa",
        }
    }
}

/// A tree transform with its parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransformSpec {
    Identity,
    /// Rate change through time, `eta` ∈ ℝ.
    EarlyBurst { eta: f64 },
    /// Shared-path scaling, `lambda` ∈ [0, 1].
    Lambda { lambda: f64 },
    /// Node-depth power, `delta` > 0.
    Delta { delta: f64 },
    /// Depth compression `(1 - e^{-2αt}) / 2α`, `alpha` ≥ 0.
    OrnsteinUhlenbeck { alpha: f64 },
    /// Per-branch power, `kappa` ≥ 0. Excluded from scans unless asked for.
    Kappa { kappa: f64 },
}

impl TransformSpec {
    pub fn early_burst(eta: f64) -> Result<Self, TransformError> {
        TransformSpec::EarlyBurst { eta }.validated()
    }

    pub fn new(kind: TransformKind, parameter: f64) -> Result<Self, TransformError> {
        let spec = match kind {
            TransformKind::Identity => TransformSpec::Identity,
            TransformKind::EarlyBurst => TransformSpec::EarlyBurst { eta: parameter },
            TransformKind::Lambda => TransformSpec::Lambda { lambda: parameter },
            TransformKind::Delta => TransformSpec::Delta { delta: parameter },
            TransformKind::OrnsteinUhlenbeck => TransformSpec::OrnsteinUhlenbeck { alpha: parameter },
            TransformKind::Kappa => TransformSpec::Kappa { kappa: parameter },
        };
        spec.validated()
    }

    pub fn validated(self) -> Result<Self, TransformError> {
        let (ok, domain) = match self {
            TransformSpec::Identity => (true, ""),
            TransformSpec::EarlyBurst { eta } => (eta.is_finite(), "finite"),
            TransformSpec::Lambda { lambda } => ((0.0..=1.0).contains(&lambda), "[0, 1]"),
            TransformSpec::Delta { delta } => (delta.is_finite() && delta > 0.0, "> 0"),
            TransformSpec::OrnsteinUhlenbeck { alpha } => (alpha.is_finite() && alpha >= 0.0, ">= 0"),
            TransformSpec::Kappa { kappa } => (kappa.is_finite() && kappa >= 0.0, ">= 0"),
        };
        if ok {
            Ok(self)
        } else {
            Err(TransformError::ParameterOutOfDomain {
                kind: self.kind().name(),
                value: self.parameter().unwrap_or(f64::NAN),
                domain,
            })
        }
    }

    pub fn kind(&self) -> TransformKind {
        match self {
            TransformSpec::Identity => TransformKind::Identity,
            TransformSpec::EarlyBurst { .. } => TransformKind::EarlyBurst,
            TransformSpec::Lambda { .. } => TransformKind::Lambda,
            TransformSpec::Delta { .. } => TransformKind::Delta,
            TransformSpec::OrnsteinUhlenbeck { .. } => TransformKind::OrnsteinUhlenbeck,
            TransformSpec::Kappa { .. } => TransformKind::Kappa,
        }
    }

    pub fn parameter(&self) -> Option<f64> {
        match *self {
            TransformSpec::Identity => None,
            TransformSpec::EarlyBurst { eta } => Some(eta),
            TransformSpec::Lambda { lambda } => Some(lambda),
            TransformSpec::Delta { delta } => Some(delta),
            TransformSpec::OrnsteinUhlenbeck { alpha } => Some(alpha),
            TransformSpec::Kappa { kappa } => Some(kappa),
        }
    }
}

impl fmt::Display for TransformSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.parameter() {
            None => write!(f, "{}", self.kind().name()),
            Some(p) => write!(f, "{}:{}", self.kind().name(), p),
        }
    }
}

impl FromStr for TransformSpec {
    type Err = TransformError;

    /// `identity`, `eb:0.5`, `lambda:0.8`, `delta:1.2`, `ou:0.3`, `kappa:0.5`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p.trim())),
            None => (s, None),
        };
        let kind = match name.to_ascii_lowercase().as_str() {
            "identity" | "none" => TransformKind::Identity,
            "eb" | "early_burst" => TransformKind::EarlyBurst,
            "lambda" => TransformKind::Lambda,
            "delta" => TransformKind::Delta,
            "ou" => TransformKind::OrnsteinUhlenbeck,
            "kappa" => TransformKind::Kappa,
            _ => return Err(TransformError::Parse(s.to_string())),
        };
        let value = match (kind, param) {
            (TransformKind::Identity, None) => 0.0,
            (TransformKind::Identity, Some(_)) => return Err(TransformError::Parse(s.to_string())),
            (_, Some(p)) => p.parse().map_err(|_| TransformError::Parse(s.to_string()))?,
            (_, None) => return Err(TransformError::Parse(s.to_string())),
        };
        TransformSpec::new(kind, value)
    }
}

/// `expm1(x) / x`, continuous through 0.
#[inline]
fn expm1_ratio(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 + 0.5 * x
    } else {
        x.exp_m1() / x
    }
}

/// Early-burst length of the segment from ancestor depth `t_anc` down to
/// descendant depth `t_desc`: `(e^{η t_desc} − e^{η t_anc}) / η`.
///
/// Written as `e^{η t_anc} · (t_desc − t_anc) · expm1(x)/x` with
/// `x = η (t_desc − t_anc)`, which is exact at `η = 0`.
#[inline]
pub fn eb_segment(t_desc: f64, t_anc: f64, eta: f64) -> f64 {
    let gap = t_desc - t_anc;
    (eta * t_anc).exp() * gap * expm1_ratio(eta * gap)
}

#[inline]
fn ou_depth(t: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        t
    } else {
        -(-2.0 * alpha * t).exp_m1() / (2.0 * alpha)
    }
}

/// Transformed distance between tips `h` and `i`, without the positivity
/// check. Returns 0 for coincident tips.
pub fn transformed_distance(depths: &PairwiseMrcaDepths, h: usize, i: usize, spec: &TransformSpec) -> f64 {
    let th = depths.tip_depth(h);
    let ti = depths.tip_depth(i);
    let tk = depths.mrca_depth(h, i);
    match *spec {
        TransformSpec::Identity => (th - tk) + (ti - tk),
        TransformSpec::EarlyBurst { eta } => eb_segment(th, tk, eta) + eb_segment(ti, tk, eta),
        TransformSpec::Lambda { lambda } => (th - lambda * tk) + (ti - lambda * tk),
        TransformSpec::Delta { delta } => {
            let p = |t: f64| t.powf(delta);
            (p(th) - p(tk)) + (p(ti) - p(tk))
        }
        TransformSpec::OrnsteinUhlenbeck { alpha } => {
            let fk = ou_depth(tk, alpha);
            (ou_depth(th, alpha) - fk) + (ou_depth(ti, alpha) - fk)
        }
        TransformSpec::Kappa { kappa } => {
            let seg = |a: usize, b: usize| -> f64 {
                depths
                    .branches_to_mrca(a, b)
                    .iter()
                    .filter(|&&l| l > 0.0)
                    .map(|&l| l.powf(kappa))
                    .sum()
            };
            seg(h, i) + seg(i, h)
        }
    }
}

/// `φ(T_hi, θ)` for a pair of distinct tips; errors when the pair sits at
/// distance zero.
pub fn transform_pair(
    depths: &PairwiseMrcaDepths,
    pair: (usize, usize),
    spec: &TransformSpec,
) -> Result<f64, TransformError> {
    let (h, i) = pair;
    if h == i || h >= depths.len() || i >= depths.len() {
        return Err(TransformError::InvalidPair(h, i));
    }
    let d = transformed_distance(depths, h, i, spec);
    if !d.is_finite() {
        return Err(TransformError::NonFinite(h, i));
    }
    if d <= 0.0 {
        return Err(TransformError::DegenerateDistance(h, i));
    }
    Ok(d)
}

/// Dense symmetric matrix of transformed distances, zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_transform(depths: &PairwiseMrcaDepths, spec: &TransformSpec) -> Result<Self, TransformError> {
        let n = depths.len();
        let mut values = vec![0.0; n * n];
        for h in 0..n {
            for i in h + 1..n {
                let d = transform_pair(depths, (h, i), spec)?;
                values[h * n + i] = d;
                values[i * n + h] = d;
            }
        }
        Ok(DistanceMatrix { n, values })
    }

    /// From explicit values; used for hand-built neighbourhoods in tests.
    pub fn from_values(n: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), n * n, "distance matrix must be n x n");
        DistanceMatrix { n, values }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, h: usize, i: usize) -> f64 {
        self.values[h * self.n + i]
    }

    pub fn row(&self, h: usize) -> &[f64] {
        &self.values[h * self.n..(h + 1) * self.n]
    }

    /// Matrix of `1/φ`, zero on the diagonal.
    pub fn inverse(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.values.len()];
        for h in 0..self.n {
            for i in 0..self.n {
                if h != i {
                    w[h * self.n + i] = 1.0 / self.values[h * self.n + i];
                }
            }
        }
        w
    }
}

/// Inverse EB distances from host `h` to every host, written into `out`
/// (`out[h]` = 0). Hot path of the η update.
pub fn eb_inverse_row(depths: &PairwiseMrcaDepths, h: usize, eta: f64, out: &mut [f64]) -> Result<(), TransformError> {
    let th = depths.tip_depth(h);
    for (i, w) in out.iter_mut().enumerate() {
        if i == h {
            *w = 0.0;
            continue;
        }
        let tk = depths.mrca_depth(h, i);
        let d = eb_segment(th, tk, eta) + eb_segment(depths.tip_depth(i), tk, eta);
        if !d.is_finite() {
            return Err(TransformError::NonFinite(h, i));
        }
        if d <= 0.0 {
            return Err(TransformError::DegenerateDistance(h, i));
        }
        *w = 1.0 / d;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub spec: TransformSpec,
    pub auc: f64,
}

/// Phylogeny-only (γ = ρ = 1) AUC for each transform in `grid`, using the
/// held-out cells of `folds`. Rows come back in grid order.
pub fn transform_scan(
    z: &InteractionMatrix,
    depths: &PairwiseMrcaDepths,
    grid: &[TransformSpec],
    folds: &FoldPlan,
    thresholds: &RocThresholds,
) -> Result<Vec<ScanRow>, TransformError> {
    if grid.is_empty() {
        return Err(TransformError::EmptyGrid);
    }
    if depths.labels() != z.hosts() {
        return Err(TransformError::LabelMismatch);
    }
    grid.par_iter()
        .map(|spec| {
            let dist = DistanceMatrix::from_transform(depths, spec)?;
            let weights = dist.inverse();
            let mut per_fold = Vec::with_capacity(folds.len());
            for k in 0..folds.len() {
                let train = z.with_cleared(folds.held_out(k));
                let cache = model::DeltaCache::build(&train, &weights, DeltaDefault::One.value(depths));
                let mut pred = Vec::new();
                let mut truth = Vec::new();
                for h in 0..z.n_hosts() {
                    for j in 0..z.n_parasites() {
                        if !train.get(h, j) {
                            pred.push(model::interaction_prob_unchecked(cache.get(h, j)));
                            truth.push(z.get(h, j));
                        }
                    }
                }
                per_fold.push(FoldPredictions::new(pred, truth)?);
            }
            let roc = evaluate::roc_auc(&per_fold, thresholds)?;
            Ok(ScanRow { spec: *spec, auc: roc.auc })
        })
        .collect()
}

/// Default scan grid. Kappa is only added when `include_kappa` is set.
pub fn default_scan_grid(include_kappa: bool) -> Vec<TransformSpec> {
    let mut grid = vec![TransformSpec::Identity];
    for k in -10..=10 {
        grid.push(TransformSpec::EarlyBurst { eta: k as f64 * 0.5 });
    }
    for k in 0..=10 {
        grid.push(TransformSpec::Lambda { lambda: k as f64 / 10.0 });
    }
    for d in [0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0] {
        grid.push(TransformSpec::Delta { delta: d });
    }
    for a in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0] {
        grid.push(TransformSpec::OrnsteinUhlenbeck { alpha: a });
    }
    if include_kappa {
        for k in [0.0, 0.25, 0.5, 0.75, 1.0] {
            grid.push(TransformSpec::Kappa { kappa: k });
        }
    }
    grid
}

/// `kind,parameter,auc` rows; the parameter is empty for the identity.
pub fn write_scan_csv<W: Write>(writer: W, rows: &[ScanRow]) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    w.write_record(["kind", "parameter", "auc"])?;
    for r in rows {
        let p = r.spec.parameter().map(|p| p.to_string()).unwrap_or_default();
        w.write_record([r.spec.kind().name(), p.as_str(), &format!("{:.6}", r.auc)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newick::{pairwise_depths, parse_newick};

    fn three_tip() -> PairwiseMrcaDepths {
        pairwise_depths(&parse_newick("((A:1,B:1):1,C:2):0;").unwrap()).unwrap()
    }

    #[test]
    fn eb_zero_is_identity() {
        let d = three_tip();
        for (h, i) in [(0, 1), (0, 2), (1, 2)] {
            let t = d.distance(h, i);
            assert_eq!(transform_pair(&d, (h, i), &TransformSpec::EarlyBurst { eta: 0.0 }).unwrap(), t);
            assert_eq!(transform_pair(&d, (h, i), &TransformSpec::Identity).unwrap(), t);
        }
    }

    #[test]
    fn eb_ln2_example() {
        let d = three_tip();
        let eta = std::f64::consts::LN_2;
        // Separately coded direct evaluation.
        let direct = 2.0 * ((eta * 1.0).exp() - (eta * 0.5).exp()) / eta;
        let got = transform_pair(&d, (0, 1), &TransformSpec::EarlyBurst { eta }).unwrap();
        assert!((got - direct).abs() < 1e-14);
        assert!((got - 2.0 * (2.0 - 2f64.sqrt()) / eta).abs() < 1e-12);
        assert!((got - 1.6902).abs() < 1e-4);
    }

    #[test]
    fn lambda_and_delta_unit_are_identity() {
        let d = three_tip();
        for (h, i) in [(0, 1), (0, 2), (1, 2)] {
            let t = d.distance(h, i);
            for spec in [
                TransformSpec::Lambda { lambda: 1.0 },
                TransformSpec::Delta { delta: 1.0 },
                TransformSpec::OrnsteinUhlenbeck { alpha: 0.0 },
                TransformSpec::Kappa { kappa: 1.0 },
            ] {
                let v = transform_pair(&d, (h, i), &spec).unwrap();
                assert!((v - t).abs() < 1e-12, "{spec}: {v} vs {t}");
            }
        }
    }

    #[test]
    fn kappa_zero_counts_branches() {
        let d = three_tip();
        // A→root passes 2 branches, C→root 1.
        assert_eq!(transform_pair(&d, (0, 2), &TransformSpec::Kappa { kappa: 0.0 }).unwrap(), 3.0);
    }

    #[test]
    fn domains_and_parsing() {
        assert!(TransformSpec::new(TransformKind::Lambda, 1.5).is_err());
        assert!(TransformSpec::new(TransformKind::Delta, 0.0).is_err());
        assert!(TransformSpec::new(TransformKind::OrnsteinUhlenbeck, -1.0).is_err());
        assert_eq!("eb:-0.02".parse::<TransformSpec>().unwrap(), TransformSpec::EarlyBurst { eta: -0.02 });
        assert_eq!("identity".parse::<TransformSpec>().unwrap(), TransformSpec::Identity);
        assert!("identity:1".parse::<TransformSpec>().is_err());
        assert!("eb".parse::<TransformSpec>().is_err());
    }

    #[test]
    fn degenerate_pairs() {
        let d = pairwise_depths(&parse_newick("((A:0,B:0):1,C:1);").unwrap()).unwrap();
        assert_eq!(
            transform_pair(&d, (0, 1), &TransformSpec::Identity),
            Err(TransformError::DegenerateDistance(0, 1))
        );
        assert_eq!(
            transform_pair(&d, (1, 1), &TransformSpec::Identity),
            Err(TransformError::InvalidPair(1, 1))
        );
    }

    #[test]
    fn inverse_row_matches_matrix() {
        let d = three_tip();
        let m = DistanceMatrix::from_transform(&d, &TransformSpec::EarlyBurst { eta: 0.7 }).unwrap();
        let w = m.inverse();
        let mut row = vec![0.0; 3];
        eb_inverse_row(&d, 1, 0.7, &mut row).unwrap();
        for i in 0..3 {
            assert!((row[i] - w[3 + i]).abs() < 1e-15);
        }
    }

    #[test]
    fn scan_csv_format() {
        let rows = vec![
            ScanRow { spec: TransformSpec::Identity, auc: 0.5 },
            ScanRow { spec: TransformSpec::EarlyBurst { eta: 0.5 }, auc: 0.75 },
        ];
        let mut buf = Vec::new();
        write_scan_csv(&mut buf, &rows).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "kind,parameter,auc\nidentity,,0.500000\neb,0.5,0.750000\n"
        );
    }
}
