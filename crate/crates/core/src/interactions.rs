//! Bipartite interaction data: ingestion, filtering, temporal splits and
//! degree statistics.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{Read, Write};

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InteractionError {
    #[error("no interaction records")]
    EmptyInput,
    #[error("record {row}: {reason}")]
    InvalidRecord { row: usize, reason: String },
    #[error("every parasite column was dropped")]
    AllColumnsDropped,
    #[error("{} one-cells carry no year, first ({}, {})", .0.len(), .0[0].0, .0[0].1)]
    MissingYears(Vec<(String, String)>),
    #[error("duplicate {axis} label {label:?}")]
    DuplicateLabel { axis: &'static str, label: String },
    #[error("cell ({row}, {col}) is {value}, expected 0 or 1")]
    NonBinaryCell { row: usize, col: usize, value: String },
    #[error("matrix shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub const MIN_YEAR: i32 = 1800;
pub const MAX_YEAR: i32 = 2100;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InteractionRecord {
    pub host: String,
    pub parasite: String,
    pub year: Option<i32>,
    /// Kept for provenance; the model only uses presence.
    pub evidence_count: Option<u32>,
}

impl InteractionRecord {
    pub fn new(host: &str, parasite: &str) -> Self {
        InteractionRecord {
            host: host.to_string(),
            parasite: parasite.to_string(),
            year: None,
            evidence_count: None,
        }
    }

    pub fn with_year(mut self, year: i32) -> Self {
        self.year = Some(year);
        self
    }

    fn validate(&self, row: usize) -> Result<(), InteractionError> {
        let bad = |reason: &str| InteractionError::InvalidRecord {
            row,
            reason: reason.to_string(),
        };
        if self.host.trim().is_empty() {
            return Err(bad("empty host label"));
        }
        if self.parasite.trim().is_empty() {
            return Err(bad("empty parasite label"));
        }
        if let Some(y) = self.year {
            if !(MIN_YEAR..=MAX_YEAR).contains(&y) {
                return Err(bad(&format!("implausible year {y}")));
            }
        }
        if self.evidence_count == Some(0) {
            return Err(bad("evidence_count must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
struct CsvRecord {
    host: String,
    parasite: String,
    #[serde(default)]
    year: Option<i32>,
    #[serde(default)]
    evidence_count: Option<u32>,
}

/// Read `host,parasite[,year][,evidence_count]` records.
pub fn read_records_csv<R: Read>(reader: R) -> Result<Vec<InteractionRecord>, InteractionError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for (k, row) in rdr.deserialize::<CsvRecord>().enumerate() {
        let r = row?;
        let rec = InteractionRecord {
            host: r.host,
            parasite: r.parasite,
            year: r.year,
            evidence_count: r.evidence_count,
        };
        rec.validate(k + 1)?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_records_csv<W: Write>(
    writer: W,
    records: &[InteractionRecord],
) -> Result<(), InteractionError> {
    let with_year = records.iter().any(|r| r.year.is_some());
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    if with_year {
        w.write_record(["host", "parasite", "year"])?;
    } else {
        w.write_record(["host", "parasite"])?;
    }
    for r in records {
        if with_year {
            let y = r.year.map(|y| y.to_string()).unwrap_or_default();
            w.write_record([r.host.as_str(), r.parasite.as_str(), y.as_str()])?;
        } else {
            w.write_record([r.host.as_str(), r.parasite.as_str()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Host × parasite binary matrix with optional earliest-year per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMatrix {
    hosts: Vec<String>,
    parasites: Vec<String>,
    cells: Vec<bool>,
    years: Option<Vec<Option<i32>>>,
}

impl InteractionMatrix {
    /// Build from dense rows. Columns may be empty here; `build_matrix`
    /// never produces one.
    pub fn from_rows(
        hosts: Vec<String>,
        parasites: Vec<String>,
        rows: &[Vec<u8>],
    ) -> Result<Self, InteractionError> {
        check_unique("host", &hosts)?;
        check_unique("parasite", &parasites)?;
        if rows.len() != hosts.len() {
            return Err(InteractionError::Shape(format!(
                "{} rows for {} hosts",
                rows.len(),
                hosts.len()
            )));
        }
        let mut cells = Vec::with_capacity(hosts.len() * parasites.len());
        for (h, row) in rows.iter().enumerate() {
            if row.len() != parasites.len() {
                return Err(InteractionError::Shape(format!(
                    "row {h} has {} cells for {} parasites",
                    row.len(),
                    parasites.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => cells.push(false),
                    1 => cells.push(true),
                    _ => {
                        return Err(InteractionError::NonBinaryCell {
                            row: h,
                            col: j,
                            value: v.to_string(),
                        })
                    }
                }
            }
        }
        Ok(InteractionMatrix {
            hosts,
            parasites,
            cells,
            years: None,
        })
    }

    /// Convenience constructor with generated labels `h0..`, `p0..`.
    pub fn from_bits(rows: &[Vec<u8>]) -> Result<Self, InteractionError> {
        let h = rows.len();
        let j = rows.first().map_or(0, Vec::len);
        Self::from_rows(
            (0..h).map(|i| format!("h{i}")).collect(),
            (0..j).map(|i| format!("p{i}")).collect(),
            rows,
        )
    }

    pub fn hosts(&self) -> &[String] {
        &self.hosts
    }

    pub fn parasites(&self) -> &[String] {
        &self.parasites
    }

    pub fn n_hosts(&self) -> usize {
        self.hosts.len()
    }

    pub fn n_parasites(&self) -> usize {
        self.parasites.len()
    }

    #[inline]
    pub fn get(&self, h: usize, j: usize) -> bool {
        self.cells[h * self.parasites.len() + j]
    }

    pub fn set(&mut self, h: usize, j: usize, value: bool) {
        let n = self.parasites.len();
        self.cells[h * n + j] = value;
        if !value {
            if let Some(y) = self.years.as_mut() {
                y[h * n + j] = None;
            }
        }
    }

    pub fn year(&self, h: usize, j: usize) -> Option<i32> {
        self.years
            .as_ref()
            .and_then(|y| y[h * self.parasites.len() + j])
    }

    pub fn has_years(&self) -> bool {
        self.years.is_some()
    }

    pub fn row(&self, h: usize) -> &[bool] {
        let n = self.parasites.len();
        &self.cells[h * n..(h + 1) * n]
    }

    pub fn row_sum(&self, h: usize) -> usize {
        self.row(h).iter().filter(|&&z| z).count()
    }

    pub fn col_sum(&self, j: usize) -> usize {
        (0..self.hosts.len()).filter(|&h| self.get(h, j)).count()
    }

    /// Host indices with a one in column `j`.
    pub fn column_ones(&self, j: usize) -> Vec<usize> {
        (0..self.hosts.len()).filter(|&h| self.get(h, j)).collect()
    }

    pub fn column(&self, j: usize) -> Vec<bool> {
        (0..self.hosts.len()).map(|h| self.get(h, j)).collect()
    }

    pub fn total_ones(&self) -> usize {
        self.cells.iter().filter(|&&z| z).count()
    }

    /// All one-cells in row-major order.
    pub fn ones(&self) -> Vec<(usize, usize)> {
        let n = self.parasites.len();
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &z)| z)
            .map(|(k, _)| (k / n, k % n))
            .collect()
    }

    pub fn to_records(&self) -> Vec<InteractionRecord> {
        self.ones()
            .into_iter()
            .map(|(h, j)| InteractionRecord {
                host: self.hosts[h].clone(),
                parasite: self.parasites[j].clone(),
                year: self.year(h, j),
                evidence_count: None,
            })
            .collect()
    }

    /// Copy with the listed cells set to zero.
    pub fn with_cleared(&self, cells: &[(usize, usize)]) -> InteractionMatrix {
        let mut out = self.clone();
        for &(h, j) in cells {
            out.set(h, j, false);
        }
        out
    }

    /// Keep the given rows and columns, in the given order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> InteractionMatrix {
        let n = self.parasites.len();
        let mut cells = Vec::with_capacity(rows.len() * cols.len());
        let mut years = self.years.as_ref().map(|_| Vec::with_capacity(cells.capacity()));
        for &h in rows {
            for &j in cols {
                cells.push(self.cells[h * n + j]);
                if let (Some(out), Some(src)) = (years.as_mut(), self.years.as_ref()) {
                    out.push(src[h * n + j]);
                }
            }
        }
        InteractionMatrix {
            hosts: rows.iter().map(|&h| self.hosts[h].clone()).collect(),
            parasites: cols.iter().map(|&j| self.parasites[j].clone()).collect(),
            cells,
            years,
        }
    }

    /// Write as CSV: host labels in the first column, parasite labels as
    /// the header row, cells 0/1.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), InteractionError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        let mut header = vec!["host"];
        header.extend(self.parasites.iter().map(String::as_str));
        w.write_record(&header)?;
        for h in 0..self.n_hosts() {
            let mut rec = vec![self.hosts[h].clone()];
            rec.extend(self.row(h).iter().map(|&z| if z { "1" } else { "0" }.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self, InteractionError> {
        let (hosts, parasites, values) = read_labelled_grid(reader)?;
        let mut rows = Vec::with_capacity(values.len());
        for (h, row) in values.iter().enumerate() {
            let mut bits = Vec::with_capacity(row.len());
            for (j, v) in row.iter().enumerate() {
                match v.as_str() {
                    "0" => bits.push(0),
                    "1" => bits.push(1),
                    other => {
                        return Err(InteractionError::NonBinaryCell {
                            row: h,
                            col: j,
                            value: other.to_string(),
                        })
                    }
                }
            }
            rows.push(bits);
        }
        Self::from_rows(hosts, parasites, &rows)
    }
}

/// Read a CSV grid with row labels in the first column and column labels
/// in the header.
pub fn read_labelled_grid<R: Read>(
    reader: R,
) -> Result<(Vec<String>, Vec<String>, Vec<Vec<String>>), InteractionError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    let cols: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut rows = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let mut it = rec.iter();
        rows.push(it.next().unwrap_or_default().to_string());
        let vals: Vec<String> = it.map(|s| s.trim().to_string()).collect();
        if vals.len() != cols.len() {
            return Err(InteractionError::Shape(format!(
                "row {:?} has {} cells for {} columns",
                rows.last().unwrap(),
                vals.len(),
                cols.len()
            )));
        }
        values.push(vals);
    }
    Ok((rows, cols, values))
}

fn check_unique(axis: &'static str, labels: &[String]) -> Result<(), InteractionError> {
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(InteractionError::DuplicateLabel {
                axis,
                label: l.clone(),
            });
        }
    }
    Ok(())
}

/// Collapse records into a matrix. Labels are ordered by first appearance.
pub fn build_matrix(records: &[InteractionRecord]) -> Result<InteractionMatrix, InteractionError> {
    if records.is_empty() {
        return Err(InteractionError::EmptyInput);
    }
    let mut host_idx: HashMap<&str, usize> = HashMap::new();
    let mut par_idx: HashMap<&str, usize> = HashMap::new();
    let mut hosts = Vec::new();
    let mut parasites = Vec::new();
    for (k, r) in records.iter().enumerate() {
        r.validate(k + 1)?;
        host_idx.entry(&r.host).or_insert_with(|| {
            hosts.push(r.host.clone());
            hosts.len() - 1
        });
        par_idx.entry(&r.parasite).or_insert_with(|| {
            parasites.push(r.parasite.clone());
            parasites.len() - 1
        });
    }
    let n = parasites.len();
    let mut cells = vec![false; hosts.len() * n];
    let any_year = records.iter().any(|r| r.year.is_some());
    let mut years = any_year.then(|| vec![None; cells.len()]);
    for r in records {
        let k = host_idx[r.host.as_str()] * n + par_idx[r.parasite.as_str()];
        cells[k] = true;
        if let (Some(ys), Some(y)) = (years.as_mut(), r.year) {
            ys[k] = Some(ys[k].map_or(y, |old: i32| old.min(y)));
        }
    }
    Ok(InteractionMatrix {
        hosts,
        parasites,
        cells,
        years,
    })
}

/// Remove parasites documented on a single host, then hosts left with no
/// interactions.
pub fn drop_single_host_parasites(z: &InteractionMatrix) -> Result<InteractionMatrix, InteractionError> {
    let cols: Vec<usize> = (0..z.n_parasites()).filter(|&j| z.col_sum(j) >= 2).collect();
    if cols.is_empty() {
        return Err(InteractionError::AllColumnsDropped);
    }
    let rows: Vec<usize> = (0..z.n_hosts())
        .filter(|&h| cols.iter().any(|&j| z.get(h, j)))
        .collect();
    Ok(z.submatrix(&rows, &cols))
}

/// Keep only the parasites accepted by `keep`, then drop empty hosts.
pub fn filter_parasites<F: Fn(&str) -> bool>(
    z: &InteractionMatrix,
    keep: F,
) -> Result<InteractionMatrix, InteractionError> {
    let cols: Vec<usize> = (0..z.n_parasites()).filter(|&j| keep(&z.parasites[j])).collect();
    if cols.is_empty() {
        return Err(InteractionError::AllColumnsDropped);
    }
    let rows: Vec<usize> = (0..z.n_hosts())
        .filter(|&h| cols.iter().any(|&j| z.get(h, j)))
        .collect();
    Ok(z.submatrix(&rows, &cols))
}

/// Split on first-observation year: ones with year ≤ `cutoff` train, the
/// rest form the test mask. The training matrix keeps every label, so it may
/// contain empty columns.
pub fn temporal_split(
    z: &InteractionMatrix,
    cutoff: i32,
) -> Result<(InteractionMatrix, Vec<(usize, usize)>), InteractionError> {
    let missing: Vec<(String, String)> = z
        .ones()
        .into_iter()
        .filter(|&(h, j)| z.year(h, j).is_none())
        .map(|(h, j)| (z.hosts[h].clone(), z.parasites[j].clone()))
        .collect();
    if !missing.is_empty() {
        return Err(InteractionError::MissingYears(missing));
    }
    let test: Vec<(usize, usize)> = z
        .ones()
        .into_iter()
        .filter(|&(h, j)| z.year(h, j).is_some_and(|y| y > cutoff))
        .collect();
    Ok((z.with_cleared(&test), test))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeDistributions {
    pub host_degrees: Vec<usize>,
    pub parasite_degrees: Vec<usize>,
    /// degree → number of hosts with that degree
    pub host_histogram: BTreeMap<usize, usize>,
    pub parasite_histogram: BTreeMap<usize, usize>,
}

pub fn degree_distributions(z: &InteractionMatrix) -> DegreeDistributions {
    let host_degrees: Vec<usize> = (0..z.n_hosts()).map(|h| z.row_sum(h)).collect();
    let parasite_degrees: Vec<usize> = (0..z.n_parasites()).map(|j| z.col_sum(j)).collect();
    let hist = |d: &[usize]| {
        let mut m = BTreeMap::new();
        for &k in d {
            *m.entry(k).or_insert(0) += 1;
        }
        m
    };
    DegreeDistributions {
        host_histogram: hist(&host_degrees),
        parasite_histogram: hist(&parasite_degrees),
        host_degrees,
        parasite_degrees,
    }
}

/// Reorder columns into left-ordered form: columns read top-down as bit
/// strings, sorted descending, ties broken by label.
pub fn left_order(z: &InteractionMatrix) -> InteractionMatrix {
    let mut cols: Vec<usize> = (0..z.n_parasites()).collect();
    cols.sort_by(|&a, &b| {
        let ca = z.column(a);
        let cb = z.column(b);
        cb.cmp(&ca).then_with(|| z.parasites[a].cmp(&z.parasites[b]))
    });
    let rows: Vec<usize> = (0..z.n_hosts()).collect();
    z.submatrix(&rows, &cols)
}

/// How tree tip labels are reconciled with matrix row labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelNormalization {
    pub underscores_as_spaces: bool,
    pub case_fold: bool,
}

impl Default for LabelNormalization {
    fn default() -> Self {
        LabelNormalization {
            underscores_as_spaces: true,
            case_fold: true,
        }
    }
}

impl LabelNormalization {
    pub fn exact() -> Self {
        LabelNormalization {
            underscores_as_spaces: false,
            case_fold: false,
        }
    }

    pub fn apply(&self, label: &str) -> String {
        let mut s = label.trim().to_string();
        if self.underscores_as_spaces {
            s = s.replace('_', " ");
        }
        if self.case_fold {
            s = s.to_lowercase();
        }
        s
    }
}
