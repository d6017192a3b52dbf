//! Benchmark and metadata CSV schemas, the joined training table, cost and
//! label construction, and the train/test split.
//!
//! File layouts:
//!
//! * per-kernel benchmark file: `name,runtime,preprocess`, one file per kernel;
//! * `elapsed.csv` / `preprocess.csv`: `name,<kernel1>,<kernel2>,...`;
//! * `metadata.csv`: `name,[rows,cols,nnz,]max_density,min_density,mean_density,var_density,collection_time`.
//!
//! All times are seconds. An empty cell means the value is absent.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::GatheredFeatures;
use crate::sparse::KnownFeatures;

#[derive(Debug, Error, PartialEq)]
pub enum DatasetError {
    #[error("line {line}: {reason}")]
    Csv { line: u64, reason: String },
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("line {line}: {column} for {name:?} is not a valid time: {value:?}")]
    BadNumber {
        line: u64,
        name: String,
        column: String,
        value: String,
    },
    #[error("line {line}: duplicate name {name:?}")]
    DuplicateName { line: u64, name: String },
    #[error("line {line}: expected {expected} fields, found {found}")]
    ColumnCount {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("kernel {kernel:?}: conflicting records for {name:?}")]
    Conflict { kernel: String, name: String },
    #[error("no kernel benchmark files given")]
    NoInput,
    #[error("elapsed and preprocess tables list different kernels")]
    KernelMismatch,
    #[error("no metadata for: {}", .0.join(", "))]
    MissingMetadata(Vec<String>),
    #[error("no known features (rows, cols, nnz) for: {}", .0.join(", "))]
    MissingKnown(Vec<String>),
    #[error("{0:?} has no kernel with a recorded runtime")]
    NoRuntime(String),
    #[error("split fraction {0} must lie strictly between 0 and 1")]
    BadFraction(f64),
    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
}

/// Per-kernel timings of one workload, indexed by kernel vocabulary position.
///
/// A missing runtime means the kernel was not measured (or failed) on this
/// workload. A missing preprocessing time is read as zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelTimings {
    pub runtime: Vec<Option<f64>>,
    pub preprocess: Vec<Option<f64>>,
}

impl KernelTimings {
    pub fn new(runtime: Vec<Option<f64>>, preprocess: Vec<Option<f64>>) -> Self {
        assert_eq!(runtime.len(), preprocess.len());
        Self {
            runtime,
            preprocess,
        }
    }

    /// Timings with every kernel present.
    pub fn complete(pairs: &[(f64, f64)]) -> Self {
        Self::new(
            pairs.iter().map(|p| Some(p.0)).collect(),
            pairs.iter().map(|p| Some(p.1)).collect(),
        )
    }

    pub fn n_kernels(&self) -> usize {
        self.runtime.len()
    }

    pub fn runtime(&self, kernel: usize) -> Option<f64> {
        self.runtime.get(kernel).copied().flatten()
    }

    pub fn preprocess(&self, kernel: usize) -> f64 {
        self.preprocess.get(kernel).copied().flatten().unwrap_or(0.0)
    }

    pub fn is_present(&self, kernel: usize) -> bool {
        self.runtime(kernel).is_some()
    }
}

/// One preprocessing run followed by `iterations` kernel launches.
///
/// A kernel without a runtime costs `+inf` so it can never be picked as the
/// fastest and any prediction landing on it is maximally penalised.
pub fn total_cost(t: &KernelTimings, kernel: usize, iterations: u32) -> f64 {
    match t.runtime(kernel) {
        Some(r) => t.preprocess(kernel) + iterations as f64 * r,
        None => f64::INFINITY,
    }
}

/// Kernel with the lowest total cost; ties go to the lowest index.
pub fn fastest_kernel(t: &KernelTimings, iterations: u32) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for k in 0..t.n_kernels() {
        if !t.is_present(k) {
            continue;
        }
        let c = total_cost(t, k, iterations);
        if best.is_none_or(|(_, b)| c < b) {
            best = Some((k, c));
        }
    }
    best.map(|(k, _)| k)
}

/// A workload with its known features, optional gathered features and timings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub name: String,
    pub known: KnownFeatures,
    pub gathered: Option<GatheredFeatures>,
    pub timings: KernelTimings,
}

/// Rows sharing one kernel vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub kernels: Vec<String>,
    pub rows: Vec<DatasetRow>,
}

/// Column order of the known-feature model input.
pub const KNOWN_SCHEMA: [&str; 4] = ["rows", "cols", "nnz", "iterations"];
/// Column order of the gathered-feature model input; extends [`KNOWN_SCHEMA`].
pub const GATHERED_SCHEMA: [&str; 8] = [
    "rows",
    "cols",
    "nnz",
    "iterations",
    "max_density",
    "min_density",
    "mean_density",
    "var_density",
];

pub fn known_vector(known: &KnownFeatures, iterations: u32) -> Vec<f64> {
    vec![
        known.rows as f64,
        known.cols as f64,
        known.nnz as f64,
        iterations as f64,
    ]
}

pub fn gathered_vector(known: &KnownFeatures, g: &GatheredFeatures, iterations: u32) -> Vec<f64> {
    let mut v = known_vector(known, iterations);
    v.extend_from_slice(&g.densities());
    v
}

/// Feature vector with its fastest-kernel label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample {
    pub features: Vec<f64>,
    pub label: usize,
    pub iterations: u32,
}

/// Known-schema examples, one per (row, iteration count) pair.
pub fn known_examples(rows: &[DatasetRow], iterations: &[u32]) -> Result<Vec<LabeledExample>, DatasetError> {
    labeled(rows, iterations, |r, k| Ok(known_vector(&r.known, k)))
}

/// Gathered-schema examples, one per (row, iteration count) pair.
pub fn gathered_examples(rows: &[DatasetRow], iterations: &[u32]) -> Result<Vec<LabeledExample>, DatasetError> {
    labeled(rows, iterations, |r, k| {
        let g = r
            .gathered
            .as_ref()
            .ok_or_else(|| DatasetError::MissingMetadata(vec![r.name.clone()]))?;
        Ok(gathered_vector(&r.known, g, k))
    })
}

fn labeled(
    rows: &[DatasetRow],
    iterations: &[u32],
    features: impl Fn(&DatasetRow, u32) -> Result<Vec<f64>, DatasetError>,
) -> Result<Vec<LabeledExample>, DatasetError> {
    let mut out = Vec::with_capacity(rows.len() * iterations.len());
    for row in rows {
        for &k in iterations {
            let label =
                fastest_kernel(&row.timings, k).ok_or_else(|| DatasetError::NoRuntime(row.name.clone()))?;
            out.push(LabeledExample {
                features: features(row, k)?,
                label,
                iterations: k,
            });
        }
    }
    Ok(out)
}

/// Deterministic shuffle under `seed`; the first `round(fraction * n)` rows
/// (clamped so both sides are non-empty) form the training set.
pub fn split_train_test<T: Clone>(
    rows: &[T],
    seed: u64,
    fraction: f64,
) -> Result<(Vec<T>, Vec<T>), DatasetError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(DatasetError::BadFraction(fraction));
    }
    if rows.len() < 2 {
        return Err(DatasetError::TooFewRows {
            needed: 2,
            got: rows.len(),
        });
    }
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = ((fraction * rows.len() as f64).round() as usize).clamp(1, rows.len() - 1);
    let pick = |idx: &[usize]| idx.iter().map(|&i| rows[i].clone()).collect::<Vec<_>>();
    Ok((pick(&order[..n_train]), pick(&order[n_train..])))
}

/// Quotes a CSV field when it contains a separator, quote or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Shortest decimal text that parses back to the same value.
pub fn format_seconds(v: f64) -> String {
    format!("{v:?}")
}

fn format_cell(v: Option<f64>) -> String {
    v.map(format_seconds).unwrap_or_default()
}

/// Derives a kernel label from a benchmark file name: `csr_tm.csv` → `CSR,TM`.
pub fn kernel_label_from_path(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().to_ascii_uppercase().replace('_', ","))
        .unwrap_or_default()
}

/// Inverse of [`kernel_label_from_path`] without the extension: `CSR,TM` → `csr_tm`.
pub fn kernel_file_stem(label: &str) -> String {
    label.to_ascii_lowercase().replace(',', "_")
}

/// Times one kernel recorded for one workload.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRecord {
    pub runtime: Option<f64>,
    pub preprocess: Option<f64>,
}

/// The contents of one per-kernel benchmark file.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelRecords {
    pub kernel: String,
    pub records: BTreeMap<String, BenchRecord>,
}

struct CsvRows {
    header: Vec<String>,
    rows: Vec<(u64, Vec<String>)>,
}

fn read_csv(text: &str) -> Result<CsvRows, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| DatasetError::Csv {
            line: 1,
            reason: e.to_string(),
        })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.iter().all(String::is_empty) {
        return Err(DatasetError::Csv {
            line: 1,
            reason: "missing header row".into(),
        });
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| DatasetError::Csv {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(DatasetError::ColumnCount {
                line,
                expected: header.len(),
                found: rec.len(),
            });
        }
        rows.push((line, rec.iter().map(|f| f.trim().to_string()).collect()));
    }
    Ok(CsvRows { header, rows })
}

fn parse_time(
    line: u64,
    name: &str,
    column: &str,
    value: &str,
    strictly_positive: bool,
) -> Result<Option<f64>, DatasetError> {
    if value.is_empty() {
        return Ok(None);
    }
    let bad = || DatasetError::BadNumber {
        line,
        name: name.to_string(),
        column: column.to_string(),
        value: value.to_string(),
    };
    let v: f64 = value.parse().map_err(|_| bad())?;
    let ok = v.is_finite() && if strictly_positive { v > 0.0 } else { v >= 0.0 };
    if ok {
        Ok(Some(v))
    } else {
        Err(bad())
    }
}

fn column(header: &[String], names: &[&str]) -> Result<usize, DatasetError> {
    header
        .iter()
        .position(|h| names.iter().any(|n| h.eq_ignore_ascii_case(n)))
        .ok_or_else(|| DatasetError::MissingColumn(names[0].to_string()))
}

/// Parses one kernel's `name,runtime,preprocess` benchmark file.
pub fn parse_bench_csv(text: &str, kernel: &str) -> Result<KernelRecords, DatasetError> {
    let csv = read_csv(text)?;
    let name_col = column(&csv.header, &["name"])?;
    let runtime_col = column(&csv.header, &["runtime"])?;
    let pre_col = column(&csv.header, &["preprocess", "preprocessing"])?;
    let mut records = BTreeMap::new();
    for (line, fields) in csv.rows {
        let name = fields[name_col].clone();
        let runtime = parse_time(line, &name, "runtime", &fields[runtime_col], true)?;
        let preprocess = parse_time(line, &name, "preprocess", &fields[pre_col], false)?;
        if runtime.is_none() && preprocess.is_none() {
            return Err(DatasetError::Csv {
                line,
                reason: format!("{name:?} has neither runtime nor preprocess time"),
            });
        }
        if records
            .insert(name.clone(), BenchRecord { runtime, preprocess })
            .is_some()
        {
            return Err(DatasetError::DuplicateName { line, name });
        }
    }
    Ok(KernelRecords {
        kernel: kernel.to_string(),
        records,
    })
}

/// Writes a per-kernel benchmark file.
pub fn write_bench_csv(records: &KernelRecords) -> String {
    let mut out = String::from("name,runtime,preprocess\n");
    for (name, r) in &records.records {
        out.push_str(&format!(
            "{},{},{}\n",
            csv_field(name),
            format_cell(r.runtime),
            format_cell(r.preprocess)
        ));
    }
    out
}

/// Name-by-kernel table of times, the layout of `elapsed.csv` and `preprocess.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    pub kernels: Vec<String>,
    pub names: Vec<String>,
    /// `cells[row][kernel]`.
    pub cells: Vec<Vec<Option<f64>>>,
}

impl KernelTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name");
        for k in &self.kernels {
            out.push(',');
            out.push_str(&csv_field(k));
        }
        out.push('\n');
        for (name, row) in self.names.iter().zip(&self.cells) {
            out.push_str(&csv_field(name));
            for &cell in row {
                out.push(',');
                out.push_str(&format_cell(cell));
            }
            out.push('\n');
        }
        out
    }

    /// Parses a table; `strictly_positive` applies to runtimes (elapsed) but
    /// not to preprocessing times.
    pub fn from_csv(text: &str, strictly_positive: bool) -> Result<Self, DatasetError> {
        let csv = read_csv(text)?;
        if !csv.header[0].eq_ignore_ascii_case("name") {
            return Err(DatasetError::MissingColumn("name".into()));
        }
        let kernels: Vec<String> = csv.header[1..].to_vec();
        let mut seen = BTreeSet::new();
        let mut names = Vec::with_capacity(csv.rows.len());
        let mut cells = Vec::with_capacity(csv.rows.len());
        for (line, fields) in csv.rows {
            let name = fields[0].clone();
            if !seen.insert(name.clone()) {
                return Err(DatasetError::DuplicateName { line, name });
            }
            let row = kernels
                .iter()
                .zip(&fields[1..])
                .map(|(k, v)| parse_time(line, &name, k, v, strictly_positive))
                .collect::<Result<Vec<_>, _>>()?;
            names.push(name);
            cells.push(row);
        }
        Ok(Self {
            kernels,
            names,
            cells,
        })
    }

    pub fn row(&self, name: &str) -> Option<&[Option<f64>]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.cells[i].as_slice())
    }
}

/// Merges per-kernel benchmark files into the elapsed and preprocess tables.
///
/// Rows are the sorted union of names; kernel columns follow first appearance.
/// Records of the same kernel from several files merge, but a name recorded
/// twice with different times is a conflict.
pub fn aggregate(files: &[KernelRecords]) -> Result<(KernelTable, KernelTable), DatasetError> {
    if files.is_empty() {
        return Err(DatasetError::NoInput);
    }
    let mut merged: Vec<KernelRecords> = Vec::new();
    for file in files {
        let slot = match merged.iter_mut().find(|m| m.kernel == file.kernel) {
            Some(slot) => slot,
            None => {
                merged.push(KernelRecords {
                    kernel: file.kernel.clone(),
                    records: BTreeMap::new(),
                });
                merged.last_mut().expect("just pushed")
            }
        };
        for (name, rec) in &file.records {
            match slot.records.get(name) {
                Some(prev) if prev != rec => {
                    return Err(DatasetError::Conflict {
                        kernel: file.kernel.clone(),
                        name: name.clone(),
                    })
                }
                Some(_) => {}
                None => {
                    slot.records.insert(name.clone(), *rec);
                }
            }
        }
    }
    let names: Vec<String> = merged
        .iter()
        .flat_map(|m| m.records.keys().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let kernels: Vec<String> = merged.iter().map(|m| m.kernel.clone()).collect();
    let column = |pick: fn(&BenchRecord) -> Option<f64>| KernelTable {
        kernels: kernels.clone(),
        names: names.clone(),
        cells: names
            .iter()
            .map(|n| merged.iter().map(|m| m.records.get(n).and_then(pick)).collect())
            .collect(),
    };
    Ok((column(|r| r.runtime), column(|r| r.preprocess)))
}

/// Splits aggregated tables back into per-kernel records.
pub fn split_by_kernel(elapsed: &KernelTable, preprocess: &KernelTable) -> Result<Vec<KernelRecords>, DatasetError> {
    if elapsed.kernels != preprocess.kernels {
        return Err(DatasetError::KernelMismatch);
    }
    Ok(elapsed
        .kernels
        .iter()
        .enumerate()
        .map(|(k, kernel)| {
            let mut records = BTreeMap::new();
            let names: BTreeSet<&String> = elapsed.names.iter().chain(&preprocess.names).collect();
            for name in names {
                let runtime = elapsed.row(name).and_then(|r| r[k]);
                let pre = preprocess.row(name).and_then(|r| r[k]);
                if runtime.is_some() || pre.is_some() {
                    records.insert(
                        name.clone(),
                        BenchRecord {
                            runtime,
                            preprocess: pre,
                        },
                    );
                }
            }
            KernelRecords {
                kernel: kernel.clone(),
                records,
            }
        })
        .collect())
}

/// One `metadata.csv` row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetadataRecord {
    pub known: Option<KnownFeatures>,
    pub gathered: GatheredFeatures,
}

const DENSITY_COLUMNS: [&str; 4] = ["max_density", "min_density", "mean_density", "var_density"];
const KNOWN_COLUMNS: [&str; 3] = ["rows", "cols", "nnz"];

/// Parses `metadata.csv`. The first column is the name and the last the
/// collection time; the columns in between are matched by header name, so
/// their order is free. `rows`, `cols` and `nnz` are optional but must appear
/// together.
pub fn parse_metadata_csv(text: &str) -> Result<BTreeMap<String, MetadataRecord>, DatasetError> {
    let csv = read_csv(text)?;
    let h = &csv.header;
    if h.len() < 2 || !h[0].eq_ignore_ascii_case("name") {
        return Err(DatasetError::MissingColumn("name".into()));
    }
    if !h[h.len() - 1].eq_ignore_ascii_case("collection_time") {
        return Err(DatasetError::MissingColumn("collection_time".into()));
    }
    let middle = &h[1..h.len() - 1];
    if let Some(u) = middle.iter().find(|c| {
        !DENSITY_COLUMNS.iter().chain(&KNOWN_COLUMNS).any(|k| c.eq_ignore_ascii_case(k))
    }) {
        return Err(DatasetError::UnknownColumn(u.clone()));
    }
    let find = |name: &str| h.iter().position(|c| c.eq_ignore_ascii_case(name));
    let density_idx = DENSITY_COLUMNS
        .iter()
        .map(|c| find(c).ok_or_else(|| DatasetError::MissingColumn(c.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let known_idx: Vec<Option<usize>> = KNOWN_COLUMNS.iter().map(|c| find(c)).collect();
    let has_known = known_idx.iter().all(Option::is_some);
    if !has_known {
        if let Some(i) = known_idx.iter().position(Option::is_none) {
            if known_idx.iter().any(Option::is_some) {
                return Err(DatasetError::MissingColumn(KNOWN_COLUMNS[i].into()));
            }
        }
    }
    let time_idx = h.len() - 1;

    let mut out = BTreeMap::new();
    for (line, f) in csv.rows {
        let name = f[0].clone();
        let number = |idx: usize| -> Result<f64, DatasetError> {
            let bad = || DatasetError::BadNumber {
                line,
                name: name.clone(),
                column: h[idx].clone(),
                value: f[idx].clone(),
            };
            let v: f64 = f[idx].parse().map_err(|_| bad())?;
            if v.is_finite() && v >= 0.0 {
                Ok(v)
            } else {
                Err(bad())
            }
        };
        let count = |idx: usize| -> Result<usize, DatasetError> {
            f[idx].parse().map_err(|_| DatasetError::BadNumber {
                line,
                name: name.clone(),
                column: h[idx].clone(),
                value: f[idx].clone(),
            })
        };
        let known = if has_known {
            Some(KnownFeatures {
                rows: count(known_idx[0].unwrap())?,
                cols: count(known_idx[1].unwrap())?,
                nnz: count(known_idx[2].unwrap())?,
            })
        } else {
            None
        };
        let gathered = GatheredFeatures {
            max_density: number(density_idx[0])?,
            min_density: number(density_idx[1])?,
            mean_density: number(density_idx[2])?,
            var_density: number(density_idx[3])?,
            collection_time: number(time_idx)?,
        };
        if out.insert(name.clone(), MetadataRecord { known, gathered }).is_some() {
            return Err(DatasetError::DuplicateName { line, name });
        }
    }
    Ok(out)
}

/// Writes `metadata.csv`. Known-feature columns are included only when every
/// record carries them.
pub fn write_metadata_csv(records: &BTreeMap<String, MetadataRecord>) -> String {
    let with_known = !records.is_empty() && records.values().all(|r| r.known.is_some());
    let mut out = String::from("name,");
    if with_known {
        out.push_str("rows,cols,nnz,");
    }
    out.push_str("max_density,min_density,mean_density,var_density,collection_time\n");
    for (name, r) in records {
        out.push_str(&csv_field(name));
        if let (true, Some(k)) = (with_known, r.known) {
            out.push_str(&format!(",{},{},{}", k.rows, k.cols, k.nnz));
        }
        for v in r.gathered.densities() {
            out.push(',');
            out.push_str(&format_seconds(v));
        }
        out.push(',');
        out.push_str(&format_seconds(r.gathered.collection_time));
        out.push('\n');
    }
    out
}

/// Joins the timing tables with metadata into training rows.
///
/// Rows follow `elapsed`. Known features come from `known` when given for a
/// name, otherwise from the metadata record. Every elapsed row needs metadata.
pub fn join(
    elapsed: &KernelTable,
    preprocess: &KernelTable,
    metadata: &BTreeMap<String, MetadataRecord>,
    known: &BTreeMap<String, KnownFeatures>,
) -> Result<Dataset, DatasetError> {
    if elapsed.kernels != preprocess.kernels {
        return Err(DatasetError::KernelMismatch);
    }
    let missing_meta: Vec<String> = elapsed
        .names
        .iter()
        .filter(|n| !metadata.contains_key(*n))
        .cloned()
        .collect();
    if !missing_meta.is_empty() {
        return Err(DatasetError::MissingMetadata(missing_meta));
    }
    let missing_known: Vec<String> = elapsed
        .names
        .iter()
        .filter(|n| !known.contains_key(*n) && metadata[*n].known.is_none())
        .cloned()
        .collect();
    if !missing_known.is_empty() {
        return Err(DatasetError::MissingKnown(missing_known));
    }
    let n_kernels = elapsed.kernels.len();
    let rows = elapsed
        .names
        .iter()
        .zip(&elapsed.cells)
        .map(|(name, runtime)| {
            if runtime.iter().all(Option::is_none) {
                return Err(DatasetError::NoRuntime(name.clone()));
            }
            let meta = &metadata[name];
            let pre = preprocess
                .row(name)
                .map(<[_]>::to_vec)
                .unwrap_or_else(|| vec![None; n_kernels]);
            Ok(DatasetRow {
                name: name.clone(),
                known: known.get(name).copied().or(meta.known).expect("checked above"),
                gathered: Some(meta.gathered),
                timings: KernelTimings::new(runtime.clone(), pre),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Dataset {
        kernels: elapsed.kernels.clone(),
        rows,
    })
}
