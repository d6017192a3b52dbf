//! Row-density statistics gathered at runtime and Kendall rank correlation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::{measure, Clock};
use crate::dataset::DatasetRow;
use crate::sparse::SparseStructure;

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("matrix has no columns; row density is undefined")]
    NoColumns,
    #[error("matrix has no rows; density statistics are undefined")]
    NoRows,
    #[error("row {row} out of range for {n_rows} rows")]
    RowOutOfRange { row: usize, n_rows: usize },
    #[error("sequence lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least two observations, got {0}")]
    TooShort(usize),
    #[error("sequence contains a non-finite value")]
    NonFinite,
    #[error("correlation undefined: a sequence is constant")]
    Undefined,
}

/// Density statistics over all rows plus the time it took to collect them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GatheredFeatures {
    pub max_density: f64,
    pub min_density: f64,
    pub mean_density: f64,
    pub var_density: f64,
    pub collection_time: f64,
}

impl GatheredFeatures {
    /// The four density statistics in model-column order.
    pub fn densities(&self) -> [f64; 4] {
        [
            self.max_density,
            self.min_density,
            self.mean_density,
            self.var_density,
        ]
    }
}

/// Stored entries of `row` divided by the column count.
pub fn row_density<M: SparseStructure + ?Sized>(m: &M, row: usize) -> Result<f64, FeatureError> {
    if m.n_cols() == 0 {
        return Err(FeatureError::NoColumns);
    }
    if row >= m.n_rows() {
        return Err(FeatureError::RowOutOfRange {
            row,
            n_rows: m.n_rows(),
        });
    }
    let offsets = m.row_offsets();
    Ok((offsets[row + 1] - offsets[row]) as f64 / m.n_cols() as f64)
}

/// Single pass over the row offsets computing max/min/mean/population variance
/// of row density. The elapsed time is read from `clock`.
///
/// The reduction accumulates integer row counts, so the result does not depend
/// on row order and a constant-density matrix has variance exactly zero.
pub fn gather_features<M: SparseStructure + ?Sized>(
    m: &M,
    clock: &dyn Clock,
) -> Result<GatheredFeatures, FeatureError> {
    if m.n_rows() == 0 {
        return Err(FeatureError::NoRows);
    }
    if m.n_cols() == 0 {
        return Err(FeatureError::NoColumns);
    }
    let (stats, elapsed) = measure(clock, || density_stats(m.row_offsets(), m.n_cols()));
    Ok(GatheredFeatures {
        collection_time: elapsed,
        ..stats
    })
}

/// Density statistics without timing; `collection_time` is left at zero.
pub fn density_statistics<M: SparseStructure + ?Sized>(m: &M) -> Result<GatheredFeatures, FeatureError> {
    if m.n_rows() == 0 {
        return Err(FeatureError::NoRows);
    }
    if m.n_cols() == 0 {
        return Err(FeatureError::NoColumns);
    }
    Ok(density_stats(m.row_offsets(), m.n_cols()))
}

fn density_stats(offsets: &[usize], n_cols: usize) -> GatheredFeatures {
    let n = (offsets.len() - 1) as u128;
    let mut max = 0usize;
    let mut min = usize::MAX;
    let mut sum = 0u128;
    let mut sum_sq = 0u128;
    for w in offsets.windows(2) {
        let len = w[1] - w[0];
        max = max.max(len);
        min = min.min(len);
        sum += len as u128;
        sum_sq += (len as u128) * (len as u128);
    }
    let cols = n_cols as f64;
    let max_density = max as f64 / cols;
    let min_density = min as f64 / cols;
    let mean_density = (sum as f64 / (n as f64 * cols)).clamp(min_density, max_density);
    // n * sum_sq - sum^2 is n^2 times the variance of the raw counts, exact in integers
    let spread = n * sum_sq - sum * sum;
    let var_density = spread as f64 / ((n * n) as f64 * cols * cols);
    GatheredFeatures {
        max_density,
        min_density,
        mean_density,
        var_density,
        collection_time: 0.0,
    }
}

/// Kendall tau-b between two sequences using the pair-count definition.
///
/// `tau_b = (C - D) / sqrt((P - Tx) * (P - Ty))` where `P` is the number of
/// pairs and `Tx`, `Ty` count pairs tied in `x` and in `y` respectively.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64, FeatureError> {
    if x.len() != y.len() {
        return Err(FeatureError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(FeatureError::TooShort(x.len()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(FeatureError::NonFinite);
    }
    let n = x.len();
    let (mut concordant, mut discordant) = (0u64, 0u64);
    let (mut tied_x, mut tied_y) = (0u64, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i].partial_cmp(&x[j]).expect("finite");
            let dy = y[i].partial_cmp(&y[j]).expect("finite");
            use std::cmp::Ordering::Equal;
            match (dx, dy) {
                (Equal, Equal) => {
                    tied_x += 1;
                    tied_y += 1;
                }
                (Equal, _) => tied_x += 1,
                (_, Equal) => tied_y += 1,
                (a, b) if a == b => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as u64;
    tau_b_from_counts(concordant, discordant, pairs, tied_x, tied_y)
}

/// Final tau-b formula over pair counts.
pub fn tau_b_from_counts(
    concordant: u64,
    discordant: u64,
    pairs: u64,
    tied_x: u64,
    tied_y: u64,
) -> Result<f64, FeatureError> {
    let denom = ((pairs - tied_x) as f64 * (pairs - tied_y) as f64).sqrt();
    if denom == 0.0 {
        return Err(FeatureError::Undefined);
    }
    let tau = (concordant as f64 - discordant as f64) / denom;
    Ok(tau.clamp(-1.0, 1.0))
}

/// Feature columns correlated against kernel runtimes.
pub const CORRELATION_FEATURES: [&str; 6] = ["rows", "nnz", "max", "min", "mean", "var"];

/// Kendall tau of each kernel's per-iteration runtime against each feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable {
    pub kernels: Vec<String>,
    pub features: Vec<String>,
    /// `cells[kernel][feature]`; `None` when the correlation is undefined.
    pub cells: Vec<Vec<Option<f64>>>,
}

impl CorrelationTable {
    pub fn get(&self, kernel: usize, feature: usize) -> Option<f64> {
        self.cells[kernel][feature]
    }

    /// Renders the table as CSV; `absolute` prints magnitudes only.
    pub fn to_csv(&self, absolute: bool) -> String {
        let mut out = String::from("kernel");
        for f in &self.features {
            out.push(',');
            out.push_str(f);
        }
        out.push('\n');
        for (k, row) in self.kernels.iter().zip(&self.cells) {
            out.push_str(&crate::dataset::csv_field(k));
            for cell in row {
                out.push(',');
                if let Some(t) = cell {
                    let t = if absolute { t.abs() } else { *t };
                    out.push_str(&format!("{t:.4}"));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Correlates every kernel's runtime with the row count, nnz and the four
/// density statistics over the rows where both are present.
pub fn correlation_table(rows: &[DatasetRow], kernels: &[String]) -> CorrelationTable {
    let cells = (0..kernels.len())
        .map(|k| {
            let present: Vec<(&DatasetRow, f64)> = rows
                .iter()
                .filter_map(|r| Some((r, r.timings.runtime(k)?)))
                .filter(|(r, _)| r.gathered.is_some())
                .collect();
            let runtimes: Vec<f64> = present.iter().map(|(_, t)| *t).collect();
            (0..CORRELATION_FEATURES.len())
                .map(|f| {
                    let column: Vec<f64> = present
                        .iter()
                        .map(|(r, _)| correlation_feature(r, f))
                        .collect();
                    kendall_tau(&runtimes, &column).ok()
                })
                .collect()
        })
        .collect();
    CorrelationTable {
        kernels: kernels.to_vec(),
        features: CORRELATION_FEATURES.iter().map(|s| s.to_string()).collect(),
        cells,
    }
}

fn correlation_feature(row: &DatasetRow, feature: usize) -> f64 {
    let g = row.gathered.expect("filtered to rows with gathered features");
    match feature {
        0 => row.known.rows as f64,
        1 => row.known.nnz as f64,
        2 => g.max_density,
        3 => g.min_density,
        4 => g.mean_density,
        _ => g.var_density,
    }
}
