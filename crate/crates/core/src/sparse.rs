//! Compressed sparse row storage and the Matrix Market coordinate reader.
//!
//! Every matrix that enters the pipeline is canonical: column indices are
//! strictly increasing inside each row, duplicate coordinates are summed and
//! symmetric storage has already been expanded to general form. Downstream
//! feature code therefore only ever sees one layout.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors produced while reading or validating a sparse matrix.
#[derive(Debug, Error, PartialEq)]
pub enum SparseError {
    #[error("line {line}: malformed header: {reason}")]
    Header { line: usize, reason: String },
    #[error("line {line}: malformed entry: {reason}")]
    Entry { line: usize, reason: String },
    #[error("line {line}: index ({row}, {col}) outside {n_rows}x{n_cols} matrix")]
    OutOfRange {
        line: usize,
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },
    #[error("line {line}: expected {expected} entries, found {found}")]
    Truncated {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: more entries than the declared {expected}")]
    TooManyEntries { line: usize, expected: usize },
    #[error("invalid CSR structure: {0}")]
    InvalidStructure(String),
    #[error("unsupported CSR cache version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("CSR cache: {0}")]
    Cache(String),
}

/// Read access to the row structure of a sparse matrix.
///
/// Inference only needs shape, stored-entry count and row offsets. Keeping the
/// access behind a trait lets tests substitute an instrumented matrix that
/// counts how often the row structure is touched.
pub trait SparseStructure {
    fn n_rows(&self) -> usize;
    fn n_cols(&self) -> usize;
    fn nnz(&self) -> usize;
    fn row_offsets(&self) -> &[usize];
}

/// Canonical compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from raw CSR arrays, checking every canonical-form invariant.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, SparseError> {
        let bad = |msg: String| Err(SparseError::InvalidStructure(msg));
        if row_offsets.len() != n_rows + 1 {
            return bad(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                n_rows + 1
            ));
        }
        if row_offsets[0] != 0 {
            return bad("row_offsets[0] must be 0".into());
        }
        if col_indices.len() != values.len() {
            return bad("col_indices and values differ in length".into());
        }
        if row_offsets[n_rows] != col_indices.len() {
            return bad(format!(
                "row_offsets[n_rows] = {} but nnz = {}",
                row_offsets[n_rows],
                col_indices.len()
            ));
        }
        for row in 0..n_rows {
            let (start, end) = (row_offsets[row], row_offsets[row + 1]);
            if start > end {
                return bad(format!("row_offsets decreases at row {row}"));
            }
            let cols = &col_indices[start..end];
            if let Some(&c) = cols.iter().find(|&&c| c >= n_cols) {
                return bad(format!("column {c} in row {row} exceeds {n_cols} columns"));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("columns of row {row} are not strictly increasing"));
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Builds a canonical matrix from zero-based coordinate triplets, summing duplicates.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, SparseError> {
        let mut sorted: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(r, c, v) in triplets {
            if r >= n_rows || c >= n_cols {
                return Err(SparseError::InvalidStructure(format!(
                    "triplet ({r}, {c}) outside {n_rows}x{n_cols} matrix"
                )));
            }
            sorted.push((r, c, v));
        }
        // stable sort keeps file order among duplicates, so sums are reproducible
        sorted.sort_by_key(|&(r, c, _)| (r, c));

        let mut row_offsets = vec![0usize; n_rows + 1];
        let mut col_indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
                continue;
            }
            last = Some((r, c));
            row_offsets[r + 1] += 1;
            col_indices.push(c);
            values.push(v);
        }
        for i in 0..n_rows {
            row_offsets[i + 1] += row_offsets[i];
        }
        Self::new(n_rows, n_cols, row_offsets, col_indices, values)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Stored-entry count of one row.
    pub fn row_nnz(&self, row: usize) -> usize {
        self.row_offsets[row + 1] - self.row_offsets[row]
    }

    /// Iterator over per-row stored-entry counts.
    pub fn row_lengths(&self) -> impl Iterator<Item = usize> + '_ {
        self.row_offsets.windows(2).map(|w| w[1] - w[0])
    }

    /// Writes the matrix as a general real coordinate Matrix Market document.
    ///
    /// Values use the shortest representation that parses back to the same
    /// `f64`, so reading the output reproduces this matrix bit for bit.
    pub fn to_matrix_market(&self) -> String {
        let mut out = String::with_capacity(32 + self.nnz() * 24);
        out.push_str("%%MatrixMarket matrix coordinate real general\n");
        let _ = writeln!(out, "{} {} {}", self.n_rows, self.n_cols, self.nnz());
        for row in 0..self.n_rows {
            for idx in self.row_offsets[row]..self.row_offsets[row + 1] {
                let _ = writeln!(
                    out,
                    "{} {} {:?}",
                    row + 1,
                    self.col_indices[idx] + 1,
                    self.values[idx]
                );
            }
        }
        out
    }

    /// Serializes to the versioned JSON cache format.
    pub fn to_cache_json(&self) -> String {
        let cache = CsrCache {
            format: CACHE_FORMAT.to_string(),
            version: CACHE_VERSION,
            matrix: self.clone(),
        };
        serde_json::to_string(&cache).expect("CSR serialization cannot fail")
    }

    /// Reads the versioned JSON cache format, revalidating the arrays.
    pub fn from_cache_json(text: &str) -> Result<Self, SparseError> {
        let cache: CsrCache =
            serde_json::from_str(text).map_err(|e| SparseError::Cache(e.to_string()))?;
        if cache.format != CACHE_FORMAT {
            return Err(SparseError::Cache(format!(
                "unexpected format tag {:?}",
                cache.format
            )));
        }
        if cache.version != CACHE_VERSION {
            return Err(SparseError::Version {
                found: cache.version,
                expected: CACHE_VERSION,
            });
        }
        let m = cache.matrix;
        Self::new(m.n_rows, m.n_cols, m.row_offsets, m.col_indices, m.values)
    }
}

const CACHE_FORMAT: &str = "seer-csr";
const CACHE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CsrCache {
    format: String,
    version: u32,
    #[serde(flatten)]
    matrix: CsrMatrix,
}

impl SparseStructure for CsrMatrix {
    fn n_rows(&self) -> usize {
        self.n_rows
    }
    fn n_cols(&self) -> usize {
        self.n_cols
    }
    fn nnz(&self) -> usize {
        self.col_indices.len()
    }
    fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }
}

/// Dimensions available without touching the matrix body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnownFeatures {
    pub rows: usize,
    pub cols: usize,
    pub nnz: usize,
}

/// Reads rows, columns and stored entries from the structure header.
pub fn known_features<M: SparseStructure + ?Sized>(m: &M) -> KnownFeatures {
    KnownFeatures {
        rows: m.n_rows(),
        cols: m.n_cols(),
        nnz: m.nnz(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

/// Parses a coordinate Matrix Market document into canonical CSR.
///
/// Symmetric and skew-symmetric inputs are mirrored, pattern entries take the
/// value 1.0, duplicates are summed and explicit zeros are kept as stored
/// entries.
pub fn parse_matrix_market(text: &str) -> Result<CsrMatrix, SparseError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (line_no, banner) = lines.next().ok_or(SparseError::Header {
        line: 1,
        reason: "empty input".into(),
    })?;
    let (field, symmetry) = parse_banner(line_no, banner)?;

    let (size_line, size) = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() || l.trim_start().starts_with('%') => continue,
            Some((n_, l)) => break (n_, l),
            None => {
                return Err(SparseError::Header {
                    line: line_no + 1,
                    reason: "missing size line".into(),
                })
            }
        }
    };
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|_| SparseError::Header {
            line: size_line,
            reason: format!("size line {size:?} is not three integers"),
        })?;
    let [n_rows, n_cols, declared] = dims[..] else {
        return Err(SparseError::Header {
            line: size_line,
            reason: format!("size line needs rows, cols, entries; got {size:?}"),
        });
    };
    if symmetry != Symmetry::General && n_rows != n_cols {
        return Err(SparseError::Header {
            line: size_line,
            reason: "symmetric storage requires a square matrix".into(),
        });
    }

    let mut triplets = Vec::with_capacity(declared * 2);
    let mut found = 0usize;
    let mut last_line = size_line;
    for (n, l) in lines {
        last_line = n;
        let trimmed = l.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        if found == declared {
            return Err(SparseError::TooManyEntries {
                line: n,
                expected: declared,
            });
        }
        let (r, c, v) = parse_entry(n, trimmed, field)?;
        if r == 0 || c == 0 || r > n_rows || c > n_cols {
            return Err(SparseError::OutOfRange {
                line: n,
                row: r,
                col: c,
                n_rows,
                n_cols,
            });
        }
        let (r, c) = (r - 1, c - 1);
        match symmetry {
            Symmetry::General => triplets.push((r, c, v)),
            Symmetry::Symmetric => {
                triplets.push((r, c, v));
                if r != c {
                    triplets.push((c, r, v));
                }
            }
            Symmetry::SkewSymmetric => {
                if r == c {
                    return Err(SparseError::Entry {
                        line: n,
                        reason: "skew-symmetric matrices cannot store diagonal entries".into(),
                    });
                }
                triplets.push((r, c, v));
                triplets.push((c, r, -v));
            }
        }
        found += 1;
    }
    if found < declared {
        return Err(SparseError::Truncated {
            line: last_line,
            expected: declared,
            found,
        });
    }
    CsrMatrix::from_triplets(n_rows, n_cols, &triplets)
}

fn parse_banner(line: usize, banner: &str) -> Result<(Field, Symmetry), SparseError> {
    let err = |reason: String| SparseError::Header { line, reason };
    let tokens: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(err(format!("expected '%%MatrixMarket matrix coordinate <field> <symmetry>', got {banner:?}")));
    }
    if tokens[1] != "matrix" {
        return Err(err(format!("unsupported object {:?}", tokens[1])));
    }
    if tokens[2] != "coordinate" {
        return Err(err(format!("unsupported format {:?}; only coordinate is read", tokens[2])));
    }
    let field = match tokens[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => return Err(err(format!("unsupported field {other:?}"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(err(format!("unsupported symmetry {other:?}"))),
    };
    Ok((field, symmetry))
}

fn parse_entry(line: usize, text: &str, field: Field) -> Result<(usize, usize, f64), SparseError> {
    let err = |reason: String| SparseError::Entry { line, reason };
    let mut parts = text.split_whitespace();
    let mut index = |what: &str| -> Result<usize, SparseError> {
        let tok = parts.next().ok_or_else(|| err(format!("missing {what} index")))?;
        tok.parse()
            .map_err(|_| err(format!("{what} index {tok:?} is not a positive integer")))
    };
    let r = index("row")?;
    let c = index("column")?;
    let v = match field {
        Field::Pattern => 1.0,
        Field::Real | Field::Integer => {
            let tok = parts.next().ok_or_else(|| err("missing value".into()))?;
            let v = if field == Field::Integer {
                tok.parse::<i64>().map(|i| i as f64).ok()
            } else {
                tok.parse::<f64>().ok()
            };
            v.ok_or_else(|| err(format!("value {tok:?} is not numeric")))?
        }
    };
    if parts.next().is_some() {
        return Err(err("trailing tokens".into()));
    }
    Ok((r, c, v))
}
