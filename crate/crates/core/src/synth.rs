//! Analytic SpMV cost models for seven format/schedule variants and a seeded
//! corpus generator that emits the elapsed, preprocess and metadata tables.
//!
//! The costs are synthetic. They exist to produce label structure that can be
//! checked by hand: load imbalance hurts row-per-lane schedules, work-balanced
//! schedules are insensitive to row order, and one-time preprocessing is
//! amortised over iterations with an exactly computable crossover.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, DatasetRow, KernelTable, KernelTimings, MetadataRecord};
use crate::features::{density_statistics, GatheredFeatures};
use crate::sparse::{known_features, CsrMatrix, KnownFeatures, SparseStructure};

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("generator {index}: {reason}")]
    Generator { index: usize, reason: String },
    #[error("machine parameters: {0}")]
    Machine(String),
    #[error("corpus spec has no generators")]
    NoGenerators,
}

/// Format and load-balancing schedule of one SpMV kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelVariant {
    ThreadMappedCsr,
    ThreadMappedEll,
    WarpMappedCsr,
    WarpMappedCoo,
    BlockMappedCsr,
    WorkOrientedCsr,
    AdaptiveCsr,
}

impl KernelVariant {
    pub const ALL: [KernelVariant; 7] = [
        KernelVariant::ThreadMappedCsr,
        KernelVariant::ThreadMappedEll,
        KernelVariant::WarpMappedCsr,
        KernelVariant::WarpMappedCoo,
        KernelVariant::BlockMappedCsr,
        KernelVariant::WorkOrientedCsr,
        KernelVariant::AdaptiveCsr,
    ];

    /// `FORMAT,SCHEDULE` label used as the CSV column header.
    pub fn label(self) -> &'static str {
        match self {
            KernelVariant::ThreadMappedCsr => "CSR,TM",
            KernelVariant::ThreadMappedEll => "ELL,TM",
            KernelVariant::WarpMappedCsr => "CSR,WM",
            KernelVariant::WarpMappedCoo => "COO,WM",
            KernelVariant::BlockMappedCsr => "CSR,BM",
            KernelVariant::WorkOrientedCsr => "CSR,WO",
            KernelVariant::AdaptiveCsr => "CSR,A",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.label() == label)
    }
}

/// Simulated device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MachineParams {
    /// Concurrent lanes `P`.
    pub lanes: usize,
    /// Wavefront width `W`.
    pub wavefront: usize,
    /// Seconds per stored entry on one lane.
    pub entry_cost: f64,
    /// Seconds of per-row (per-wave) overhead.
    pub row_cost: f64,
    /// Sequential binning cost multiplier of Adaptive-CSR.
    pub binning_factor: f64,
    /// Per-item multiplier on the work-oriented schedule's balanced pass,
    /// standing in for its partition search and carry-out fix-up.
    pub work_overhead: f64,
    /// Fixed launch cost of the feature-collection pass.
    pub collection_launch: f64,
}

impl Default for MachineParams {
    fn default() -> Self {
        Self {
            lanes: 64,
            wavefront: 8,
            entry_cost: 1.0e-9,
            row_cost: 5.0e-9,
            binning_factor: 4.0,
            work_overhead: 3.0,
            collection_launch: 4.0e-6,
        }
    }
}

impl MachineParams {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::Machine(m.to_string()));
        if self.wavefront == 0 || self.lanes < self.wavefront {
            return bad("need lanes >= wavefront >= 1");
        }
        let positive = [self.entry_cost, self.row_cost, self.binning_factor, self.work_overhead];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return bad("entry_cost, row_cost, binning_factor and work_overhead must be positive");
        }
        if !(self.collection_launch.is_finite() && self.collection_launch >= 0.0) {
            return bad("collection_launch must be non-negative");
        }
        Ok(())
    }
}

/// Per-iteration runtime and one-time preprocessing cost in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulatedCost {
    pub runtime: f64,
    pub preprocess: f64,
}

fn div_ceil(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

/// Cost of a schedule that processes `rows_per_wave` consecutive rows
/// concurrently, each row taking `ceil(len / group) * entry_cost`, with one
/// `row_cost` per wave. The slowest row gates its wave.
fn waved_cost<M: SparseStructure + ?Sized>(m: &M, rows_per_wave: usize, group: usize, p: &MachineParams) -> f64 {
    let offsets = m.row_offsets();
    let n = m.n_rows();
    let mut total = 0.0;
    let mut start = 0;
    while start < n {
        let end = (start + rows_per_wave).min(n);
        let widest = (start..end)
            .map(|r| div_ceil(offsets[r + 1] - offsets[r], group))
            .max()
            .unwrap_or(0);
        total += widest as f64 * p.entry_cost + p.row_cost;
        start = end;
    }
    total
}

fn work_oriented<M: SparseStructure + ?Sized>(m: &M, p: &MachineParams) -> f64 {
    div_ceil(m.nnz() + m.n_rows(), p.lanes) as f64 * p.entry_cost * p.work_overhead + p.row_cost
}

/// Closed-form cost of running `kernel` on `m`.
pub fn simulate_runtime<M: SparseStructure + ?Sized>(m: &M, kernel: KernelVariant, p: &MachineParams) -> SimulatedCost {
    let n = m.n_rows();
    let lanes = p.lanes;
    match kernel {
        KernelVariant::ThreadMappedCsr => SimulatedCost {
            runtime: waved_cost(m, lanes, 1, p),
            preprocess: 0.0,
        },
        KernelVariant::ThreadMappedEll => {
            let widest = m.row_offsets().windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0);
            SimulatedCost {
                runtime: div_ceil(n, lanes) as f64 * widest as f64 * p.entry_cost,
                preprocess: n as f64 * p.row_cost,
            }
        }
        KernelVariant::WarpMappedCsr => SimulatedCost {
            runtime: waved_cost(m, (lanes / p.wavefront).max(1), p.wavefront, p),
            preprocess: 0.0,
        },
        KernelVariant::WarpMappedCoo => SimulatedCost {
            runtime: waved_cost(m, (lanes / p.wavefront).max(1), p.wavefront, p),
            // expanding the explicit row index array
            preprocess: m.nnz() as f64 * p.entry_cost,
        },
        KernelVariant::BlockMappedCsr => SimulatedCost {
            runtime: waved_cost(m, 1, lanes, p),
            preprocess: 0.0,
        },
        KernelVariant::WorkOrientedCsr => SimulatedCost {
            runtime: work_oriented(m, p),
            preprocess: 0.0,
        },
        KernelVariant::AdaptiveCsr => SimulatedCost {
            runtime: 0.9 * work_oriented(m, p),
            preprocess: n as f64 * p.row_cost * p.binning_factor,
        },
    }
}

/// Synthetic cost of the density-statistics pass: a launch plus one
/// `row_cost` per wave of offsets.
pub fn collection_cost<M: SparseStructure + ?Sized>(m: &M, p: &MachineParams) -> f64 {
    p.collection_launch + div_ceil(m.n_rows(), p.lanes) as f64 * p.row_cost
}

/// Row structure without column indices or values; enough for every cost
/// model and density statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct RowProfile {
    n_cols: usize,
    row_offsets: Vec<usize>,
    band: Option<usize>,
}

impl RowProfile {
    pub fn from_lengths(n_cols: usize, lengths: &[usize]) -> Self {
        let mut row_offsets = Vec::with_capacity(lengths.len() + 1);
        row_offsets.push(0);
        let mut acc = 0;
        for &l in lengths {
            assert!(l <= n_cols, "row longer than the column count");
            acc += l;
            row_offsets.push(acc);
        }
        Self {
            n_cols,
            row_offsets,
            band: None,
        }
    }

    pub fn lengths(&self) -> impl Iterator<Item = usize> + '_ {
        self.row_offsets.windows(2).map(|w| w[1] - w[0])
    }

    /// Materialises a matrix with this profile; banded profiles keep their
    /// diagonal band, others get uniformly random column sets.
    pub fn to_csr(&self, rng: &mut impl Rng) -> CsrMatrix {
        let n = self.n_rows();
        let mut cols = Vec::with_capacity(self.nnz());
        for (r, len) in self.lengths().enumerate() {
            match self.band {
                Some(b) => cols.extend(r.saturating_sub(b)..(r.saturating_sub(b) + len)),
                None => {
                    let mut picked = rand::seq::index::sample(rng, self.n_cols, len).into_vec();
                    picked.sort_unstable();
                    cols.extend(picked);
                }
            }
        }
        let values = vec![1.0; cols.len()];
        CsrMatrix::new(n, self.n_cols, self.row_offsets.clone(), cols, values)
            .expect("profile produces canonical rows")
    }
}

impl SparseStructure for RowProfile {
    fn n_rows(&self) -> usize {
        self.row_offsets.len() - 1
    }
    fn n_cols(&self) -> usize {
        self.n_cols
    }
    fn nnz(&self) -> usize {
        *self.row_offsets.last().expect("offsets are never empty")
    }
    fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }
}

/// Row-length distribution of a generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorKind {
    /// Every row holds the same number of entries.
    Uniform { nnz_per_row: [usize; 2] },
    /// Diagonal band of half-width `bandwidth`.
    Banded { bandwidth: [usize; 2] },
    /// Pareto-distributed row lengths: `min_nnz * u^(-1/alpha)`, capped.
    PowerLaw {
        alpha: [f64; 2],
        min_nnz: usize,
        max_nnz: usize,
    },
    /// Row lengths uniform on `[0, 2 * mean]`.
    UniformRandom { mean_nnz: [usize; 2] },
    /// Uniform rows plus one row covering `dense_fraction` of the columns.
    SingleDenseRow {
        nnz_per_row: [usize; 2],
        dense_fraction: f64,
    },
}

impl GeneratorKind {
    pub fn name(&self) -> &'static str {
        match self {
            GeneratorKind::Uniform { .. } => "uniform",
            GeneratorKind::Banded { .. } => "banded",
            GeneratorKind::PowerLaw { .. } => "power_law",
            GeneratorKind::UniformRandom { .. } => "uniform_random",
            GeneratorKind::SingleDenseRow { .. } => "single_dense_row",
        }
    }
}

/// `count` square-or-rectangular matrices with rows drawn log-uniformly from
/// `rows` and columns from `cols` (square when absent).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub count: usize,
    pub rows: [usize; 2],
    #[serde(default)]
    pub cols: Option<[usize; 2]>,
    #[serde(flatten)]
    pub kind: GeneratorKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    #[serde(default)]
    pub machine: MachineParams,
    #[serde(default = "all_kernels")]
    pub kernels: Vec<KernelVariant>,
    #[serde(rename = "generator", default)]
    pub generators: Vec<GeneratorSpec>,
}

fn all_kernels() -> Vec<KernelVariant> {
    KernelVariant::ALL.to_vec()
}

impl CorpusSpec {
    pub fn new(generators: Vec<GeneratorSpec>) -> Self {
        Self {
            machine: MachineParams::default(),
            kernels: all_kernels(),
            generators,
        }
    }

    /// The 200-matrix mix of uniform, power-law and single-dense-row matrices
    /// used by the default `synth` command.
    pub fn default_mix() -> Self {
        Self::new(vec![
            GeneratorSpec {
                count: 70,
                rows: [1_000, 300_000],
                cols: None,
                kind: GeneratorKind::Uniform { nnz_per_row: [2, 48] },
            },
            GeneratorSpec {
                count: 70,
                rows: [1_000, 300_000],
                cols: None,
                kind: GeneratorKind::PowerLaw {
                    alpha: [1.2, 3.0],
                    min_nnz: 2,
                    max_nnz: 4_000,
                },
            },
            GeneratorSpec {
                count: 60,
                rows: [1_000, 300_000],
                cols: None,
                kind: GeneratorKind::SingleDenseRow {
                    nnz_per_row: [2, 48],
                    dense_fraction: 0.05,
                },
            },
        ])
    }

    fn validate(&self) -> Result<(), SynthError> {
        self.machine.validate()?;
        if self.generators.is_empty() {
            return Err(SynthError::NoGenerators);
        }
        if self.kernels.is_empty() {
            return Err(SynthError::Machine("empty kernel list".into()));
        }
        for (index, g) in self.generators.iter().enumerate() {
            let bad = |reason: &str| {
                Err(SynthError::Generator {
                    index,
                    reason: reason.to_string(),
                })
            };
            let range_ok = |r: [usize; 2]| r[0] >= 1 && r[0] <= r[1];
            if g.count == 0 {
                return bad("count must be at least 1");
            }
            if !range_ok(g.rows) {
                return bad("rows range must satisfy 1 <= lo <= hi");
            }
            if g.cols.is_some_and(|c| !range_ok(c)) {
                return bad("cols range must satisfy 1 <= lo <= hi");
            }
            match &g.kind {
                GeneratorKind::Uniform { nnz_per_row } | GeneratorKind::SingleDenseRow { nnz_per_row, .. } => {
                    if !range_ok(*nnz_per_row) {
                        return bad("nnz_per_row range must satisfy 1 <= lo <= hi");
                    }
                }
                GeneratorKind::Banded { bandwidth } => {
                    if bandwidth[0] > bandwidth[1] {
                        return bad("bandwidth range must satisfy lo <= hi");
                    }
                }
                GeneratorKind::PowerLaw { alpha, min_nnz, max_nnz } => {
                    if !(alpha[0] > 0.0 && alpha[0] <= alpha[1] && alpha[1].is_finite()) {
                        return bad("alpha range must satisfy 0 < lo <= hi");
                    }
                    if *min_nnz == 0 || min_nnz > max_nnz {
                        return bad("need 1 <= min_nnz <= max_nnz");
                    }
                }
                GeneratorKind::UniformRandom { mean_nnz } => {
                    if !range_ok(*mean_nnz) {
                        return bad("mean_nnz range must satisfy 1 <= lo <= hi");
                    }
                }
            }
            if let GeneratorKind::SingleDenseRow { dense_fraction, .. } = g.kind {
                if !(dense_fraction > 0.0 && dense_fraction <= 1.0) {
                    return bad("dense_fraction must lie in (0, 1]");
                }
            }
        }
        Ok(())
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, range: [usize; 2]) -> usize {
    if range[0] == range[1] {
        return range[0];
    }
    let (lo, hi) = ((range[0] as f64).ln(), (range[1] as f64 + 1.0).ln());
    let v = rng.random_range(lo..hi).exp().floor() as usize;
    v.clamp(range[0], range[1])
}

fn uniform_int(rng: &mut ChaCha8Rng, range: [usize; 2]) -> usize {
    rng.random_range(range[0]..=range[1])
}

/// Draws one row profile from a generator.
pub fn generate_profile(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> RowProfile {
    let n = log_uniform(rng, spec.rows);
    let cols = spec.cols.map_or(n, |c| log_uniform(rng, c));
    match &spec.kind {
        GeneratorKind::Uniform { nnz_per_row } => {
            let d = uniform_int(rng, *nnz_per_row).min(cols);
            RowProfile::from_lengths(cols, &vec![d; n])
        }
        GeneratorKind::Banded { bandwidth } => {
            let b = uniform_int(rng, *bandwidth);
            let lengths: Vec<usize> = (0..n)
                .map(|i| {
                    let lo = i.saturating_sub(b);
                    let hi = (i + b).min(cols.saturating_sub(1));
                    if lo > hi || lo >= cols {
                        0
                    } else {
                        hi - lo + 1
                    }
                })
                .collect();
            let mut p = RowProfile::from_lengths(cols, &lengths);
            p.band = Some(b);
            p
        }
        GeneratorKind::PowerLaw { alpha, min_nnz, max_nnz } => {
            let a = rng.random_range(alpha[0]..=alpha[1]);
            let cap = (*max_nnz).min(cols);
            let lengths: Vec<usize> = (0..n)
                .map(|_| {
                    let u: f64 = 1.0 - rng.random::<f64>();
                    let len = (*min_nnz as f64 * u.powf(-1.0 / a)).floor();
                    (len.min(cap as f64) as usize).min(cap)
                })
                .collect();
            RowProfile::from_lengths(cols, &lengths)
        }
        GeneratorKind::UniformRandom { mean_nnz } => {
            let mean = uniform_int(rng, *mean_nnz);
            let hi = (2 * mean).min(cols);
            let lengths: Vec<usize> = (0..n).map(|_| rng.random_range(0..=hi)).collect();
            RowProfile::from_lengths(cols, &lengths)
        }
        GeneratorKind::SingleDenseRow {
            nnz_per_row,
            dense_fraction,
        } => {
            let d = uniform_int(rng, *nnz_per_row).min(cols);
            let mut lengths = vec![d; n];
            let dense = ((dense_fraction * cols as f64).ceil() as usize).clamp(d, cols);
            let at = rng.random_range(0..n);
            lengths[at] = dense;
            RowProfile::from_lengths(cols, &lengths)
        }
    }
}

/// One generated workload.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub name: String,
    pub generator: &'static str,
    pub known: KnownFeatures,
    pub gathered: GatheredFeatures,
    pub timings: KernelTimings,
    pub profile: Option<RowProfile>,
}

/// Output of [`generate_corpus`] in the dataset module's table layouts.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub kernels: Vec<KernelVariant>,
    pub machine: MachineParams,
    pub entries: Vec<CorpusEntry>,
}

/// Timings, density statistics and synthetic collection cost of one profile.
pub fn simulate_entry(
    name: String,
    generator: &'static str,
    profile: &RowProfile,
    kernels: &[KernelVariant],
    machine: &MachineParams,
) -> CorpusEntry {
    let costs: Vec<SimulatedCost> = kernels
        .iter()
        .map(|&k| simulate_runtime(profile, k, machine))
        .collect();
    let timings = KernelTimings::new(
        costs.iter().map(|c| Some(c.runtime)).collect(),
        costs.iter().map(|c| Some(c.preprocess)).collect(),
    );
    let gathered = GatheredFeatures {
        collection_time: collection_cost(profile, machine),
        ..density_statistics(profile).expect("generated profiles have rows and columns")
    };
    CorpusEntry {
        name,
        generator,
        known: known_features(profile),
        gathered,
        timings,
        profile: None,
    }
}

/// Generates a deterministic corpus. With `keep_profiles` each entry keeps
/// its row profile so matrices can be materialised afterwards.
pub fn generate_corpus(spec: &CorpusSpec, seed: u64, keep_profiles: bool) -> Result<SyntheticCorpus, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    for g in &spec.generators {
        for _ in 0..g.count {
            let profile = generate_profile(g, &mut rng);
            let name = format!("{}_{:04}", g.kind.name(), entries.len());
            let mut entry = simulate_entry(name, g.kind.name(), &profile, &spec.kernels, &spec.machine);
            if keep_profiles {
                entry.profile = Some(profile);
            }
            entries.push(entry);
        }
    }
    Ok(SyntheticCorpus {
        kernels: spec.kernels.clone(),
        machine: spec.machine,
        entries,
    })
}

impl SyntheticCorpus {
    pub fn kernel_labels(&self) -> Vec<String> {
        self.kernels.iter().map(|k| k.label().to_string()).collect()
    }

    fn table(&self, pick: impl Fn(&KernelTimings, usize) -> Option<f64>) -> KernelTable {
        let mut rows: Vec<&CorpusEntry> = self.entries.iter().collect();
        rows.sort_by(|a, b| a.name.cmp(&b.name));
        KernelTable {
            kernels: self.kernel_labels(),
            names: rows.iter().map(|e| e.name.clone()).collect(),
            cells: rows
                .iter()
                .map(|e| (0..self.kernels.len()).map(|k| pick(&e.timings, k)).collect())
                .collect(),
        }
    }

    pub fn elapsed(&self) -> KernelTable {
        self.table(|t, k| t.runtime[k])
    }

    pub fn preprocess(&self) -> KernelTable {
        self.table(|t, k| t.preprocess[k])
    }

    pub fn metadata(&self) -> BTreeMap<String, MetadataRecord> {
        self.entries
            .iter()
            .map(|e| {
                (
                    e.name.clone(),
                    MetadataRecord {
                        known: Some(e.known),
                        gathered: e.gathered,
                    },
                )
            })
            .collect()
    }

    /// Matrices for entries generated with `keep_profiles`, with column
    /// indices drawn under `seed`.
    pub fn materialize(&self, seed: u64) -> Vec<(String, CsrMatrix)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.entries
            .iter()
            .filter_map(|e| e.profile.as_ref().map(|p| (e.name.clone(), p.to_csr(&mut rng))))
            .collect()
    }

    pub fn dataset(&self) -> Dataset {
        let mut rows: Vec<DatasetRow> = self
            .entries
            .iter()
            .map(|e| DatasetRow {
                name: e.name.clone(),
                known: e.known,
                gathered: Some(e.gathered),
                timings: e.timings.clone(),
            })
            .collect();
        rows.sort_by(|a, b| a.name.cmp(&b.name));
        Dataset {
            kernels: self.kernel_labels(),
            rows,
        }
    }
}
