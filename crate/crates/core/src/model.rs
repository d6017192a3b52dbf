//! The three-tree kernel selector.
//!
//! * the known tree predicts a kernel from `(rows, cols, nnz, iterations)`;
//! * the gathered tree adds the four row-density statistics;
//! * the selector tree looks only at the known features and decides whether
//!   collecting the density statistics is worth their cost.
//!
//! Selector labels are built from the two sub-models' own predictions on the
//! training rows, so the selector learns where the known tree actually goes
//! wrong badly enough to pay for feature collection.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::{measure, Clock};
use crate::dataset::{
    self, gathered_vector, known_vector, total_cost, DatasetError, DatasetRow, KernelTimings, LabeledExample,
    GATHERED_SCHEMA, KNOWN_SCHEMA,
};
use crate::dtree::{train_tree, DecisionTree, Dialect, TreeError, TreeParams};
use crate::features::{gather_features, FeatureError, GatheredFeatures};
use crate::sparse::{known_features, KnownFeatures, SparseStructure};

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("no training rows")]
    NoRows,
    #[error("empty kernel vocabulary")]
    NoKernels,
    #[error("iteration counts must be non-empty and at least 1")]
    Iterations,
    #[error("row {name:?} has {found} kernels, vocabulary has {expected}")]
    KernelCount {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("selector chose gathered features but neither a matrix nor precomputed features were supplied")]
    MissingGatheredFeatures,
    #[error("unsupported bundle version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("malformed bundle: {0}")]
    Malformed(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

/// Which sub-model the selector routes to. Class 0 and 1 of the selector tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathChoice {
    Known,
    Gathered,
}

impl PathChoice {
    pub fn class(self) -> usize {
        match self {
            PathChoice::Known => 0,
            PathChoice::Gathered => 1,
        }
    }

    pub fn from_class(class: usize) -> Self {
        if class == 1 {
            PathChoice::Gathered
        } else {
            PathChoice::Known
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PathChoice::Known => "known",
            PathChoice::Gathered => "gathered",
        }
    }
}

/// Cost-aware routing label for one training example.
///
/// Gathering wins only if the gathered prediction plus the collection time is
/// strictly cheaper than the known prediction; equality stays on the known path.
pub fn selector_label(
    timings: &KernelTimings,
    known_pred: usize,
    gathered_pred: usize,
    collection_time: f64,
    iterations: u32,
) -> PathChoice {
    let known = total_cost(timings, known_pred, iterations);
    let gathered = total_cost(timings, gathered_pred, iterations) + collection_time;
    if gathered < known {
        PathChoice::Gathered
    } else {
        PathChoice::Known
    }
}

/// Seed and fraction of the train/test split a model was trained under.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitInfo {
    pub seed: u64,
    pub fraction: f64,
}

/// Trained known, gathered and selector trees with the kernel vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeerModel {
    pub kernels: Vec<String>,
    pub known_tree: DecisionTree,
    pub gathered_tree: DecisionTree,
    pub selector_tree: DecisionTree,
    pub params: TreeParams,
    pub iterations: Vec<u32>,
    #[serde(default)]
    pub split: Option<SplitInfo>,
}

/// Input to [`SeerModel::infer`].
#[derive(Clone, Copy)]
pub enum Workload<'a> {
    /// A matrix; density statistics are computed only if the selector asks.
    Matrix(&'a dyn SparseStructure),
    /// Features collected earlier, with their recorded collection time.
    Features {
        known: KnownFeatures,
        gathered: Option<GatheredFeatures>,
    },
}

/// Result of one runtime selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InferenceOutcome {
    pub kernel: usize,
    pub path: PathChoice,
    /// Feature collection time charged to this selection; zero on the known path.
    pub charged_overhead: f64,
    /// Time spent evaluating the trees.
    pub inference_time: f64,
}

/// Trains the three trees.
///
/// Every row contributes one example per iteration count, labelled with the
/// kernel of lowest `preprocess + k * runtime`.
pub fn train_seer(
    rows: &[DatasetRow],
    kernels: &[String],
    iterations: &[u32],
    params: TreeParams,
) -> Result<SeerModel, ModelError> {
    if rows.is_empty() {
        return Err(ModelError::NoRows);
    }
    if kernels.is_empty() {
        return Err(ModelError::NoKernels);
    }
    if iterations.is_empty() || iterations.contains(&0) {
        return Err(ModelError::Iterations);
    }
    for r in rows {
        if r.timings.n_kernels() != kernels.len() {
            return Err(ModelError::KernelCount {
                name: r.name.clone(),
                expected: kernels.len(),
                found: r.timings.n_kernels(),
            });
        }
    }
    let known_names: Vec<String> = KNOWN_SCHEMA.iter().map(|s| s.to_string()).collect();
    let gathered_names: Vec<String> = GATHERED_SCHEMA.iter().map(|s| s.to_string()).collect();

    let known_ex = dataset::known_examples(rows, iterations)?;
    let gathered_ex = dataset::gathered_examples(rows, iterations)?;
    let (kx, ky): (Vec<Vec<f64>>, Vec<usize>) =
        known_ex.iter().map(|e| (e.features.clone(), e.label)).unzip();
    let (gx, gy): (Vec<Vec<f64>>, Vec<usize>) =
        gathered_ex.iter().map(|e| (e.features.clone(), e.label)).unzip();

    let known_tree = train_tree(&kx, &ky, kernels.len(), &known_names, params)?;
    let gathered_tree = train_tree(&gx, &gy, kernels.len(), &gathered_names, params)?;

    let selector_y: Vec<usize> = selector_targets(&known_tree, &gathered_tree, rows, iterations)?
        .into_iter()
        .map(|e| e.label)
        .collect();
    let selector_tree = train_tree(&kx, &selector_y, 2, &known_names, params)?;

    Ok(SeerModel {
        kernels: kernels.to_vec(),
        known_tree,
        gathered_tree,
        selector_tree,
        params,
        iterations: iterations.to_vec(),
        split: None,
    })
}

/// Selector examples over the known schema; the label is the path the
/// labelling rule picks given the two sub-models' own predictions.
fn selector_targets(
    known_tree: &DecisionTree,
    gathered_tree: &DecisionTree,
    rows: &[DatasetRow],
    iterations: &[u32],
) -> Result<Vec<LabeledExample>, ModelError> {
    let mut out = Vec::with_capacity(rows.len() * iterations.len());
    for row in rows {
        let g = row
            .gathered
            .ok_or_else(|| DatasetError::MissingMetadata(vec![row.name.clone()]))?;
        for &k in iterations {
            let features = known_vector(&row.known, k);
            let known_pred = known_tree.predict(&features)?;
            let gathered_pred = gathered_tree.predict(&gathered_vector(&row.known, &g, k))?;
            let path = selector_label(&row.timings, known_pred, gathered_pred, g.collection_time, k);
            out.push(LabeledExample {
                features,
                label: path.class(),
                iterations: k,
            });
        }
    }
    Ok(out)
}

/// Fraction of examples each tree gets right on its own labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeAccuracy {
    pub known: f64,
    pub gathered: f64,
    pub selector: f64,
}

impl SeerModel {
    /// Selector examples for `rows` under this model's sub-trees.
    pub fn selector_examples(&self, rows: &[DatasetRow], iterations: &[u32]) -> Result<Vec<LabeledExample>, ModelError> {
        selector_targets(&self.known_tree, &self.gathered_tree, rows, iterations)
    }

    /// Accuracy of each tree against its own labels on `rows`.
    pub fn accuracy(&self, rows: &[DatasetRow], iterations: &[u32]) -> Result<TreeAccuracy, ModelError> {
        if rows.is_empty() {
            return Err(ModelError::NoRows);
        }
        let rate = |tree: &DecisionTree, ex: &[LabeledExample]| -> Result<f64, ModelError> {
            let mut hits = 0usize;
            for e in ex {
                hits += (tree.predict(&e.features)? == e.label) as usize;
            }
            Ok(hits as f64 / ex.len() as f64)
        };
        Ok(TreeAccuracy {
            known: rate(&self.known_tree, &dataset::known_examples(rows, iterations)?)?,
            gathered: rate(&self.gathered_tree, &dataset::gathered_examples(rows, iterations)?)?,
            selector: rate(&self.selector_tree, &self.selector_examples(rows, iterations)?)?,
        })
    }

    /// Path the selector takes for these known features.
    pub fn route(&self, known: &KnownFeatures, iterations: u32) -> Result<PathChoice, ModelError> {
        Ok(PathChoice::from_class(
            self.selector_tree.predict(&known_vector(known, iterations))?,
        ))
    }

    pub fn predict_known(&self, known: &KnownFeatures, iterations: u32) -> Result<usize, ModelError> {
        Ok(self.known_tree.predict(&known_vector(known, iterations))?)
    }

    pub fn predict_gathered(
        &self,
        known: &KnownFeatures,
        gathered: &GatheredFeatures,
        iterations: u32,
    ) -> Result<usize, ModelError> {
        Ok(self
            .gathered_tree
            .predict(&gathered_vector(known, gathered, iterations))?)
    }

    /// Runtime selection: consult the selector, then either predict from the
    /// known features at no cost or collect density statistics and charge
    /// their collection time.
    ///
    /// On the known path a matrix workload is only asked for its shape and
    /// stored-entry count.
    pub fn infer(
        &self,
        workload: Workload<'_>,
        iterations: u32,
        clock: &dyn Clock,
    ) -> Result<InferenceOutcome, ModelError> {
        let known = match workload {
            Workload::Matrix(m) => known_features(m),
            Workload::Features { known, .. } => known,
        };
        let (path, route_time) = measure(clock, || self.route(&known, iterations));
        let path = path?;
        match path {
            PathChoice::Known => {
                let (kernel, t) = measure(clock, || self.predict_known(&known, iterations));
                Ok(InferenceOutcome {
                    kernel: kernel?,
                    path,
                    charged_overhead: 0.0,
                    inference_time: route_time + t,
                })
            }
            PathChoice::Gathered => {
                let gathered = match workload {
                    Workload::Matrix(m) => gather_features(m, clock)?,
                    Workload::Features {
                        gathered: Some(g), ..
                    } => g,
                    Workload::Features { gathered: None, .. } => {
                        return Err(ModelError::MissingGatheredFeatures)
                    }
                };
                let (kernel, t) = measure(clock, || self.predict_gathered(&known, &gathered, iterations));
                Ok(InferenceOutcome {
                    kernel: kernel?,
                    path,
                    charged_overhead: gathered.collection_time,
                    inference_time: route_time + t,
                })
            }
        }
    }

    /// Checks the invariants tying the three trees together.
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::Malformed(m));
        for t in [&self.known_tree, &self.gathered_tree, &self.selector_tree] {
            t.validate()?;
        }
        if self.kernels.is_empty() {
            return Err(ModelError::NoKernels);
        }
        if self.known_tree.n_classes != self.kernels.len() || self.gathered_tree.n_classes != self.kernels.len() {
            return bad("kernel trees disagree with the vocabulary size".into());
        }
        if self.selector_tree.n_classes != 2 {
            return bad("selector must have exactly two classes".into());
        }
        let schema = |t: &DecisionTree, s: &[&str]| t.feature_names.iter().map(String::as_str).eq(s.iter().copied());
        if !schema(&self.known_tree, &KNOWN_SCHEMA) || !schema(&self.selector_tree, &KNOWN_SCHEMA) {
            return bad("known/selector feature schema mismatch".into());
        }
        if !schema(&self.gathered_tree, &GATHERED_SCHEMA) {
            return bad("gathered feature schema mismatch".into());
        }
        Ok(())
    }

    pub fn to_bundle(&self) -> String {
        let bundle = Bundle {
            format: BUNDLE_FORMAT.into(),
            version: BUNDLE_VERSION,
            known_schema: KNOWN_SCHEMA.iter().map(|s| s.to_string()).collect(),
            gathered_schema: GATHERED_SCHEMA.iter().map(|s| s.to_string()).collect(),
            selector_classes: vec!["known".into(), "gathered".into()],
            model: self.clone(),
        };
        let mut text = serde_json::to_string_pretty(&bundle).expect("bundle serialization cannot fail");
        text.push('\n');
        text
    }

    pub fn from_bundle(text: &str) -> Result<Self, ModelError> {
        let bundle: Bundle = serde_json::from_str(text).map_err(|e| ModelError::Malformed(e.to_string()))?;
        if bundle.format != BUNDLE_FORMAT {
            return Err(ModelError::Malformed(format!("unexpected format tag {:?}", bundle.format)));
        }
        if bundle.version != BUNDLE_VERSION {
            return Err(ModelError::Version {
                found: bundle.version,
                expected: BUNDLE_VERSION,
            });
        }
        if !bundle.known_schema.iter().map(String::as_str).eq(KNOWN_SCHEMA)
            || !bundle.gathered_schema.iter().map(String::as_str).eq(GATHERED_SCHEMA)
        {
            return Err(ModelError::Malformed("bundle schema differs from this build".into()));
        }
        bundle.model.validate()?;
        Ok(bundle.model)
    }

    /// One source file with the three tree functions and a dispatch function
    /// that mirrors [`SeerModel::infer`]: the density statistics are requested
    /// from a caller-supplied collector only when the selector routes there.
    pub fn emit_source(&self, dialect: Dialect) -> String {
        let mut out = String::new();
        let known_params = self.known_tree.parameter_names();
        let gathered_params = self.gathered_tree.parameter_names();
        let density = &gathered_params[known_params.len()..];
        match dialect {
            Dialect::C => {
                out.push_str("#ifndef SEER_MODEL_H\n#define SEER_MODEL_H\n\n");
                let _ = writeln!(out, "#define SEER_NUM_KERNELS {}\n", self.kernels.len());
                out.push_str("static const char *const seer_kernel_names[SEER_NUM_KERNELS] = {\n");
                for k in &self.kernels {
                    let _ = writeln!(out, "    \"{}\",", k.replace('\\', "\\\\").replace('"', "\\\""));
                }
                out.push_str("};\n\n");
                out.push_str(&self.known_tree.emit_source("seer_known", dialect));
                out.push('\n');
                out.push_str(&self.gathered_tree.emit_source("seer_gathered", dialect));
                out.push('\n');
                out.push_str("/* 0 = known-feature model, 1 = gathered-feature model */\n");
                out.push_str(&self.selector_tree.emit_source("seer_selector", dialect));
                out.push('\n');
                out.push_str("/* fills out[0..4] with max, min, mean and variance of row density */\n");
                out.push_str("typedef void (*seer_collect_fn)(void *ctx, double *out);\n\n");
                let args: Vec<String> = known_params.iter().map(|p| format!("double {p}")).collect();
                let _ = writeln!(
                    out,
                    "static inline int seer_select_kernel({}, seer_collect_fn collect, void *ctx) {{",
                    args.join(", ")
                );
                let call = known_params.join(", ");
                let _ = writeln!(out, "    if (seer_selector({call}) == 0) {{");
                let _ = writeln!(out, "        return seer_known({call});");
                out.push_str("    }\n");
                out.push_str("    double g[4];\n    collect(ctx, g);\n");
                let _ = writeln!(out, "    return seer_gathered({call}, g[0], g[1], g[2], g[3]);");
                out.push_str("}\n\n#endif /* SEER_MODEL_H */\n");
            }
            Dialect::Rust => {
                let _ = writeln!(out, "pub const SEER_KERNEL_NAMES: [&str; {}] = [", self.kernels.len());
                for k in &self.kernels {
                    let _ = writeln!(out, "    {k:?},");
                }
                out.push_str("];\n\n");
                out.push_str(&self.known_tree.emit_source("seer_known", dialect));
                out.push('\n');
                out.push_str(&self.gathered_tree.emit_source("seer_gathered", dialect));
                out.push('\n');
                out.push_str("/// 0 = known-feature model, 1 = gathered-feature model\n");
                out.push_str(&self.selector_tree.emit_source("seer_selector", dialect));
                out.push('\n');
                let args: Vec<String> = known_params.iter().map(|p| format!("{p}: f64")).collect();
                let _ = writeln!(
                    out,
                    "pub fn seer_select_kernel({}, collect: impl FnOnce() -> [f64; 4]) -> usize {{",
                    args.join(", ")
                );
                let call = known_params.join(", ");
                let _ = writeln!(out, "    if seer_selector({call}) == 0 {{");
                let _ = writeln!(out, "        return seer_known({call});");
                out.push_str("    }\n");
                let _ = writeln!(out, "    let [{}] = collect();", density.join(", "));
                let _ = writeln!(out, "    seer_gathered({call}, {})", density.join(", "));
                out.push_str("}\n");
            }
        }
        out
    }
}

const BUNDLE_FORMAT: &str = "seer-bundle";
const BUNDLE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Bundle {
    format: String,
    version: u32,
    known_schema: Vec<String>,
    gathered_schema: Vec<String>,
    selector_classes: Vec<String>,
    #[serde(flatten)]
    model: SeerModel,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::FixedClock;
    use crate::sparse::CsrMatrix;
    use std::cell::Cell;

    fn kernels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("K{i}")).collect()
    }

    fn row(name: &str, known: (usize, usize, usize), var: f64, ct: f64, timings: &[(f64, f64)]) -> DatasetRow {
        DatasetRow {
            name: name.into(),
            known: KnownFeatures {
                rows: known.0,
                cols: known.1,
                nnz: known.2,
            },
            gathered: Some(GatheredFeatures {
                max_density: 0.5,
                min_density: 0.0,
                mean_density: 0.1,
                var_density: var,
                collection_time: ct,
            }),
            timings: KernelTimings::complete(timings),
        }
    }

    fn schema(s: &[&str]) -> Vec<String> {
        s.iter().map(|x| x.to_string()).collect()
    }

    fn fixed_model(selector: PathChoice, known_kernel: usize, gathered_kernel: usize) -> SeerModel {
        SeerModel {
            kernels: kernels(3),
            known_tree: DecisionTree::constant(known_kernel, 3, &schema(&KNOWN_SCHEMA)),
            gathered_tree: DecisionTree::constant(gathered_kernel, 3, &schema(&GATHERED_SCHEMA)),
            selector_tree: DecisionTree::constant(selector.class(), 2, &schema(&KNOWN_SCHEMA)),
            params: TreeParams::default(),
            iterations: vec![1],
            split: None,
        }
    }

    #[test]
    fn selector_label_rule() {
        // known -> K0 total 5, gathered -> K1 total 3
        let t = KernelTimings::complete(&[(5.0, 0.0), (3.0, 0.0)]);
        assert_eq!(selector_label(&t, 0, 1, 1.0, 1), PathChoice::Gathered);
        assert_eq!(selector_label(&t, 0, 1, 2.0, 1), PathChoice::Known);
        assert_eq!(selector_label(&t, 1, 1, 0.0, 1), PathChoice::Known);
        assert_eq!(selector_label(&t, 0, 0, 0.0, 1), PathChoice::Known);
    }

    #[test]
    fn amortised_label_does_not_flip_back() {
        // gathered pick is faster per iteration; collection paid once
        let t = KernelTimings::complete(&[(2.0, 0.0), (1.5, 0.0)]);
        let labels: Vec<PathChoice> = (1..200).map(|k| selector_label(&t, 0, 1, 7.0, k)).collect();
        let first = labels.iter().position(|&p| p == PathChoice::Gathered).unwrap();
        assert!(labels[first..].iter().all(|&p| p == PathChoice::Gathered));
        assert_eq!(first + 1, 15);
    }

    #[test]
    fn known_leaf_never_gathers() {
        let model = fixed_model(PathChoice::Known, 2, 1);
        let out = model
            .infer(
                Workload::Features {
                    known: KnownFeatures { rows: 1, cols: 1, nnz: 1 },
                    gathered: None,
                },
                1,
                &FixedClock::default(),
            )
            .unwrap();
        assert_eq!((out.kernel, out.path, out.charged_overhead), (2, PathChoice::Known, 0.0));
    }

    #[test]
    fn gathered_leaf_charges_recorded_cost() {
        let model = fixed_model(PathChoice::Gathered, 2, 1);
        let g = GatheredFeatures {
            max_density: 1.0,
            min_density: 0.0,
            mean_density: 0.5,
            var_density: 0.25,
            collection_time: 0.5,
        };
        let known = KnownFeatures { rows: 2, cols: 4, nnz: 4 };
        let out = model
            .infer(Workload::Features { known, gathered: Some(g) }, 1, &FixedClock::default())
            .unwrap();
        assert_eq!((out.kernel, out.path, out.charged_overhead), (1, PathChoice::Gathered, 0.5));
        assert_eq!(
            model.infer(Workload::Features { known, gathered: None }, 1, &FixedClock::default()),
            Err(ModelError::MissingGatheredFeatures)
        );
    }

    #[test]
    fn gathered_path_on_matrix_measures_collection() {
        let model = fixed_model(PathChoice::Gathered, 2, 1);
        let m = CsrMatrix::identity(4);
        let clock = FixedClock::new(0.125);
        let out = model.infer(Workload::Matrix(&m), 3, &clock).unwrap();
        assert_eq!(out.charged_overhead, 0.125);
        assert_eq!(out.inference_time, 0.25);
    }

    struct CountingMatrix {
        inner: CsrMatrix,
        offset_reads: Cell<usize>,
    }

    // Cell is not Sync, but the counter is only used on this thread
    impl SparseStructure for CountingMatrix {
        fn n_rows(&self) -> usize {
            self.inner.n_rows()
        }
        fn n_cols(&self) -> usize {
            self.inner.n_cols()
        }
        fn nnz(&self) -> usize {
            self.inner.nnz()
        }
        fn row_offsets(&self) -> &[usize] {
            self.offset_reads.set(self.offset_reads.get() + 1);
            self.inner.row_offsets()
        }
    }

    #[test]
    fn known_path_never_reads_matrix_body() {
        let m = CountingMatrix {
            inner: CsrMatrix::identity(5),
            offset_reads: Cell::new(0),
        };
        let out = fixed_model(PathChoice::Known, 0, 1)
            .infer(Workload::Matrix(&m), 1, &FixedClock::default())
            .unwrap();
        assert_eq!(out.path, PathChoice::Known);
        assert_eq!(m.offset_reads.get(), 0);
        fixed_model(PathChoice::Gathered, 0, 1)
            .infer(Workload::Matrix(&m), 1, &FixedClock::default())
            .unwrap();
        assert_eq!(m.offset_reads.get(), 1);
    }

    #[test]
    fn single_matrix_single_kernel_gives_leaves() {
        let rows = vec![row("a", (4, 4, 4), 0.0, 1e-6, &[(1.0, 0.0)])];
        let m = train_seer(&rows, &kernels(1), &[1], TreeParams::default()).unwrap();
        for t in [&m.known_tree, &m.gathered_tree, &m.selector_tree] {
            assert_eq!(t.nodes.len(), 1);
        }
        m.validate().unwrap();
    }

    #[test]
    fn nnz_threshold_data_uses_known_path() {
        let rows: Vec<DatasetRow> = (0..20)
            .map(|i| {
                let nnz = 100 * (i + 1);
                let t = if nnz <= 1000 { [(1.0, 0.0), (2.0, 0.0)] } else { [(2.0, 0.0), (1.0, 0.0)] };
                row(&format!("m{i}"), (50, 50, nnz), 0.0, 1e-3, &t)
            })
            .collect();
        let m = train_seer(&rows, &kernels(2), &[1], TreeParams::default()).unwrap();
        for r in &rows {
            let kv = known_vector(&r.known, 1);
            assert_eq!(m.known_tree.predict(&kv).unwrap(), dataset::fastest_kernel(&r.timings, 1).unwrap());
            assert_eq!(m.route(&r.known, 1).unwrap(), PathChoice::Known);
        }
    }

    #[test]
    fn variance_labels_favour_gathered_tree() {
        // identical known features, label decided by density variance
        let rows: Vec<DatasetRow> = (0..16)
            .map(|i| {
                let var = i as f64 / 100.0;
                let t = if i < 7 { [(1.0, 0.0), (3.0, 0.0)] } else { [(3.0, 0.0), (1.0, 0.0)] };
                row(&format!("m{i}"), (64, 64, 640), var, 1e-3, &t)
            })
            .collect();
        let m = train_seer(&rows, &kernels(2), &[1], TreeParams { max_depth: 8, min_samples_leaf: 1 }).unwrap();
        let acc = |f: &dyn Fn(&DatasetRow) -> usize| {
            rows.iter()
                .filter(|r| f(r) == dataset::fastest_kernel(&r.timings, 1).unwrap())
                .count()
        };
        let known_acc = acc(&|r| m.predict_known(&r.known, 1).unwrap());
        let gathered_acc = acc(&|r| m.predict_gathered(&r.known, r.gathered.as_ref().unwrap(), 1).unwrap());
        assert!(gathered_acc > known_acc, "{gathered_acc} vs {known_acc}");
        assert_eq!(gathered_acc, rows.len());
    }

    #[test]
    fn bundle_round_trip_and_version_check() {
        let rows: Vec<DatasetRow> = (0..6)
            .map(|i| row(&format!("m{i}"), (10 + i, 10, 30 * (i + 1)), i as f64, 1e-4, &[(1.0 + i as f64, 0.0), (3.5, 1.0)]))
            .collect();
        let mut m = train_seer(&rows, &kernels(2), &[1, 19], TreeParams::default()).unwrap();
        m.split = Some(SplitInfo { seed: 3, fraction: 0.8 });
        let text = m.to_bundle();
        assert_eq!(SeerModel::from_bundle(&text).unwrap(), m);
        let newer = text.replacen("\"version\": 1", "\"version\": 7", 1);
        assert_eq!(
            SeerModel::from_bundle(&newer),
            Err(ModelError::Version { found: 7, expected: 1 })
        );
    }

    #[test]
    fn emitted_header_has_dispatch() {
        let src = fixed_model(PathChoice::Known, 0, 1).emit_source(Dialect::C);
        for needle in [
            "static inline int seer_known(double rows, double cols, double nnz, double iterations)",
            "static inline int seer_gathered(",
            "static inline int seer_selector(",
            "static inline int seer_select_kernel(",
            "#endif",
        ] {
            assert!(src.contains(needle), "missing {needle}");
        }
        let rs = fixed_model(PathChoice::Known, 0, 1).emit_source(Dialect::Rust);
        assert!(rs.contains("let [max_density, min_density, mean_density, var_density] = collect();"));
    }
}
