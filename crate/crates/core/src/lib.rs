//! Cost-aware runtime selection among sparse matrix-vector kernels.
//!
//! Three CART classifiers are trained from benchmark tables: one over features
//! known for free (shape, entry count, iteration count), one that also uses
//! row-density statistics gathered by an extra pass, and a selector that
//! decides per input whether paying for that pass is worth it.

pub mod clock;
pub mod dataset;
pub mod dtree;
pub mod eval;
pub mod features;
pub mod model;
pub mod sparse;
pub mod synth;

pub use clock::{measure, Clock, FixedClock, SystemClock};
pub use dataset::{
    fastest_kernel, total_cost, Dataset, DatasetError, DatasetRow, KernelTable, KernelTimings, MetadataRecord,
    GATHERED_SCHEMA, KNOWN_SCHEMA,
};
pub use dtree::{train_tree, DecisionTree, Dialect, TreeError, TreeParams};
pub use eval::{emit_plot_data, evaluate, geomean_speedup, oracle_choice, EvalError, EvalReport};
pub use features::{gather_features, kendall_tau, FeatureError, GatheredFeatures};
pub use model::{train_seer, InferenceOutcome, ModelError, PathChoice, SeerModel, Workload};
pub use sparse::{known_features, parse_matrix_market, CsrMatrix, KnownFeatures, SparseError, SparseStructure};
pub use synth::{generate_corpus, simulate_runtime, CorpusSpec, KernelVariant, MachineParams, SynthError};
