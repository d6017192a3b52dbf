//! Criterion benchmarks for the selection pipeline live under `benches/`.
//!
//! Shared fixtures used by those benchmarks.

use seer_core::synth::{generate_corpus, CorpusSpec, GeneratorKind, GeneratorSpec, RowProfile};
use seer_core::Dataset;

/// Power-law row profile with `rows` rows, deterministic under `seed`.
pub fn power_law_profile(rows: usize, seed: u64) -> RowProfile {
    let spec = CorpusSpec::new(vec![GeneratorSpec {
        count: 1,
        rows: [rows, rows],
        cols: None,
        kind: GeneratorKind::PowerLaw {
            alpha: [1.6, 1.6],
            min_nnz: 2,
            max_nnz: 2_000,
        },
    }]);
    let corpus = generate_corpus(&spec, seed, true).expect("fixture spec is valid");
    corpus.entries.into_iter().next().and_then(|e| e.profile).expect("one profile")
}

/// The default synthetic mix scaled down to `per_generator` matrices each.
pub fn small_dataset(per_generator: usize, seed: u64) -> Dataset {
    let mut spec = CorpusSpec::default_mix();
    for g in &mut spec.generators {
        g.count = per_generator;
        g.rows = [500, 20_000];
    }
    generate_corpus(&spec, seed, false).expect("fixture spec is valid").dataset()
}
