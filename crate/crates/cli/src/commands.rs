use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use seer_core::dataset::{self, format_seconds, parse_metadata_csv, split_train_test, write_metadata_csv};
use seer_core::eval::{self, geomean_speedup, EvalReport, ORACLE, SELECTOR};
use seer_core::features::correlation_table;
use seer_core::model::{SplitInfo, TreeAccuracy};
use seer_core::synth::{simulate_runtime, CorpusSpec};
use seer_core::{
    gather_features, generate_corpus, known_features, parse_matrix_market, train_seer, Clock, CsrMatrix, Dataset,
    DatasetRow, Dialect, FixedClock, GatheredFeatures, KernelTable, KernelTimings, KnownFeatures, MetadataRecord,
    SeerModel, SystemClock, TreeParams, Workload,
};

use crate::config::{parse_iterations, FileConfig};
use crate::exit::CliError;
use crate::fsio::{matrix_files, read, stem, write_atomic};
use crate::{CommonArgs, DataArgs, Lang, Subset, TrainArgs};

const DEFAULT_SEED: u64 = 42;
const DEFAULT_SPLIT: f64 = 0.8;

fn out_dir(file: &FileConfig, common: &CommonArgs) -> PathBuf {
    common.out.clone().or_else(|| file.out.clone()).unwrap_or_else(|| PathBuf::from("."))
}

fn clock(file: &FileConfig, common: &CommonArgs) -> Box<dyn Clock> {
    if common.fixed_clock || file.fixed_clock.unwrap_or(false) {
        Box::new(FixedClock::default())
    } else {
        Box::new(SystemClock::new())
    }
}

fn iterations(flag: &Option<String>, file: &FileConfig) -> Result<Option<Vec<u32>>> {
    match (flag, &file.iterations) {
        (Some(s), _) => parse_iterations(s).map(Some),
        (None, Some(list)) => list.resolve().map(Some),
        (None, None) => Ok(None),
    }
}

fn model_path(flag: Option<PathBuf>, file: &FileConfig) -> Result<PathBuf> {
    flag.or_else(|| file.model.clone())
        .ok_or_else(|| CliError::Usage("no model given (--model)".into()).into())
}

fn load_model(path: &Path) -> Result<SeerModel> {
    SeerModel::from_bundle(&read(path)?).with_context(|| format!("loading model {}", path.display()))
}

fn corpus_spec(path: Option<&Path>) -> Result<CorpusSpec> {
    match path {
        Some(p) => {
            let text = read(p)?;
            toml::from_str(&text).with_context(|| format!("parsing corpus config {}", p.display()))
        }
        None => Ok(CorpusSpec::default_mix()),
    }
}

enum Source {
    Tables {
        elapsed: PathBuf,
        preprocess: PathBuf,
        metadata: PathBuf,
    },
    Matrices {
        dir: PathBuf,
        corpus: Option<PathBuf>,
    },
}

/// Flags describe the data source as a whole; the config file is consulted
/// only when no data flag is given.
fn source(file: &FileConfig, data: &DataArgs) -> Result<Source> {
    let from_flags = data.elapsed.is_some()
        || data.preprocess.is_some()
        || data.metadata.is_some()
        || data.data.is_some()
        || data.matrices.is_some();
    let d = if from_flags {
        data.clone()
    } else {
        DataArgs {
            elapsed: file.elapsed.clone(),
            preprocess: file.preprocess.clone(),
            metadata: file.metadata.clone(),
            data: file.data.clone(),
            matrices: file.matrices.clone(),
            corpus: None,
        }
    };
    let corpus = data.corpus.clone().or_else(|| file.corpus.clone());
    let tables = d.elapsed.is_some() || d.preprocess.is_some() || d.metadata.is_some() || d.data.is_some();
    match (d.matrices, tables) {
        (Some(_), true) => Err(CliError::Usage(
            "give either the CSV tables or --matrices, not both".into(),
        )
        .into()),
        (Some(dir), false) => Ok(Source::Matrices { dir, corpus }),
        (None, true) => {
            let pick = |explicit: Option<PathBuf>, name: &str, flag: &str| -> Result<PathBuf> {
                explicit
                    .or_else(|| d.data.as_ref().map(|dir| dir.join(name)))
                    .ok_or_else(|| CliError::Usage(format!("missing --{flag} (or --data)")).into())
            };
            Ok(Source::Tables {
                elapsed: pick(d.elapsed, "elapsed.csv", "elapsed")?,
                preprocess: pick(d.preprocess, "preprocess.csv", "preprocess")?,
                metadata: pick(d.metadata, "metadata.csv", "metadata")?,
            })
        }
        (None, false) => Err(CliError::Usage(
            "no data source: give --data, --elapsed/--preprocess/--metadata or --matrices".into(),
        )
        .into()),
    }
}

fn measure_matrix(path: &Path, clock: &dyn Clock) -> Result<(CsrMatrix, KnownFeatures, GatheredFeatures)> {
    let m = parse_matrix_market(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    let known = known_features(&m);
    let gathered = gather_features(&m, clock).with_context(|| format!("gathering features of {}", path.display()))?;
    Ok((m, known, gathered))
}

fn load_dataset(src: &Source, clock: &dyn Clock) -> Result<Dataset> {
    match src {
        Source::Tables {
            elapsed,
            preprocess,
            metadata,
        } => {
            let el = KernelTable::from_csv(&read(elapsed)?, true).with_context(|| format!("in {}", elapsed.display()))?;
            let pre =
                KernelTable::from_csv(&read(preprocess)?, false).with_context(|| format!("in {}", preprocess.display()))?;
            let meta = parse_metadata_csv(&read(metadata)?).with_context(|| format!("in {}", metadata.display()))?;
            let data = dataset::join(&el, &pre, &meta, &BTreeMap::new()).context("joining the benchmark tables")?;
            if data.rows.is_empty() {
                return Err(CliError::Empty(format!("{} has no rows", elapsed.display())).into());
            }
            Ok(data)
        }
        Source::Matrices { dir, corpus } => {
            let spec = corpus_spec(corpus.as_deref())?;
            spec.machine.validate()?;
            let files = matrix_files(dir)?;
            if files.is_empty() {
                return Err(CliError::Empty(format!("no .mtx files in {}", dir.display())).into());
            }
            let mut rows = Vec::with_capacity(files.len());
            for path in &files {
                let (m, known, gathered) = measure_matrix(path, clock)?;
                let costs: Vec<_> = spec.kernels.iter().map(|&k| simulate_runtime(&m, k, &spec.machine)).collect();
                rows.push(DatasetRow {
                    name: stem(path),
                    known,
                    gathered: Some(gathered),
                    timings: KernelTimings::new(
                        costs.iter().map(|c| Some(c.runtime)).collect(),
                        costs.iter().map(|c| Some(c.preprocess)).collect(),
                    ),
                });
            }
            Ok(Dataset {
                kernels: spec.kernels.iter().map(|k| k.label().to_string()).collect(),
                rows,
            })
        }
    }
}

pub fn features(file: &FileConfig, matrices: Option<PathBuf>, common: &CommonArgs) -> Result<()> {
    let dir = matrices
        .or_else(|| file.matrices.clone())
        .ok_or_else(|| CliError::Usage("no matrix directory (--matrices)".into()))?;
    let clock = clock(file, common);
    let files = matrix_files(&dir)?;
    if files.is_empty() {
        eprintln!("warning: no .mtx files in {}", dir.display());
    }
    let mut records = BTreeMap::new();
    let mut skipped = Vec::new();
    for path in &files {
        match measure_matrix(path, &*clock) {
            Ok((_, known, gathered)) => {
                records.insert(
                    stem(path),
                    MetadataRecord {
                        known: Some(known),
                        gathered,
                    },
                );
            }
            Err(e) => {
                eprintln!("warning: skipping {}: {e:#}", path.display());
                skipped.push(stem(path));
            }
        }
    }
    let target = out_dir(file, common).join("metadata.csv");
    write_atomic(&target, &write_metadata_csv(&records))?;
    outln!("wrote {} rows to {}", records.len(), target.display());
    if !skipped.is_empty() {
        return Err(CliError::Parse(format!(
            "{} of {} files skipped: {}",
            skipped.len(),
            files.len(),
            skipped.join(", ")
        ))
        .into());
    }
    Ok(())
}

pub fn synth(file: &FileConfig, corpus: Option<PathBuf>, write_matrices: bool, common: &CommonArgs) -> Result<()> {
    let spec = corpus_spec(corpus.or_else(|| file.corpus.clone()).as_deref())?;
    let seed = common.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let corpus = generate_corpus(&spec, seed, write_matrices)?;
    let out = out_dir(file, common);
    write_atomic(&out.join("elapsed.csv"), &corpus.elapsed().to_csv())?;
    write_atomic(&out.join("preprocess.csv"), &corpus.preprocess().to_csv())?;
    write_atomic(&out.join("metadata.csv"), &write_metadata_csv(&corpus.metadata()))?;
    if write_matrices {
        for (name, m) in corpus.materialize(seed) {
            write_atomic(&out.join("matrices").join(format!("{name}.mtx")), &m.to_matrix_market())?;
        }
    }
    outln!(
        "wrote {} matrices x {} kernels to {}",
        corpus.entries.len(),
        corpus.kernels.len(),
        out.display()
    );
    Ok(())
}

fn tree_params(file: &FileConfig, train: &TrainArgs) -> TreeParams {
    let d = TreeParams::default();
    TreeParams {
        max_depth: train.max_depth.or(file.max_depth).unwrap_or(d.max_depth),
        min_samples_leaf: train.min_samples_leaf.or(file.min_samples_leaf).unwrap_or(d.min_samples_leaf),
    }
}

#[derive(Serialize)]
struct TrainSummary {
    seed: u64,
    split: f64,
    iterations: Vec<u32>,
    max_depth: usize,
    min_samples_leaf: usize,
    n_train: usize,
    n_test: usize,
    train: TreeAccuracy,
    test: TreeAccuracy,
}

pub fn train(file: &FileConfig, data: &DataArgs, train: &TrainArgs, common: &CommonArgs) -> Result<()> {
    let clock = clock(file, common);
    let dataset = load_dataset(&source(file, data)?, &*clock)?;
    let iters = iterations(&train.iterations, file)?.unwrap_or_else(|| vec![1]);
    let params = tree_params(file, train);
    let seed = common.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let fraction = train.split.or(file.split).unwrap_or(DEFAULT_SPLIT);
    let (train_rows, test_rows) = split_train_test(&dataset.rows, seed, fraction)?;
    let mut model = train_seer(&train_rows, &dataset.kernels, &iters, params)?;
    model.split = Some(SplitInfo { seed, fraction });

    let summary = TrainSummary {
        seed,
        split: fraction,
        iterations: iters.clone(),
        max_depth: params.max_depth,
        min_samples_leaf: params.min_samples_leaf,
        n_train: train_rows.len(),
        n_test: test_rows.len(),
        train: model.accuracy(&train_rows, &iters)?,
        test: model.accuracy(&test_rows, &iters)?,
    };
    let out = out_dir(file, common);
    write_atomic(&out.join("model.json"), &model.to_bundle())?;
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    write_atomic(&out.join("train_summary.json"), &json)?;

    outln!("trained on {} rows, {} held out", summary.n_train, summary.n_test);
    outln!("tree      train   test");
    for (name, a, b) in [
        ("known", summary.train.known, summary.test.known),
        ("gathered", summary.train.gathered, summary.test.gathered),
        ("selector", summary.train.selector, summary.test.selector),
    ] {
        outln!("{name:<9} {a:.4}  {b:.4}");
    }
    outln!("model written to {}", out.join("model.json").display());
    Ok(())
}

/// `rows=..,cols=..,nnz=..` plus optionally all four densities and
/// `collection_time`.
fn parse_feature_row(text: &str) -> Result<(KnownFeatures, Option<GatheredFeatures>)> {
    let mut kv = BTreeMap::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| CliError::Parse(format!("expected key=value, got {part:?}")))?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let mut take = |key: &str| kv.remove(key);
    let int = |key: &str, v: Option<String>| -> Result<usize> {
        let v = v.ok_or_else(|| CliError::Schema(format!("feature row lacks {key}")))?;
        v.parse().map_err(|_| CliError::Parse(format!("{key}={v} is not a non-negative integer")).into())
    };
    let known = KnownFeatures {
        rows: int("rows", take("rows"))?,
        cols: int("cols", take("cols"))?,
        nnz: int("nnz", take("nnz"))?,
    };
    let names = ["max_density", "min_density", "mean_density", "var_density", "collection_time"];
    let values: Vec<Option<String>> = names.iter().map(|n| take(n)).collect();
    if let Some(extra) = kv.keys().next() {
        return Err(CliError::Schema(format!("unknown feature {extra:?}")).into());
    }
    let gathered = match values.iter().filter(|v| v.is_some()).count() {
        0 => None,
        5 => {
            let f: Vec<f64> = values
                .into_iter()
                .zip(names)
                .map(|(v, n)| {
                    let v = v.expect("all present");
                    v.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| CliError::Parse(format!("{n}={v} is not a number")))
                })
                .collect::<Result<_, _>>()?;
            Some(GatheredFeatures {
                max_density: f[0],
                min_density: f[1],
                mean_density: f[2],
                var_density: f[3],
                collection_time: f[4],
            })
        }
        _ => {
            return Err(CliError::Schema(format!("gathered features need all of {}", names.join(", "))).into());
        }
    };
    Ok((known, gathered))
}

pub fn predict(
    file: &FileConfig,
    model: Option<PathBuf>,
    matrix: Option<PathBuf>,
    features: Option<String>,
    iterations_flag: Option<String>,
    common: &CommonArgs,
) -> Result<()> {
    let model = load_model(&model_path(model, file)?)?;
    let iters = iterations(&iterations_flag, file)?.unwrap_or_else(|| vec![1]);
    let clock = clock(file, common);
    let matrix = match &matrix {
        Some(p) => Some(parse_matrix_market(&read(p)?).with_context(|| format!("parsing {}", p.display()))?),
        None => None,
    };
    let row = match (&matrix, &features) {
        (Some(_), _) => None,
        (None, Some(text)) => Some(parse_feature_row(text)?),
        (None, None) => return Err(CliError::Usage("give --matrix or --features".into()).into()),
    };
    let mut out = String::from("iterations,kernel,path,charged_overhead,inference_time\n");
    for &k in &iters {
        let workload = match (&matrix, row) {
            (Some(m), _) => Workload::Matrix(m),
            (None, Some((known, gathered))) => Workload::Features { known, gathered },
            (None, None) => unreachable!("checked above"),
        };
        let o = model
            .infer(workload, k, &*clock)
            .with_context(|| format!("selecting for {k} iterations"))?;
        let _ = writeln!(
            out,
            "{k},{},{},{},{}",
            dataset::csv_field(&model.kernels[o.kernel]),
            o.path.as_str(),
            format_seconds(o.charged_overhead),
            format_seconds(o.inference_time)
        );
    }
    out!("{out}");
    if common.out.is_some() || file.out.is_some() {
        write_atomic(&out_dir(file, common).join("prediction.csv"), &out)?;
    }
    Ok(())
}

fn print_report(report: &EvalReport) {
    outln!("k = {} over {} matrices", report.iterations, report.rows.len());
    outln!("{:<20} {:>14} {:>14} {:>9} {:>14}", "predictor", "total", "overhead", "accuracy", "error");
    for s in &report.summaries {
        outln!(
            "{:<20} {:>14.6e} {:>14.6e} {:>9.4} {:>14.6e}",
            s.name, s.total_realized_cost, s.total_overhead, s.accuracy, s.error_vs_oracle
        );
    }
    let total = |n: &str| report.summary(n).map(|s| s.total_realized_cost);
    if let (Some(best), Some(sel), Some(oracle)) = (report.best_fixed.as_deref(), total(SELECTOR), total(ORACLE)) {
        let best_total = total(best).unwrap_or(f64::NAN);
        outln!("best fixed kernel: {best}");
        outln!("selector speedup over best fixed: {:.4}", best_total / sel);
        outln!("selector speedup over oracle: {:.4}", oracle / sel);
    }
    match geomean_speedup(report) {
        Ok(g) => outln!("selector geomean speedup over fixed kernels: {g:.4}"),
        Err(e) => outln!("selector geomean speedup unavailable: {e}"),
    }
    let substituted: usize = report.fixed_summaries().map(|s| s.substituted_rows).sum();
    if substituted > 0 {
        outln!("note: {substituted} missing fixed-kernel cells scored as the slowest present kernel");
    }
}

pub fn evaluate(
    file: &FileConfig,
    model: Option<PathBuf>,
    data: &DataArgs,
    train: &TrainArgs,
    subset: Option<Subset>,
    common: &CommonArgs,
) -> Result<()> {
    let model = load_model(&model_path(model, file)?)?;
    let clock = clock(file, common);
    let dataset = load_dataset(&source(file, data)?, &*clock)?;
    if dataset.kernels != model.kernels {
        return Err(CliError::Schema(format!(
            "model kernels [{}] differ from data kernels [{}]",
            model.kernels.join(" | "),
            dataset.kernels.join(" | ")
        ))
        .into());
    }
    let subset = match subset {
        Some(s) => s,
        None => match file.subset.as_deref() {
            None | Some("test") => Subset::Test,
            Some("train") => Subset::Train,
            Some("all") => Subset::All,
            Some(other) => return Err(CliError::Usage(format!("unknown subset {other:?}")).into()),
        },
    };
    let recorded = model.split.unwrap_or(SplitInfo {
        seed: DEFAULT_SEED,
        fraction: DEFAULT_SPLIT,
    });
    let seed = common.seed.or(file.seed).unwrap_or(recorded.seed);
    let fraction = train.split.or(file.split).unwrap_or(recorded.fraction);
    let rows = match subset {
        Subset::All => dataset.rows.clone(),
        Subset::Train => split_train_test(&dataset.rows, seed, fraction)?.0,
        Subset::Test => split_train_test(&dataset.rows, seed, fraction)?.1,
    };
    let iters = iterations(&train.iterations, file)?.unwrap_or_else(|| model.iterations.clone());
    let out = out_dir(file, common);

    let mut sweep = String::new();
    for (i, &k) in iters.iter().enumerate() {
        let report = eval::evaluate(&model, &rows, k, &*clock)?;
        if i == 0 {
            sweep.push_str("iterations");
            for p in &report.predictors {
                sweep.push(',');
                sweep.push_str(&dataset::csv_field(p));
            }
            sweep.push('\n');
        }
        sweep.push_str(&k.to_string());
        for s in &report.summaries {
            sweep.push(',');
            sweep.push_str(&format_seconds(s.total_realized_cost));
        }
        sweep.push('\n');

        write_atomic(&out.join(format!("report_{k}iter.json")), &report.to_json())?;
        write_atomic(&out.join(format!("summary_{k}iter.csv")), &report.summary_csv())?;
        for f in eval::emit_plot_data(&report) {
            write_atomic(&out.join(&f.path), &f.contents)?;
        }
        print_report(&report);
        outln!();
    }
    write_atomic(&out.join("sweep.csv"), &sweep)?;
    outln!("reports written to {}", out.display());
    Ok(())
}

pub fn emit(file: &FileConfig, model: Option<PathBuf>, lang: Lang, common: &CommonArgs) -> Result<()> {
    let model = load_model(&model_path(model, file)?)?;
    let (dialect, name) = match lang {
        Lang::C => (Dialect::C, "seer_model.h"),
        Lang::Rust => (Dialect::Rust, "seer_model.rs"),
    };
    let source = model.emit_source(dialect);
    if common.out.is_some() || file.out.is_some() {
        let target = out_dir(file, common).join(name);
        write_atomic(&target, &source)?;
        outln!("wrote {}", target.display());
    } else {
        out!("{source}");
    }
    Ok(())
}

pub fn correlate(file: &FileConfig, data: &DataArgs, abs_tau: bool, common: &CommonArgs) -> Result<()> {
    let clock = clock(file, common);
    let dataset = load_dataset(&source(file, data)?, &*clock)?;
    let table = correlation_table(&dataset.rows, &dataset.kernels);
    let csv = table.to_csv(abs_tau || file.abs_tau.unwrap_or(false));
    out!("{csv}");
    if common.out.is_some() || file.out.is_some() {
        write_atomic(&out_dir(file, common).join("correlation.csv"), &csv)?;
    }
    Ok(())
}
