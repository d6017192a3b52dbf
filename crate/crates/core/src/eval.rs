//! Oracle comparison, accuracy and error metrics, and plot data.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::Clock;
use crate::dataset::{fastest_kernel, format_seconds, total_cost, csv_field, DatasetRow, KernelTimings};
use crate::model::{ModelError, PathChoice, SeerModel, Workload};

pub const KNOWN: &str = "known";
pub const GATHERED: &str = "gathered";
pub const SELECTOR: &str = "selector";
pub const ORACLE: &str = "oracle";

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("empty test set")]
    Empty,
    #[error("matrix {0}: no kernel has a runtime")]
    AllMissing(String),
    #[error("matrix {0}: no gathered features")]
    MissingGathered(String),
    #[error("predictor {name}: expected {expected} choices, got {found}")]
    ChoiceCount {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("predictor {0} not in report")]
    UnknownPredictor(String),
    #[error("total of {0} is not positive")]
    NonPositive(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub fn fixed_name(kernel: &str) -> String {
    format!("fixed:{kernel}")
}

/// Fastest kernel for `k` iterations; the oracle pays no overhead.
pub fn oracle_choice(row: &DatasetRow, iterations: u32) -> Result<usize, EvalError> {
    fastest_kernel(&row.timings, iterations).ok_or_else(|| EvalError::AllMissing(row.name.clone()))
}

/// Total cost of `kernel`, or of the slowest present kernel when `kernel` has
/// no runtime. The flag reports the substitution.
fn cost_or_worst(t: &KernelTimings, kernel: usize, iterations: u32) -> (f64, bool) {
    if t.is_present(kernel) {
        return (total_cost(t, kernel, iterations), false);
    }
    let worst = (0..t.n_kernels())
        .filter(|&i| t.is_present(i))
        .map(|i| total_cost(t, i, iterations))
        .fold(f64::NEG_INFINITY, f64::max);
    (worst, true)
}

/// One predictor's decision on one matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Choice {
    pub kernel: usize,
    /// `preprocess + k * runtime` of the chosen kernel.
    pub cost: f64,
    pub overhead: f64,
    pub realized: f64,
    pub correct: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathChoice>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub substituted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixBreakdown {
    pub name: String,
    pub oracle_kernel: usize,
    /// Aligned with [`EvalReport::predictors`].
    pub choices: Vec<Choice>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorSummary {
    pub name: String,
    pub total_realized_cost: f64,
    pub total_overhead: f64,
    pub accuracy: f64,
    pub error_vs_oracle: f64,
    pub substituted_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub iterations: u32,
    pub kernels: Vec<String>,
    pub predictors: Vec<String>,
    pub summaries: Vec<PredictorSummary>,
    /// Fixed kernel with the lowest aggregate total.
    pub best_fixed: Option<String>,
    /// Summed tree evaluation time of the selector path; not part of any cost.
    pub inference_time: f64,
    pub rows: Vec<MatrixBreakdown>,
}

/// A predictor given as one `(kernel, overhead)` pair per row, with an
/// optional path tag.
pub struct Predictions {
    pub name: String,
    pub choices: Vec<(usize, f64, Option<PathChoice>)>,
}

impl Predictions {
    pub fn plain(name: impl Into<String>, kernels: Vec<usize>) -> Self {
        Self {
            name: name.into(),
            choices: kernels.into_iter().map(|k| (k, 0.0, None)).collect(),
        }
    }
}

/// Scores arbitrary predictors against the oracle. The oracle and every fixed
/// kernel are appended after `predictors`.
pub fn score(
    rows: &[DatasetRow],
    kernels: &[String],
    iterations: u32,
    predictors: Vec<Predictions>,
) -> Result<EvalReport, EvalError> {
    if rows.is_empty() {
        return Err(EvalError::Empty);
    }
    let oracle: Vec<usize> = rows
        .iter()
        .map(|r| oracle_choice(r, iterations))
        .collect::<Result<_, _>>()?;
    let mut all = predictors;
    all.push(Predictions::plain(ORACLE, oracle.clone()));
    for (k, label) in kernels.iter().enumerate() {
        all.push(Predictions::plain(fixed_name(label), vec![k; rows.len()]));
    }
    for p in &all {
        if p.choices.len() != rows.len() {
            return Err(EvalError::ChoiceCount {
                name: p.name.clone(),
                expected: rows.len(),
                found: p.choices.len(),
            });
        }
    }

    let breakdown: Vec<MatrixBreakdown> = rows
        .iter()
        .enumerate()
        .map(|(i, row)| MatrixBreakdown {
            name: row.name.clone(),
            oracle_kernel: oracle[i],
            choices: all
                .iter()
                .map(|p| {
                    let (kernel, overhead, path) = p.choices[i];
                    let (cost, substituted) = cost_or_worst(&row.timings, kernel, iterations);
                    Choice {
                        kernel,
                        cost,
                        overhead,
                        realized: cost + overhead,
                        correct: kernel == oracle[i],
                        path,
                        substituted,
                    }
                })
                .collect(),
        })
        .collect();

    let oracle_col = all.len() - kernels.len() - 1;
    let n = rows.len() as f64;
    let summaries: Vec<PredictorSummary> = all
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let mut s = PredictorSummary {
                name: p.name.clone(),
                total_realized_cost: 0.0,
                total_overhead: 0.0,
                accuracy: 0.0,
                error_vs_oracle: 0.0,
                substituted_rows: 0,
            };
            let mut hits = 0usize;
            for b in &breakdown {
                let c = &b.choices[j];
                s.total_realized_cost += c.realized;
                s.total_overhead += c.overhead;
                s.error_vs_oracle += c.realized - b.choices[oracle_col].realized;
                hits += c.correct as usize;
                s.substituted_rows += c.substituted as usize;
            }
            s.accuracy = hits as f64 / n;
            s
        })
        .collect();

    let best_fixed = summaries[oracle_col + 1..]
        .iter()
        .min_by(|a, b| a.total_realized_cost.total_cmp(&b.total_realized_cost))
        .map(|s| s.name.clone());

    Ok(EvalReport {
        iterations,
        kernels: kernels.to_vec(),
        predictors: all.into_iter().map(|p| p.name).collect(),
        summaries,
        best_fixed,
        inference_time: 0.0,
        rows: breakdown,
    })
}

/// Evaluates the always-known, always-gathered and selector paths of `model`
/// on `rows` for `iterations`, plus the oracle and each fixed kernel.
pub fn evaluate(
    model: &SeerModel,
    rows: &[DatasetRow],
    iterations: u32,
    clock: &dyn Clock,
) -> Result<EvalReport, EvalError> {
    if rows.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut known = Vec::with_capacity(rows.len());
    let mut gathered = Vec::with_capacity(rows.len());
    let mut selector = Vec::with_capacity(rows.len());
    let mut inference_time = 0.0;
    for row in rows {
        let g = row.gathered.ok_or_else(|| EvalError::MissingGathered(row.name.clone()))?;
        known.push((model.predict_known(&row.known, iterations)?, 0.0, Some(PathChoice::Known)));
        gathered.push((
            model.predict_gathered(&row.known, &g, iterations)?,
            g.collection_time,
            Some(PathChoice::Gathered),
        ));
        let outcome = model.infer(
            Workload::Features {
                known: row.known,
                gathered: Some(g),
            },
            iterations,
            clock,
        )?;
        inference_time += outcome.inference_time;
        selector.push((outcome.kernel, outcome.charged_overhead, Some(outcome.path)));
    }
    let mut report = score(
        rows,
        &model.kernels,
        iterations,
        vec![
            Predictions {
                name: KNOWN.into(),
                choices: known,
            },
            Predictions {
                name: GATHERED.into(),
                choices: gathered,
            },
            Predictions {
                name: SELECTOR.into(),
                choices: selector,
            },
        ],
    )?;
    report.inference_time = inference_time;
    Ok(report)
}

impl EvalReport {
    pub fn summary(&self, name: &str) -> Option<&PredictorSummary> {
        self.summaries.iter().find(|s| s.name == name)
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.predictors.iter().position(|p| p == name)
    }

    pub fn fixed_summaries(&self) -> impl Iterator<Item = &PredictorSummary> {
        self.summaries.iter().filter(|s| s.name.starts_with("fixed:"))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    /// One line per predictor: name, total, overhead, accuracy, error.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("predictor,total_realized_cost,total_overhead,accuracy,error_vs_oracle,substituted_rows\n");
        for s in &self.summaries {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                csv_field(&s.name),
                format_seconds(s.total_realized_cost),
                format_seconds(s.total_overhead),
                format_seconds(s.accuracy),
                format_seconds(s.error_vs_oracle),
                s.substituted_rows
            );
        }
        out
    }
}

/// Geometric mean over fixed kernels of `total(kernel) / total(predictor)`.
pub fn geomean_speedup_of(report: &EvalReport, predictor: &str) -> Result<f64, EvalError> {
    let target = report
        .summary(predictor)
        .ok_or_else(|| EvalError::UnknownPredictor(predictor.to_string()))?;
    if target.total_realized_cost.is_nan() || target.total_realized_cost <= 0.0 {
        return Err(EvalError::NonPositive(predictor.to_string()));
    }
    let mut log_sum = 0.0;
    let mut n = 0usize;
    for s in report.fixed_summaries() {
        if !(s.total_realized_cost > 0.0 && s.total_realized_cost.is_finite()) {
            return Err(EvalError::NonPositive(s.name.clone()));
        }
        log_sum += (s.total_realized_cost / target.total_realized_cost).ln();
        n += 1;
    }
    if n == 0 {
        return Err(EvalError::UnknownPredictor("fixed:*".into()));
    }
    Ok((log_sum / n as f64).exp())
}

/// [`geomean_speedup_of`] for the selector.
pub fn geomean_speedup(report: &EvalReport) -> Result<f64, EvalError> {
    geomean_speedup_of(report, SELECTOR)
}

/// A generated plot file, path relative to the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotFile {
    pub path: String,
    pub contents: String,
}

/// Bars of one figure: label, runtime segment, overhead segment.
pub type Bars = Vec<(String, f64, f64)>;

/// Fixed kernels first (by kernel label), then known, gathered, selector and
/// oracle. Predictors absent from the report are skipped.
fn bars_for(report: &EvalReport, choices: &[Choice]) -> Bars {
    let mut bars = Vec::new();
    for label in &report.kernels {
        if let Some(j) = report.column(&fixed_name(label)) {
            bars.push((label.clone(), choices[j].cost, choices[j].overhead));
        }
    }
    for name in [KNOWN, GATHERED, SELECTOR, ORACLE] {
        if let Some(j) = report.column(name) {
            bars.push((name.to_string(), choices[j].cost, choices[j].overhead));
        }
    }
    bars
}

fn bars_csv(bars: &Bars) -> String {
    let mut out = String::from("bar,runtime,overhead\n");
    for (label, runtime, overhead) in bars {
        let _ = writeln!(out, "{},{},{}", csv_field(label), format_seconds(*runtime), format_seconds(*overhead));
    }
    out
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Stacked bar chart: dark runtime segment, light overhead segment on top.
pub fn render_svg(title: &str, bars: &Bars) -> String {
    const BAR: f64 = 36.0;
    const GAP: f64 = 14.0;
    const PLOT_H: f64 = 240.0;
    const TOP: f64 = 40.0;
    const LEFT: f64 = 70.0;
    let width = LEFT + bars.len() as f64 * (BAR + GAP) + GAP;
    let height = TOP + PLOT_H + 110.0;
    let peak = bars.iter().map(|b| b.1 + b.2).fold(0.0, f64::max);
    let scale = if peak > 0.0 { PLOT_H / peak } else { 0.0 };
    let base = TOP + PLOT_H;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<text x="{LEFT}" y="20" font-size="13">{}</text>"#, escape_xml(title));
    let _ = writeln!(
        out,
        r#"<line x1="{LEFT}" y1="{base}" x2="{:.1}" y2="{base}" stroke="black"/>"#,
        width - GAP / 2.0
    );
    let _ = writeln!(out, r#"<text x="4" y="{:.1}">{peak:.3e}</text>"#, TOP + 4.0);
    let _ = writeln!(out, r#"<text x="4" y="{base:.1}">0</text>"#);
    for (i, (label, runtime, overhead)) in bars.iter().enumerate() {
        let x = LEFT + GAP + i as f64 * (BAR + GAP);
        let h_run = runtime * scale;
        let h_ovh = overhead * scale;
        let _ = writeln!(
            out,
            r##"<rect x="{x:.1}" y="{:.2}" width="{BAR}" height="{h_run:.2}" fill="#2b5d8a"><title>runtime {}</title></rect>"##,
            base - h_run,
            format_seconds(*runtime)
        );
        let _ = writeln!(
            out,
            r##"<rect x="{x:.1}" y="{:.2}" width="{BAR}" height="{h_ovh:.2}" fill="#9cc3e4"><title>overhead {}</title></rect>"##,
            base - h_run - h_ovh,
            format_seconds(*overhead)
        );
        let lx = x + BAR / 2.0;
        let _ = writeln!(
            out,
            r#"<text x="{lx:.1}" y="{:.1}" transform="rotate(45 {lx:.1} {:.1})">{}</text>"#,
            base + 14.0,
            base + 14.0,
            escape_xml(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn sanitize_file_name(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect()
}

/// Per-matrix CSV and SVG files plus an aggregate pair whose bars are the
/// column sums of the per-matrix files.
///
/// Single-iteration reports go under `plots/single_iteration/<name>`, others
/// under `plots/multi_iteration/<name>_<k>iter`.
pub fn emit_plot_data(report: &EvalReport) -> Vec<PlotFile> {
    let (dir, suffix) = if report.iterations == 1 {
        ("plots/single_iteration", String::new())
    } else {
        ("plots/multi_iteration", format!("_{}iter", report.iterations))
    };
    let mut files = Vec::new();
    let mut totals: Option<Bars> = None;
    for row in &report.rows {
        let bars = bars_for(report, &row.choices);
        match totals.as_mut() {
            None => totals = Some(bars.clone()),
            Some(acc) => {
                for (a, b) in acc.iter_mut().zip(&bars) {
                    a.1 += b.1;
                    a.2 += b.2;
                }
            }
        }
        let stem = format!("{dir}/{}{suffix}", sanitize_file_name(&row.name));
        files.push(PlotFile {
            path: format!("{stem}.csv"),
            contents: bars_csv(&bars),
        });
        files.push(PlotFile {
            path: format!("{stem}.svg"),
            contents: render_svg(&format!("{} (k = {})", row.name, report.iterations), &bars),
        });
    }
    let totals = totals.unwrap_or_default();
    let stem = format!("{dir}/aggregate{suffix}");
    files.push(PlotFile {
        path: format!("{stem}.csv"),
        contents: bars_csv(&totals),
    });
    files.push(PlotFile {
        path: format!("{stem}.svg"),
        contents: render_svg(&format!("all matrices (k = {})", report.iterations), &totals),
    });
    files
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::FixedClock;
    use crate::dtree::{DecisionTree, TreeParams};
    use crate::features::GatheredFeatures;
    use crate::model::train_seer;
    use crate::sparse::KnownFeatures;
    use approx::assert_relative_eq;

    fn row(name: &str, pairs: &[(f64, f64)], collection: f64) -> DatasetRow {
        DatasetRow {
            name: name.into(),
            known: KnownFeatures {
                rows: 10,
                cols: 10,
                nnz: 20,
            },
            gathered: Some(GatheredFeatures {
                max_density: 0.3,
                min_density: 0.1,
                mean_density: 0.2,
                var_density: 0.01,
                collection_time: collection,
            }),
            timings: KernelTimings::complete(pairs),
        }
    }

    fn kernels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("K{i}")).collect()
    }

    #[test]
    fn oracle_replayed_is_perfect() {
        let rows = vec![
            row("a", &[(1.0, 0.0), (2.0, 0.0)], 0.1),
            row("b", &[(3.0, 0.0), (2.0, 0.0)], 0.1),
        ];
        let oracle: Vec<usize> = rows.iter().map(|r| oracle_choice(r, 1).unwrap()).collect();
        let rep = score(&rows, &kernels(2), 1, vec![Predictions::plain("replay", oracle)]).unwrap();
        let s = rep.summary("replay").unwrap();
        assert_eq!(s.accuracy, 1.0);
        assert_eq!(s.error_vs_oracle, 0.0);
        assert_eq!(geomean_speedup_of(&rep, "replay").unwrap(), geomean_speedup_of(&rep, ORACLE).unwrap());
        assert_eq!(rep.summary(ORACLE).unwrap().accuracy, 1.0);
    }

    #[test]
    fn worst_fixed_error_is_the_summed_gap() {
        let rows = vec![
            row("a", &[(1.0, 0.0), (2.5, 0.0)], 0.0),
            row("b", &[(4.0, 0.0), (2.0, 0.0)], 0.0),
            row("c", &[(1.0, 0.5), (1.25, 0.0)], 0.0),
        ];
        let rep = score(&rows, &kernels(2), 2, vec![]).unwrap();
        // k = 2: a: 2 vs 5, b: 8 vs 4, c: 2.5 vs 2.5 (tie -> K0)
        let k0 = rep.summary("fixed:K0").unwrap();
        let k1 = rep.summary("fixed:K1").unwrap();
        assert_eq!(k0.error_vs_oracle, 4.0);
        assert_eq!(k1.error_vs_oracle, 3.0);
        assert_eq!(rep.summary(ORACLE).unwrap().total_realized_cost, 8.5);
        assert_eq!(rep.best_fixed.as_deref(), Some("fixed:K1"));
    }

    #[test]
    fn accuracy_and_error_can_disagree() {
        // A misses often but by little, B is usually right and once very wrong
        let rows = vec![
            row("r0", &[(1.0, 0.0), (1.01, 0.0)], 0.0),
            row("r1", &[(1.0, 0.0), (1.01, 0.0)], 0.0),
            row("r2", &[(1.0, 0.0), (1.01, 0.0)], 0.0),
            row("r3", &[(1.0, 0.0), (100.0, 0.0)], 0.0),
        ];
        let rep = score(
            &rows,
            &kernels(2),
            1,
            vec![
                Predictions::plain("A", vec![1, 1, 1, 0]),
                Predictions::plain("B", vec![0, 0, 0, 1]),
            ],
        )
        .unwrap();
        let (a, b) = (rep.summary("A").unwrap(), rep.summary("B").unwrap());
        assert!(a.accuracy < b.accuracy);
        assert!(a.error_vs_oracle < b.error_vs_oracle);
    }

    #[test]
    fn totals_are_row_sums_and_oracle_dominates() {
        let rows = vec![
            row("a", &[(1.0, 0.0), (0.5, 1.0)], 0.2),
            row("b", &[(2.0, 0.0), (0.5, 0.5)], 0.2),
        ];
        let rep = score(&rows, &kernels(2), 3, vec![Predictions::plain("x", vec![1, 0])]).unwrap();
        let oc = rep.column(ORACLE).unwrap();
        for (j, s) in rep.summaries.iter().enumerate() {
            let sum: f64 = rep.rows.iter().map(|r| r.choices[j].realized).sum();
            assert_eq!(sum, s.total_realized_cost);
            for r in &rep.rows {
                assert!(r.choices[j].realized >= r.choices[oc].realized);
            }
        }
    }

    #[test]
    fn missing_kernel_substitutes_worst_present() {
        let mut r = row("a", &[(1.0, 0.0), (3.0, 0.0), (2.0, 0.0)], 0.0);
        r.timings.runtime[2] = None;
        let rep = score(&[r], &kernels(3), 1, vec![]).unwrap();
        let s = rep.summary("fixed:K2").unwrap();
        assert_eq!(s.total_realized_cost, 3.0);
        assert_eq!(s.substituted_rows, 1);
        let mut all_missing = row("z", &[(1.0, 0.0)], 0.0);
        all_missing.timings.runtime[0] = None;
        assert!(matches!(score(&[all_missing], &kernels(1), 1, vec![]), Err(EvalError::AllMissing(_))));
    }

    #[test]
    fn geomean_examples() {
        let rows = vec![row("a", &[(2.0, 0.0), (8.0, 0.0), (1.0, 0.0)], 0.0)];
        let rep = score(&rows, &kernels(3), 1, vec![Predictions::plain("sel", vec![2])]).unwrap();
        // baselines at 2x, 8x and 1x
        assert_relative_eq!(geomean_speedup_of(&rep, "sel").unwrap(), 16f64.cbrt(), max_relative = 1e-12);
        let single = vec![row("a", &[(2.0, 0.0)], 0.0)];
        let rep = score(&single, &kernels(1), 1, vec![Predictions::plain(SELECTOR, vec![0])]).unwrap();
        assert_eq!(geomean_speedup(&rep).unwrap(), 1.0);
        assert!(score(&[], &kernels(1), 1, vec![]).is_err());
    }

    #[test]
    fn evaluate_charges_collection_on_gathered_paths() {
        let rows = vec![
            row("a", &[(1.0, 0.0), (2.0, 0.0)], 0.25),
            row("b", &[(1.0, 0.0), (2.0, 0.0)], 0.25),
        ];
        let mut model = train_seer(&rows, &kernels(2), &[1], TreeParams::default()).unwrap();
        model.selector_tree = DecisionTree::constant(1, 2, &model.selector_tree.feature_names);
        let rep = evaluate(&model, &rows, 1, &FixedClock::new(0.5)).unwrap();
        assert_eq!(rep.summary(SELECTOR).unwrap().total_overhead, 0.5);
        assert_eq!(rep.summary(GATHERED).unwrap().total_overhead, 0.5);
        assert_eq!(rep.summary(KNOWN).unwrap().total_overhead, 0.0);
        assert_eq!(rep.summary(SELECTOR).unwrap().total_realized_cost, 2.5);
        assert_eq!(rep.inference_time, 2.0);
    }

    #[test]
    fn plot_files_follow_layout_and_sum() {
        let rows = vec![
            row("m/1", &[(1.0, 0.0), (0.5, 1.0)], 0.2),
            row("m2", &[(2.0, 0.0), (0.5, 0.5)], 0.2),
        ];
        let model = train_seer(&rows, &kernels(2), &[1, 4], TreeParams::default()).unwrap();
        let rep = evaluate(&model, &rows, 4, &FixedClock::default()).unwrap();
        let files = emit_plot_data(&rep);
        let paths: Vec<&str> = files.iter().map(|f| f.path.as_str()).collect();
        assert!(paths.contains(&"plots/multi_iteration/m_1_4iter.svg"));
        assert!(paths.contains(&"plots/multi_iteration/aggregate_4iter.csv"));
        let csv_of = |p: &str| files.iter().find(|f| f.path == p).unwrap().contents.clone();
        let parse = |s: String| -> Vec<(f64, f64)> {
            s.lines()
                .skip(1)
                .map(|l| {
                    let f: Vec<&str> = l.rsplitn(3, ',').collect();
                    (f[1].parse().unwrap(), f[0].parse().unwrap())
                })
                .collect()
        };
        let a = parse(csv_of("plots/multi_iteration/m_1_4iter.csv"));
        let b = parse(csv_of("plots/multi_iteration/m2_4iter.csv"));
        let total = parse(csv_of("plots/multi_iteration/aggregate_4iter.csv"));
        assert_eq!(a.len(), 2 + 4);
        for i in 0..a.len() {
            assert_eq!(total[i].0, a[i].0 + b[i].0);
            assert_eq!(total[i].1, a[i].1 + b[i].1);
        }
        let single = score(&rows, &kernels(2), 1, vec![]).unwrap();
        assert!(emit_plot_data(&single).iter().any(|f| f.path == "plots/single_iteration/m2.svg"));
    }

    #[test]
    fn known_path_has_flat_overhead_segment() {
        let bars = vec![("known".to_string(), 1.0, 0.0), ("gathered".to_string(), 0.5, 0.5)];
        let svg = render_svg("t", &bars);
        assert!(svg.contains(r##"height="0.00" fill="#9cc3e4""##));
        assert_eq!(svg.matches("<rect").count(), 4);
        assert_eq!(svg, render_svg("t", &bars));
    }
}
