//! CART classification trees with Gini impurity.
//!
//! Training is deterministic: candidate thresholds are midpoints between
//! consecutive distinct feature values, a sample goes left iff its value is
//! `<=` the threshold, and ties between equally good splits resolve to the
//! lower feature index and then the lower threshold. Split quality is compared
//! in exact integer arithmetic on class counts so those ties are real ties.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error("empty label set")]
    Empty,
    #[error("expected {expected} features, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("label {label} is outside the {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("feature matrix has {rows} rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("feature value is not finite")]
    NonFinite,
    #[error("min_samples_leaf must be at least 1")]
    MinSamplesLeaf,
    #[error("unsupported tree format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("malformed tree: {0}")]
    Malformed(String),
}

/// Gini impurity `1 - sum_c p_c^2` of a label multiset.
pub fn gini(labels: &[usize]) -> Result<f64, TreeError> {
    if labels.is_empty() {
        return Err(TreeError::Empty);
    }
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut counts = vec![0u64; n_classes];
    for &l in labels {
        counts[l] += 1;
    }
    Ok(gini_from_counts(&counts))
}

fn gini_from_counts(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

fn sum_sq(counts: &[u64]) -> u128 {
    counts.iter().map(|&c| c as u128 * c as u128).sum()
}

/// Chosen split of a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    /// `n_L/n * gini(L) + n_R/n * gini(R)`.
    pub impurity: f64,
}

/// Sample-weighted child impurity is `1 - score / n` with
/// `score = (S_L n_R + S_R n_L) / (n_L n_R)` and `S` the sum of squared class
/// counts; a larger score is a purer split. Kept as an exact fraction.
#[derive(Debug, Clone, Copy)]
struct Score {
    num: u128,
    den: u128,
}

impl Score {
    fn cmp(&self, other: &Score) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

/// Lowest-impurity split over `x`/`y`, or `None` when no candidate lowers
/// the node's impurity.
pub fn best_split(x: &[Vec<f64>], y: &[usize]) -> Option<Split> {
    if x.len() != y.len() || x.is_empty() {
        return None;
    }
    let n_features = x[0].len();
    let n_classes = y.iter().max().map_or(0, |m| m + 1);
    let idx: Vec<usize> = (0..y.len()).collect();
    find_split(x, y, &idx, n_features, n_classes, 1)
}

fn find_split(
    x: &[Vec<f64>],
    y: &[usize],
    idx: &[usize],
    n_features: usize,
    n_classes: usize,
    min_leaf: usize,
) -> Option<Split> {
    let n = idx.len();
    if n < 2 * min_leaf || n < 2 {
        return None;
    }
    let mut total = vec![0u64; n_classes];
    for &i in idx {
        total[y[i]] += 1;
    }
    let parent = Score {
        num: sum_sq(&total),
        den: n as u128,
    };

    let mut best: Option<(Score, usize, f64)> = None;
    let mut order = idx.to_vec();
    let mut left = vec![0u64; n_classes];
    #[allow(clippy::needless_range_loop)]
    for f in 0..n_features {
        order.sort_by(|&a, &b| x[a][f].partial_cmp(&x[b][f]).expect("finite features"));
        left.iter_mut().for_each(|c| *c = 0);
        for pos in 0..n - 1 {
            left[y[order[pos]]] += 1;
            let (lo, hi) = (x[order[pos]][f], x[order[pos + 1]][f]);
            let n_left = pos + 1;
            let n_right = n - n_left;
            if lo == hi || n_left < min_leaf || n_right < min_leaf {
                continue;
            }
            let s_left = sum_sq(&left);
            let s_right: u128 = total
                .iter()
                .zip(&left)
                .map(|(&t, &l)| (t - l) as u128 * (t - l) as u128)
                .sum();
            let score = Score {
                num: s_left * n_right as u128 + s_right * n_left as u128,
                den: n_left as u128 * n_right as u128,
            };
            if best.as_ref().is_none_or(|(b, _, _)| score.cmp(b) == Ordering::Greater) {
                best = Some((score, f, midpoint(lo, hi)));
            }
        }
    }
    let (score, feature, threshold) = best?;
    // the split must strictly lower impurity: score / 1 > parent.num / n
    if score.cmp(&parent) != Ordering::Greater {
        return None;
    }
    let impurity = 1.0 - (score.num as f64 / score.den as f64) / n as f64;
    Some(Split {
        feature,
        threshold,
        impurity: impurity.max(0.0),
    })
}

/// Midpoint of `lo < hi` that still satisfies `lo <= t < hi`.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid >= hi || !mid.is_finite() {
        lo
    } else {
        mid
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: 5,
            min_samples_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        class: usize,
    },
}

/// Binary classification tree stored as a flat node table; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
    pub n_features: usize,
    pub n_classes: usize,
    pub max_depth: usize,
    pub feature_names: Vec<String>,
}

/// Trains a tree with recursive CART.
///
/// A node becomes a leaf when it is pure, sits at `max_depth`, holds fewer
/// than `2 * min_samples_leaf` samples, or has no impurity-reducing split.
/// Leaves predict the majority class, ties going to the lowest class index.
pub fn train_tree(
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    feature_names: &[String],
    params: TreeParams,
) -> Result<DecisionTree, TreeError> {
    if y.is_empty() {
        return Err(TreeError::Empty);
    }
    if x.len() != y.len() {
        return Err(TreeError::LengthMismatch {
            rows: x.len(),
            labels: y.len(),
        });
    }
    if params.min_samples_leaf == 0 {
        return Err(TreeError::MinSamplesLeaf);
    }
    let n_features = feature_names.len();
    for row in x {
        if row.len() != n_features {
            return Err(TreeError::Dimension {
                expected: n_features,
                got: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(TreeError::NonFinite);
        }
    }
    if let Some(&label) = y.iter().find(|&&l| l >= n_classes) {
        return Err(TreeError::LabelOutOfRange { label, n_classes });
    }

    let mut builder = Builder {
        x,
        y,
        n_features,
        n_classes,
        params,
        nodes: Vec::new(),
    };
    let idx: Vec<usize> = (0..y.len()).collect();
    builder.grow(idx, 0);
    Ok(DecisionTree {
        nodes: builder.nodes,
        n_features,
        n_classes,
        max_depth: params.max_depth,
        feature_names: feature_names.to_vec(),
    })
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    n_features: usize,
    n_classes: usize,
    params: TreeParams,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let mut counts = vec![0u64; self.n_classes];
        for &i in &idx {
            counts[self.y[i]] += 1;
        }
        let majority = majority(&counts);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { class: majority });

        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.params.max_depth {
            return id;
        }
        let Some(split) = find_split(
            self.x,
            self.y,
            &idx,
            self.n_features,
            self.n_classes,
            self.params.min_samples_leaf,
        ) else {
            return id;
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.x[i][split.feature] <= split.threshold);
        let left = self.grow(left_idx, depth + 1);
        let right = self.grow(right_idx, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }
}

fn majority(counts: &[u64]) -> usize {
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}

const TREE_FORMAT: &str = "seer-tree";
const TREE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct TreeFile {
    format: String,
    version: u32,
    #[serde(flatten)]
    tree: DecisionTree,
}

/// Target language of [`DecisionTree::emit_source`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dialect {
    /// C, also valid C++; suitable for a header file.
    #[default]
    C,
    Rust,
}

impl DecisionTree {
    /// A tree that always predicts `class`.
    pub fn constant(class: usize, n_classes: usize, feature_names: &[String]) -> Self {
        Self {
            nodes: vec![Node::Leaf { class }],
            n_features: feature_names.len(),
            n_classes,
            max_depth: 0,
            feature_names: feature_names.to_vec(),
        }
    }

    /// Root-to-leaf descent; values `<=` a threshold go left.
    pub fn predict(&self, x: &[f64]) -> Result<usize, TreeError> {
        if x.len() != self.n_features {
            return Err(TreeError::Dimension {
                expected: self.n_features,
                got: x.len(),
            });
        }
        let mut node = 0;
        loop {
            match self.nodes[node] {
                Node::Leaf { class } => return Ok(class),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    /// Length of the longest root-to-leaf path in edges.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    /// Checks that the node table is a tree rooted at 0 with every node
    /// reachable exactly once, leaves in range and depth within `max_depth`.
    pub fn validate(&self) -> Result<(), TreeError> {
        let bad = |m: String| Err(TreeError::Malformed(m));
        if self.nodes.is_empty() {
            return bad("no nodes".into());
        }
        if self.feature_names.len() != self.n_features {
            return bad("feature name count differs from n_features".into());
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![(0usize, 0usize)];
        while let Some((id, depth)) = stack.pop() {
            if id >= self.nodes.len() {
                return bad(format!("child index {id} out of range"));
            }
            if std::mem::replace(&mut seen[id], true) {
                return bad(format!("node {id} reachable more than once"));
            }
            if depth > self.max_depth {
                return bad(format!("depth {depth} exceeds max_depth {}", self.max_depth));
            }
            match self.nodes[id] {
                Node::Leaf { class } if class >= self.n_classes => {
                    return bad(format!("leaf class {class} >= {}", self.n_classes))
                }
                Node::Leaf { .. } => {}
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if feature >= self.n_features {
                        return bad(format!("split feature {feature} >= {}", self.n_features));
                    }
                    if !threshold.is_finite() {
                        return bad(format!("node {id} has a non-finite threshold"));
                    }
                    stack.push((right, depth + 1));
                    stack.push((left, depth + 1));
                }
            }
        }
        if let Some(orphan) = seen.iter().position(|s| !s) {
            return bad(format!("node {orphan} is unreachable"));
        }
        Ok(())
    }

    /// Versioned JSON form; thresholds round-trip exactly.
    pub fn to_text(&self) -> String {
        let file = TreeFile {
            format: TREE_FORMAT.into(),
            version: TREE_VERSION,
            tree: self.clone(),
        };
        serde_json::to_string_pretty(&file).expect("tree serialization cannot fail")
    }

    pub fn from_text(text: &str) -> Result<Self, TreeError> {
        let file: TreeFile =
            serde_json::from_str(text).map_err(|e| TreeError::Malformed(e.to_string()))?;
        Self::from_parts(file.format, file.version, file.tree)
    }

    pub(crate) fn from_parts(format: String, version: u32, tree: DecisionTree) -> Result<Self, TreeError> {
        if format != TREE_FORMAT {
            return Err(TreeError::Malformed(format!("unexpected format tag {format:?}")));
        }
        if version != TREE_VERSION {
            return Err(TreeError::Version {
                found: version,
                expected: TREE_VERSION,
            });
        }
        tree.validate()?;
        Ok(tree)
    }

    /// Identifier-safe parameter names derived from the feature names.
    pub fn parameter_names(&self) -> Vec<String> {
        self.feature_names
            .iter()
            .enumerate()
            .map(|(i, name)| sanitize_identifier(name, i))
            .collect()
    }

    /// Emits a standalone function of nested conditionals equivalent to
    /// [`DecisionTree::predict`], taking one scalar parameter per feature.
    pub fn emit_source(&self, function_name: &str, dialect: Dialect) -> String {
        let params = self.parameter_names();
        let mut out = String::new();
        match dialect {
            Dialect::C => {
                let args: Vec<String> = params.iter().map(|p| format!("double {p}")).collect();
                let _ = writeln!(out, "static inline int {function_name}({}) {{", args.join(", "));
            }
            Dialect::Rust => {
                let args: Vec<String> = params.iter().map(|p| format!("{p}: f64")).collect();
                let _ = writeln!(out, "#[allow(unused_variables, clippy::excessive_precision)]");
                let _ = writeln!(out, "pub fn {function_name}({}) -> usize {{", args.join(", "));
            }
        }
        self.emit_node(&mut out, 0, 1, &params, dialect);
        out.push_str("}\n");
        out
    }

    fn emit_node(&self, out: &mut String, id: usize, indent: usize, params: &[String], dialect: Dialect) {
        let pad = "    ".repeat(indent);
        match self.nodes[id] {
            Node::Leaf { class } => match dialect {
                Dialect::C => {
                    let _ = writeln!(out, "{pad}return {class};");
                }
                Dialect::Rust => {
                    let _ = writeln!(out, "{pad}{class}");
                }
            },
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let lit = float_literal(threshold);
                match dialect {
                    Dialect::C => {
                        let _ = writeln!(out, "{pad}if ({} <= {lit}) {{", params[feature]);
                    }
                    Dialect::Rust => {
                        let _ = writeln!(out, "{pad}if {} <= {lit} {{", params[feature]);
                    }
                }
                self.emit_node(out, left, indent + 1, params, dialect);
                let _ = writeln!(out, "{pad}}} else {{");
                self.emit_node(out, right, indent + 1, params, dialect);
                let _ = writeln!(out, "{pad}}}");
            }
        }
    }
}

/// Shortest round-tripping decimal with a fractional part or exponent, so it
/// reads as a floating literal in both C and Rust.
pub fn float_literal(v: f64) -> String {
    let s = format!("{v:?}");
    if s.contains(['.', 'e', 'E']) {
        s
    } else {
        format!("{s}.0")
    }
}

fn sanitize_identifier(name: &str, index: usize) -> String {
    let mut s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect();
    if s.is_empty() || s.starts_with(|c: char| c.is_ascii_digit()) {
        s = format!("f{index}_{s}");
    }
    s
}
