//! Reference implementations written straight from the definitions.

/// `1 - sum_c p_c^2`.
pub fn gini(labels: &[usize], n_classes: usize) -> f64 {
    let n = labels.len() as f64;
    let mut counts = vec![0usize; n_classes];
    for &l in labels {
        counts[l] += 1;
    }
    1.0 - counts.iter().map(|&c| (c as f64 / n) * (c as f64 / n)).sum::<f64>()
}

/// Kendall tau-b by classifying every pair through sign products.
pub fn tau_b(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    let sign = |v: f64| (v > 0.0) as i8 - (v < 0.0) as i8;
    let (mut c, mut d, mut tx, mut ty) = (0u64, 0u64, 0u64, 0u64);
    for i in 0..n {
        for j in 0..i {
            let sx = sign(x[i] - x[j]);
            let sy = sign(y[i] - y[j]);
            tx += (sx == 0) as u64;
            ty += (sy == 0) as u64;
            match sx * sy {
                1 => c += 1,
                -1 => d += 1,
                _ => {}
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as u64;
    let denom = ((n0 - tx) as f64 * (n0 - ty) as f64).sqrt();
    (denom != 0.0).then(|| (c as f64 - d as f64) / denom)
}

fn majority_hits(y: &[usize], idx: &[usize], n_classes: usize) -> usize {
    let mut counts = vec![0usize; n_classes];
    for &i in idx {
        counts[y[i]] += 1;
    }
    counts.into_iter().max().unwrap_or(0)
}

/// Every two-way partition of `idx` a single axis-aligned threshold can make.
fn partitions(x: &[Vec<f64>], idx: &[usize]) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    let n_features = x.first().map_or(0, Vec::len);
    #[allow(clippy::needless_range_loop)]
    for f in 0..n_features {
        let mut values: Vec<f64> = idx.iter().map(|&i| x[i][f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for &t in &values[..values.len().saturating_sub(1)] {
            let (l, r) = idx.iter().partition(|&&i| x[i][f] <= t);
            out.push((l, r));
        }
    }
    out
}

fn best(x: &[Vec<f64>], y: &[usize], idx: &[usize], n_classes: usize, depth: usize) -> usize {
    let mut b = majority_hits(y, idx, n_classes);
    if depth > 0 {
        for (l, r) in partitions(x, idx) {
            b = b.max(best(x, y, &l, n_classes, depth - 1) + best(x, y, &r, n_classes, depth - 1));
        }
    }
    b
}

/// Largest number of training samples any threshold tree of depth at most
/// `depth` classifies correctly, by exhaustive enumeration.
pub fn best_tree_hits(x: &[Vec<f64>], y: &[usize], n_classes: usize, depth: usize) -> usize {
    let idx: Vec<usize> = (0..y.len()).collect();
    best(x, y, &idx, n_classes, depth)
}

