use std::collections::{BTreeMap, BTreeSet};

use crate::assignment;
use crate::error::{Error, Result};
use crate::matrix::LabeledMatrix;

/// Relabels arbitrary cluster ids as `0..k` in order of first appearance.
fn compact(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = BTreeMap::new();
    let out = labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect();
    (out, map.len())
}

/// Mean silhouette `(b - a) / max(a, b)`; members of singleton clusters
/// score 0.
pub fn silhouette_score(d: &LabeledMatrix, labels: &[usize]) -> Result<f64> {
    let n = d.len();
    if labels.len() != n {
        return Err(Error::invalid("label count differs from matrix size"));
    }
    let (labels, k) = compact(labels);
    if k < 2 {
        return Err(Error::invalid("silhouette needs at least two clusters"));
    }
    let mut sizes = vec![0usize; k];
    for &l in &labels {
        sizes[l] += 1;
    }
    let mut total = 0.0;
    let mut sums = vec![0.0; k];
    for i in 0..n {
        let own = labels[i];
        if sizes[own] == 1 {
            continue;
        }
        sums.iter_mut().for_each(|s| *s = 0.0);
        for j in 0..n {
            if j != i {
                sums[labels[j]] += d.get(i, j);
            }
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / n as f64)
}

fn choose2(x: usize) -> f64 {
    (x * x.saturating_sub(1)) as f64 / 2.0
}

/// Adjusted Rand index from the contingency table. When the expected and
/// maximum indices coincide (both partitions trivial), returns 1 for
/// identical partitions and 0 otherwise.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid("partitions cover different entity counts"));
    }
    let n = a.len();
    let (a, ka) = compact(a);
    let (b, kb) = compact(b);
    let mut table = vec![0usize; ka * kb];
    let mut rows = vec![0usize; ka];
    let mut cols = vec![0usize; kb];
    for (&x, &y) in a.iter().zip(&b) {
        table[x * kb + y] += 1;
        rows[x] += 1;
        cols[y] += 1;
    }
    let index: f64 = table.iter().map(|&c| choose2(c)).sum();
    let sa: f64 = rows.iter().map(|&c| choose2(c)).sum();
    let sb: f64 = cols.iter().map(|&c| choose2(c)).sum();
    let total = choose2(n);
    let expected = if total > 0.0 { sa * sb / total } else { 0.0 };
    let max = 0.5 * (sa + sb);
    if max == expected {
        return Ok(if a == b { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / (max - expected))
}

/// `|A ∩ B| / |A ∪ B|`, defined as 1 for two empty sets.
pub fn jaccard_similarity(a: &[usize], b: &[usize]) -> f64 {
    let sa: BTreeSet<usize> = a.iter().copied().collect();
    let sb: BTreeSet<usize> = b.iter().copied().collect();
    let union = sa.union(&sb).count();
    if union == 0 {
        return 1.0;
    }
    sa.intersection(&sb).count() as f64 / union as f64
}

/// Best fraction of entities labelled correctly over one-to-one matchings
/// of clusters to classes.
pub fn clustering_accuracy(labels: &[usize], truth: &[usize]) -> Result<f64> {
    if labels.len() != truth.len() {
        return Err(Error::invalid("label and truth lengths differ"));
    }
    if labels.is_empty() {
        return Err(Error::invalid("no entities"));
    }
    let (l, kl) = compact(labels);
    let (t, kt) = compact(truth);
    let mut counts = vec![0.0; kl * kt];
    for (&x, &y) in l.iter().zip(&t) {
        counts[x * kt + y] += 1.0;
    }
    let matched = if kl <= kt {
        assignment::solve_max(&counts, kl, kt).1
    } else {
        let transposed: Vec<f64> = (0..kt * kl)
            .map(|k| counts[(k % kl) * kt + k / kl])
            .collect();
        assignment::solve_max(&transposed, kt, kl).1
    };
    Ok(matched / labels.len() as f64)
}
