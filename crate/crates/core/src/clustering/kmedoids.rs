use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Clustering;
use crate::error::{Error, Result};
use crate::matrix::LabeledMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KMedoidsParams {
    /// Extra runs from seeded random medoid sets, on top of the greedy start.
    pub restarts: usize,
    pub seed: u64,
    /// Cap on swap iterations per run; 0 means unlimited.
    pub max_swaps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMedoidsResult {
    pub clustering: Clustering,
    /// Sum of distances from every entity to its medoid.
    pub cost: f64,
    /// Objective after the initialisation and after every accepted swap of
    /// the returned run.
    pub trace: Vec<f64>,
}

fn total_cost(d: &LabeledMatrix, medoids: &[usize]) -> f64 {
    (0..d.len())
        .map(|i| {
            medoids
                .iter()
                .map(|&m| d.get(i, m))
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

/// Farthest-first from the global medoid; ties go to the lower index.
fn greedy_init(d: &LabeledMatrix, k: usize) -> Vec<usize> {
    let n = d.len();
    let row_sum = |i: usize| d.row(i).iter().sum::<f64>();
    let first = (0..n)
        .min_by(|&a, &b| row_sum(a).total_cmp(&row_sum(b)).then(a.cmp(&b)))
        .expect("non-empty");
    let mut medoids = vec![first];
    let mut nearest: Vec<f64> = (0..n).map(|i| d.get(i, first)).collect();
    while medoids.len() < k {
        let next = (0..n)
            .filter(|i| !medoids.contains(i))
            .max_by(|&a, &b| nearest[a].total_cmp(&nearest[b]).then(b.cmp(&a)))
            .expect("k <= n");
        medoids.push(next);
        for i in 0..n {
            nearest[i] = nearest[i].min(d.get(i, next));
        }
    }
    medoids
}

/// Best-improvement swaps until no swap lowers the cost.
fn pam_swap(
    d: &LabeledMatrix,
    mut medoids: Vec<usize>,
    max_swaps: usize,
) -> (Vec<usize>, f64, Vec<f64>) {
    let n = d.len();
    let mut cost = total_cost(d, &medoids);
    let mut trace = vec![cost];
    loop {
        if max_swaps > 0 && trace.len() > max_swaps {
            break;
        }
        let mut best: Option<(f64, usize, usize)> = None;
        for slot in 0..medoids.len() {
            for h in 0..n {
                if medoids.contains(&h) {
                    continue;
                }
                let mut trial = medoids.clone();
                trial[slot] = h;
                let c = total_cost(d, &trial);
                if c < cost - 1e-12 * cost.abs().max(1.0) && best.is_none_or(|b| c < b.0) {
                    best = Some((c, slot, h));
                }
            }
        }
        match best {
            Some((c, slot, h)) => {
                medoids[slot] = h;
                cost = c;
                trace.push(cost);
            }
            None => break,
        }
    }
    (medoids, cost, trace)
}

fn finish(d: &LabeledMatrix, medoids: Vec<usize>, cost: f64, trace: Vec<f64>) -> KMedoidsResult {
    let iterations = trace.len() - 1;
    let clustering =
        Clustering::from_exemplars(d.len(), medoids, iterations, true, |i, m| -d.get(i, m));
    KMedoidsResult {
        clustering,
        cost,
        trace,
    }
}

fn check(d: &LabeledMatrix, k: usize) -> Result<()> {
    let n = d.len();
    if k == 0 || k > n {
        return Err(Error::config(format!("cluster count {k} outside 1..={n}")));
    }
    Ok(())
}

/// PAM k-medoids from the deterministic greedy start. `seed` only affects
/// [`k_medoids_with`] restarts; here it is recorded for reproducibility.
pub fn k_medoids(d: &LabeledMatrix, k: usize, seed: u64) -> Result<KMedoidsResult> {
    k_medoids_with(
        d,
        k,
        &KMedoidsParams {
            restarts: 0,
            seed,
            max_swaps: 0,
        },
    )
}

/// PAM from the greedy start plus `restarts` seeded random starts; the
/// lowest-cost run wins (earlier run on ties).
pub fn k_medoids_with(
    d: &LabeledMatrix,
    k: usize,
    params: &KMedoidsParams,
) -> Result<KMedoidsResult> {
    check(d, k)?;
    let (m, c, t) = pam_swap(d, greedy_init(d, k), params.max_swaps);
    let mut best = (m, c, t);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    for _ in 0..params.restarts {
        let start: Vec<usize> = sample(&mut rng, d.len(), k).into_vec();
        let run = pam_swap(d, start, params.max_swaps);
        if run.1 < best.1 {
            best = run;
        }
    }
    Ok(finish(d, best.0, best.1, best.2))
}
