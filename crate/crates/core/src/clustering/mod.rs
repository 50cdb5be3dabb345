//! Exemplar-based and comparison clusterings, with partition scores.

mod apc;
mod hierarchical;
mod kmedoids;
mod validation;

use serde::{Deserialize, Serialize};

pub use apc::{
    affinity_propagation, affinity_propagation_k, select_damping, ApcParams, DampingSelection,
    Preference,
};
pub use hierarchical::hierarchical;
pub use kmedoids::{k_medoids, k_medoids_with, KMedoidsParams, KMedoidsResult};
pub use validation::{
    adjusted_rand_index, clustering_accuracy, jaccard_similarity, silhouette_score,
};

/// A partition with one representative entity per cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    /// Cluster id per entity, in `0..exemplars.len()`.
    pub labels: Vec<usize>,
    /// Representative entity of each cluster.
    pub exemplars: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
}

impl Clustering {
    /// Builds a clustering from representatives, assigning each entity to
    /// the representative scoring highest under `score` (ties to the lower
    /// cluster id). Representatives always label themselves.
    pub(crate) fn from_exemplars(
        n: usize,
        exemplars: Vec<usize>,
        iterations: usize,
        converged: bool,
        score: impl Fn(usize, usize) -> f64,
    ) -> Self {
        let labels = (0..n)
            .map(|i| {
                if let Some(c) = exemplars.iter().position(|&e| e == i) {
                    return c;
                }
                let mut best = 0;
                for c in 1..exemplars.len() {
                    if score(i, exemplars[c]) > score(i, exemplars[best]) {
                        best = c;
                    }
                }
                best
            })
            .collect();
        Self {
            labels,
            exemplars,
            iterations,
            converged,
        }
    }

    pub fn n_clusters(&self) -> usize {
        self.exemplars.len()
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&i| self.labels[i] == cluster)
            .collect()
    }

    pub fn cluster_of(&self, entity: usize) -> usize {
        self.labels[entity]
    }

    /// CSV rows `entity_id,cluster_id,is_exemplar`.
    pub fn to_csv(&self, ids: &[String]) -> String {
        let mut out = String::from("entity_id,cluster_id,is_exemplar\n");
        for (i, &c) in self.labels.iter().enumerate() {
            let ex = self.exemplars[c] == i;
            out.push_str(&format!("{},{},{}\n", ids[i], c, u8::from(ex)));
        }
        out
    }
}
