//! Clustering accuracy of each series distance on labelled series (the
//! six-class control-chart data by default).

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::clustering::{affinity_propagation_k, clustering_accuracy, k_medoids, ApcParams};
use crate::distances::{distance_matrix, DistanceKind, DistanceSpec, Homology};
use crate::error::{Error, Result};
use crate::matrix::LabeledMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseDistance {
    Wd,
    Ld,
    Awd,
    Ald,
    Dwd,
    Dld,
    /// Spearman correlation distance.
    D1,
    /// Pearson correlation distance.
    D2,
    Ed,
}

impl CaseDistance {
    pub const ALL: [CaseDistance; 9] = [
        CaseDistance::Wd,
        CaseDistance::Ld,
        CaseDistance::Awd,
        CaseDistance::Ald,
        CaseDistance::Dwd,
        CaseDistance::Dld,
        CaseDistance::D1,
        CaseDistance::D2,
        CaseDistance::Ed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseDistance::Wd => "WD",
            CaseDistance::Ld => "LD",
            CaseDistance::Awd => "AWD",
            CaseDistance::Ald => "ALD",
            CaseDistance::Dwd => "DWD",
            CaseDistance::Dld => "DLD",
            CaseDistance::D1 => "d1",
            CaseDistance::D2 => "d2",
            CaseDistance::Ed => "ED",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config(format!("unknown case-study distance '{s}'")))
    }

    fn kind(self) -> DistanceKind {
        match self {
            CaseDistance::Wd => DistanceKind::Wd,
            CaseDistance::Ld => DistanceKind::Ld,
            CaseDistance::Awd => DistanceKind::Awd,
            CaseDistance::Ald => DistanceKind::Ald,
            CaseDistance::Dwd => DistanceKind::Dwd,
            CaseDistance::Dld => DistanceKind::Dld,
            CaseDistance::D1 => DistanceKind::Spearman,
            CaseDistance::D2 => DistanceKind::Pearson,
            CaseDistance::Ed => DistanceKind::Euclidean,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseMethod {
    KMedoids,
    /// Affinity propagation on `exp(-d²/σ²)` with the preference tuned to
    /// give `k` clusters.
    Apc,
}

impl CaseMethod {
    pub fn name(self) -> &'static str {
        match self {
            CaseMethod::KMedoids => "kmedoids",
            CaseMethod::Apc => "apc",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        [CaseMethod::KMedoids, CaseMethod::Apc]
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config(format!("unknown case-study method '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStudyConfig {
    pub k: usize,
    pub embed_dim: usize,
    pub delay: usize,
    pub p: f64,
    pub sigma2: f64,
    pub seed: u64,
    pub distances: Vec<CaseDistance>,
    pub methods: Vec<CaseMethod>,
}

impl Default for CaseStudyConfig {
    fn default() -> Self {
        Self {
            k: 6,
            embed_dim: 2,
            delay: 1,
            p: 1.0,
            sigma2: 0.01,
            seed: 0,
            distances: CaseDistance::ALL.to_vec(),
            methods: vec![CaseMethod::KMedoids, CaseMethod::Apc],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStudyCell {
    pub distance: CaseDistance,
    pub method: CaseMethod,
    pub accuracy: f64,
    pub clusters: usize,
}

/// Pairwise distances between the series under one case-study distance
/// (dimension-1 features for the topological ones).
pub fn case_distance_matrix(
    series: &[Vec<f64>],
    dist: CaseDistance,
    cfg: &CaseStudyConfig,
) -> Result<LabeledMatrix> {
    let spec = DistanceSpec {
        kind: dist.kind(),
        p: cfg.p,
        embed_dim: cfg.embed_dim,
        delay: cfg.delay,
        homology: Homology::H1,
        ..DistanceSpec::default()
    };
    let ids = (0..series.len()).map(|i| i.to_string()).collect();
    let refs: Vec<&[f64]> = series.iter().map(|s| s.as_slice()).collect();
    distance_matrix(ids, &refs, &spec)
}

fn gaussian(d: &LabeledMatrix, sigma2: f64) -> LabeledMatrix {
    LabeledMatrix::from_fn(d.ids().to_vec(), |i, j| {
        if i == j {
            1.0
        } else {
            (-d.get(i, j).powi(2) / sigma2).exp()
        }
    })
}

/// Accuracy of every configured (distance, method) pair, in configuration
/// order. `progress` receives each finished cell and its elapsed seconds.
pub fn run_casestudy(
    series: &[Vec<f64>],
    truth: &[usize],
    cfg: &CaseStudyConfig,
    mut progress: impl FnMut(&CaseStudyCell, f64),
) -> Result<Vec<CaseStudyCell>> {
    if series.len() != truth.len() || series.is_empty() {
        return Err(Error::invalid(
            "series and labels differ in count or are empty",
        ));
    }
    if cfg.k == 0 || cfg.k > series.len() {
        return Err(Error::config(format!(
            "k={} outside 1..={}",
            cfg.k,
            series.len()
        )));
    }
    if !(cfg.sigma2.is_finite() && cfg.sigma2 > 0.0) {
        return Err(Error::config("sigma2 must be positive"));
    }
    let mut cells = Vec::new();
    for &dist in &cfg.distances {
        let start = Instant::now();
        let d = case_distance_matrix(series, dist, cfg)?;
        for &method in &cfg.methods {
            let clustering = match method {
                CaseMethod::KMedoids => k_medoids(&d, cfg.k, cfg.seed)?.clustering,
                CaseMethod::Apc => {
                    affinity_propagation_k(&gaussian(&d, cfg.sigma2), cfg.k, &ApcParams::default())?
                }
            };
            let cell = CaseStudyCell {
                distance: dist,
                method,
                accuracy: clustering_accuracy(&clustering.labels, truth)?,
                clusters: clustering.n_clusters(),
            };
            progress(&cell, start.elapsed().as_secs_f64());
            cells.push(cell);
        }
    }
    Ok(cells)
}

/// CSV rows `distance,method,accuracy,clusters`.
pub fn cells_csv(cells: &[CaseStudyCell]) -> String {
    let mut out = String::from("distance,method,accuracy,clusters\n");
    for c in cells {
        out.push_str(&format!(
            "{},{},{:.16e},{}\n",
            c.distance.name(),
            c.method.name(),
            c.accuracy,
            c.clusters
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::control_charts;

    #[test]
    fn small_replica_table() {
        let (series, labels) = control_charts(5, 30, 11);
        let cells =
            run_casestudy(&series, &labels, &CaseStudyConfig::default(), |_, _| {}).unwrap();
        assert_eq!(cells.len(), 18);
        for c in &cells {
            assert!((0.0..=1.0).contains(&c.accuracy), "{c:?}");
        }
        assert!(cells
            .iter()
            .filter(|c| c.method == CaseMethod::KMedoids)
            .all(|c| c.clusters == 6));
        let csv = cells_csv(&cells);
        assert_eq!(csv.lines().count(), 19);
        assert!(csv.lines().nth(1).unwrap().starts_with("WD,kmedoids,"));
    }

    #[test]
    fn names_roundtrip_and_validation() {
        for d in CaseDistance::ALL {
            assert_eq!(CaseDistance::parse(d.name()).unwrap(), d);
        }
        assert!(CaseDistance::parse("xx").is_err());
        let (series, labels) = control_charts(1, 20, 1);
        let bad = CaseStudyConfig {
            k: 7,
            ..CaseStudyConfig::default()
        };
        assert!(run_casestudy(&series, &labels, &bad, |_, _| {}).is_err());
    }
}
