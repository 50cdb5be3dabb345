//! Kernel similarity matrices over the index and its constituents.

use serde::{Deserialize, Serialize};

use crate::distances::{distance_matrix, DistanceKind, DistanceSpec};
use crate::error::{Error, Result};
use crate::market_data::ReturnPanel;
use crate::matrix::LabeledMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelId {
    K1,
    K2,
    K3,
    K4,
    K5,
    K6,
    K7,
}

impl KernelId {
    pub const ALL: [KernelId; 7] = [
        KernelId::K1,
        KernelId::K2,
        KernelId::K3,
        KernelId::K4,
        KernelId::K5,
        KernelId::K6,
        KernelId::K7,
    ];

    /// Distance underlying the kernel. K7 uses squared Euclidean distance.
    pub fn distance_kind(self) -> DistanceKind {
        match self {
            KernelId::K1 => DistanceKind::Awd,
            KernelId::K2 => DistanceKind::Dwd,
            KernelId::K3 => DistanceKind::Ald,
            KernelId::K4 => DistanceKind::Dld,
            KernelId::K5 => DistanceKind::Spearman,
            KernelId::K6 => DistanceKind::Pearson,
            KernelId::K7 => DistanceKind::EuclidSq,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelId::K1 => "K1",
            KernelId::K2 => "K2",
            KernelId::K3 => "K3",
            KernelId::K4 => "K4",
            KernelId::K5 => "K5",
            KernelId::K6 => "K6",
            KernelId::K7 => "K7",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config(format!("unknown kernel '{s}' (expected K1..K7)")))
    }
}

/// Bandwidth used in `exp(-d^2 / σ_ij)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Scaling {
    /// `σ_ij = s_i s_j` with `s_i` the distance to the m-th nearest neighbour.
    Local { m: usize },
    /// Same `σ_ij = sigma2` for every pair.
    Fixed { sigma2: f64 },
}

impl Default for Scaling {
    fn default() -> Self {
        Scaling::Local { m: 7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub kernel: KernelId,
    pub matrix: LabeledMatrix,
}

impl SimilarityMatrix {
    pub fn len(&self) -> usize {
        self.matrix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }

    pub fn ids(&self) -> &[String] {
        self.matrix.ids()
    }
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Per-entity distance to the m-th nearest other entity. Zero scales (from
/// duplicated series) are floored at `1e-12` times the median positive
/// off-diagonal distance.
pub fn neighbor_scales(d: &LabeledMatrix, m: usize) -> Result<Vec<f64>> {
    let n = d.len();
    if m == 0 || m >= n {
        return Err(Error::config(format!(
            "neighbour rank m={m} must lie in 1..{n}"
        )));
    }
    let positive: Vec<f64> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| d.get(i, j))
        .filter(|v| *v > 0.0)
        .collect();
    let floor = 1e-12 * median(positive).unwrap_or(1.0);
    Ok((0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| d.get(i, j)).collect();
            row.sort_by(f64::total_cmp);
            let s = row[m - 1];
            if s > 0.0 {
                s
            } else {
                floor
            }
        })
        .collect())
}

/// Matrix of `σ_ij = s_i s_j`.
pub fn local_scales(d: &LabeledMatrix, m: usize) -> Result<LabeledMatrix> {
    let s = neighbor_scales(d, m)?;
    Ok(LabeledMatrix::from_fn(d.ids().to_vec(), |i, j| s[i] * s[j]))
}

/// Applies the kernel to a precomputed distance matrix. For K7 the matrix
/// must hold squared Euclidean distances and the similarity is their
/// negation, with no bandwidth.
pub fn kernel_from_distances(
    d: &LabeledMatrix,
    kernel: KernelId,
    scaling: Scaling,
) -> Result<SimilarityMatrix> {
    let matrix = if kernel == KernelId::K7 {
        LabeledMatrix::from_fn(
            d.ids().to_vec(),
            |i, j| if i == j { 0.0 } else { -d.get(i, j) },
        )
    } else {
        let sigma: Box<dyn Fn(usize, usize) -> f64> = match scaling {
            Scaling::Local { m } => {
                let s = neighbor_scales(d, m)?;
                Box::new(move |i, j| s[i] * s[j])
            }
            Scaling::Fixed { sigma2 } => {
                if !(sigma2.is_finite() && sigma2 > 0.0) {
                    return Err(Error::config(format!("sigma2={sigma2} must be positive")));
                }
                Box::new(move |_, _| sigma2)
            }
        };
        LabeledMatrix::from_fn(d.ids().to_vec(), |i, j| {
            if i == j {
                1.0
            } else {
                let v = d.get(i, j);
                (-(v * v) / sigma(i, j)).exp()
            }
        })
    };
    Ok(SimilarityMatrix { kernel, matrix })
}

/// Distances and similarities over entity 0 (the index) and every asset.
pub fn build_kernel_matrix(
    panel: &ReturnPanel,
    kernel: KernelId,
    spec: &DistanceSpec,
    scaling: Scaling,
) -> Result<(SimilarityMatrix, LabeledMatrix)> {
    let n = panel.n_assets() + 1;
    if n < 2 {
        return Err(Error::invalid(
            "kernel matrix needs the index and at least one asset",
        ));
    }
    let spec = DistanceSpec {
        kind: kernel.distance_kind(),
        ..spec.clone()
    };
    let series: Vec<&[f64]> = (0..n).map(|e| panel.entity_series(e)).collect();
    let d = distance_matrix(panel.entity_ids(), &series, &spec)?;
    let s = kernel_from_distances(&d, kernel, scaling)?;
    Ok((s, d))
}
