use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A birth/death pair in homology dimension `dim`. An infinite `death`
/// marks the essential dimension-0 class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Feature {
    pub birth: f64,
    pub death: f64,
    pub dim: u8,
}

impl Feature {
    pub fn new(birth: f64, death: f64, dim: u8) -> Self {
        Self { birth, death, dim }
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    features: Vec<Feature>,
}

impl PersistenceDiagram {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Validates and canonically orders the features (by dim, birth, death).
    pub fn new(mut features: Vec<Feature>) -> Result<Self> {
        let mut essential = 0;
        for f in &features {
            if !f.birth.is_finite() || f.birth < 0.0 {
                return Err(Error::invalid(format!(
                    "feature birth {} must be finite and >= 0",
                    f.birth
                )));
            }
            if f.death.is_nan() || f.death < f.birth {
                return Err(Error::invalid(format!(
                    "feature death {} precedes birth {}",
                    f.death, f.birth
                )));
            }
            if f.dim > 1 {
                return Err(Error::invalid(format!(
                    "homology dimension {} unsupported",
                    f.dim
                )));
            }
            if f.is_essential() {
                if f.dim != 0 {
                    return Err(Error::invalid("only a dimension-0 class may be essential"));
                }
                essential += 1;
            }
        }
        if essential > 1 {
            return Err(Error::invalid("more than one essential class"));
        }
        features.sort_by(|a, b| {
            a.dim
                .cmp(&b.dim)
                .then(a.birth.total_cmp(&b.birth))
                .then(a.death.total_cmp(&b.death))
        });
        Ok(Self { features })
    }

    /// Finite pairs given as `(birth, death)` in one dimension.
    pub fn from_pairs(pairs: &[(f64, f64)], dim: u8) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(b, d)| Feature::new(b, d, dim))
                .collect(),
        )
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn has_essential(&self) -> bool {
        self.features.iter().any(Feature::is_essential)
    }

    pub fn restrict(&self, dim: u8) -> Self {
        Self {
            features: self
                .features
                .iter()
                .filter(|f| f.dim == dim)
                .copied()
                .collect(),
        }
    }

    /// Drops the essential class.
    pub fn finite(&self) -> Self {
        Self {
            features: self
                .features
                .iter()
                .filter(|f| !f.is_essential())
                .copied()
                .collect(),
        }
    }

    /// Keeps features whose persistence strictly exceeds `threshold`;
    /// a threshold of 0 keeps everything.
    pub fn above(&self, threshold: f64) -> Self {
        if threshold <= 0.0 {
            return self.clone();
        }
        Self {
            features: self
                .features
                .iter()
                .filter(|f| f.persistence() > threshold)
                .copied()
                .collect(),
        }
    }

    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.features.iter().map(|f| (f.birth, f.death)).collect()
    }

    /// CSV rows `dim,birth,death` with `inf` for the essential class.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dim,birth,death\n");
        for f in &self.features {
            let death = if f.is_essential() {
                "inf".to_string()
            } else {
                format!("{:.16e}", f.death)
            };
            let _ = writeln!(out, "{},{:.16e},{}", f.dim, f.birth, death);
        }
        out
    }

    pub(crate) fn ensure_finite(&self) -> Result<()> {
        if self.has_essential() {
            Err(Error::invalid("diagram has a feature with infinite death"))
        } else {
            Ok(())
        }
    }
}
