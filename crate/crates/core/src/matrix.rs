use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square matrix with one identifier per row/column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledMatrix {
    ids: Vec<String>,
    values: Vec<f64>,
}

impl LabeledMatrix {
    pub fn new(ids: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if values.len() != ids.len() * ids.len() {
            return Err(Error::invalid(format!(
                "matrix has {} entries for {} identifiers",
                values.len(),
                ids.len()
            )));
        }
        Ok(Self { ids, values })
    }

    pub fn from_fn(ids: Vec<String>, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let n = ids.len();
        let values = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Self { ids, values }
    }

    /// Matrix with generic identifiers `0..n`.
    pub fn unlabeled(n: usize, values: Vec<f64>) -> Result<Self> {
        Self::new((0..n).map(|i| i.to_string()).collect(), values)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ids.len() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let n = self.ids.len();
        self.values[i * n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.ids.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_asymmetry(&self) -> f64 {
        let n = self.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Rows and columns reordered so that new entry `k` is old entry `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let ids = perm.iter().map(|&p| self.ids[p].clone()).collect();
        Self::from_fn(ids, |i, j| self.get(perm[i], perm[j]))
    }

    /// Square CSV with identifiers as header row and first column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id");
        for id in &self.ids {
            out.push(',');
            out.push_str(id);
        }
        out.push('\n');
        for (i, id) in self.ids.iter().enumerate() {
            out.push_str(id);
            for v in self.row(i) {
                let _ = write!(out, ",{v:.16e}");
            }
            out.push('\n');
        }
        out
    }
}
