use crate::error::{Error, Result};

/// Points in `R^dim`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
    delay: usize,
}

impl PointCloud {
    /// Wraps explicit rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid("point rows differ in dimension"));
        }
        if dim == 0 && !rows.is_empty() {
            return Err(Error::invalid("zero-dimensional points"));
        }
        Ok(Self {
            dim,
            coords: rows.concat(),
            delay: 0,
        })
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.coords.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Delay used to build the cloud; 0 for clouds given directly.
    pub fn delay(&self) -> usize {
        self.delay
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks(self.dim.max(1))
    }

    /// Euclidean distance between points `i` and `j`.
    ///
    /// Squared coordinate gaps are summed in ascending order, so the result
    /// does not depend on the order of the coordinates. A series and its
    /// time reversal therefore produce bit-identical distance sets.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let mut sq: Vec<f64> = self
            .point(i)
            .iter()
            .zip(self.point(j))
            .map(|(a, b)| (a - b) * (a - b))
            .collect();
        sq.sort_by(f64::total_cmp);
        sq.iter().sum::<f64>().sqrt()
    }
}

/// Delay embedding: row `j` is `(x_j, x_{j+tau}, ..., x_{j+(d-1)tau})`.
pub fn takens_embed(series: &[f64], d: usize, tau: usize) -> Result<PointCloud> {
    if d == 0 || tau == 0 {
        return Err(Error::invalid(
            "embedding dimension and delay must be at least 1",
        ));
    }
    let span = (d - 1) * tau;
    if series.len() < span + 1 {
        return Err(Error::invalid(format!(
            "series too short: length {} needs at least {} for d={d}, tau={tau}",
            series.len(),
            span + 1
        )));
    }
    let rows = series.len() - span;
    let mut coords = Vec::with_capacity(rows * d);
    for j in 0..rows {
        coords.extend((0..d).map(|k| series[j + k * tau]));
    }
    Ok(PointCloud {
        dim: d,
        coords,
        delay: tau,
    })
}

/// Hausdorff distance between two clouds of the same dimension.
pub fn hausdorff(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::invalid("clouds differ in dimension"));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("Hausdorff distance of an empty cloud"));
    }
    let directed = |x: &PointCloud, y: &PointCloud| {
        x.points()
            .map(|p| {
                y.points()
                    .map(|q| p.iter().zip(q).map(|(u, v)| (u - v) * (u - v)).sum::<f64>())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0f64, f64::max)
            .sqrt()
    };
    Ok(directed(a, b).max(directed(b, a)))
}
