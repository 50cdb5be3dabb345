//! Vietoris–Rips persistence in dimensions 0 and 1 over Z/2.
//!
//! Dimension 0 comes from a union-find pass over the sorted edges.
//! Dimension 1 is computed by reducing the coboundary columns of the
//! cycle-creating edges in reverse filtration order (edges that merge
//! components are cleared by the dimension-0 pass). A triangle enters with
//! its longest edge. Zero-length dimension-1 intervals depend only on
//! tie-breaking among equal filtration values and are not reported.

use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};

use serde::{Deserialize, Serialize};

use super::diagram::{Feature, PersistenceDiagram};
use super::embedding::PointCloud;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiltrationSpec {
    /// Highest homology dimension computed, 0 or 1.
    pub max_dim: u8,
    /// Filtration cutoff; `None` means the cloud diameter (no truncation).
    pub max_radius: Option<f64>,
}

impl Default for FiltrationSpec {
    fn default() -> Self {
        Self {
            max_dim: 1,
            max_radius: None,
        }
    }
}

impl FiltrationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.max_dim > 1 {
            return Err(Error::config(format!(
                "max_dim {} unsupported (0 or 1)",
                self.max_dim
            )));
        }
        if let Some(r) = self.max_radius {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::config(format!("max_radius {r} must be positive")));
            }
        }
        Ok(())
    }
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Symmetric difference of two ascending index lists.
fn add_columns<T: Ord + Copy>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

pub fn rips_persistence(cloud: &PointCloud, spec: &FiltrationSpec) -> Result<PersistenceDiagram> {
    spec.validate()?;
    let n = cloud.len();
    if n == 0 {
        return Err(Error::invalid("empty point cloud"));
    }
    let cutoff = spec.max_radius.unwrap_or(f64::INFINITY);

    let mut edges: Vec<(f64, u32, u32)> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let len = cloud.distance(i, j);
            if len <= cutoff {
                edges.push((len, i as u32, j as u32));
            }
        }
    }
    edges.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut features = Vec::new();
    let mut uf = UnionFind::new(n);
    let mut negative = vec![false; edges.len()];
    let mut merges = 0usize;
    for (r, &(len, i, j)) in edges.iter().enumerate() {
        if uf.union(i as usize, j as usize) {
            negative[r] = true;
            merges += 1;
            features.push(Feature::new(0.0, len, 0));
        }
    }
    features.push(Feature::new(0.0, f64::INFINITY, 0));
    // Components still separate at a finite cutoff die there.
    for _ in 0..(n - 1 - merges) {
        features.push(Feature::new(0.0, cutoff, 0));
    }

    if spec.max_dim >= 1 {
        features.extend(one_dimensional(n, &edges, &negative, cutoff));
    }
    PersistenceDiagram::new(features)
}

/// Multiplicative hash for the `u64` pivot keys, which are trusted and
/// dense enough that SipHash only costs time.
#[derive(Default)]
struct KeyHasher(u64);

impl Hasher for KeyHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0.rotate_left(8) ^ b as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        }
    }

    fn write_u64(&mut self, v: u64) {
        self.0 = (v ^ (v >> 29)).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    }
}

fn one_dimensional(
    n: usize,
    edges: &[(f64, u32, u32)],
    negative: &[bool],
    cutoff: f64,
) -> Vec<Feature> {
    let mut rank = vec![u32::MAX; n * n];
    for (r, &(_, i, j)) in edges.iter().enumerate() {
        rank[i as usize * n + j as usize] = r as u32;
        rank[j as usize * n + i as usize] = r as u32;
    }
    // A triangle is keyed by its longest edge, then the vertex opposite
    // that edge. Triangles sharing a longest edge enter together, so any
    // secondary order refines the filtration; this one lets a column find
    // its smallest key with an early-exit scan.
    // `r = (i, j)` is the coface's own edge, `k` the third vertex and `a`,
    // `b` the ranks of `(i, k)`, `(j, k)` (the diagonal of `rank` is unset,
    // so `k = i, j` drop out with the absent edges).
    let nn = n as u64;
    let key = |r: u32, i: u32, j: u32, k: u32, a: u32, b: u32| -> Option<u64> {
        if a == u32::MAX || b == u32::MAX {
            None
        } else if a < r && b < r {
            Some(r as u64 * nn + k as u64)
        } else if a > b {
            Some(a as u64 * nn + j as u64)
        } else {
            Some(b as u64 * nn + i as u64)
        }
    };
    let row = |v: u32| &rank[v as usize * n..(v as usize + 1) * n];

    // Coboundary of edge `r`, sorted ascending.
    let coboundary = |r: usize| -> Vec<u64> {
        let (_, i, j) = edges[r];
        let mut col: Vec<u64> = row(i)
            .iter()
            .zip(row(j))
            .enumerate()
            .filter_map(|(k, (&a, &b))| key(r as u32, i, j, k as u32, a, b))
            .collect();
        col.sort_unstable();
        col
    };

    // Columns paired without any addition are kept implicitly as their
    // edge and rebuilt on demand.
    enum Stored {
        Raw(usize),
        Reduced(Vec<u64>),
    }
    let mut out = Vec::new();
    let mut owner: HashMap<u64, Stored, BuildHasherDefault<KeyHasher>> = HashMap::default();
    for (r, &(len, i, j)) in edges.iter().enumerate().rev() {
        if negative[r] {
            continue;
        }
        // A third vertex with both other edges shorter gives a key with `r`
        // on top, below every other key; the first such vertex is the
        // minimum. Otherwise every key has a longer top edge.
        let r32 = r as u32;
        let (ri, rj) = (row(i), row(j));
        let first = match (0..n).find(|&k| ri[k] < r32 && rj[k] < r32) {
            Some(k) => Some(r as u64 * nn + k as u64),
            None => (0..n)
                .filter_map(|k| key(r32, i, j, k as u32, ri[k], rj[k]))
                .min(),
        };
        let birth_death = |pivot: u64| edges[(pivot / nn) as usize].0;
        let stored = match first {
            Some(p) if !owner.contains_key(&p) => Some((p, Stored::Raw(r))),
            None => None,
            Some(_) => {
                let mut col = coboundary(r);
                loop {
                    let Some(&pivot) = col.first() else { break };
                    match owner.get(&pivot) {
                        Some(Stored::Raw(c)) => col = add_columns(&col, &coboundary(*c)),
                        Some(Stored::Reduced(v)) => col = add_columns(&col, v),
                        None => break,
                    }
                }
                col.first().copied().map(|p| (p, Stored::Reduced(col)))
            }
        };
        match stored {
            Some((pivot, column)) => {
                let death = birth_death(pivot);
                if death > len {
                    out.push(Feature::new(len, death, 1));
                }
                owner.insert(pivot, column);
            }
            None => {
                if len < cutoff {
                    out.push(Feature::new(len, cutoff, 1));
                }
            }
        }
    }
    out
}
