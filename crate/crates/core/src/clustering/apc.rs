use serde::{Deserialize, Serialize};

use super::validation::silhouette_score;
use super::Clustering;
use crate::error::{Error, Result};
use crate::matrix::LabeledMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Preference {
    /// Median of the off-diagonal similarities.
    Median,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApcParams {
    pub damping: f64,
    pub preference: Preference,
    pub max_iterations: usize,
    pub stable_iterations: usize,
}

impl Default for ApcParams {
    fn default() -> Self {
        Self {
            damping: 0.5,
            preference: Preference::Median,
            max_iterations: 500,
            stable_iterations: 25,
        }
    }
}

impl ApcParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::config(format!(
                "damping {} outside [0, 1)",
                self.damping
            )));
        }
        if self.max_iterations == 0 || self.stable_iterations == 0 {
            return Err(Error::config("APC iteration counts must be positive"));
        }
        if let Preference::Value(p) = self.preference {
            if !p.is_finite() {
                return Err(Error::config("APC preference must be finite"));
            }
        }
        Ok(())
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Value in `[-1, 1)` determined by the ordered pair of keys.
fn unit_noise(a: u64, b: u64) -> f64 {
    let mut z = a.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ b.rotate_left(31);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 52) as f64 - 1.0
}

pub(crate) fn median_off_diagonal(s: &LabeledMatrix) -> f64 {
    let n = s.len();
    let mut v: Vec<f64> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| s.get(i, j))
        .collect();
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Affinity propagation by damped responsibility/availability message
/// passing. The diagonal of `s` is replaced by the preference and every
/// entry receives an id-derived perturbation at machine-epsilon scale. Exemplars
/// are the entities with `r(k,k) + a(k,k) > 0`; the run stops once that set
/// has been unchanged for `stable_iterations` consecutive iterations.
pub fn affinity_propagation(s: &LabeledMatrix, params: &ApcParams) -> Result<Clustering> {
    params.validate()?;
    let n = s.len();
    if n == 0 {
        return Err(Error::invalid("empty similarity matrix"));
    }
    if s.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("similarity matrix has non-finite entries"));
    }
    if n == 1 {
        return Ok(Clustering {
            labels: vec![0],
            exemplars: vec![0],
            iterations: 0,
            converged: true,
        });
    }
    let pref = match params.preference {
        Preference::Median => median_off_diagonal(s),
        Preference::Value(p) => p,
    };
    let mut sim = s.values().to_vec();
    for k in 0..n {
        sim[k * n + k] = pref;
    }
    // Exact ties (duplicate entities) are symmetric fixed points of the
    // message updates, where both copies can end up as exemplars. A
    // perturbation at machine-epsilon scale breaks them; it is a hash of the
    // entity ids, so runs are reproducible and permuting the entities
    // permutes the perturbation with them.
    let keys: Vec<u64> = s.ids().iter().map(|id| fnv1a(id.as_bytes())).collect();
    for i in 0..n {
        for k in 0..n {
            let z = unit_noise(keys[i], keys[k]);
            let v = &mut sim[i * n + k];
            *v += (f64::EPSILON * v.abs() + f64::MIN_POSITIVE * 100.0) * z;
        }
    }
    let lam = params.damping;
    let mut r = vec![0.0; n * n];
    let mut a = vec![0.0; n * n];
    let mut exemplars: Vec<bool> = vec![false; n];
    let mut stable = 0usize;
    let mut iterations = 0usize;
    let mut converged = false;
    let mut col_pos = vec![0.0; n];

    for it in 1..=params.max_iterations {
        iterations = it;
        // Responsibilities.
        for i in 0..n {
            let row = i * n;
            let (mut first, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            let mut arg = 0;
            for k in 0..n {
                let v = a[row + k] + sim[row + k];
                if v > first {
                    second = first;
                    first = v;
                    arg = k;
                } else if v > second {
                    second = v;
                }
            }
            for k in 0..n {
                let competitor = if k == arg { second } else { first };
                let new = sim[row + k] - competitor;
                r[row + k] = (1.0 - lam) * new + lam * r[row + k];
            }
        }
        // Availabilities.
        for k in 0..n {
            let mut total = 0.0;
            for i in 0..n {
                let v = if i == k {
                    r[k * n + k]
                } else {
                    r[i * n + k].max(0.0)
                };
                col_pos[i] = v;
                total += v;
            }
            for i in 0..n {
                let new = if i == k {
                    total - r[k * n + k]
                } else {
                    (total - col_pos[i]).min(0.0)
                };
                a[i * n + k] = (1.0 - lam) * new + lam * a[i * n + k];
            }
        }
        let current: Vec<bool> = (0..n).map(|k| r[k * n + k] + a[k * n + k] > 0.0).collect();
        if current == exemplars {
            stable += 1;
        } else {
            stable = 1;
            exemplars = current;
        }
        if stable >= params.stable_iterations && exemplars.iter().any(|e| *e) {
            converged = true;
            break;
        }
    }

    let mut chosen: Vec<usize> = (0..n).filter(|&k| exemplars[k]).collect();
    if chosen.is_empty() {
        // No positive self-evidence: fall back to the single strongest candidate.
        let best = (0..n)
            .max_by(|&x, &y| {
                (r[x * n + x] + a[x * n + x])
                    .total_cmp(&(r[y * n + y] + a[y * n + y]))
                    .then(y.cmp(&x))
            })
            .unwrap_or(0);
        chosen = vec![best];
        converged = false;
    }
    Ok(Clustering::from_exemplars(
        n,
        chosen,
        iterations,
        converged,
        |i, k| s.get(i, k),
    ))
}

/// Preference below which one exemplar beats any pair on net similarity:
/// the best single-exemplar total minus the best two-exemplar total.
fn single_cluster_bound(s: &LabeledMatrix) -> f64 {
    let n = s.len();
    let col = |k: usize| -> f64 { (0..n).filter(|&i| i != k).map(|i| s.get(i, k)).sum() };
    let m1 = (0..n).map(col).fold(f64::NEG_INFINITY, f64::max);
    let mut m2 = f64::NEG_INFINITY;
    for a in 0..n {
        for b in a + 1..n {
            let t: f64 = (0..n)
                .filter(|&i| i != a && i != b)
                .map(|i| s.get(i, a).max(s.get(i, b)))
                .sum();
            m2 = m2.max(t);
        }
    }
    if m2.is_finite() {
        m1 - m2
    } else {
        m1
    }
}

const DAMPING_ESCALATION: [f64; 3] = [0.7, 0.9, 0.95];

/// Searches the preference by bisection so that affinity propagation yields
/// `k` clusters. Non-converged runs are retried with damping 0.7, 0.9 and
/// 0.95. If `k` is never hit exactly, the run with the closest
/// cluster count is returned (larger preference on ties).
pub fn affinity_propagation_k(
    s: &LabeledMatrix,
    k: usize,
    params: &ApcParams,
) -> Result<Clustering> {
    let n = s.len();
    if k == 0 || k > n {
        return Err(Error::config(format!("cluster count {k} outside 1..={n}")));
    }
    let off: Vec<f64> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| s.get(i, j))
        .collect();
    let (min, max) = off
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(*v), hi.max(*v))
        });
    if !min.is_finite() {
        return affinity_propagation(s, params);
    }
    let span = (max - min).max(1e-12);
    let (mut lo, mut hi) = (single_cluster_bound(s) - span, max);
    // Oscillating runs give meaningless counts and break the bisection, so
    // a run that fails to converge is repeated with heavier damping.
    let run = |p: f64| -> Result<Clustering> {
        let mut c = affinity_propagation(
            s,
            &ApcParams {
                preference: Preference::Value(p),
                ..*params
            },
        )?;
        for lam in DAMPING_ESCALATION
            .into_iter()
            .filter(|l| *l > params.damping)
        {
            if c.converged {
                break;
            }
            c = affinity_propagation(
                s,
                &ApcParams {
                    preference: Preference::Value(p),
                    damping: lam,
                    ..*params
                },
            )?;
        }
        Ok(c)
    };
    let mut best: Option<Clustering> = None;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let c = run(mid)?;
        let gap = c.n_clusters().abs_diff(k);
        if best
            .as_ref()
            .is_none_or(|b| gap < b.n_clusters().abs_diff(k))
        {
            best = Some(c.clone());
        }
        if gap == 0 {
            return Ok(c);
        }
        if c.n_clusters() < k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best.expect("at least one run"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DampingSelection {
    pub damping: f64,
    pub clustering: Clustering,
    /// Mean silhouette of the chosen run; `None` on the fallback path.
    pub silhouette: Option<f64>,
    /// True when no run produced two or more clusters.
    pub fallback: bool,
}

/// Runs affinity propagation for each damping value and keeps the run with
/// the highest mean silhouette on `distances` (smaller damping on ties).
/// When every run gives a single cluster, the largest converged damping is
/// returned (largest overall if none converged) and `fallback` is set.
pub fn select_damping(
    s: &LabeledMatrix,
    grid: &[f64],
    distances: &LabeledMatrix,
    params: &ApcParams,
) -> Result<DampingSelection> {
    if grid.is_empty() {
        return Err(Error::config("damping grid is empty"));
    }
    let mut runs = Vec::with_capacity(grid.len());
    for &lam in grid {
        let c = affinity_propagation(
            s,
            &ApcParams {
                damping: lam,
                ..*params
            },
        )?;
        runs.push((lam, c));
    }
    let mut best: Option<(f64, f64, Clustering)> = None;
    for (lam, c) in &runs {
        if c.n_clusters() < 2 {
            continue;
        }
        let score = silhouette_score(distances, &c.labels)?;
        let better = match &best {
            None => true,
            Some((bl, bs, _)) => score > *bs || (score == *bs && lam < bl),
        };
        if better {
            best = Some((*lam, score, c.clone()));
        }
    }
    if let Some((damping, score, clustering)) = best {
        return Ok(DampingSelection {
            damping,
            clustering,
            silhouette: Some(score),
            fallback: false,
        });
    }
    let pick = runs
        .iter()
        .filter(|(_, c)| c.converged)
        .max_by(|x, y| x.0.total_cmp(&y.0))
        .or_else(|| runs.iter().max_by(|x, y| x.0.total_cmp(&y.0)))
        .expect("grid is non-empty");
    Ok(DampingSelection {
        damping: pick.0,
        clustering: pick.1.clone(),
        silhouette: None,
        fallback: true,
    })
}
