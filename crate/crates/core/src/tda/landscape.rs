//! Exact persistence landscapes and their Lp norms.
//!
//! Every level is piecewise linear and can only bend at a birth, a death, a
//! midpoint or where a rising edge of one tent meets a falling edge of
//! another. Evaluating the sorted tent values at those critical abscissae
//! and interpolating linearly between them is therefore exact.

use serde::{Deserialize, Serialize};

use super::diagram::PersistenceDiagram;
use crate::error::{Error, Result};

/// Levels `λ_1 ≥ λ_2 ≥ ...`, each as breakpoints `(t, value)` starting and
/// ending at value 0. Levels that would be identically zero are omitted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PersistenceLandscape {
    levels: Vec<Vec<(f64, f64)>>,
}

impl PersistenceLandscape {
    pub fn from_levels(levels: Vec<Vec<(f64, f64)>>) -> Self {
        Self { levels }
    }

    pub fn levels(&self) -> &[Vec<(f64, f64)>] {
        &self.levels
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Value of level `k` (0-based) at `t`; 0 for missing levels.
    pub fn eval(&self, k: usize, t: f64) -> f64 {
        self.levels.get(k).map_or(0.0, |lvl| eval_level(lvl, t))
    }

    /// CSV rows `level,t,value` at the breakpoints, levels numbered from 1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,t,value\n");
        for (k, lvl) in self.levels.iter().enumerate() {
            for (t, v) in lvl {
                out.push_str(&format!("{},{:.16e},{:.16e}\n", k + 1, t, v));
            }
        }
        out
    }
}

fn eval_level(level: &[(f64, f64)], t: f64) -> f64 {
    let idx = level.partition_point(|p| p.0 <= t);
    if idx == 0 || idx == level.len() {
        // Outside the support, or exactly at the last breakpoint.
        return if idx > 0 && level[idx - 1].0 == t {
            level[idx - 1].1
        } else {
            0.0
        };
    }
    let (t0, v0) = level[idx - 1];
    let (t1, v1) = level[idx];
    if t1 == t0 {
        return v0.max(v1);
    }
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}

/// Written around the midpoint so the peak equals the half-persistence
/// without rounding.
fn tent(b: f64, d: f64, t: f64) -> f64 {
    (0.5 * (d - b) - (t - 0.5 * (b + d)).abs()).max(0.0)
}

/// Builds the landscape of a finite diagram. `k_max = None` keeps all
/// non-trivial levels.
pub fn landscape(
    diagram: &PersistenceDiagram,
    k_max: Option<usize>,
) -> Result<PersistenceLandscape> {
    diagram.ensure_finite()?;
    let pairs: Vec<(f64, f64)> = diagram.pairs().into_iter().filter(|(b, d)| d > b).collect();
    let depth = k_max.map_or(pairs.len(), |k| k.min(pairs.len()));
    if depth == 0 {
        return Ok(PersistenceLandscape::default());
    }

    let mut ts: Vec<f64> = Vec::with_capacity(pairs.len() * (pairs.len() + 3));
    for &(b, d) in &pairs {
        ts.push(b);
        ts.push(d);
        ts.push(0.5 * (b + d));
    }
    for &(bi, di) in &pairs {
        for &(bj, dj) in &pairs {
            let t = 0.5 * (bi + dj);
            if t > bi && t < di && t > bj && t < dj {
                ts.push(t);
            }
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();

    let mut levels: Vec<Vec<(f64, f64)>> = vec![Vec::with_capacity(ts.len()); depth];
    let mut values = Vec::with_capacity(pairs.len());
    for &t in &ts {
        values.clear();
        values.extend(pairs.iter().map(|&(b, d)| tent(b, d, t)));
        values.sort_by(|a, b| b.total_cmp(a));
        for (k, lvl) in levels.iter_mut().enumerate() {
            lvl.push((t, values[k]));
        }
    }
    let levels = levels
        .into_iter()
        .map(simplify)
        .filter(|lvl| lvl.iter().any(|p| p.1 > 0.0))
        .collect();
    Ok(PersistenceLandscape { levels })
}

/// Trims leading/trailing zero runs and drops interior collinear points.
fn simplify(level: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let first = level.iter().position(|p| p.1 > 0.0);
    let last = level.iter().rposition(|p| p.1 > 0.0);
    let (Some(first), Some(last)) = (first, last) else {
        return Vec::new();
    };
    let lo = first.saturating_sub(1);
    let hi = (last + 1).min(level.len() - 1);
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(hi - lo + 1);
    for &p in &level[lo..=hi] {
        while out.len() >= 2 {
            let (a, b) = (out[out.len() - 2], out[out.len() - 1]);
            let s1 = (b.1 - a.1) / (b.0 - a.0);
            let s2 = (p.1 - b.1) / (p.0 - b.0);
            if s1 == s2 {
                out.pop();
            } else {
                break;
            }
        }
        out.push(p);
    }
    out
}

fn check_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::invalid(format!("norm exponent p={p} must be >= 1")));
    }
    Ok(())
}

/// `∫ |f|^p` for `f` linear on `[t0, t1]` with end values `v0`, `v1` of
/// equal sign (or zero).
fn segment_power_integral(t0: f64, t1: f64, v0: f64, v1: f64, p: f64) -> f64 {
    let h = t1 - t0;
    let (a, b) = (v0.abs(), v1.abs());
    if h <= 0.0 || (a == 0.0 && b == 0.0) {
        return 0.0;
    }
    let scale = a.max(b);
    if (b - a).abs() <= 1e-12 * scale {
        return h * (0.5 * (a + b)).powf(p);
    }
    h * (b.powf(p + 1.0) - a.powf(p + 1.0)) / ((p + 1.0) * (b - a))
}

/// `∫ |f|^p` for a piecewise-linear `f` given by breakpoints; segments
/// that cross zero are split at the root.
fn piecewise_power_integral(points: &[(f64, f64)], p: f64) -> f64 {
    let mut total = 0.0;
    for w in points.windows(2) {
        let ((t0, v0), (t1, v1)) = (w[0], w[1]);
        if v0 * v1 < 0.0 {
            let root = t0 + (t1 - t0) * v0 / (v0 - v1);
            total += segment_power_integral(t0, root, v0, 0.0, p);
            total += segment_power_integral(root, t1, 0.0, v1, p);
        } else {
            total += segment_power_integral(t0, t1, v0, v1, p);
        }
    }
    total
}

/// `(Σ_k ‖λ_k‖_p^p)^{1/p}`, integrated exactly for any real `p ≥ 1`;
/// `p = ∞` gives the highest peak.
pub fn landscape_norm(l: &PersistenceLandscape, p: f64) -> Result<f64> {
    check_p(p)?;
    if p.is_infinite() {
        return Ok(l
            .levels
            .iter()
            .flat_map(|lvl| lvl.iter().map(|q| q.1))
            .fold(0.0, f64::max));
    }
    let sum: f64 = l
        .levels
        .iter()
        .map(|lvl| piecewise_power_integral(lvl, p))
        .sum();
    Ok(sum.powf(1.0 / p))
}

/// Norm of the levelwise difference, missing levels counting as zero.
pub fn landscape_distance(
    a: &PersistenceLandscape,
    b: &PersistenceLandscape,
    p: f64,
) -> Result<f64> {
    check_p(p)?;
    let depth = a.depth().max(b.depth());
    let mut sum = 0.0f64;
    let mut sup = 0.0f64;
    for k in 0..depth {
        let mut ts: Vec<f64> = a
            .levels
            .get(k)
            .into_iter()
            .chain(b.levels.get(k))
            .flat_map(|lvl| lvl.iter().map(|q| q.0))
            .collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let diff: Vec<(f64, f64)> = ts
            .iter()
            .map(|&t| (t, a.eval(k, t) - b.eval(k, t)))
            .collect();
        if p.is_infinite() {
            sup = diff.iter().fold(sup, |m, q| m.max(q.1.abs()));
        } else {
            sum += piecewise_power_integral(&diff, p);
        }
    }
    Ok(if p.is_infinite() {
        sup
    } else {
        sum.powf(1.0 / p)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag(pairs: &[(f64, f64)]) -> PersistenceDiagram {
        PersistenceDiagram::from_pairs(pairs, 1).unwrap()
    }

    fn land(pairs: &[(f64, f64)]) -> PersistenceLandscape {
        landscape(&diag(pairs), None).unwrap()
    }

    #[test]
    fn single_tent() {
        let l = land(&[(0.0, 2.0)]);
        assert_eq!(l.levels(), &[vec![(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]]);
    }

    #[test]
    fn duplicate_tents() {
        let l = land(&[(0.0, 2.0), (0.0, 2.0)]);
        assert_eq!(l.depth(), 2);
        assert_eq!(l.levels()[0], l.levels()[1]);
    }

    #[test]
    fn overlapping_tents() {
        let l = land(&[(0.0, 2.0), (1.0, 3.0)]);
        assert_eq!(
            l.levels()[0],
            vec![(0.0, 0.0), (1.0, 1.0), (1.5, 0.5), (2.0, 1.0), (3.0, 0.0)]
        );
        assert_eq!(l.levels()[1], vec![(1.0, 0.0), (1.5, 0.5), (2.0, 0.0)]);
        let capped = landscape(&diag(&[(0.0, 2.0), (1.0, 3.0)]), Some(1)).unwrap();
        assert_eq!(capped.depth(), 1);
    }

    #[test]
    fn rejects_essential() {
        let d =
            PersistenceDiagram::new(vec![crate::tda::Feature::new(0.0, f64::INFINITY, 0)]).unwrap();
        assert!(landscape(&d, None).is_err());
    }

    #[test]
    fn norms() {
        let l = land(&[(0.0, 2.0)]);
        assert!((landscape_norm(&l, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((landscape_norm(&l, 2.0).unwrap() - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(landscape_norm(&l, f64::INFINITY).unwrap(), 1.0);
        assert_eq!(
            landscape_norm(&PersistenceLandscape::default(), 1.0).unwrap(),
            0.0
        );
        assert!(landscape_norm(&l, 0.5).is_err());
    }

    #[test]
    fn distances() {
        let a = land(&[(0.0, 2.0)]);
        let b = land(&[(0.0, 4.0)]);
        let e = PersistenceLandscape::default();
        assert_eq!(landscape_distance(&a, &a, 1.0).unwrap(), 0.0);
        assert!((landscape_distance(&a, &e, 1.0).unwrap() - 1.0).abs() < 1e-15);
        // At t = 2 the wider tent peaks at 2 while the narrower one is back to 0.
        assert_eq!(landscape_distance(&a, &b, f64::INFINITY).unwrap(), 2.0);
        let sampled = (0..=100_000)
            .map(|i| 4.0 * i as f64 / 100_000.0)
            .map(|t| (a.eval(0, t) - b.eval(0, t)).abs())
            .fold(0.0, f64::max);
        assert!((sampled - 2.0).abs() < 1e-4);
        // ∫|tent(0,2) − tent(0,4)| = area(tent(0,4)) − area(tent(0,2)) = 4 − 1.
        assert!((landscape_distance(&a, &b, 1.0).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn fractional_p_against_quadrature() {
        let a = land(&[(0.0, 2.0), (0.5, 3.0), (1.0, 1.5)]);
        let b = land(&[(0.2, 2.5), (1.4, 2.0)]);
        let p = 1.7;
        let exact = landscape_distance(&a, &b, p).unwrap();
        let n = 200_000;
        let h = 3.0 / n as f64;
        let mut sum = 0.0;
        for i in 0..n {
            let t = (i as f64 + 0.5) * h;
            for k in 0..3 {
                sum += (a.eval(k, t) - b.eval(k, t)).abs().powf(p) * h;
            }
        }
        assert!((exact - sum.powf(1.0 / p)).abs() < 1e-6);
    }

    #[test]
    fn levels_ordered_and_sup_is_half_persistence() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let n = rng.gen_range(1..8);
            let pairs: Vec<(f64, f64)> = (0..n)
                .map(|_| {
                    let b: f64 = rng.gen_range(0.0..3.0);
                    (b, b + rng.gen_range(0.01..2.0))
                })
                .collect();
            let l = land(&pairs);
            for _ in 0..1000 {
                let t = rng.gen_range(-0.5..5.5);
                for k in 1..l.depth() {
                    assert!(l.eval(k - 1, t) >= l.eval(k, t) - 1e-12);
                }
                // Level values coincide with the brute-force order statistics.
                let mut v: Vec<f64> = pairs.iter().map(|&(b, d)| tent(b, d, t)).collect();
                v.sort_by(|x, y| y.total_cmp(x));
                for k in 0..l.depth() {
                    assert!((l.eval(k, t) - v[k]).abs() < 1e-12);
                }
            }
            let half = pairs.iter().map(|(b, d)| 0.5 * (d - b)).fold(0.0, f64::max);
            assert_eq!(landscape_norm(&l, f64::INFINITY).unwrap(), half);
        }
    }
}
