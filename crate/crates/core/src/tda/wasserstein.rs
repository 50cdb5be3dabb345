//! Wasserstein and bottleneck distances between persistence diagrams.
//!
//! Both diagrams are augmented with diagonal slots so that any point may be
//! left unmatched at the cost of its distance to the diagonal, which under
//! the L∞ ground metric is half its persistence.

use super::diagram::PersistenceDiagram;
use crate::assignment;
use crate::error::{Error, Result};

fn ground(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

fn to_diagonal(a: (f64, f64)) -> f64 {
    0.5 * (a.1 - a.0)
}

/// Square augmented cost matrix of side `n1 + n2` (unpowered ground costs).
fn augmented_costs(x: &[(f64, f64)], y: &[(f64, f64)]) -> Vec<f64> {
    let (n1, n2) = (x.len(), y.len());
    let n = n1 + n2;
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            c[i * n + j] = match (i < n1, j < n2) {
                (true, true) => ground(x[i], y[j]),
                (true, false) => to_diagonal(x[i]),
                (false, true) => to_diagonal(y[j]),
                (false, false) => 0.0,
            };
        }
    }
    c
}

fn check(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> Result<()> {
    d1.ensure_finite()?;
    d2.ensure_finite()
}

/// p-Wasserstein distance with L∞ ground cost; `p = ∞` is the bottleneck
/// distance.
pub fn wasserstein(d1: &PersistenceDiagram, d2: &PersistenceDiagram, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::invalid(format!(
            "Wasserstein order p={p} must be >= 1"
        )));
    }
    check(d1, d2)?;
    if p.is_infinite() {
        return bottleneck(d1, d2);
    }
    if d1.features() == d2.features() {
        return Ok(0.0);
    }
    let (x, y) = (d1.pairs(), d2.pairs());
    if x.is_empty() || y.is_empty() {
        return persistence_to_empty(if x.is_empty() { d2 } else { d1 }, p);
    }
    let n = x.len() + y.len();
    let cost: Vec<f64> = augmented_costs(&x, &y)
        .into_iter()
        .map(|c| c.powf(p))
        .collect();
    let (_, total) = assignment::solve(&cost, n, n);
    Ok(total.max(0.0).powf(1.0 / p))
}

/// Bottleneck distance: the smallest candidate cost admitting a perfect
/// matching among augmented entries no larger than it.
pub fn bottleneck(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> Result<f64> {
    check(d1, d2)?;
    let (x, y) = (d1.pairs(), d2.pairs());
    let n = x.len() + y.len();
    if n == 0 {
        return Ok(0.0);
    }
    let cost = augmented_costs(&x, &y);
    let mut candidates = cost.clone();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching(&cost, n, candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(candidates[lo])
}

/// Kuhn's augmenting-path test for a perfect matching using entries `<= cap`.
fn perfect_matching(cost: &[f64], n: usize, cap: f64) -> bool {
    fn augment(
        u: usize,
        n: usize,
        cost: &[f64],
        cap: f64,
        seen: &mut [bool],
        owner: &mut [usize],
    ) -> bool {
        for v in 0..n {
            if cost[u * n + v] <= cap && !seen[v] {
                seen[v] = true;
                if owner[v] == usize::MAX || augment(owner[v], n, cost, cap, seen, owner) {
                    owner[v] = u;
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    for u in 0..n {
        seen.iter_mut().for_each(|s| *s = false);
        if !augment(u, n, cost, cap, &mut seen, &mut owner) {
            return false;
        }
    }
    true
}

/// Distance to the diagram holding only the diagonal:
/// `(2^{-p} Σ pers^p)^{1/p}`, or half the largest persistence for `p = ∞`.
pub fn persistence_to_empty(d: &PersistenceDiagram, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::invalid(format!(
            "Wasserstein order p={p} must be >= 1"
        )));
    }
    d.ensure_finite()?;
    if p.is_infinite() {
        return Ok(d
            .features()
            .iter()
            .map(|f| 0.5 * f.persistence())
            .fold(0.0, f64::max));
    }
    let s: f64 = d.features().iter().map(|f| f.persistence().powf(p)).sum();
    Ok((0.5f64.powf(p) * s).powf(1.0 / p))
}

#[cfg(test)]
pub(crate) mod oracle {
    /// Minimum over all partial injective matchings between `x` and `y`;
    /// unmatched points pay their diagonal distance. Returns the p-th power
    /// sum (or the max for `p = ∞`).
    pub fn brute_force(x: &[(f64, f64)], y: &[(f64, f64)], p: f64) -> f64 {
        fn rec(i: usize, x: &[(f64, f64)], y: &[(f64, f64)], used: &mut Vec<bool>, p: f64) -> f64 {
            let combine = |a: f64, b: f64| if p.is_infinite() { a.max(b) } else { a + b };
            let pow = |c: f64| if p.is_infinite() { c } else { c.powf(p) };
            if i == x.len() {
                return y
                    .iter()
                    .zip(used.iter())
                    .filter(|(_, u)| !**u)
                    .fold(0.0, |acc, (q, _)| combine(acc, pow(0.5 * (q.1 - q.0))));
            }
            let mut best = combine(pow(0.5 * (x[i].1 - x[i].0)), rec(i + 1, x, y, used, p));
            for j in 0..y.len() {
                if !used[j] {
                    used[j] = true;
                    let c = (x[i].0 - y[j].0).abs().max((x[i].1 - y[j].1).abs());
                    best = best.min(combine(pow(c), rec(i + 1, x, y, used, p)));
                    used[j] = false;
                }
            }
            best
        }
        rec(0, x, y, &mut vec![false; y.len()], p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn d(pairs: &[(f64, f64)]) -> PersistenceDiagram {
        PersistenceDiagram::from_pairs(pairs, 1).unwrap()
    }

    fn random_diagram(rng: &mut ChaCha8Rng, max: usize) -> PersistenceDiagram {
        let n = rng.gen_range(0..=max);
        let pairs: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                let b = rng.gen_range(0.0..2.0);
                (b, b + rng.gen_range(0.0..1.5))
            })
            .collect();
        d(&pairs)
    }

    #[test]
    fn examples() {
        let a = d(&[(0.0, 2.0)]);
        let e = PersistenceDiagram::empty();
        assert_eq!(wasserstein(&a, &a, 1.0).unwrap(), 0.0);
        assert_eq!(wasserstein(&a, &e, 1.0).unwrap(), 1.0);
        assert_eq!(wasserstein(&a, &d(&[(0.0, 4.0)]), 1.0).unwrap(), 2.0);
        assert_eq!(persistence_to_empty(&a, 1.0).unwrap(), 1.0);
        let two = d(&[(0.0, 2.0), (1.0, 2.0)]);
        assert!((persistence_to_empty(&two, 2.0).unwrap() - 1.25f64.sqrt()).abs() < 1e-15);
        assert_eq!(persistence_to_empty(&e, 1.0).unwrap(), 0.0);
        assert_eq!(bottleneck(&a, &d(&[(0.0, 4.0)])).unwrap(), 2.0);
        assert!(wasserstein(&a, &a, 0.5).is_err());
    }

    #[test]
    fn rejects_essential() {
        let inf =
            PersistenceDiagram::new(vec![crate::tda::Feature::new(0.0, f64::INFINITY, 0)]).unwrap();
        assert!(wasserstein(&inf, &inf, 1.0).is_err());
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let (a, b) = (random_diagram(&mut rng, 6), random_diagram(&mut rng, 6));
            for p in [1.0, 2.0, 2.5] {
                let exact = oracle::brute_force(&a.pairs(), &b.pairs(), p).powf(1.0 / p);
                assert!((wasserstein(&a, &b, p).unwrap() - exact).abs() < 1e-10);
            }
            let exact = oracle::brute_force(&a.pairs(), &b.pairs(), f64::INFINITY);
            assert!((bottleneck(&a, &b).unwrap() - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn metric_axioms() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let (a, b, c) = (
                random_diagram(&mut rng, 6),
                random_diagram(&mut rng, 6),
                random_diagram(&mut rng, 6),
            );
            for p in [1.0, 2.0, f64::INFINITY] {
                let ab = wasserstein(&a, &b, p).unwrap();
                assert!((ab - wasserstein(&b, &a, p).unwrap()).abs() < 1e-12);
                let ac = wasserstein(&a, &c, p).unwrap();
                let cb = wasserstein(&c, &b, p).unwrap();
                assert!(ab <= ac + cb + 1e-12);
            }
        }
    }

    #[test]
    fn closed_form_to_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let e = PersistenceDiagram::empty();
        for _ in 0..200 {
            let a = random_diagram(&mut rng, 8);
            for p in [1.0, 2.0, 3.0] {
                // The general assignment path, bypassing the empty shortcut.
                let n = a.len();
                let cost: Vec<f64> = augmented_costs(&a.pairs(), &[])
                    .iter()
                    .map(|c| c.powf(p))
                    .collect();
                let (_, total) = crate::assignment::solve(&cost, n, n);
                let via_assignment = total.powf(1.0 / p);
                let closed = persistence_to_empty(&a, p).unwrap();
                assert!((closed - via_assignment).abs() < 1e-10);
                assert!((closed - wasserstein(&a, &e, p).unwrap()).abs() < 1e-10);
            }
        }
    }
}
