//! Exact minimum-cost assignment (shortest augmenting path Hungarian method).

/// Solves the rectangular assignment problem on a row-major `rows × cols`
/// cost matrix with `rows <= cols`. Returns the column assigned to each row
/// and the total cost.
///
/// # Panics
///
/// Panics if `rows > cols` or the matrix length is inconsistent.
pub fn solve(cost: &[f64], rows: usize, cols: usize) -> (Vec<usize>, f64) {
    assert!(rows <= cols, "assignment needs rows <= cols");
    assert_eq!(cost.len(), rows * cols, "cost matrix size");
    if rows == 0 {
        return (Vec::new(), 0.0);
    }
    // Potentials and matching use 1-based indices with a virtual column 0.
    let n = rows;
    let m = cols;
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut minv = vec![0.0f64; m + 1];
    let mut used = vec![false; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|x| *x = f64::INFINITY);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            let row = &cost[(i0 - 1) * m..i0 * m];
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = row[j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=m {
        if p[j] != 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    // Summing the original entries avoids drift in the dual potentials.
    let total = assign
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i * m + j])
        .sum();
    (assign, total)
}

/// Maximum-weight assignment; same shape rules as [`solve`].
pub fn solve_max(weight: &[f64], rows: usize, cols: usize) -> (Vec<usize>, f64) {
    let negated: Vec<f64> = weight.iter().map(|w| -w).collect();
    let (assign, total) = solve(&negated, rows, cols);
    (assign, -total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(cost: &[f64], n: usize) -> f64 {
        fn rec(cost: &[f64], n: usize, row: usize, used: &mut Vec<bool>) -> f64 {
            if row == n {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for j in 0..n {
                if !used[j] {
                    used[j] = true;
                    best = best.min(cost[row * n + j] + rec(cost, n, row + 1, used));
                    used[j] = false;
                }
            }
            best
        }
        rec(cost, n, 0, &mut vec![false; n])
    }

    #[test]
    fn small_known() {
        let c = [4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0];
        let (a, t) = solve(&c, 3, 3);
        assert_eq!(t, 5.0);
        assert_eq!(a, vec![1, 0, 2]);
    }

    #[test]
    fn rectangular() {
        let c = [10.0, 1.0, 7.0, 3.0, 9.0, 2.0];
        let (a, t) = solve(&c, 2, 3);
        assert_eq!(a, vec![1, 2]);
        assert_eq!(t, 3.0);
        let (_, t) = solve_max(&c, 2, 3);
        assert_eq!(t, 19.0);
    }

    #[test]
    fn matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(1..=6);
            let c: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.0..10.0)).collect();
            let (_, t) = solve(&c, n, n);
            assert!((t - brute(&c, n)).abs() < 1e-9);
        }
    }
}
