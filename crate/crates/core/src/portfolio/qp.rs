//! Active-set solver for `min ½ wᵀQw + cᵀw` over the probability simplex.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub w: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// Largest violation of stationarity and dual feasibility at `w`.
    pub kkt_residual: f64,
}

pub fn objective(q: &DMatrix<f64>, c: &DVector<f64>, w: &[f64]) -> f64 {
    let w = DVector::from_column_slice(w);
    0.5 * w.dot(&(q * &w)) + c.dot(&w)
}

/// KKT residual for the simplex: with `ν` the mean gradient over the
/// support, `max(|g_i − ν|)` on the support and `max(ν − g_i, 0)` off it.
pub fn kkt_residual(q: &DMatrix<f64>, c: &DVector<f64>, w: &[f64]) -> f64 {
    let g = q * DVector::from_column_slice(w) + c;
    let support: Vec<usize> = (0..w.len()).filter(|&i| w[i] > 0.0).collect();
    if support.is_empty() {
        return f64::INFINITY;
    }
    let nu = support.iter().map(|&i| g[i]).sum::<f64>() / support.len() as f64;
    (0..w.len())
        .map(|i| {
            if w[i] > 0.0 {
                (g[i] - nu).abs()
            } else {
                (nu - g[i]).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Orthonormal basis (columns) of `{x ∈ ℝᵐ : Σx = 0}` from a Householder
/// reflection mapping `e₁` onto `𝟙/√m`.
fn sum_zero_basis(m: usize) -> DMatrix<f64> {
    let u = 1.0 / (m as f64).sqrt();
    let mut v = DVector::from_element(m, u);
    v[0] -= 1.0;
    let vv = v.dot(&v);
    let mut z = DMatrix::zeros(m, m - 1);
    for col in 1..m {
        for row in 0..m {
            let e = if row == col { 1.0 } else { 0.0 };
            z[(row, col - 1)] = e - 2.0 * v[row] * v[col] / vv;
        }
    }
    z
}

/// Symmetrizes `q` and, when its smallest eigenvalue is below `-1e-10`,
/// adds the ridge `1e-10 − λ_min` to the diagonal.
pub fn regularize(q: &DMatrix<f64>) -> DMatrix<f64> {
    let mut s = (q + q.transpose()) * 0.5;
    let lmin = SymmetricEigen::new(s.clone()).eigenvalues.min();
    if lmin < -1e-10 {
        let ridge = 1e-10 - lmin;
        for i in 0..s.nrows() {
            s[(i, i)] += ridge;
        }
    }
    s
}

/// Primal active-set method started from equal weights. Each iteration
/// minimizes over the free coordinates with the sum constraint eliminated
/// by a null-space basis; zero-curvature descent directions are followed
/// to the nearest bound. Constraints leave the working set by most negative
/// multiplier, lowest index on ties.
pub fn solve_simplex_qp(q: &DMatrix<f64>, c: &DVector<f64>) -> Result<QpSolution> {
    let n = c.len();
    if n == 0 || q.nrows() != n || q.ncols() != n {
        return Err(Error::invalid("QP dimensions do not match"));
    }
    if q.iter().chain(c.iter()).any(|v| !v.is_finite()) {
        return Err(Error::numerical("non-finite QP input"));
    }
    let scale = q
        .iter()
        .chain(c.iter())
        .fold(0.0f64, |a, v| a.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let curv_tol = 1e-12
        * q.iter()
            .fold(0.0f64, |a, v| a.max(v.abs()))
            .max(f64::MIN_POSITIVE);
    let mult_tol = 1e-13 * scale;
    let step_tol = 1e-14;

    let mut w = vec![1.0 / n as f64; n];
    let mut fixed = vec![false; n];
    let max_iter = 50 * n + 200;
    for iter in 0..max_iter {
        let g = q * DVector::from_column_slice(&w) + c;
        let free: Vec<usize> = (0..n).filter(|&i| !fixed[i]).collect();
        let m = free.len();
        let mut p = vec![0.0; n];
        let mut unbounded = false;
        if m > 1 {
            let z = sum_zero_basis(m);
            let qf = DMatrix::from_fn(m, m, |a, b| q[(free[a], free[b])]);
            let gf = DVector::from_fn(m, |a, _| g[free[a]]);
            let h = z.transpose() * &qf * &z;
            let h = (&h + h.transpose()) * 0.5;
            let hz = z.transpose() * gf;
            let eig = SymmetricEigen::new(h);
            let proj = eig.eigenvectors.transpose() * &hz;
            let flat: Vec<usize> = (0..m - 1)
                .filter(|&k| eig.eigenvalues[k] <= curv_tol)
                .collect();
            let flat_grad = flat.iter().map(|&k| proj[k].abs()).fold(0.0, f64::max);
            let mut y = DVector::zeros(m - 1);
            if flat_grad > mult_tol {
                unbounded = true;
                for &k in &flat {
                    y -= eig.eigenvectors.column(k) * proj[k];
                }
            } else {
                for k in 0..m - 1 {
                    if eig.eigenvalues[k] > curv_tol {
                        y -= eig.eigenvectors.column(k) * (proj[k] / eig.eigenvalues[k]);
                    }
                }
            }
            let pf = z * y;
            for (a, &i) in free.iter().enumerate() {
                p[i] = pf[a];
            }
        }
        let pmax = p.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if pmax <= step_tol && !unbounded {
            let nu = if m > 0 {
                free.iter().map(|&i| g[i]).sum::<f64>() / m as f64
            } else {
                0.0
            };
            let mut worst: Option<(f64, usize)> = None;
            for i in 0..n {
                if fixed[i] {
                    let lambda = g[i] - nu;
                    if lambda < -mult_tol && worst.is_none_or(|(l, _)| lambda < l) {
                        worst = Some((lambda, i));
                    }
                }
            }
            match worst {
                Some((_, i)) => {
                    fixed[i] = false;
                    continue;
                }
                None => return Ok(finish(q, c, w, iter)),
            }
        }
        let mut alpha = if unbounded { f64::INFINITY } else { 1.0 };
        let mut block = None;
        for &i in &free {
            if p[i] < 0.0 {
                let a = w[i] / -p[i];
                if a < alpha {
                    alpha = a;
                    block = Some(i);
                }
            }
        }
        if !alpha.is_finite() {
            return Err(Error::numerical("QP descent direction is unbounded"));
        }
        for &i in &free {
            w[i] += alpha * p[i];
        }
        if let Some(i) = block {
            w[i] = 0.0;
            fixed[i] = true;
        }
        for &i in &free {
            if w[i] < 0.0 {
                w[i] = 0.0;
            }
        }
    }
    Err(Error::numerical(format!(
        "active-set QP did not converge in {max_iter} iterations"
    )))
}

fn finish(q: &DMatrix<f64>, c: &DVector<f64>, mut w: Vec<f64>, iterations: usize) -> QpSolution {
    for v in w.iter_mut() {
        if *v < 1e-15 {
            *v = 0.0;
        }
    }
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    QpSolution {
        objective: objective(q, c, &w),
        kkt_residual: kkt_residual(q, c, &w),
        iterations,
        w,
    }
}

/// Independent reference solvers used by the test suites.
#[cfg(test)]
pub(crate) mod oracle {
    use super::*;

    /// Euclidean projection onto the simplex (sort-based).
    pub fn project_simplex(v: &[f64]) -> Vec<f64> {
        let mut u = v.to_vec();
        u.sort_by(|a, b| b.total_cmp(a));
        let mut css = 0.0;
        let mut theta = 0.0;
        for (k, &x) in u.iter().enumerate() {
            css += x;
            let t = (css - 1.0) / (k + 1) as f64;
            if x - t > 0.0 {
                theta = t;
            }
        }
        v.iter().map(|x| (x - theta).max(0.0)).collect()
    }

    /// Accelerated projected gradient with restarts.
    pub fn fista(q: &DMatrix<f64>, c: &DVector<f64>, iters: usize) -> Vec<f64> {
        let n = c.len();
        let lip = SymmetricEigen::new((q + q.transpose()) * 0.5)
            .eigenvalues
            .max()
            .max(1e-300);
        let mut x = vec![1.0 / n as f64; n];
        let mut y = x.clone();
        let mut t = 1.0f64;
        let mut fx = objective(q, c, &x);
        for _ in 0..iters {
            let g = q * DVector::from_column_slice(&y) + c;
            let step: Vec<f64> = (0..n).map(|i| y[i] - g[i] / lip).collect();
            let xn = project_simplex(&step);
            let fxn = objective(q, c, &xn);
            if fxn > fx {
                t = 1.0;
                y = x.clone();
                continue;
            }
            let tn = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            y = (0..n)
                .map(|i| xn[i] + (t - 1.0) / tn * (xn[i] - x[i]))
                .collect();
            x = xn;
            fx = fxn;
            t = tn;
        }
        x
    }

    /// Exact minimum by enumerating supports and solving each
    /// equality-constrained KKT system. Only for small `n`.
    pub fn enumerate(q: &DMatrix<f64>, c: &DVector<f64>) -> (Vec<f64>, f64) {
        let n = c.len();
        let mut best = (vec![], f64::INFINITY);
        for mask in 1u32..(1 << n) {
            let s: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let m = s.len();
            let mut kkt = DMatrix::zeros(m + 1, m + 1);
            let mut rhs = DVector::zeros(m + 1);
            for a in 0..m {
                for b in 0..m {
                    kkt[(a, b)] = q[(s[a], s[b])];
                }
                kkt[(a, m)] = 1.0;
                kkt[(m, a)] = 1.0;
                rhs[a] = -c[s[a]];
            }
            rhs[m] = 1.0;
            let Ok(sol) = kkt.clone().pseudo_inverse(1e-12).map(|p| p * &rhs) else {
                continue;
            };
            if (&kkt * &sol - &rhs).amax() > 1e-9 {
                continue;
            }
            if (0..m).any(|a| sol[a] < -1e-12) {
                continue;
            }
            let mut w = vec![0.0; n];
            for a in 0..m {
                w[s[a]] = sol[a].max(0.0);
            }
            let f = objective(q, c, &w);
            if f < best.1 {
                best = (w, f);
            }
        }
        best
    }
}
