//! Long-only portfolio construction over the simplex.

mod cardinality;
pub mod qp;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::similarity::SimilarityMatrix;

pub use cardinality::{solve_it_cardinality, CardinalityBudget, CardinalityResult};
pub use qp::{solve_simplex_qp, QpSolution};

/// Weights over a list of assets; non-negative and summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Portfolio {
    pub ids: Vec<String>,
    pub weights: Vec<f64>,
}

impl Portfolio {
    /// Clips values below `1e-10` (including small negatives) to zero and
    /// renormalizes.
    pub fn from_weights(ids: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if ids.len() != weights.len() || ids.is_empty() {
            return Err(Error::invalid(
                "portfolio ids and weights differ in length or are empty",
            ));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < -1e-10) {
            return Err(Error::numerical("portfolio weight negative or non-finite"));
        }
        let mut weights: Vec<f64> = weights
            .into_iter()
            .map(|w| if w < 1e-10 { 0.0 } else { w })
            .collect();
        let s: f64 = weights.iter().sum();
        if s <= 0.0 {
            return Err(Error::numerical("portfolio weights sum to zero"));
        }
        weights.iter_mut().for_each(|w| *w /= s);
        Ok(Self { ids, weights })
    }

    pub fn equal(ids: Vec<String>) -> Result<Self> {
        let n = ids.len();
        Self::from_weights(ids, vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn weight(&self, id: &str) -> f64 {
        self.ids
            .iter()
            .position(|i| i == id)
            .map_or(0.0, |k| self.weights[k])
    }

    pub fn holdings(&self) -> usize {
        self.weights.iter().filter(|w| **w > 0.0).count()
    }

    /// Herfindahl–Hirschman concentration `Σ w_i²`.
    pub fn hhi(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }

    /// Portfolio return per period for asset return columns aligned with
    /// `ids`.
    pub fn returns(&self, columns: &[&[f64]]) -> Vec<f64> {
        let t = columns.first().map_or(0, |c| c.len());
        (0..t)
            .map(|s| {
                columns
                    .iter()
                    .zip(&self.weights)
                    .map(|(c, w)| w * c[s])
                    .sum()
            })
            .collect()
    }

    /// CSV `asset_id,weight` listing weights of at least `1e-10`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("asset_id,weight\n");
        for (id, w) in self.ids.iter().zip(&self.weights) {
            if *w >= 1e-10 {
                out.push_str(&format!("{id},{w:.16e}\n"));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimates {
    pub mu: DVector<f64>,
    pub sigma: DMatrix<f64>,
}

fn check_columns(columns: &[&[f64]], min_rows: usize) -> Result<usize> {
    let Some(first) = columns.first() else {
        return Err(Error::invalid("no asset columns"));
    };
    let t = first.len();
    if t < min_rows {
        return Err(Error::invalid(format!(
            "need at least {min_rows} observations, got {t}"
        )));
    }
    if columns.iter().any(|c| c.len() != t) {
        return Err(Error::invalid("asset columns differ in length"));
    }
    if columns.iter().any(|c| c.iter().any(|v| !v.is_finite())) {
        return Err(Error::numerical("non-finite return"));
    }
    Ok(t)
}

/// Sample mean and covariance (denominator `T − 1`) of return columns.
pub fn estimate_moments(columns: &[&[f64]]) -> Result<MomentEstimates> {
    let t = check_columns(columns, 2)?;
    let n = columns.len();
    let mu = DVector::from_fn(n, |i, _| columns[i].iter().sum::<f64>() / t as f64);
    let mut sigma = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = (0..t)
                .map(|s| (columns[i][s] - mu[i]) * (columns[j][s] - mu[j]))
                .sum::<f64>()
                / (t - 1) as f64;
            sigma[(i, j)] = v;
            sigma[(j, i)] = v;
        }
    }
    Ok(MomentEstimates { mu, sigma })
}

fn check_moments(est: &MomentEstimates) -> Result<()> {
    let n = est.mu.len();
    if n == 0 || est.sigma.nrows() != n || est.sigma.ncols() != n {
        return Err(Error::invalid("moment dimensions do not match"));
    }
    if est
        .mu
        .iter()
        .chain(est.sigma.iter())
        .any(|v| !v.is_finite())
    {
        return Err(Error::numerical("non-finite moment estimate"));
    }
    Ok(())
}

/// Weights maximizing `wᵀμ − (γ/2) wᵀΣw` over the simplex.
pub fn solve_mv(est: &MomentEstimates, gamma: f64) -> Result<Vec<f64>> {
    check_moments(est)?;
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::config(format!(
            "risk aversion {gamma} must be positive"
        )));
    }
    let q = qp::regularize(&est.sigma) * gamma;
    Ok(qp::solve_simplex_qp(&q, &(-&est.mu))?.w)
}

/// Weights minimizing `wᵀΣw` over the simplex.
pub fn solve_gmv(est: &MomentEstimates) -> Result<Vec<f64>> {
    check_moments(est)?;
    let q = qp::regularize(&est.sigma);
    Ok(qp::solve_simplex_qp(&q, &DVector::zeros(est.mu.len()))?.w)
}

/// `(1/T) Σ_t (Σ_i w_i R_{i,t} − r0_t)²`.
pub fn tracking_error(columns: &[&[f64]], r0: &[f64], w: &[f64]) -> f64 {
    let t = r0.len();
    (0..t)
        .map(|s| {
            let p: f64 = columns.iter().zip(w).map(|(c, wi)| wi * c[s]).sum();
            (p - r0[s]).powi(2)
        })
        .sum::<f64>()
        / t as f64
}

/// Quadratic form of the tracking objective: `Q = 2RᵀR/T`, `c = −2Rᵀr0/T`.
pub(crate) fn tracking_qp(columns: &[&[f64]], r0: &[f64]) -> (DMatrix<f64>, DVector<f64>) {
    let n = columns.len();
    let t = r0.len() as f64;
    let q = DMatrix::from_fn(n, n, |i, j| {
        2.0 * columns[i]
            .iter()
            .zip(columns[j])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / t
    });
    let c = DVector::from_fn(n, |i, _| {
        -2.0 * columns[i].iter().zip(r0).map(|(a, b)| a * b).sum::<f64>() / t
    });
    (q, c)
}

/// Simplex-constrained least squares tracking of `r0`. When the minimizer
/// is not unique, the active-set path from equal weights picks the result.
pub fn solve_index_tracking(columns: &[&[f64]], r0: &[f64]) -> Result<Vec<f64>> {
    let t = check_columns(columns, 1)?;
    if r0.len() != t {
        return Err(Error::invalid("index and asset returns differ in length"));
    }
    let (q, c) = tracking_qp(columns, r0);
    let q = (&q + q.transpose()) * 0.5;
    Ok(qp::solve_simplex_qp(&q, &c)?.w)
}

/// Entities (row/column positions other than 0, the index) with the `m`
/// largest similarities to the index; ties go to the smaller asset id.
/// Returned in ascending position order.
pub fn select_max_similarity(s: &SimilarityMatrix, m: usize) -> Result<Vec<usize>> {
    let n = s.len().saturating_sub(1);
    if m == 0 || m > n {
        return Err(Error::config(format!("selection size {m} outside 1..={n}")));
    }
    let ids = s.ids();
    let mut order: Vec<usize> = (1..=n).collect();
    order.sort_by(|&a, &b| {
        s.get(0, b)
            .total_cmp(&s.get(0, a))
            .then_with(|| ids[a].cmp(&ids[b]))
    });
    let mut chosen = order[..m].to_vec();
    chosen.sort_unstable();
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::LabeledMatrix;
    use crate::similarity::KernelId;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag(v: &[f64]) -> MomentEstimates {
        MomentEstimates {
            mu: DVector::zeros(v.len()),
            sigma: DMatrix::from_diagonal(&DVector::from_column_slice(v)),
        }
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn moments_examples() {
        let c = [0.1; 5];
        let e = estimate_moments(&[&c, &c]).unwrap();
        assert!(e.sigma.iter().all(|v| *v == 0.0));
        let e = estimate_moments(&[&[0.0, 0.2]]).unwrap();
        assert!((e.mu[0] - 0.1).abs() < 1e-15 && (e.sigma[(0, 0)] - 0.02).abs() < 1e-15);
        let a = [1.0, 2.0, 4.0];
        let b = [2.0, 0.0, 1.0];
        let e = estimate_moments(&[&a, &b]).unwrap();
        // means 7/3 and 1; var(a) = 7/3, var(b) = 1, cov = -1/2
        assert!((e.sigma[(0, 0)] - 7.0 / 3.0).abs() < 1e-14);
        assert!((e.sigma[(1, 1)] - 1.0).abs() < 1e-14);
        assert!((e.sigma[(0, 1)] + 0.5).abs() < 1e-14);
        assert!(estimate_moments(&[&[1.0]]).is_err());
    }

    #[test]
    fn mv_examples() {
        let mut e = diag(&[1.0, 1.0, 1.0]);
        e.mu = DVector::from_element(3, 0.2);
        assert!(close(&solve_mv(&e, 1.0).unwrap(), &[1.0 / 3.0; 3], 1e-12));
        let mut e = diag(&[1.0, 1.0]);
        e.mu = DVector::from_vec(vec![10.0, 0.0]);
        assert_eq!(solve_mv(&e, 1.0).unwrap(), vec![1.0, 0.0]);
        e.mu = DVector::from_vec(vec![0.5, 0.0]);
        assert!(close(&solve_mv(&e, 1.0).unwrap(), &[0.75, 0.25], 1e-12));
        assert!(solve_mv(&e, 0.0).is_err());
    }

    #[test]
    fn gmv_examples() {
        assert!(close(
            &solve_gmv(&diag(&[1.0, 4.0])).unwrap(),
            &[0.8, 0.2],
            1e-12
        ));
        assert!(close(
            &solve_gmv(&diag(&[1.0, 1.0])).unwrap(),
            &[0.5, 0.5],
            1e-12
        ));
        assert!(close(
            &solve_gmv(&diag(&[1.0, 1.0, 2.0])).unwrap(),
            &[0.4, 0.4, 0.2],
            1e-12
        ));
    }

    #[test]
    fn mv_tends_to_gmv() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cols: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..40).map(|_| rng.gen_range(-0.05..0.05)).collect())
            .collect();
        let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
        let e = estimate_moments(&refs).unwrap();
        let a = solve_mv(&e, 1e6).unwrap();
        let b = solve_gmv(&e).unwrap();
        assert!(close(&a, &b, 1e-4));
    }

    #[test]
    fn tracking_examples() {
        let a = [0.01, -0.02, 0.03, 0.0];
        let b = [0.02, 0.01, -0.01, 0.005];
        let idx: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * x + 0.5 * y).collect();
        let w = solve_index_tracking(&[&a, &b], &idx).unwrap();
        assert!(close(&w, &[0.5, 0.5], 1e-10));
        assert!(tracking_error(&[&a, &b], &idx, &w) < 1e-20);
        let c = [0.5, 0.1, -0.3, 0.2];
        let w = solve_index_tracking(&[&c, &a, &b], &a).unwrap();
        assert!(close(&w, &[0.0, 1.0, 0.0], 1e-10));
        assert!(solve_index_tracking(&[], &a).is_err());
    }

    #[test]
    fn tracking_matches_oracle_on_seeded_instance() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let cols: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..10).map(|_| rng.gen_range(-0.05..0.05)).collect())
            .collect();
        let r0: Vec<f64> = (0..10).map(|_| rng.gen_range(-0.05..0.05)).collect();
        let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
        let w = solve_index_tracking(&refs, &r0).unwrap();
        let (q, c) = tracking_qp(&refs, &r0);
        let (wo, _) = qp::oracle::enumerate(&q, &c);
        assert!((tracking_error(&refs, &r0, &w) - tracking_error(&refs, &r0, &wo)).abs() < 1e-6);
    }

    #[test]
    fn portfolio_rendering() {
        let p = Portfolio::from_weights(
            vec!["a".into(), "b".into(), "c".into()],
            vec![0.5, 0.5, -1e-12],
        )
        .unwrap();
        assert_eq!(p.weights[2], 0.0);
        assert_eq!(p.holdings(), 2);
        assert_eq!(p.to_csv().lines().count(), 3);
        assert_eq!(
            Portfolio::equal((0..4).map(|i| i.to_string()).collect())
                .unwrap()
                .hhi(),
            0.25
        );
    }

    fn sim_row(row: &[f64]) -> SimilarityMatrix {
        let n = row.len() + 1;
        let ids = std::iter::once("IDX".to_string())
            .chain((1..n).map(|i| format!("a{i}")))
            .collect();
        let matrix = LabeledMatrix::from_fn(ids, |i, j| {
            if i == j {
                1.0
            } else if i == 0 {
                row[j - 1]
            } else if j == 0 {
                row[i - 1]
            } else {
                0.0
            }
        });
        SimilarityMatrix {
            kernel: KernelId::K5,
            matrix,
        }
    }

    #[test]
    fn max_similarity_examples() {
        let s = sim_row(&[0.9, 0.2, 0.9, 0.5]);
        assert_eq!(select_max_similarity(&s, 2).unwrap(), vec![1, 3]);
        assert_eq!(select_max_similarity(&s, 1).unwrap(), vec![1]);
        assert_eq!(select_max_similarity(&s, 4).unwrap(), vec![1, 2, 3, 4]);
        assert!(select_max_similarity(&s, 5).is_err());
        assert!(select_max_similarity(&s, 0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;

        fn columns() -> impl Strategy<Value = Vec<Vec<f64>>> {
            (2usize..7, 3usize..20).prop_flat_map(|(n, t)| {
                proptest::collection::vec(proptest::collection::vec(-0.1f64..0.1, t), n)
            })
        }

        proptest! {
            #[test]
            fn gmv_beats_equal_weight(cols in columns()) {
                let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
                let e = estimate_moments(&refs).unwrap();
                let w = solve_gmv(&e).unwrap();
                let n = w.len();
                let eq = DVector::from_element(n, 1.0 / n as f64);
                let wv = DVector::from_column_slice(&w);
                prop_assert!(wv.dot(&(&e.sigma * &wv)) <= eq.dot(&(&e.sigma * &eq)) + 1e-12);
                prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-8);
                prop_assert!(w.iter().all(|v| *v >= 0.0));
            }

            #[test]
            fn tracking_zero_inside_hull(cols in columns(), seed in 0u64..1000) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let raw: Vec<f64> = (0..cols.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
                let s: f64 = raw.iter().sum();
                let t = cols[0].len();
                let r0: Vec<f64> = (0..t).map(|k| cols.iter().zip(&raw).map(|(c, a)| a / s * c[k]).sum()).collect();
                let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
                let w = solve_index_tracking(&refs, &r0).unwrap();
                prop_assert!(tracking_error(&refs, &r0, &w) < 1e-14);
            }
        }
    }
}
