//! One-sided tests comparing two return series, upper tail throughout
//! (`H_a`: the first series is better).

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample covariance with denominator `n − 1`.
fn cov(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - mx) * (b - my))
        .sum::<f64>()
        / (x.len() - 1) as f64
}

fn upper_normal(z: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").sf(z)
}

fn pair(a: &[f64], b: &[f64], min: usize) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::invalid("series lengths differ"));
    }
    if a.len() < min {
        return Err(Error::invalid(format!("need at least {min} observations")));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::numerical("non-finite return"));
    }
    Ok(())
}

/// `t = (x̄ − μ0) / (S / √N)` with the upper-tail p-value of Student's t on
/// `N − 1` degrees of freedom.
pub fn ttest_one_tailed(sample: &[f64], mu0: f64) -> Result<TestResult> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::invalid("t-test needs at least 2 observations"));
    }
    let s = cov(sample, sample).sqrt();
    if !(s > 0.0) {
        return Err(Error::numerical("t-test sample has zero variance"));
    }
    let t = (mean(sample) - mu0) / (s / (n as f64).sqrt());
    let dist =
        StudentsT::new(0.0, 1.0, (n - 1) as f64).map_err(|e| Error::numerical(e.to_string()))?;
    Ok(TestResult {
        statistic: t,
        p_value: dist.sf(t),
    })
}

/// Paired mean comparison: t-test of `a − b` against zero.
pub fn mean_difference_test(a: &[f64], b: &[f64]) -> Result<TestResult> {
    pair(a, b, 2)?;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    ttest_one_tailed(&d, 0.0)
}

/// Variance term of the Sharpe-ratio difference test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum UpsilonForm {
    /// Linear mean terms `0.5 μ₁σ₂² + 0.5 μ₂σ₁²`.
    #[default]
    Printed,
    /// Squared mean terms `0.5 μ₁²σ₂² + 0.5 μ₂²σ₁²`.
    Memmel,
}

/// `z = (σ₂μ₁ − σ₁μ₂) / √Υ` with
/// `Υ = (2σ₁²σ₂² − 2σ₁σ₂σ₁₂ + ½m₁σ₂² + ½m₂σ₁² − μ₁μ₂σ₁₂²/(σ₁σ₂)) / n`,
/// where `m_i` is `μ_i` or `μ_i²` according to `form`. Moments use
/// denominator `n − 1`. Fails when `Υ ≤ 0`.
pub fn sharpe_z_test(a: &[f64], b: &[f64], form: UpsilonForm) -> Result<TestResult> {
    pair(a, b, 2)?;
    let n = a.len() as f64;
    let (m1, m2) = (mean(a), mean(b));
    let (v1, v2) = (cov(a, a), cov(b, b));
    if !(v1 > 0.0 && v2 > 0.0) {
        return Err(Error::numerical("Sharpe test needs non-zero variances"));
    }
    let (s1, s2) = (v1.sqrt(), v2.sqrt());
    let s12 = cov(a, b);
    let (t1, t2) = match form {
        UpsilonForm::Printed => (m1, m2),
        UpsilonForm::Memmel => (m1 * m1, m2 * m2),
    };
    let upsilon = (2.0 * v1 * v2 - 2.0 * s1 * s2 * s12 + 0.5 * t1 * v2 + 0.5 * t2 * v1
        - m1 * m2 / (s1 * s2) * s12 * s12)
        / n;
    let num = s2 * m1 - s1 * m2;
    if num == 0.0 {
        return Ok(TestResult {
            statistic: 0.0,
            p_value: 0.5,
        });
    }
    if !(upsilon > 0.0) {
        return Err(Error::numerical(format!(
            "Sharpe test variance term {upsilon:e} is not positive"
        )));
    }
    let z = num / upsilon.sqrt();
    Ok(TestResult {
        statistic: z,
        p_value: upper_normal(z),
    })
}

/// Delta-method z-test of `CEQ₁ − CEQ₂` with `CEQ = μ − (γ/2)σ²`. Under
/// joint normality the estimates `(μ₁, μ₂, σ₁², σ₂²)` have asymptotic
/// covariance blocks `[[σ₁², σ₁₂], [σ₁₂, σ₂²]]` for the means and
/// `[[2σ₁⁴, 2σ₁₂²], [2σ₁₂², 2σ₂⁴]]` for the variances, so with gradient
/// `(1, −1, −γ/2, γ/2)` the variance of the difference is
/// `(σ₁² + σ₂² − 2σ₁₂ + (γ²/2)(σ₁⁴ + σ₂⁴ − 2σ₁₂²)) / n`.
pub fn ceq_test(a: &[f64], b: &[f64], gamma: f64) -> Result<TestResult> {
    pair(a, b, 3)?;
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::config(format!(
            "risk aversion {gamma} must be positive"
        )));
    }
    let n = a.len() as f64;
    let (v1, v2, s12) = (cov(a, a), cov(b, b), cov(a, b));
    let diff = (mean(a) - 0.5 * gamma * v1) - (mean(b) - 0.5 * gamma * v2);
    let var =
        (v1 + v2 - 2.0 * s12 + 0.5 * gamma * gamma * (v1 * v1 + v2 * v2 - 2.0 * s12 * s12)) / n;
    let scale = (v1 + v2).max(f64::MIN_POSITIVE) / n;
    if diff == 0.0 && var <= 1e-12 * scale {
        return Ok(TestResult {
            statistic: 0.0,
            p_value: 0.5,
        });
    }
    if !(var > 1e-12 * scale) {
        return Err(Error::numerical("CEQ difference has degenerate variance"));
    }
    let z = diff / var.sqrt();
    Ok(TestResult {
        statistic: z,
        p_value: upper_normal(z),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal as N};

    fn seeded(seed: u64, n: usize, mu: f64, sd: f64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = N::new(mu, sd).unwrap();
        (0..n).map(|_| d.sample(&mut rng)).collect()
    }

    #[test]
    fn t_examples() {
        let r = ttest_one_tailed(&[1.0, 2.0, 3.0], 0.0).unwrap();
        assert!((r.statistic - 2.0 * 3f64.sqrt()).abs() < 1e-12);
        assert!((r.p_value - 0.0371).abs() < 1e-3);
        let r = ttest_one_tailed(&[1.0, 2.0, 3.0], 2.0).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 0.5).abs() < 1e-12);
        assert!(ttest_one_tailed(&[1.0], 0.0).is_err());
        assert!(ttest_one_tailed(&[1.0, 1.0], 0.0).is_err());
    }

    /// Second evaluation of the Sharpe statistic from raw sums.
    fn sharpe_oracle(a: &[f64], b: &[f64], squared: bool) -> f64 {
        let n = a.len() as f64;
        let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
        let (saa, sbb, sab): (f64, f64, f64) = (
            a.iter().map(|x| x * x).sum(),
            b.iter().map(|x| x * x).sum(),
            a.iter().zip(b).map(|(x, y)| x * y).sum(),
        );
        let (m1, m2) = (sa / n, sb / n);
        let v1 = (saa - n * m1 * m1) / (n - 1.0);
        let v2 = (sbb - n * m2 * m2) / (n - 1.0);
        let c = (sab - n * m1 * m2) / (n - 1.0);
        let (s1, s2) = (v1.sqrt(), v2.sqrt());
        let (k1, k2) = if squared {
            (m1 * m1, m2 * m2)
        } else {
            (m1, m2)
        };
        let ups = (2.0 * s1.powi(2) * s2.powi(2) - 2.0 * s1 * s2 * c
            + k1 * s2.powi(2) / 2.0
            + k2 * s1.powi(2) / 2.0
            - m1 * m2 * c.powi(2) / (s1 * s2))
            / n;
        (s2 * m1 - s1 * m2) / ups.sqrt()
    }

    #[test]
    fn sharpe_matches_reevaluation() {
        let a = seeded(1, 100, 0.05, 0.2);
        let b = seeded(2, 100, 0.01, 0.3);
        for (form, sq) in [(UpsilonForm::Printed, false), (UpsilonForm::Memmel, true)] {
            let z = sharpe_z_test(&a, &b, form).unwrap().statistic;
            let o = sharpe_oracle(&a, &b, sq);
            assert!((z - o).abs() < 1e-10 * o.abs().max(1.0), "{z} vs {o}");
        }
    }

    #[test]
    fn sharpe_identical_and_antithetic() {
        let a = seeded(3, 100, 0.05, 0.2);
        let r = sharpe_z_test(&a, &a, UpsilonForm::Printed).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 0.5));
        let neg: Vec<f64> = a.iter().map(|x| -x).collect();
        assert!(a.iter().sum::<f64>() > 0.0);
        assert!(
            sharpe_z_test(&a, &neg, UpsilonForm::Printed)
                .unwrap()
                .statistic
                > 0.0
        );
        assert!(
            sharpe_z_test(&a, &neg, UpsilonForm::Memmel)
                .unwrap()
                .statistic
                > 0.0
        );
        assert!(sharpe_z_test(&a, &[0.0; 100], UpsilonForm::Printed).is_err());
    }

    fn ceq_oracle(a: &[f64], b: &[f64], g: f64) -> f64 {
        let n = a.len() as f64;
        let m = |x: &[f64]| x.iter().sum::<f64>() / n;
        let c = |x: &[f64], y: &[f64]| {
            let (mx, my) = (m(x), m(y));
            x.iter()
                .zip(y)
                .map(|(p, q)| (p - mx) * (q - my))
                .sum::<f64>()
                / (n - 1.0)
        };
        let (v1, v2, s) = (c(a, a), c(b, b), c(a, b));
        let grad = [1.0, -1.0, -g / 2.0, g / 2.0];
        let theta = [
            [v1, s, 0.0, 0.0],
            [s, v2, 0.0, 0.0],
            [0.0, 0.0, 2.0 * v1 * v1, 2.0 * s * s],
            [0.0, 0.0, 2.0 * s * s, 2.0 * v2 * v2],
        ];
        let mut var = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                var += grad[i] * theta[i][j] * grad[j];
            }
        }
        ((m(a) - g / 2.0 * v1) - (m(b) - g / 2.0 * v2)) / (var / n).sqrt()
    }

    #[test]
    fn ceq_matches_reevaluation() {
        let a = seeded(4, 250, 0.001, 0.01);
        let b = seeded(5, 250, 0.0005, 0.012);
        for g in [1.0, 3.0] {
            let z = ceq_test(&a, &b, g).unwrap().statistic;
            let o = ceq_oracle(&a, &b, g);
            assert!((z - o).abs() < 1e-10 * o.abs().max(1.0));
        }
    }

    #[test]
    fn ceq_examples() {
        let a = seeded(6, 50, 0.001, 0.01);
        let r = ceq_test(&a, &a, 1.0).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 0.5));
        // A pure shift has zero delta-method variance; with independent
        // noise on top the higher-mean series wins.
        let shifted: Vec<f64> = a.iter().map(|x| x + 0.01).collect();
        assert!(ceq_test(&shifted, &a, 1.0).is_err());
        let noise = seeded(7, 50, 0.0, 0.001);
        let up: Vec<f64> = a.iter().zip(&noise).map(|(x, e)| x + 0.01 + e).collect();
        assert!(ceq_test(&up, &a, 1.0).unwrap().statistic > 0.0);
        assert!(ceq_test(&a, &up, 1.0).unwrap().statistic < 0.0);
        assert!(ceq_test(&a[..2], &a[..2], 1.0).is_err());
    }

    #[test]
    fn mean_test_orientation() {
        let a = seeded(8, 60, 0.01, 0.01);
        let b = seeded(9, 60, 0.0, 0.01);
        assert!(mean_difference_test(&a, &b).unwrap().statistic > 0.0);
    }
}
