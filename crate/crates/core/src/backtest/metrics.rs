use std::collections::BTreeMap;

/// Metric map; `None` marks a metric that is undefined for the run (for
/// example correlation against a constant series).
pub type Metrics = BTreeMap<String, Option<f64>>;

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance with denominator `n − 1`.
pub(crate) fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64
}

pub(crate) fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// TE, EMR, COR, INFO and TE_beas of portfolio returns against the index.
pub fn tracking_metrics(portfolio: &[f64], index: &[f64]) -> Metrics {
    let mut m = Metrics::new();
    let n = portfolio.len().min(index.len());
    if n == 0 {
        return m;
    }
    let dev: Vec<f64> = portfolio[..n]
        .iter()
        .zip(&index[..n])
        .map(|(p, i)| p - i)
        .collect();
    let ss: f64 = dev.iter().map(|d| d * d).sum();
    let te = ss / n as f64;
    let emr = mean(&dev);
    m.insert("TE".into(), Some(te));
    m.insert("EMR".into(), Some(emr));
    m.insert("COR".into(), pearson(&portfolio[..n], &index[..n]));
    m.insert("INFO".into(), (te > 0.0).then(|| emr / te));
    m.insert("TE_beas".into(), Some(ss.sqrt() / n as f64));
    m
}

/// Average absolute weight change between consecutive rebalancing windows,
/// `(1/N) Σ_r Σ_i |w_i^r − w_i^{r−1}|` over the `N` rebalances after the
/// first window. `None` for a single window.
pub fn turnover(history: &[Vec<f64>]) -> Option<f64> {
    if history.len() < 2 {
        return None;
    }
    let total: f64 = history
        .windows(2)
        .map(|w| {
            w[1].iter()
                .zip(&w[0])
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
        })
        .sum();
    Some(total / (history.len() - 1) as f64)
}

/// Mean, standard deviation, SR, CEQ and tail measures of a return series.
pub fn wealth_metrics(returns: &[f64], gamma: f64) -> Metrics {
    let mut m = Metrics::new();
    if returns.len() < 2 {
        return m;
    }
    let mu = mean(returns);
    let var = variance(returns);
    let sd = var.sqrt();
    m.insert("mean".into(), Some(mu));
    m.insert("std".into(), Some(sd));
    m.insert("SR".into(), (sd > 0.0).then(|| mu / sd));
    m.insert("CEQ".into(), Some(mu - 0.5 * gamma * var));

    let mut sorted = returns.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = ((0.05 * sorted.len() as f64).ceil() as usize).max(1);
    m.insert("VaR95".into(), Some(-sorted[k - 1]));
    m.insert("CVaR95".into(), Some(-mean(&sorted[..k])));
    let down: f64 = returns.iter().map(|r| r.min(0.0).powi(2)).sum::<f64>() / returns.len() as f64;
    m.insert("downside_dev".into(), Some(down.sqrt()));
    m
}
