//! Rolling-window backtests of the clustering strategies and their
//! benchmarks.
//!
//! Every window estimates on its in-sample segment only: log returns feed
//! distances and kernels, simple returns feed moment estimates and tracking
//! fits. Weights are fixed at the window start and held over the
//! out-of-sample segment.

mod metrics;
pub mod stats;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::{
    affinity_propagation, affinity_propagation_k, hierarchical, k_medoids, select_damping,
    silhouette_score, ApcParams, Clustering,
};
use crate::distances::DistanceSpec;
use crate::error::{Error, Result};
use crate::market_data::{
    compute_returns, make_windows, PricePanel, ReturnKind, ReturnPanel, WindowPlan,
};
use crate::matrix::LabeledMatrix;
use crate::portfolio::{
    estimate_moments, select_max_similarity, solve_gmv, solve_index_tracking, solve_it_cardinality,
    solve_mv, tracking_error, CardinalityBudget, Portfolio,
};
use crate::similarity::{build_kernel_matrix, KernelId, Scaling, SimilarityMatrix};

pub use metrics::{tracking_metrics, turnover, wealth_metrics, Metrics};
pub use stats::{
    ceq_test, mean_difference_test, sharpe_z_test, ttest_one_tailed, TestResult, UpsilonForm,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// Tracking fit on the assets sharing the index's cluster.
    IndexTracking,
    /// Mean-variance on one exemplar per cluster.
    Mv,
    /// Global minimum variance on one exemplar per cluster.
    Gmv,
    /// Tracking fit on the `ms_size` assets most similar to the index.
    MaxSimilarity,
    /// Tracking fit with a cap on the number of holdings.
    CardinalityIt,
    /// Tracking fit on every asset.
    FullReplication,
    /// Equal weights on every asset.
    Naive,
    /// Mean-variance on every asset.
    MvAll,
    /// Global minimum variance on every asset.
    GmvAll,
}

impl Strategy {
    pub const ALL: [Strategy; 9] = [
        Strategy::IndexTracking,
        Strategy::Mv,
        Strategy::Gmv,
        Strategy::MaxSimilarity,
        Strategy::CardinalityIt,
        Strategy::FullReplication,
        Strategy::Naive,
        Strategy::MvAll,
        Strategy::GmvAll,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::IndexTracking => "index-tracking",
            Strategy::Mv => "mv",
            Strategy::Gmv => "gmv",
            Strategy::MaxSimilarity => "max-similarity",
            Strategy::CardinalityIt => "cardinality-it",
            Strategy::FullReplication => "full-replication",
            Strategy::Naive => "naive",
            Strategy::MvAll => "mv-all",
            Strategy::GmvAll => "gmv-all",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config(format!("unknown strategy '{s}'")))
    }

    fn needs_clustering(self) -> bool {
        matches!(self, Strategy::IndexTracking | Strategy::Mv | Strategy::Gmv)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClusterAlgo {
    Apc,
    KMedoids,
    Hierarchical,
}

impl ClusterAlgo {
    pub fn name(self) -> &'static str {
        match self {
            ClusterAlgo::Apc => "apc",
            ClusterAlgo::KMedoids => "kmedoids",
            ClusterAlgo::Hierarchical => "hierarchical",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        [
            ClusterAlgo::Apc,
            ClusterAlgo::KMedoids,
            ClusterAlgo::Hierarchical,
        ]
        .into_iter()
        .find(|k| k.name().eq_ignore_ascii_case(s))
        .ok_or_else(|| Error::config(format!("unknown clustering algorithm '{s}'")))
    }
}

/// Rolling window lengths in return periods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub in_len: usize,
    pub out_len: usize,
    pub step: usize,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            in_len: 126,
            out_len: 21,
            step: 21,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub strategy: Strategy,
    pub kernel: KernelId,
    /// Distance parameters; the distance kind itself follows the kernel.
    pub distance: DistanceSpec,
    pub scaling: Scaling,
    pub apc: ApcParams,
    /// Damping values tried per window, best mean silhouette kept. Empty
    /// means `apc.damping` alone.
    pub damping_grid: Vec<f64>,
    pub algo: ClusterAlgo,
    /// Fixed cluster count; `None` lets APC choose, and picks the count with
    /// the best silhouette within `k_range` for the other algorithms.
    pub n_clusters: Option<usize>,
    pub k_range: (usize, usize),
    pub window: WindowSpec,
    /// Risk aversion for MV and CEQ.
    pub gamma: f64,
    /// Size of the max-similarity selection (also the index-cluster fallback).
    pub ms_size: usize,
    /// Holding cap for the cardinality benchmark; `None` uses the size of
    /// the index-cluster selection in the same window.
    pub card_k_max: Option<usize>,
    pub card_budget: CardinalityBudget,
    pub seed: u64,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::IndexTracking,
            kernel: KernelId::K2,
            distance: DistanceSpec::default(),
            scaling: Scaling::default(),
            apc: ApcParams::default(),
            damping_grid: vec![0.5, 0.6, 0.7, 0.8, 0.9],
            algo: ClusterAlgo::Apc,
            n_clusters: None,
            k_range: (10, 50),
            window: WindowSpec::default(),
            gamma: 1.0,
            ms_size: 20,
            card_k_max: None,
            card_budget: CardinalityBudget::default(),
            seed: 0,
        }
    }
}

impl StrategyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::config(format!(
                "gamma={} must be positive",
                self.gamma
            )));
        }
        if self.ms_size == 0 {
            return Err(Error::config("max-similarity size must be at least 1"));
        }
        if self.k_range.0 < 2 || self.k_range.0 > self.k_range.1 {
            return Err(Error::config(format!(
                "cluster range {:?} must satisfy 2 <= lo <= hi",
                self.k_range
            )));
        }
        if self.n_clusters == Some(0) || self.card_k_max == Some(0) {
            return Err(Error::config(
                "cluster count and holding cap must be positive",
            ));
        }
        if let Some(&bad) = self.damping_grid.iter().find(|l| !(0.0..1.0).contains(*l)) {
            return Err(Error::config(format!("damping {bad} outside [0, 1)")));
        }
        if self.window.in_len < 2 || self.window.out_len == 0 || self.window.step == 0 {
            return Err(Error::config(
                "windows need in_len >= 2, out_len >= 1 and step >= 1",
            ));
        }
        self.apc.validate()?;
        self.distance.validate()
    }
}

/// Outcome of one rolling window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowResult {
    pub window: WindowPlan,
    /// Asset ids held (possibly with zero weight after the fit).
    pub selected: Vec<String>,
    pub portfolio: Portfolio,
    pub oos_returns: Vec<f64>,
    pub oos_index_returns: Vec<f64>,
    /// Mean squared in-sample deviation from the index.
    pub in_sample_te: f64,
    /// Partition of the index (entity 0) and the assets.
    pub clustering: Option<Clustering>,
    pub damping: Option<f64>,
    /// Set when the selection rule fell back: an index-only cluster for
    /// index tracking, or an index exemplar replaced by an asset.
    pub fallback: bool,
    /// Restricted fits spent by the cardinality heuristic.
    pub evaluations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub config: StrategyConfig,
    /// Index id followed by the asset ids; clustering labels refer to these.
    pub entity_ids: Vec<String>,
    pub windows: Vec<WindowResult>,
    pub metrics: Metrics,
    pub tests: BTreeMap<String, Option<TestResult>>,
    pub flags: Vec<String>,
}

impl BacktestReport {
    pub fn oos_returns(&self) -> Vec<f64> {
        self.windows
            .iter()
            .flat_map(|w| w.oos_returns.iter().copied())
            .collect()
    }

    pub fn oos_index_returns(&self) -> Vec<f64> {
        self.windows
            .iter()
            .flat_map(|w| w.oos_index_returns.iter().copied())
            .collect()
    }

    /// Start-of-window weights over every asset, one row per window.
    pub fn weight_history(&self) -> Vec<Vec<f64>> {
        self.windows
            .iter()
            .map(|w| {
                self.entity_ids[1..]
                    .iter()
                    .map(|id| w.portfolio.weight(id))
                    .collect()
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::invalid(format!("report serialization: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("report parse: {e}")))
    }

    /// `metric,value` rows; undefined metrics have an empty value.
    pub fn metrics_csv(&self) -> String {
        let mut out = String::from("metric,value\n");
        for (k, v) in &self.metrics {
            match v {
                Some(v) => out.push_str(&format!("{k},{v:.16e}\n")),
                None => out.push_str(&format!("{k},\n")),
            }
        }
        for (k, v) in &self.tests {
            if let Some(t) = v {
                out.push_str(&format!(
                    "{k}.stat,{:.16e}\n{k}.p,{:.16e}\n",
                    t.statistic, t.p_value
                ));
            } else {
                out.push_str(&format!("{k}.stat,\n{k}.p,\n"));
            }
        }
        out
    }

    /// Cluster assignment CSV per window that clustered.
    pub fn cluster_csvs(&self) -> Vec<(usize, String)> {
        self.windows
            .iter()
            .enumerate()
            .filter_map(|(k, w)| {
                w.clustering
                    .as_ref()
                    .map(|c| (k, c.to_csv(&self.entity_ids)))
            })
            .collect()
    }
}

struct Returns {
    log: ReturnPanel,
    simple: ReturnPanel,
}

/// Clustering of the index and assets over one sample.
#[derive(Debug, Clone)]
pub struct ClusterOutcome {
    pub clustering: Clustering,
    /// Damping used by APC (the grid winner when a grid is searched).
    pub damping: Option<f64>,
    pub similarity: SimilarityMatrix,
    pub distances: LabeledMatrix,
}

/// Cluster count in `range` (clipped to `2..n`) with the best silhouette on
/// `d`, smaller count on ties.
fn best_by_silhouette(
    d: &LabeledMatrix,
    range: (usize, usize),
    mut fit: impl FnMut(usize) -> Result<Clustering>,
) -> Result<Clustering> {
    let n = d.len();
    if n < 3 {
        return fit(1.max(n.min(2)));
    }
    let hi = range.1.min(n - 1);
    let lo = range.0.min(hi);
    let mut best: Option<(f64, Clustering)> = None;
    for k in lo..=hi {
        let c = fit(k)?;
        if c.n_clusters() < 2 {
            continue;
        }
        let s = silhouette_score(d, &c.labels)?;
        if best.as_ref().is_none_or(|b| s > b.0) {
            best = Some((s, c));
        }
    }
    match best {
        Some((_, c)) => Ok(c),
        None => fit(lo),
    }
}

/// Kernel matrix and clustering of entity 0 (the index) and every asset of
/// `log_returns`, as done for each in-sample window.
pub fn cluster_window(log_returns: &ReturnPanel, cfg: &StrategyConfig) -> Result<ClusterOutcome> {
    let (similarity, d) = build_kernel_matrix(log_returns, cfg.kernel, &cfg.distance, cfg.scaling)?;
    let s = &similarity.matrix;
    let (clustering, damping) = match cfg.algo {
        ClusterAlgo::Apc => match cfg.n_clusters {
            Some(k) => (
                affinity_propagation_k(s, k.min(s.len()), &cfg.apc)?,
                Some(cfg.apc.damping),
            ),
            None if cfg.damping_grid.is_empty() => {
                (affinity_propagation(s, &cfg.apc)?, Some(cfg.apc.damping))
            }
            None => {
                let sel = select_damping(s, &cfg.damping_grid, &d, &cfg.apc)?;
                (sel.clustering, Some(sel.damping))
            }
        },
        ClusterAlgo::KMedoids => {
            let fit = |k: usize| k_medoids(&d, k, cfg.seed).map(|r| r.clustering);
            match cfg.n_clusters {
                Some(k) => (fit(k.min(d.len()))?, None),
                None => (best_by_silhouette(&d, cfg.k_range, fit)?, None),
            }
        }
        ClusterAlgo::Hierarchical => match cfg.n_clusters {
            Some(k) => (hierarchical(&d, k.min(d.len()))?, None),
            None => (
                best_by_silhouette(&d, cfg.k_range, |k| hierarchical(&d, k))?,
                None,
            ),
        },
    };
    Ok(ClusterOutcome {
        clustering,
        damping,
        similarity,
        distances: d,
    })
}

/// Assets (0-based) sharing the index's cluster, or the max-similarity
/// selection when that cluster holds the index alone.
fn index_cluster_assets(out: &ClusterOutcome, ms_size: usize) -> Result<(Vec<usize>, bool)> {
    let c = &out.clustering;
    let assets: Vec<usize> = c
        .members(c.cluster_of(0))
        .into_iter()
        .filter(|&e| e != 0)
        .map(|e| e - 1)
        .collect();
    if !assets.is_empty() {
        return Ok((assets, false));
    }
    let m = ms_size.min(out.similarity.len() - 1);
    let picked = select_max_similarity(&out.similarity, m)?;
    Ok((picked.into_iter().map(|e| e - 1).collect(), true))
}

/// One asset (0-based) per cluster: the exemplar, or for the index's
/// cluster the non-index member with the largest total similarity to the
/// rest of the cluster (lowest entity on ties). Index-only clusters are
/// skipped.
fn exemplar_assets(out: &ClusterOutcome) -> Result<(Vec<usize>, bool)> {
    let c = &out.clustering;
    let s = &out.similarity;
    let mut picked = Vec::new();
    let mut substituted = false;
    for (k, &ex) in c.exemplars.iter().enumerate() {
        if ex != 0 {
            picked.push(ex - 1);
            continue;
        }
        let members = c.members(k);
        let mut best: Option<(usize, f64)> = None;
        for &i in members.iter().filter(|&&i| i != 0) {
            let total: f64 = members
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| s.get(i, j))
                .sum();
            if best.is_none_or(|b| total > b.1) {
                best = Some((i, total));
            }
        }
        if let Some((i, _)) = best {
            picked.push(i - 1);
            substituted = true;
        }
    }
    picked.sort_unstable();
    picked.dedup();
    if picked.is_empty() {
        return Err(Error::numerical(
            "every exemplar is the index; no asset to invest in",
        ));
    }
    Ok((picked, substituted))
}

fn columns<'a>(
    panel: &'a ReturnPanel,
    assets: &[usize],
    range: std::ops::Range<usize>,
) -> Vec<&'a [f64]> {
    assets
        .iter()
        .map(|&i| &panel.asset_returns[i][range.clone()])
        .collect()
}

fn run_window(data: &Returns, cfg: &StrategyConfig, plan: WindowPlan) -> Result<WindowResult> {
    let n = data.simple.n_assets();
    let ins = plan.in_sample();
    let all: Vec<usize> = (0..n).collect();
    let r0_in = &data.simple.index_returns[ins.clone()];

    let outcome = if cfg.strategy.needs_clustering()
        || (cfg.strategy == Strategy::CardinalityIt && cfg.card_k_max.is_none())
    {
        Some(cluster_window(&data.log.slice(ins.clone()), cfg)?)
    } else {
        None
    };
    let mut fallback = false;
    let mut evaluations = None;
    let (assets, weights): (Vec<usize>, Vec<f64>) = match cfg.strategy {
        Strategy::IndexTracking => {
            let (a, fb) = index_cluster_assets(outcome.as_ref().expect("clustered"), cfg.ms_size)?;
            fallback = fb;
            let w = solve_index_tracking(&columns(&data.simple, &a, ins.clone()), r0_in)?;
            (a, w)
        }
        Strategy::Mv | Strategy::Gmv => {
            let (a, sub) = exemplar_assets(outcome.as_ref().expect("clustered"))?;
            fallback = sub;
            let est = estimate_moments(&columns(&data.simple, &a, ins.clone()))?;
            let w = if cfg.strategy == Strategy::Mv {
                solve_mv(&est, cfg.gamma)?
            } else {
                solve_gmv(&est)?
            };
            (a, w)
        }
        Strategy::MvAll | Strategy::GmvAll => {
            let est = estimate_moments(&columns(&data.simple, &all, ins.clone()))?;
            let w = if cfg.strategy == Strategy::MvAll {
                solve_mv(&est, cfg.gamma)?
            } else {
                solve_gmv(&est)?
            };
            (all, w)
        }
        Strategy::MaxSimilarity => {
            let (s, _) = build_kernel_matrix(
                &data.log.slice(ins.clone()),
                cfg.kernel,
                &cfg.distance,
                cfg.scaling,
            )?;
            let a: Vec<usize> = select_max_similarity(&s, cfg.ms_size.min(n))?
                .into_iter()
                .map(|e| e - 1)
                .collect();
            let w = solve_index_tracking(&columns(&data.simple, &a, ins.clone()), r0_in)?;
            (a, w)
        }
        Strategy::CardinalityIt => {
            let k = match (cfg.card_k_max, &outcome) {
                (Some(k), _) => k,
                (None, Some(o)) => index_cluster_assets(o, cfg.ms_size)?.0.len(),
                (None, None) => unreachable!("clustering computed when no cap is set"),
            };
            let r = solve_it_cardinality(
                &columns(&data.simple, &all, ins.clone()),
                r0_in,
                k.min(n),
                cfg.card_budget,
            )?;
            evaluations = Some(r.evaluations);
            let w = r.support.iter().map(|&i| r.weights[i]).collect();
            (r.support, w)
        }
        Strategy::FullReplication => {
            let w = solve_index_tracking(&columns(&data.simple, &all, ins.clone()), r0_in)?;
            (all, w)
        }
        Strategy::Naive => (all.clone(), vec![1.0 / n as f64; n]),
    };

    let ids: Vec<String> = assets
        .iter()
        .map(|&i| data.simple.asset_ids[i].clone())
        .collect();
    let portfolio = Portfolio::from_weights(ids.clone(), weights)?;
    let outs = plan.out_of_sample();
    let oos_cols = columns(&data.simple, &assets, outs.clone());
    let oos_returns = if cfg.strategy == Strategy::Naive {
        // Plain cross-sectional mean, so the series equals the average
        // asset return bit for bit.
        (0..outs.len())
            .map(|t| oos_cols.iter().map(|c| c[t]).sum::<f64>() / n as f64)
            .collect()
    } else {
        portfolio.returns(&oos_cols)
    };
    let in_sample_te = tracking_error(
        &columns(&data.simple, &assets, ins),
        r0_in,
        &portfolio.weights,
    );
    let (clustering, damping) = match outcome {
        Some(o) => (Some(o.clustering), o.damping),
        None => (None, None),
    };
    Ok(WindowResult {
        window: plan,
        selected: ids,
        portfolio,
        oos_returns,
        oos_index_returns: data.simple.index_returns[outs].to_vec(),
        in_sample_te,
        clustering,
        damping,
        fallback,
        evaluations,
    })
}

fn summarize(
    cfg: &StrategyConfig,
    entity_ids: Vec<String>,
    windows: Vec<WindowResult>,
) -> BacktestReport {
    let mut report = BacktestReport {
        config: cfg.clone(),
        entity_ids,
        windows,
        metrics: Metrics::new(),
        tests: BTreeMap::new(),
        flags: Vec::new(),
    };
    let port = report.oos_returns();
    let index = report.oos_index_returns();
    let mut m = tracking_metrics(&port, &index);
    m.extend(wealth_metrics(&port, cfg.gamma));
    m.insert("TR".into(), turnover(&report.weight_history()));
    let nw = report.windows.len() as f64;
    m.insert(
        "HHI".into(),
        Some(
            report
                .windows
                .iter()
                .map(|w| w.portfolio.hhi())
                .sum::<f64>()
                / nw,
        ),
    );
    m.insert(
        "TE_in".into(),
        Some(report.windows.iter().map(|w| w.in_sample_te).sum::<f64>() / nw),
    );
    m.insert(
        "holdings".into(),
        Some(
            report
                .windows
                .iter()
                .map(|w| w.portfolio.holdings() as f64)
                .sum::<f64>()
                / nw,
        ),
    );
    m.insert("windows".into(), Some(nw));
    for (k, v) in &m {
        if v.is_none() {
            report.flags.push(format!("metric {k} undefined"));
        }
    }
    report.metrics = m;

    for (k, w) in report.windows.iter().enumerate() {
        if w.fallback {
            report.flags.push(match cfg.strategy {
                Strategy::IndexTracking | Strategy::CardinalityIt => {
                    format!("window {k}: index cluster held no assets; max-similarity selection (M={}) used", cfg.ms_size)
                }
                _ => format!("window {k}: index was an exemplar; replaced by its cluster's most central asset"),
            });
        }
    }

    let dev: Vec<f64> = port.iter().zip(&index).map(|(p, i)| p - i).collect();
    let mut tests = BTreeMap::new();
    let mut record = |name: &str, r: Result<TestResult>| {
        if let Err(e) = &r {
            report.flags.push(format!("test {name} unavailable: {e}"));
        }
        tests.insert(name.to_string(), r.ok());
    };
    record("EMR_ttest", ttest_one_tailed(&dev, 0.0));
    record(
        "SR_vs_index",
        sharpe_z_test(&port, &index, UpsilonForm::Printed),
    );
    record("CEQ_vs_index", ceq_test(&port, &index, cfg.gamma));
    report.tests = tests;
    report
}

/// Runs the configured strategy over every rolling window. Windows are
/// computed in parallel and reported in start order.
pub fn run(panel: &PricePanel, cfg: &StrategyConfig) -> Result<BacktestReport> {
    cfg.validate()?;
    let data = Returns {
        log: compute_returns(panel, ReturnKind::Log),
        simple: compute_returns(panel, ReturnKind::Simple),
    };
    let plans = make_windows(
        data.simple.len(),
        cfg.window.in_len,
        cfg.window.out_len,
        cfg.window.step,
    )?;
    let windows = plans
        .par_iter()
        .enumerate()
        .map(|(k, &plan)| run_window(&data, cfg, plan).map_err(|e| e.in_window(k)))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(cfg, data.simple.entity_ids(), windows))
}

fn require(cfg: &StrategyConfig, allowed: &[Strategy], op: &str) -> Result<()> {
    if allowed.contains(&cfg.strategy) {
        Ok(())
    } else {
        Err(Error::config(format!(
            "{op} cannot run strategy '{}'",
            cfg.strategy.name()
        )))
    }
}

/// Index tracking on the index's cluster.
pub fn run_strategy1(panel: &PricePanel, cfg: &StrategyConfig) -> Result<BacktestReport> {
    require(cfg, &[Strategy::IndexTracking], "strategy 1")?;
    run(panel, cfg)
}

/// MV or GMV on one exemplar per cluster.
pub fn run_strategy2(panel: &PricePanel, cfg: &StrategyConfig) -> Result<BacktestReport> {
    require(cfg, &[Strategy::Mv, Strategy::Gmv], "strategy 2")?;
    run(panel, cfg)
}

pub fn run_benchmark(panel: &PricePanel, cfg: &StrategyConfig) -> Result<BacktestReport> {
    require(
        cfg,
        &[
            Strategy::MaxSimilarity,
            Strategy::CardinalityIt,
            Strategy::FullReplication,
            Strategy::Naive,
            Strategy::MvAll,
            Strategy::GmvAll,
        ],
        "benchmark",
    )?;
    run(panel, cfg)
}

/// One-sided tests that report `a` beats `b` over the same out-of-sample
/// periods: Sharpe ratio, CEQ, mean return, and tracking (squared deviation
/// of `b` minus that of `a`).
pub fn compare_reports(
    a: &BacktestReport,
    b: &BacktestReport,
    gamma: f64,
) -> Result<BTreeMap<String, Option<TestResult>>> {
    let (ra, rb) = (a.oos_returns(), b.oos_returns());
    if ra.len() != rb.len() || a.oos_index_returns() != b.oos_index_returns() {
        return Err(Error::invalid(
            "reports cover different out-of-sample periods",
        ));
    }
    let idx = a.oos_index_returns();
    let sq =
        |r: &[f64]| -> Vec<f64> { r.iter().zip(&idx).map(|(p, i)| (p - i) * (p - i)).collect() };
    let (da, db) = (sq(&ra), sq(&rb));
    let gap: Vec<f64> = db.iter().zip(&da).map(|(x, y)| x - y).collect();
    let mut out = BTreeMap::new();
    out.insert(
        "SR".into(),
        sharpe_z_test(&ra, &rb, UpsilonForm::Printed).ok(),
    );
    out.insert("CEQ".into(), ceq_test(&ra, &rb, gamma).ok());
    out.insert("mean".into(), mean_difference_test(&ra, &rb).ok());
    out.insert("TE".into(), ttest_one_tailed(&gap, 0.0).ok());
    Ok(out)
}
