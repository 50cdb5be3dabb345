//! Seeded synthetic data: sector-structured price panels and control-chart
//! series with known class labels.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::PricePanel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorPanelSpec {
    pub n_sectors: usize,
    pub assets_per_sector: usize,
    /// Number of prices (returns are one fewer).
    pub periods: usize,
    /// Daily volatility of each sector factor.
    pub factor_vol: f64,
    /// Daily volatility of asset-specific noise.
    pub idio_vol: f64,
    /// Weight of each sector in the index; within a sector, constituents
    /// get random positive weights.
    pub index_mix: Vec<f64>,
    pub seed: u64,
}

impl Default for SectorPanelSpec {
    fn default() -> Self {
        Self {
            n_sectors: 3,
            assets_per_sector: 20,
            periods: 253,
            factor_vol: 0.012,
            idio_vol: 0.004,
            index_mix: vec![1.0, 0.0, 0.0],
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorPanel {
    pub panel: PricePanel,
    /// Planted sector of each asset.
    pub sectors: Vec<usize>,
    /// Constituent weight of each asset in the index.
    pub index_weights: Vec<f64>,
}

/// Assets follow `r = β f_sector + ε` in log returns; the index is the
/// weighted average of constituent simple returns, compounded into prices.
pub fn sector_panel(spec: &SectorPanelSpec) -> Result<SectorPanel> {
    if spec.n_sectors == 0 || spec.assets_per_sector == 0 || spec.periods < 3 {
        return Err(Error::config(
            "sector panel needs sectors, assets and at least 3 periods",
        ));
    }
    if spec.index_mix.len() != spec.n_sectors || spec.index_mix.iter().any(|w| *w < 0.0) {
        return Err(Error::config(
            "index mix must give one non-negative weight per sector",
        ));
    }
    let mix_total: f64 = spec.index_mix.iter().sum();
    if mix_total <= 0.0 {
        return Err(Error::config("index mix sums to zero"));
    }
    let factor = Normal::new(0.0, spec.factor_vol).map_err(|e| Error::config(e.to_string()))?;
    let idio = Normal::new(0.0, spec.idio_vol).map_err(|e| Error::config(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let t = spec.periods - 1;
    let factors: Vec<Vec<f64>> = (0..spec.n_sectors)
        .map(|_| (0..t).map(|_| 0.0003 + factor.sample(&mut rng)).collect())
        .collect();

    let n = spec.n_sectors * spec.assets_per_sector;
    let sectors: Vec<usize> = (0..n).map(|i| i / spec.assets_per_sector).collect();
    let mut asset_prices = Vec::with_capacity(n);
    let mut simple = Vec::with_capacity(n);
    for &s in &sectors {
        let beta = rng.gen_range(0.8..1.2);
        let mut p = vec![100.0];
        let mut r = Vec::with_capacity(t);
        for k in 0..t {
            let lr: f64 = beta * factors[s][k] + idio.sample(&mut rng);
            r.push(lr.exp_m1());
            p.push(p[k] * lr.exp());
        }
        asset_prices.push(p);
        simple.push(r);
    }

    let raw: Vec<f64> = sectors.iter().map(|_| rng.gen_range(0.5..1.5)).collect();
    let mut index_weights = vec![0.0; n];
    for s in 0..spec.n_sectors {
        let members: Vec<usize> = (0..n).filter(|&i| sectors[i] == s).collect();
        let total: f64 = members.iter().map(|&i| raw[i]).sum();
        for &i in &members {
            index_weights[i] = spec.index_mix[s] / mix_total * raw[i] / total;
        }
    }
    let mut index_prices = vec![1000.0];
    for k in 0..t {
        let r: f64 = (0..n).map(|i| index_weights[i] * simple[i][k]).sum();
        index_prices.push(index_prices[k] * (1.0 + r));
    }

    let dates = (0..spec.periods).map(|d| format!("{:04}", d)).collect();
    let ids = (0..n)
        .map(|i| format!("S{}A{:02}", sectors[i], i % spec.assets_per_sector))
        .collect();
    let panel = PricePanel::new(dates, "INDEX", index_prices, ids, asset_prices)?;
    Ok(SectorPanel {
        panel,
        sectors,
        index_weights,
    })
}

pub const CONTROL_CLASSES: [&str; 6] = [
    "normal",
    "cyclic",
    "increasing",
    "decreasing",
    "upward_shift",
    "downward_shift",
];

/// Control-chart series in the standard six-class layout (100 per class,
/// length 60, classes in blocks), generated from the usual pattern
/// definitions: mean 30, noise scale 2, cycles of amplitude and period in
/// [10, 15], trend slopes in [0.2, 0.5], shifts of size [7.5, 20] starting
/// between a third and two thirds of the series.
pub fn control_charts(per_class: usize, len: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut series = Vec::with_capacity(6 * per_class);
    let mut labels = Vec::with_capacity(6 * per_class);
    for class in 0..6 {
        for _ in 0..per_class {
            let a = rng.gen_range(10.0..15.0);
            let period = rng.gen_range(10.0..15.0);
            let g = rng.gen_range(0.2..0.5);
            let x = rng.gen_range(7.5..20.0);
            let t3 = rng.gen_range(len / 3..=2 * len / 3);
            let s: Vec<f64> = (0..len)
                .map(|t| {
                    let base = 30.0 + 2.0 * rng.gen_range(-3.0..3.0);
                    let tf = t as f64;
                    base + match class {
                        0 => 0.0,
                        1 => a * (2.0 * std::f64::consts::PI * tf / period).sin(),
                        2 => g * tf,
                        3 => -g * tf,
                        4 => {
                            if t >= t3 {
                                x
                            } else {
                                0.0
                            }
                        }
                        _ => {
                            if t >= t3 {
                                -x
                            } else {
                                0.0
                            }
                        }
                    }
                })
                .collect();
            series.push(s);
            labels.push(class);
        }
    }
    (series, labels)
}

/// Reads a whitespace-separated control-chart file (one series per line,
/// classes in consecutive equal blocks).
pub fn load_control_charts(path: &Path) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut series = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| Error::parse(path, k + 1, format!("bad number '{tok}'")))
            })
            .collect::<Result<_>>()?;
        if let Some(first) = series.first() {
            let first: &Vec<f64> = first;
            if first.len() != row.len() {
                return Err(Error::parse(
                    path,
                    k + 1,
                    "series length differs from the first line",
                ));
            }
        }
        series.push(row);
    }
    if series.is_empty() || series.len() % 6 != 0 {
        return Err(Error::parse(
            path,
            0,
            format!("{} series cannot form six equal classes", series.len()),
        ));
    }
    let per = series.len() / 6;
    let labels = (0..series.len()).map(|i| i / per).collect();
    Ok((series, labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_data::{compute_returns, ReturnKind};

    #[test]
    fn sector_panel_shape_and_index() {
        let sp = sector_panel(&SectorPanelSpec::default()).unwrap();
        assert_eq!(sp.panel.n_assets(), 60);
        assert_eq!(sp.panel.len(), 253);
        assert!((sp.index_weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(sp.index_weights[20..].iter().all(|w| *w == 0.0));
        let r = compute_returns(&sp.panel, ReturnKind::Simple);
        for k in 0..r.len() {
            let mix: f64 = (0..60)
                .map(|i| sp.index_weights[i] * r.asset_returns[i][k])
                .sum();
            assert!((mix - r.index_returns[k]).abs() < 1e-12);
        }
        assert_eq!(sector_panel(&SectorPanelSpec::default()).unwrap(), sp);
    }

    #[test]
    fn control_chart_classes() {
        let (s, l) = control_charts(100, 60, 7);
        assert_eq!(s.len(), 600);
        assert_eq!(l[99], 0);
        assert_eq!(l[100], 1);
        let inc = &s[200];
        let dec = &s[300];
        assert!(
            inc[59] - inc[0] > 0.0 || inc[50..].iter().sum::<f64>() > inc[..10].iter().sum::<f64>()
        );
        assert!(dec[50..].iter().sum::<f64>() < dec[..10].iter().sum::<f64>());
    }

    #[test]
    fn control_chart_file_roundtrip() {
        let (s, l) = control_charts(2, 10, 1);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cc.data");
        let text: String = s
            .iter()
            .map(|r| {
                r.iter()
                    .map(|v| format!("{v:.17e}"))
                    .collect::<Vec<_>>()
                    .join("  ")
                    + "\n"
            })
            .collect();
        std::fs::write(&p, text).unwrap();
        let (s2, l2) = load_control_charts(&p).unwrap();
        assert_eq!(s2, s);
        assert_eq!(l2, l);
        std::fs::write(&p, "1 2\n3\n").unwrap();
        assert!(load_control_charts(&p).is_err());
    }
}
