//! Flat `key = value` run configuration.
//!
//! Lines starting with `#` and blank lines are ignored. Every key has a
//! default, so an empty file is valid apart from `data`, which the data
//! commands require. [`RunConfig::to_text`] writes every key and parses back
//! to an equal value.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::backtest::{ClusterAlgo, Strategy, StrategyConfig, WindowSpec};
use crate::casestudy::{CaseDistance, CaseMethod, CaseStudyConfig};
use crate::clustering::{ApcParams, Preference};
use crate::distances::{DistanceSpec, Homology};
use crate::error::{Error, Result};
use crate::market_data::{load_csv_prices, load_orlib_indtrack, IndexPosition, PricePanel};
use crate::portfolio::CardinalityBudget;
use crate::similarity::{KernelId, Scaling};

/// Overrides `output_dir` when set and non-empty.
pub const OUTPUT_DIR_ENV: &str = "TDAPORT_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    /// Header row, date column first, one price column per entity.
    Csv,
    /// OR-Library `indtrack` instance.
    Orlib,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub format: DataFormat,
    pub index_column: String,
    pub index_position: IndexPosition,

    pub kernel: KernelId,
    pub p: f64,
    pub embed_dim: usize,
    pub delay: usize,
    pub homology: Homology,
    /// `(ℓ, η)`; both `auto` or both set.
    pub subseries: Option<(usize, usize)>,
    pub weights: Option<Vec<f64>>,
    pub threshold: f64,
    pub scale_m: usize,
    /// Fixed kernel bandwidth; overrides local scaling when set.
    pub sigma2: Option<f64>,

    pub algo: ClusterAlgo,
    pub damping: f64,
    pub damping_grid: Vec<f64>,
    pub preference: Preference,
    pub max_iterations: usize,
    pub stable_iterations: usize,
    pub n_clusters: Option<usize>,
    pub k_min: usize,
    pub k_max: usize,

    pub strategy: Strategy,
    pub in_len: usize,
    pub out_len: usize,
    pub step: usize,
    pub gamma: f64,
    pub ms_size: usize,
    pub card_k_max: Option<usize>,
    pub card_time_secs: f64,
    pub card_max_evals: Option<usize>,

    pub case_k: usize,
    pub case_sigma2: f64,
    pub case_distances: Vec<CaseDistance>,
    pub case_methods: Vec<CaseMethod>,

    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = StrategyConfig::default();
        let c = CaseStudyConfig::default();
        Self {
            data: None,
            format: DataFormat::Csv,
            index_column: "index".into(),
            index_position: IndexPosition::First,
            kernel: s.kernel,
            p: s.distance.p,
            embed_dim: s.distance.embed_dim,
            delay: s.distance.delay,
            homology: s.distance.homology,
            subseries: None,
            weights: None,
            threshold: 0.0,
            scale_m: 7,
            sigma2: None,
            algo: s.algo,
            damping: s.apc.damping,
            damping_grid: s.damping_grid,
            preference: s.apc.preference,
            max_iterations: s.apc.max_iterations,
            stable_iterations: s.apc.stable_iterations,
            n_clusters: None,
            k_min: s.k_range.0,
            k_max: s.k_range.1,
            strategy: s.strategy,
            in_len: s.window.in_len,
            out_len: s.window.out_len,
            step: s.window.step,
            gamma: s.gamma,
            ms_size: s.ms_size,
            card_k_max: None,
            card_time_secs: s.card_budget.time.as_secs_f64(),
            card_max_evals: None,
            case_k: c.k,
            case_sigma2: c.sigma2,
            case_distances: c.distances,
            case_methods: c.methods,
            output_dir: PathBuf::from("out"),
            seed: 0,
        }
    }
}

fn bad(key: &str, value: &str, what: &str) -> Error {
    Error::config(format!("{key}: cannot parse '{value}' as {what}"))
}

fn float(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v.parse().map_err(|_| bad(key, v, "a number"))?;
    if x.is_nan() {
        return Err(bad(key, v, "a number"));
    }
    Ok(x)
}

fn int<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| bad(key, v, "a non-negative integer"))
}

fn auto<T>(v: &str, f: impl FnOnce(&str) -> Result<T>) -> Result<Option<T>> {
    if v.eq_ignore_ascii_case("auto") || v.eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        f(v).map(Some)
    }
}

fn list<T>(v: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    if v.is_empty() || v.eq_ignore_ascii_case("none") {
        return Ok(Vec::new());
    }
    v.split(',').map(|t| f(t.trim())).collect()
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    if items.is_empty() {
        return "none".into();
    }
    items.iter().map(f).collect::<Vec<_>>().join(",")
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "auto".into(), |x| x.to_string())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}: expected 'key = value'", k + 1)))?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::config(format!(
                    "line {}: duplicate key '{key}'",
                    k + 1
                )));
            }
            cfg.set(key, value.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Applies `key=value` (the form taken by `--set`).
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::config(format!("override '{assignment}' is not key=value")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "data" => self.data = (!v.is_empty()).then(|| PathBuf::from(v)),
            "format" => {
                self.format = match v.to_ascii_lowercase().as_str() {
                    "csv" => DataFormat::Csv,
                    "orlib" => DataFormat::Orlib,
                    _ => return Err(bad(key, v, "csv or orlib")),
                }
            }
            "index_column" => self.index_column = v.to_string(),
            "index_position" => {
                self.index_position = match v.to_ascii_lowercase().as_str() {
                    "first" => IndexPosition::First,
                    "last" => IndexPosition::Last,
                    _ => return Err(bad(key, v, "first or last")),
                }
            }
            "kernel" => self.kernel = KernelId::parse(v)?,
            "p" => self.p = float(key, v)?,
            "d" => self.embed_dim = int(key, v)?,
            "tau" => self.delay = int(key, v)?,
            "homology" => self.homology = Homology::parse(v)?,
            "subseries" => {
                self.subseries = auto(v, |s| {
                    let (l, e) = s.split_once(',').ok_or_else(|| bad(key, s, "'ell,eta'"))?;
                    Ok((int(key, l.trim())?, int(key, e.trim())?))
                })?
            }
            "weights" => {
                self.weights = if v.eq_ignore_ascii_case("uniform") {
                    None
                } else {
                    Some(list(v, |t| float(key, t))?)
                }
            }
            "threshold" => self.threshold = float(key, v)?,
            "m" => self.scale_m = int(key, v)?,
            "sigma2" => self.sigma2 = auto(v, |s| float(key, s))?,
            "algo" => self.algo = ClusterAlgo::parse(v)?,
            "damping" => self.damping = float(key, v)?,
            "damping_grid" => self.damping_grid = list(v, |t| float(key, t))?,
            "preference" => {
                self.preference = if v.eq_ignore_ascii_case("median") {
                    Preference::Median
                } else {
                    Preference::Value(float(key, v)?)
                }
            }
            "max_iterations" => self.max_iterations = int(key, v)?,
            "stable_iterations" => self.stable_iterations = int(key, v)?,
            "n_clusters" => self.n_clusters = auto(v, |s| int(key, s))?,
            "k_min" => self.k_min = int(key, v)?,
            "k_max" => self.k_max = int(key, v)?,
            "strategy" => self.strategy = Strategy::parse(v)?,
            "in_len" => self.in_len = int(key, v)?,
            "out_len" => self.out_len = int(key, v)?,
            "step" => self.step = int(key, v)?,
            "gamma" => self.gamma = float(key, v)?,
            "ms_size" => self.ms_size = int(key, v)?,
            "card_k_max" => self.card_k_max = auto(v, |s| int(key, s))?,
            "card_time_secs" => self.card_time_secs = float(key, v)?,
            "card_max_evals" => self.card_max_evals = auto(v, |s| int(key, s))?,
            "case_k" => self.case_k = int(key, v)?,
            "case_sigma2" => self.case_sigma2 = float(key, v)?,
            "case_distances" => self.case_distances = list(v, CaseDistance::parse)?,
            "case_methods" => self.case_methods = list(v, CaseMethod::parse)?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            "seed" => self.seed = int(key, v)?,
            _ => return Err(Error::config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Every key, one per line, in a fixed order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv(
            "data",
            self.data
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default(),
        );
        kv(
            "format",
            match self.format {
                DataFormat::Csv => "csv",
                DataFormat::Orlib => "orlib",
            }
            .into(),
        );
        kv("index_column", self.index_column.clone());
        kv(
            "index_position",
            match self.index_position {
                IndexPosition::First => "first",
                IndexPosition::Last => "last",
            }
            .into(),
        );
        kv("kernel", self.kernel.name().into());
        kv("p", self.p.to_string());
        kv("d", self.embed_dim.to_string());
        kv("tau", self.delay.to_string());
        kv("homology", self.homology.name().into());
        kv(
            "subseries",
            self.subseries
                .map_or_else(|| "auto".into(), |(l, e)| format!("{l},{e}")),
        );
        kv(
            "weights",
            self.weights
                .as_ref()
                .map_or_else(|| "uniform".into(), |w| join(w, f64::to_string)),
        );
        kv("threshold", self.threshold.to_string());
        kv("m", self.scale_m.to_string());
        kv("sigma2", opt(&self.sigma2));
        kv("algo", self.algo.name().into());
        kv("damping", self.damping.to_string());
        kv("damping_grid", join(&self.damping_grid, f64::to_string));
        kv(
            "preference",
            match self.preference {
                Preference::Median => "median".into(),
                Preference::Value(x) => x.to_string(),
            },
        );
        kv("max_iterations", self.max_iterations.to_string());
        kv("stable_iterations", self.stable_iterations.to_string());
        kv("n_clusters", opt(&self.n_clusters));
        kv("k_min", self.k_min.to_string());
        kv("k_max", self.k_max.to_string());
        kv("strategy", self.strategy.name().into());
        kv("in_len", self.in_len.to_string());
        kv("out_len", self.out_len.to_string());
        kv("step", self.step.to_string());
        kv("gamma", self.gamma.to_string());
        kv("ms_size", self.ms_size.to_string());
        kv("card_k_max", opt(&self.card_k_max));
        kv("card_time_secs", self.card_time_secs.to_string());
        kv("card_max_evals", opt(&self.card_max_evals));
        kv("case_k", self.case_k.to_string());
        kv("case_sigma2", self.case_sigma2.to_string());
        kv(
            "case_distances",
            join(&self.case_distances, |d| d.name().into()),
        );
        kv(
            "case_methods",
            join(&self.case_methods, |m| m.name().into()),
        );
        kv("output_dir", self.output_dir.display().to_string());
        kv("seed", self.seed.to_string());
        out
    }

    pub fn distance_spec(&self) -> DistanceSpec {
        DistanceSpec {
            kind: self.kernel.distance_kind(),
            p: self.p,
            embed_dim: self.embed_dim,
            delay: self.delay,
            homology: self.homology,
            subseries: self.subseries,
            weights: self.weights.clone(),
            persistence_threshold: self.threshold,
        }
    }

    pub fn scaling(&self) -> Scaling {
        match self.sigma2 {
            Some(sigma2) => Scaling::Fixed { sigma2 },
            None => Scaling::Local { m: self.scale_m },
        }
    }

    /// Validated backtest configuration.
    pub fn strategy_config(&self) -> Result<StrategyConfig> {
        if !(self.card_time_secs.is_finite() && self.card_time_secs >= 0.0) {
            return Err(Error::config(
                "card_time_secs must be a non-negative number of seconds",
            ));
        }
        if let Some(s) = self.sigma2 {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::config(format!("sigma2={s} must be positive")));
            }
        }
        if self.scale_m == 0 {
            return Err(Error::config("m must be at least 1"));
        }
        let cfg = StrategyConfig {
            strategy: self.strategy,
            kernel: self.kernel,
            distance: self.distance_spec(),
            scaling: self.scaling(),
            apc: ApcParams {
                damping: self.damping,
                preference: self.preference,
                max_iterations: self.max_iterations,
                stable_iterations: self.stable_iterations,
            },
            damping_grid: self.damping_grid.clone(),
            algo: self.algo,
            n_clusters: self.n_clusters,
            k_range: (self.k_min, self.k_max),
            window: WindowSpec {
                in_len: self.in_len,
                out_len: self.out_len,
                step: self.step,
            },
            gamma: self.gamma,
            ms_size: self.ms_size,
            card_k_max: self.card_k_max,
            card_budget: CardinalityBudget {
                time: Duration::from_secs_f64(self.card_time_secs),
                max_evaluations: self.card_max_evals,
            },
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn casestudy_config(&self) -> Result<CaseStudyConfig> {
        if self.case_distances.is_empty() || self.case_methods.is_empty() {
            return Err(Error::config(
                "case study needs at least one distance and one method",
            ));
        }
        let cfg = CaseStudyConfig {
            k: self.case_k,
            embed_dim: self.embed_dim,
            delay: self.delay,
            p: self.p,
            sigma2: self.case_sigma2,
            seed: self.seed,
            distances: self.case_distances.clone(),
            methods: self.case_methods.clone(),
        };
        DistanceSpec {
            p: cfg.p,
            embed_dim: cfg.embed_dim,
            delay: cfg.delay,
            ..DistanceSpec::default()
        }
        .validate()?;
        Ok(cfg)
    }

    pub fn data_path(&self) -> Result<&Path> {
        self.data
            .as_deref()
            .ok_or_else(|| Error::config("no data file configured (set 'data')"))
    }

    pub fn load_panel(&self) -> Result<PricePanel> {
        let path = self.data_path()?;
        match self.format {
            DataFormat::Csv => load_csv_prices(path, &self.index_column),
            DataFormat::Orlib => load_orlib_indtrack(path, self.index_position),
        }
    }

    /// `output_dir`, unless the environment override is set.
    pub fn resolved_output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => self.output_dir.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_roundtrip() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
        assert_eq!(RunConfig::parse("").unwrap(), c);
    }

    #[test]
    fn every_field_roundtrips() {
        let text = "\
# comment
data = prices/sp.csv
format = orlib
index_position = last
kernel = k5
p = inf
d = 3
tau = 2
homology = both
subseries = 40,20
weights = 0.25,0.75
threshold = 1e-9
sigma2 = 0.01
algo = kmedoids
damping = 0.7
damping_grid = none
preference = -3.5
n_clusters = 4
k_min = 2
k_max = 9
strategy = gmv-all
in_len = 21
out_len = 5
step = 5
gamma = 3
ms_size = 10
card_k_max = 3
card_time_secs = 0.25
card_max_evals = 1000
case_k = 5
case_sigma2 = 0.02
case_distances = WD,d1
case_methods = apc
output_dir = /tmp/x
seed = 42
";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.p, f64::INFINITY);
        assert_eq!(c.subseries, Some((40, 20)));
        assert_eq!(c.preference, Preference::Value(-3.5));
        assert!(c.damping_grid.is_empty());
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
        let s = c.strategy_config().unwrap();
        assert_eq!(s.scaling, Scaling::Fixed { sigma2: 0.01 });
        assert_eq!(s.card_budget.max_evaluations, Some(1000));
    }

    #[test]
    fn float_text_is_lossless() {
        let mut c = RunConfig::default();
        c.gamma = 0.1 + 0.2;
        c.damping_grid = vec![1.0 / 3.0, 0.123456789012345678];
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn errors_are_config_errors() {
        for text in [
            "kernel = K9",
            "nope = 1",
            "gamma",
            "d = -1",
            "p = abc",
            "seed = 1\nseed = 2",
        ] {
            let e = RunConfig::parse(text).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{text}: {e}");
        }
        let mut c = RunConfig::default();
        c.apply_override("gamma=0").unwrap();
        assert_eq!(c.strategy_config().unwrap_err().exit_code(), 2);
        assert!(c.apply_override("gamma").is_err());
        assert_eq!(
            RunConfig::default().load_panel().unwrap_err().exit_code(),
            2
        );
    }
}
