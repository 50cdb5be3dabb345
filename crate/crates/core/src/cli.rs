//! Command-line front end.
//!
//! Every failure prints one line `error: code=N kind=K message=M` to stderr
//! and exits with `N` (2 configuration or usage, 3 data, 4 numerical).

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::backtest::{self, compare_reports, BacktestReport};
use crate::casestudy::{cells_csv, run_casestudy};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::market_data::{compute_returns, make_windows, ReturnKind, ReturnPanel};
use crate::similarity::build_kernel_matrix;
use crate::synth::load_control_charts;

#[derive(Debug, Parser)]
#[command(
    name = "tdaport",
    version,
    about = "Topological clustering and sparse portfolio backtests"
)]
struct Cli {
    /// Run configuration file (flat `key = value` lines).
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    /// Override one configuration key; repeatable.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the distance and kernel matrices of the index and assets.
    Distances {
        /// Use the in-sample part of this rolling window instead of the
        /// whole sample.
        #[arg(long)]
        window: Option<usize>,
    },
    /// Cluster the index and assets and write the assignment.
    Cluster {
        #[arg(long)]
        window: Option<usize>,
    },
    /// Run the configured strategy over rolling windows.
    Backtest,
    /// Clustering accuracy of each series distance on a labelled
    /// control-chart file.
    Casestudy {
        /// Whitespace-separated series, one per line, six equal class blocks.
        path: PathBuf,
    },
    /// Combine backtest reports into one metrics table plus pairwise tests
    /// against the first report.
    ReportMerge {
        #[arg(required = true, num_args = 1..)]
        reports: Vec<PathBuf>,
    },
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            if code != 0 {
                let first = e.to_string();
                let first = first
                    .lines()
                    .next()
                    .unwrap_or("usage error")
                    .trim_start_matches("error: ");
                eprintln!("error: code=2 kind=usage message={first}");
            }
            return code;
        }
    };
    match execute(&cli) {
        Ok(written) => {
            for p in written {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("{}", error_line(&e));
            e.exit_code()
        }
    }
}

/// The machine-parsable error line printed before a failing exit.
pub fn error_line(e: &Error) -> String {
    let msg = e.to_string().replace(['\n', '\r'], " ");
    format!(
        "error: code={} kind={} message={}",
        e.exit_code(),
        e.kind(),
        msg
    )
}

fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    for o in &cli.overrides {
        cfg.apply_override(o)?;
    }
    Ok(cfg)
}

struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Outputs {
    fn new(cfg: &RunConfig) -> Self {
        Self {
            dir: cfg.resolved_output_dir(),
            written: Vec::new(),
        }
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        write_atomic(&path, contents.as_bytes())?;
        self.written.push(path);
        Ok(())
    }
}

fn execute(cli: &Cli) -> Result<Vec<PathBuf>> {
    let cfg = resolve_config(cli)?;
    let mut out = Outputs::new(&cfg);
    match &cli.command {
        Command::Distances { window } => {
            let strategy = cfg.strategy_config()?;
            let sample = sample_returns(&cfg, *window)?;
            let (s, d) = build_kernel_matrix(
                &sample,
                strategy.kernel,
                &strategy.distance,
                strategy.scaling,
            )?;
            out.write("distances.csv", &d.to_csv())?;
            out.write("similarity.csv", &s.matrix.to_csv())?;
        }
        Command::Cluster { window } => {
            let strategy = cfg.strategy_config()?;
            let sample = sample_returns(&cfg, *window)?;
            let outcome = backtest::cluster_window(&sample, &strategy)?;
            out.write(
                "clusters.csv",
                &outcome.clustering.to_csv(outcome.distances.ids()),
            )?;
        }
        Command::Backtest => {
            let strategy = cfg.strategy_config()?;
            let panel = cfg.load_panel()?;
            let report = backtest::run(&panel, &strategy)?;
            out.write("config.txt", &cfg.to_text())?;
            out.write("report.json", &report.to_json()?)?;
            out.write("metrics.csv", &report.metrics_csv())?;
            for (k, csv) in report.cluster_csvs() {
                out.write(&format!("clusters/window_{k:04}.csv"), &csv)?;
            }
        }
        Command::Casestudy { path } => {
            let cs = cfg.casestudy_config()?;
            let (series, labels) = load_control_charts(path)?;
            let cells = run_casestudy(&series, &labels, &cs, |c, secs| {
                eprintln!(
                    "{} {} accuracy={:.4} ({secs:.1}s)",
                    c.distance.name(),
                    c.method.name(),
                    c.accuracy
                );
            })?;
            out.write("casestudy.csv", &cells_csv(&cells))?;
        }
        Command::ReportMerge { reports } => {
            let loaded = reports
                .iter()
                .map(|p| load_report(p))
                .collect::<Result<Vec<_>>>()?;
            let (metrics, tests) = merge_reports(&loaded)?;
            out.write("merged_metrics.csv", &metrics)?;
            out.write("merged_tests.csv", &tests)?;
        }
    }
    Ok(out.written)
}

/// Log returns of the whole sample or of one window's in-sample part.
fn sample_returns(cfg: &RunConfig, window: Option<usize>) -> Result<ReturnPanel> {
    let panel = cfg.load_panel()?;
    let log = compute_returns(&panel, ReturnKind::Log);
    let Some(k) = window else {
        return Ok(log);
    };
    let plans = make_windows(log.len(), cfg.in_len, cfg.out_len, cfg.step)?;
    let plan = plans.get(k).ok_or_else(|| {
        Error::config(format!("window {k} out of range ({} windows)", plans.len()))
    })?;
    Ok(log.slice(plan.in_sample()))
}

fn load_report(path: &Path) -> Result<(String, BacktestReport)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let report =
        BacktestReport::from_json(&text).map_err(|e| Error::parse(path, 0, e.to_string()))?;
    let label = path
        .parent()
        .and_then(|p| p.file_name())
        .filter(|_| path.file_stem().is_some_and(|s| s == "report"))
        .or_else(|| path.file_stem())
        .map_or_else(
            || path.display().to_string(),
            |s| s.to_string_lossy().into_owned(),
        );
    Ok((label, report))
}

fn num(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.16e}"))
}

/// Metrics table (`metric,<label>...`) and tests of every later report
/// against the first (`report,test,statistic,p_value`).
fn merge_reports(reports: &[(String, BacktestReport)]) -> Result<(String, String)> {
    let names: BTreeSet<&String> = reports.iter().flat_map(|(_, r)| r.metrics.keys()).collect();
    let mut metrics = String::from("metric");
    for (label, _) in reports {
        metrics.push(',');
        metrics.push_str(label);
    }
    metrics.push('\n');
    for name in names {
        metrics.push_str(name);
        for (_, r) in reports {
            let _ = write!(metrics, ",{}", num(r.metrics.get(name).copied().flatten()));
        }
        metrics.push('\n');
    }

    let mut tests = String::from("report,test,statistic,p_value\n");
    let (_, base) = &reports[0];
    for (label, r) in &reports[1..] {
        for (test, t) in compare_reports(r, base, base.config.gamma)? {
            let (s, p) = t.map_or((None, None), |t| (Some(t.statistic), Some(t.p_value)));
            let _ = writeln!(tests, "{label},{test},{},{}", num(s), num(p));
        }
    }
    Ok((metrics, tests))
}
