use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tdaport::market_data::PricePanel;
use tdaport::synth::{control_charts, sector_panel, SectorPanelSpec};

fn tdaport(args: &[&str], envs: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tdaport"));
    cmd.args(args).env_remove("TDAPORT_OUTPUT_DIR");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn error_code_line(o: &Output) -> String {
    stderr(o)
        .lines()
        .find(|l| l.starts_with("error: code="))
        .unwrap_or_else(|| panic!("no error line in {}", stderr(o)))
        .to_string()
}

fn toy_panel() -> PricePanel {
    let n = 40;
    let idx: Vec<f64> = (0..n)
        .map(|t| 100.0 + (t as f64 * 0.7).sin() * 3.0 + t as f64 * 0.1)
        .collect();
    let a: Vec<f64> = (0..n)
        .map(|t| 50.0 + (t as f64 * 0.7).sin() * 1.4)
        .collect();
    let b: Vec<f64> = (0..n)
        .map(|t| 20.0 + (t as f64 * 1.3).cos() + t as f64 * 0.05)
        .collect();
    let c: Vec<f64> = (0..n)
        .map(|t| 10.0 + ((t * 7919) % 13) as f64 * 0.1)
        .collect();
    PricePanel::new(
        (0..n).map(|t| t.to_string()).collect(),
        "IDX",
        idx,
        vec!["A".into(), "B".into(), "C".into()],
        vec![a, b, c],
    )
    .unwrap()
}

fn six_asset_panel(seed: u64) -> PricePanel {
    sector_panel(&SectorPanelSpec {
        n_sectors: 2,
        assets_per_sector: 3,
        periods: 71,
        index_mix: vec![0.7, 0.3],
        seed,
        ..SectorPanelSpec::default()
    })
    .unwrap()
    .panel
}

struct Setup {
    _dir: tempfile::TempDir,
    root: PathBuf,
    config: PathBuf,
}

fn setup(panel: &PricePanel, extra: &str) -> Setup {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    let data = root.join("prices.csv");
    std::fs::write(&data, panel.to_csv()).unwrap();
    let config = root.join("run.cfg");
    let text = format!(
        "data = {}\nindex_column = {}\noutput_dir = {}\n{extra}",
        data.display(),
        panel.index_id(),
        root.join("out").display()
    );
    std::fs::write(&config, text).unwrap();
    Setup {
        _dir: dir,
        root,
        config,
    }
}

fn run_ok(args: &[&str]) {
    let o = tdaport(args, &[]);
    assert!(o.status.success(), "{args:?} failed: {}", stderr(&o));
}

#[test]
fn k5_similarity_is_unit_diagonal_and_rerun_is_identical() {
    let s = setup(&toy_panel(), "kernel = K5\nm = 2\n");
    let cfg = s.config.to_str().unwrap();
    run_ok(&["distances", "--config", cfg]);
    let sim = std::fs::read_to_string(s.root.join("out/similarity.csv")).unwrap();
    let dist = std::fs::read(s.root.join("out/distances.csv")).unwrap();
    let rows: Vec<Vec<&str>> = sim.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0], ["id", "IDX", "A", "B", "C"]);
    for i in 1..5 {
        assert_eq!(rows[i].len(), 5);
        assert_eq!(rows[i][i].parse::<f64>().unwrap(), 1.0);
    }

    run_ok(&["distances", "--config", cfg]);
    assert_eq!(
        std::fs::read_to_string(s.root.join("out/similarity.csv")).unwrap(),
        sim
    );
    assert_eq!(
        std::fs::read(s.root.join("out/distances.csv")).unwrap(),
        dist
    );
}

#[test]
fn invalid_kernel_is_a_config_error() {
    let s = setup(&toy_panel(), "");
    let o = tdaport(
        &[
            "distances",
            "-c",
            s.config.to_str().unwrap(),
            "--set",
            "kernel=K9",
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
    let line = error_code_line(&o);
    assert!(
        line.starts_with("error: code=2 kind=config message="),
        "{line}"
    );
    assert!(line.contains("K9"));
}

#[test]
fn missing_data_file_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("no_such_prices.csv");
    let o = tdaport(
        &["backtest", "--set", &format!("data={}", missing.display())],
        &[],
    );
    assert_eq!(o.status.code(), Some(3));
    let line = error_code_line(&o);
    assert!(line.contains("kind=data"), "{line}");
    assert!(line.contains("no_such_prices.csv"), "{line}");
}

#[test]
fn usage_errors_exit_two() {
    let o = tdaport(&["frobnicate"], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(error_code_line(&o).contains("kind=usage"));
    let o = tdaport(&["--help"], &[]);
    assert_eq!(o.status.code(), Some(0));
}

const SMALL_WINDOWS: &str = "in_len = 30\nout_len = 10\nstep = 10\nm = 3\n";

#[test]
fn strategy1_backtest_writes_all_artifacts_deterministically() {
    let s = setup(&six_asset_panel(5), SMALL_WINDOWS);
    let cfg = s.config.to_str().unwrap();
    run_ok(&["backtest", "-c", cfg, "--set", "kernel=K2"]);
    let out = s.root.join("out");
    let report = std::fs::read(out.join("report.json")).unwrap();
    let metrics = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert!(metrics.starts_with("metric,value\n"));
    assert!(metrics.lines().any(|l| l.starts_with("TE,")));
    let windows = 4;
    for k in 0..windows {
        assert!(out.join(format!("clusters/window_{k:04}.csv")).exists());
    }
    let saved = std::fs::read_to_string(out.join("config.txt")).unwrap();
    assert!(saved.contains("kernel = K2"));

    run_ok(&["backtest", "-c", cfg, "--set", "kernel=K2"]);
    assert_eq!(std::fs::read(out.join("report.json")).unwrap(), report);
    assert_eq!(
        std::fs::read_to_string(out.join("metrics.csv")).unwrap(),
        metrics
    );

    // The saved configuration reproduces the run.
    run_ok(&["backtest", "-c", out.join("config.txt").to_str().unwrap()]);
    assert_eq!(std::fs::read(out.join("report.json")).unwrap(), report);
}

#[test]
fn output_dir_env_override() {
    let s = setup(&toy_panel(), "kernel = K6\nm = 2\n");
    let elsewhere = s.root.join("elsewhere");
    let o = tdaport(
        &["distances", "-c", s.config.to_str().unwrap()],
        &[("TDAPORT_OUTPUT_DIR", &elsewhere)],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(elsewhere.join("similarity.csv").exists());
    assert!(!s.root.join("out").exists());
}

#[test]
fn cluster_command_assigns_every_entity() {
    let s = setup(&six_asset_panel(2), SMALL_WINDOWS);
    run_ok(&[
        "cluster",
        "-c",
        s.config.to_str().unwrap(),
        "--window",
        "1",
        "--set",
        "kernel=K6",
    ]);
    let csv = std::fs::read_to_string(s.root.join("out/clusters.csv")).unwrap();
    assert_eq!(csv.lines().count(), 8);
    assert!(csv.starts_with("entity_id,cluster_id,is_exemplar\n"));
    let o = tdaport(
        &[
            "cluster",
            "-c",
            s.config.to_str().unwrap(),
            "--window",
            "99",
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_merge_tables() {
    let s = setup(&six_asset_panel(9), SMALL_WINDOWS);
    let cfg = s.config.to_str().unwrap();
    for strategy in ["naive", "full-replication"] {
        let dir = s.root.join(strategy);
        run_ok(&[
            "backtest",
            "-c",
            cfg,
            "--set",
            &format!("strategy={strategy}"),
            "--set",
            &format!("output_dir={}", dir.display()),
        ]);
    }
    let a = s.root.join("naive/report.json");
    let b = s.root.join("full-replication/report.json");
    run_ok(&[
        "report-merge",
        "-c",
        cfg,
        a.to_str().unwrap(),
        b.to_str().unwrap(),
    ]);
    let merged = std::fs::read_to_string(s.root.join("out/merged_metrics.csv")).unwrap();
    assert!(
        merged.starts_with("metric,naive,full-replication\n"),
        "{merged}"
    );
    let tests = std::fs::read_to_string(s.root.join("out/merged_tests.csv")).unwrap();
    assert_eq!(tests.lines().count(), 5);
    assert!(tests
        .lines()
        .skip(1)
        .all(|l| l.starts_with("full-replication,")));

    std::fs::write(s.root.join("bad.json"), "{").unwrap();
    let o = tdaport(
        &[
            "report-merge",
            "-c",
            cfg,
            s.root.join("bad.json").to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn casestudy_writes_accuracy_table() {
    let dir = tempfile::tempdir().unwrap();
    let (series, _) = control_charts(4, 30, 3);
    let text: String = series
        .iter()
        .map(|s| {
            s.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(" ")
                + "\n"
        })
        .collect();
    let data = dir.path().join("charts.data");
    std::fs::write(&data, text).unwrap();
    let out = dir.path().join("cs");
    run_ok(&[
        "casestudy",
        data.to_str().unwrap(),
        "--set",
        "case_distances=DWD,ED",
        "--set",
        &format!("output_dir={}", out.display()),
    ]);
    let csv = std::fs::read_to_string(out.join("casestudy.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 5);
    assert!(rows[1].starts_with("DWD,kmedoids,"));
    for r in &rows[1..] {
        let acc: f64 = r.split(',').nth(2).unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&acc));
    }

    std::fs::write(&data, "1 2 x\n").unwrap();
    let o = tdaport(
        &[
            "casestudy",
            data.to_str().unwrap(),
            "--set",
            &format!("output_dir={}", out.display()),
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(3));
}
