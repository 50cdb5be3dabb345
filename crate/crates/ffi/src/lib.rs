//! C ABI over `tdaport`.
//!
//! Handles are opaque pointers released with the matching `*_free`. Every
//! fallible call returns a status code (`TDA_OK` on success) and, on
//! failure, stores a message retrievable on the same thread through
//! [`tda_last_error`]. Panics never cross the boundary; they become
//! `TDA_ERR_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use tdaport::backtest::{self, BacktestReport};
use tdaport::config::RunConfig;
use tdaport::distances::{distance, DistanceKind, DistanceSpec};
use tdaport::market_data::{compute_returns, load_csv_prices, PricePanel, ReturnKind};
use tdaport::matrix::LabeledMatrix;
use tdaport::similarity::build_kernel_matrix;
use tdaport::Error;

pub const TDA_OK: i32 = 0;
/// Null pointer, bad UTF-8 or an inconsistent length argument.
pub const TDA_ERR_ARGUMENT: i32 = 1;
pub const TDA_ERR_CONFIG: i32 = 2;
pub const TDA_ERR_DATA: i32 = 3;
pub const TDA_ERR_NUMERICAL: i32 = 4;
pub const TDA_ERR_PANIC: i32 = 5;

/// Price panel: one index series and its constituents.
pub struct TdaPanel(PricePanel);

/// Square matrix with entity labels.
pub struct TdaMatrix(LabeledMatrix);

/// Completed backtest.
pub struct TdaReport(BacktestReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(i32, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.exit_code(), e.to_string())
    }
}

fn arg(msg: &str) -> Failure {
    Failure(TDA_ERR_ARGUMENT, msg.to_string())
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TDA_OK,
        Ok(Err(Failure(code, msg))) => {
            set_last_error(msg);
            code
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            TDA_ERR_PANIC
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(arg(&format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| arg(&format!("{what} is not UTF-8")))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(arg(&format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| arg(&format!("{what} is null")))
}

fn out<T>(p: *mut T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(arg(&format!("{what} output pointer is null")))
    } else {
        Ok(())
    }
}

unsafe fn config(text_ptr: *const c_char) -> Result<RunConfig, Failure> {
    if text_ptr.is_null() {
        return Ok(RunConfig::default());
    }
    Ok(RunConfig::parse(text(text_ptr, "config")?)?)
}

/// Message of the last failed call on this thread, or null if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tda_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn tda_clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tda_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a CSV price file (date column, then one column per entity).
///
/// # Safety
/// `path` and `index_column` must be NUL-terminated strings; `out_panel`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn tda_panel_load_csv(
    path: *const c_char,
    index_column: *const c_char,
    out_panel: *mut *mut TdaPanel,
) -> i32 {
    guard(|| {
        out(out_panel, "panel")?;
        let path = text(path, "path")?;
        let index = text(index_column, "index_column")?;
        let panel = load_csv_prices(Path::new(path), index)?;
        *out_panel = Box::into_raw(Box::new(TdaPanel(panel)));
        Ok(())
    })
}

/// Builds a panel from raw prices. `asset_prices` holds `n_assets` series
/// of `n_periods` prices each, one after another. Entities are named
/// `INDEX` and `A0`, `A1`, ...
///
/// # Safety
/// The arrays must hold `n_periods` and `n_assets * n_periods` values.
#[no_mangle]
pub unsafe extern "C" fn tda_panel_from_prices(
    n_periods: usize,
    n_assets: usize,
    index_prices: *const f64,
    asset_prices: *const f64,
    out_panel: *mut *mut TdaPanel,
) -> i32 {
    guard(|| {
        out(out_panel, "panel")?;
        let total = n_assets
            .checked_mul(n_periods)
            .ok_or_else(|| arg("panel size overflows"))?;
        let idx = slice(index_prices, n_periods, "index_prices")?;
        let assets = slice(asset_prices, total, "asset_prices")?;
        let columns = (0..n_assets)
            .map(|i| assets[i * n_periods..(i + 1) * n_periods].to_vec())
            .collect();
        let panel = PricePanel::new(
            (0..n_periods).map(|t| t.to_string()).collect(),
            "INDEX",
            idx.to_vec(),
            (0..n_assets).map(|i| format!("A{i}")).collect(),
            columns,
        )?;
        *out_panel = Box::into_raw(Box::new(TdaPanel(panel)));
        Ok(())
    })
}

/// # Safety
/// `panel` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tda_panel_free(panel: *mut TdaPanel) {
    if !panel.is_null() {
        drop(Box::from_raw(panel));
    }
}

/// # Safety
/// `panel` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn tda_panel_shape(
    panel: *const TdaPanel,
    out_periods: *mut usize,
    out_assets: *mut usize,
) -> i32 {
    guard(|| {
        let p = &handle(panel, "panel")?.0;
        out(out_periods, "periods")?;
        out(out_assets, "assets")?;
        *out_periods = p.len();
        *out_assets = p.n_assets();
        Ok(())
    })
}

/// Distance between two series. `kind` is one of `awd`, `abd`, `dwd`,
/// `ald`, `dld`, `wd`, `ld`, `spearman`, `pearson`, `euclid_sq`,
/// `euclidean`; sub-series use the default plan.
///
/// # Safety
/// `x` and `y` must hold `nx` and `ny` values; `kind` must be a
/// NUL-terminated string; `out_distance` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tda_distance(
    x: *const f64,
    nx: usize,
    y: *const f64,
    ny: usize,
    kind: *const c_char,
    p: f64,
    embed_dim: usize,
    delay: usize,
    out_distance: *mut f64,
) -> i32 {
    guard(|| {
        out(out_distance, "distance")?;
        let spec = DistanceSpec {
            kind: DistanceKind::parse(text(kind, "kind")?)?,
            p,
            embed_dim,
            delay,
            ..DistanceSpec::default()
        };
        *out_distance = distance(slice(x, nx, "x")?, slice(y, ny, "y")?, &spec)?;
        Ok(())
    })
}

/// Kernel similarity matrix (index first, then assets) over the whole
/// sample's log returns. `config_text` is `key = value` text as accepted by the
/// command line, or null for defaults.
///
/// # Safety
/// `panel` must be a live handle; `config_text` null or NUL-terminated;
/// `out_matrix` writable.
#[no_mangle]
pub unsafe extern "C" fn tda_similarity_matrix(
    panel: *const TdaPanel,
    config_text: *const c_char,
    out_matrix: *mut *mut TdaMatrix,
) -> i32 {
    guard(|| {
        out(out_matrix, "matrix")?;
        let p = &handle(panel, "panel")?.0;
        let cfg = config(config_text)?.strategy_config()?;
        let log = compute_returns(p, ReturnKind::Log);
        let (s, _) = build_kernel_matrix(&log, cfg.kernel, &cfg.distance, cfg.scaling)?;
        *out_matrix = Box::into_raw(Box::new(TdaMatrix(s.matrix)));
        Ok(())
    })
}

/// # Safety
/// `matrix` must be a live handle; `out_n` writable.
#[no_mangle]
pub unsafe extern "C" fn tda_matrix_size(matrix: *const TdaMatrix, out_n: *mut usize) -> i32 {
    guard(|| {
        out(out_n, "size")?;
        *out_n = handle(matrix, "matrix")?.0.len();
        Ok(())
    })
}

/// Copies the matrix row-major into `buf`, which must hold `n * n` values.
///
/// # Safety
/// `matrix` must be a live handle; `buf` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn tda_matrix_copy(
    matrix: *const TdaMatrix,
    buf: *mut f64,
    len: usize,
) -> i32 {
    guard(|| {
        let m = &handle(matrix, "matrix")?.0;
        let values = m.values();
        if len < values.len() {
            return Err(arg(&format!(
                "buffer holds {len} values, matrix needs {}",
                values.len()
            )));
        }
        out(buf, "buffer")?;
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
        Ok(())
    })
}

/// # Safety
/// `matrix` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tda_matrix_free(matrix: *mut TdaMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// Runs the configured strategy over rolling windows.
///
/// # Safety
/// `panel` must be a live handle; `config_text` null or NUL-terminated;
/// `out_report` writable.
#[no_mangle]
pub unsafe extern "C" fn tda_backtest(
    panel: *const TdaPanel,
    config_text: *const c_char,
    out_report: *mut *mut TdaReport,
) -> i32 {
    guard(|| {
        out(out_report, "report")?;
        let p = &handle(panel, "panel")?.0;
        let cfg = config(config_text)?.strategy_config()?;
        let report = backtest::run(p, &cfg)?;
        *out_report = Box::into_raw(Box::new(TdaReport(report)));
        Ok(())
    })
}

/// Looks up a report metric (`TE`, `SR`, ...). `out_defined` is set to 0
/// when the metric exists but is undefined for the run; an unknown name is
/// `TDA_ERR_ARGUMENT`.
///
/// # Safety
/// `report` must be a live handle; `name` NUL-terminated; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn tda_report_metric(
    report: *const TdaReport,
    name: *const c_char,
    out_value: *mut f64,
    out_defined: *mut i32,
) -> i32 {
    guard(|| {
        let r = &handle(report, "report")?.0;
        let name = text(name, "name")?;
        out(out_value, "value")?;
        out(out_defined, "defined")?;
        let v = r
            .metrics
            .get(name)
            .ok_or_else(|| arg(&format!("unknown metric '{name}'")))?;
        *out_defined = i32::from(v.is_some());
        *out_value = v.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// Concatenated out-of-sample portfolio returns. With `buf` null only the
/// count is reported through `out_len`.
///
/// # Safety
/// `report` must be a live handle; `buf` null or holding `len` values;
/// `out_len` writable.
#[no_mangle]
pub unsafe extern "C" fn tda_report_returns(
    report: *const TdaReport,
    buf: *mut f64,
    len: usize,
    out_len: *mut usize,
) -> i32 {
    guard(|| {
        let r = handle(report, "report")?.0.oos_returns();
        out(out_len, "length")?;
        *out_len = r.len();
        if buf.is_null() {
            return Ok(());
        }
        if len < r.len() {
            return Err(arg(&format!(
                "buffer holds {len} values, report has {}",
                r.len()
            )));
        }
        ptr::copy_nonoverlapping(r.as_ptr(), buf, r.len());
        Ok(())
    })
}

/// Report as JSON, allocated by the library; release with
/// [`tda_string_free`].
///
/// # Safety
/// `report` must be a live handle; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn tda_report_json(
    report: *const TdaReport,
    out_json: *mut *mut c_char,
) -> i32 {
    guard(|| {
        out(out_json, "json")?;
        let json = handle(report, "report")?.0.to_json()?;
        *out_json = CString::new(json)
            .map_err(|_| arg("report JSON contains NUL"))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tda_report_free(report: *mut TdaReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tda_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
