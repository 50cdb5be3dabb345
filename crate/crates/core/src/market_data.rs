//! Price panels, returns, rolling windows and sub-series plans.

use std::cmp::Ordering;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Aligned index and asset prices over a common date axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricePanel {
    dates: Vec<String>,
    index_id: String,
    index_prices: Vec<f64>,
    asset_ids: Vec<String>,
    /// One row per asset, each of length `dates.len()`.
    asset_prices: Vec<Vec<f64>>,
}

impl PricePanel {
    pub fn new(
        dates: Vec<String>,
        index_id: impl Into<String>,
        index_prices: Vec<f64>,
        asset_ids: Vec<String>,
        asset_prices: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let t = dates.len();
        if t < 2 {
            return Err(Error::invalid("price panel needs at least 2 dates"));
        }
        if index_prices.len() != t {
            return Err(Error::invalid("index series length differs from date axis"));
        }
        if asset_ids.len() != asset_prices.len() {
            return Err(Error::invalid(
                "asset id count differs from asset series count",
            ));
        }
        if asset_ids.is_empty() {
            return Err(Error::invalid("price panel has no assets"));
        }
        for (id, row) in asset_ids.iter().zip(&asset_prices) {
            if row.len() != t {
                return Err(Error::invalid(format!(
                    "asset {id}: series length differs from date axis"
                )));
            }
        }
        let all = std::iter::once(&index_prices).chain(asset_prices.iter());
        for series in all {
            if let Some(p) = series.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
                return Err(Error::invalid(format!("non-positive price {p}")));
            }
        }
        for w in dates.windows(2) {
            if compare_labels(&w[0], &w[1]) != Ordering::Less {
                return Err(Error::invalid(format!(
                    "dates not increasing: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self {
            dates,
            index_id: index_id.into(),
            index_prices,
            asset_ids,
            asset_prices,
        })
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn n_assets(&self) -> usize {
        self.asset_ids.len()
    }

    pub fn dates(&self) -> &[String] {
        &self.dates
    }

    pub fn index_id(&self) -> &str {
        &self.index_id
    }

    pub fn index_prices(&self) -> &[f64] {
        &self.index_prices
    }

    pub fn asset_ids(&self) -> &[String] {
        &self.asset_ids
    }

    pub fn asset_prices(&self) -> &[Vec<f64>] {
        &self.asset_prices
    }

    /// Copy of the panel with one asset price replaced; used by look-ahead checks.
    pub fn with_asset_price(&self, asset: usize, t: usize, price: f64) -> Result<Self> {
        let mut prices = self.asset_prices.clone();
        prices[asset][t] = price;
        Self::new(
            self.dates.clone(),
            self.index_id.clone(),
            self.index_prices.clone(),
            self.asset_ids.clone(),
            prices,
        )
    }

    /// CSV in the layout read by [`load_csv_prices`], index column first.
    pub fn to_csv(&self) -> String {
        let mut out = format!("date,{}", self.index_id);
        for id in &self.asset_ids {
            out.push(',');
            out.push_str(id);
        }
        out.push('\n');
        for (t, date) in self.dates.iter().enumerate() {
            out.push_str(date);
            out.push_str(&format!(",{}", self.index_prices[t]));
            for col in &self.asset_prices {
                out.push_str(&format!(",{}", col[t]));
            }
            out.push('\n');
        }
        out
    }
}

/// Date labels are opaque; numeric labels compare numerically, anything
/// else lexicographically (ISO dates sort correctly either way).
fn compare_labels(a: &str, b: &str) -> Ordering {
    match (a.trim().parse::<f64>(), b.trim().parse::<f64>()) {
        (Ok(x), Ok(y)) => x.partial_cmp(&y).unwrap_or(Ordering::Equal),
        _ => a.cmp(b),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReturnKind {
    Log,
    Simple,
}

/// Returns for the index and every asset; each series is one shorter than
/// the prices it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnPanel {
    pub kind: ReturnKind,
    /// Date label at the end of each return period.
    pub dates: Vec<String>,
    pub index_id: String,
    pub index_returns: Vec<f64>,
    pub asset_ids: Vec<String>,
    pub asset_returns: Vec<Vec<f64>>,
}

impl ReturnPanel {
    pub fn len(&self) -> usize {
        self.index_returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_returns.is_empty()
    }

    pub fn n_assets(&self) -> usize {
        self.asset_ids.len()
    }

    /// Entity `0` is the index, entity `i >= 1` is asset `i - 1`.
    pub fn entity_series(&self, entity: usize) -> &[f64] {
        if entity == 0 {
            &self.index_returns
        } else {
            &self.asset_returns[entity - 1]
        }
    }

    pub fn entity_ids(&self) -> Vec<String> {
        std::iter::once(self.index_id.clone())
            .chain(self.asset_ids.iter().cloned())
            .collect()
    }

    /// Restriction of every series to `range`.
    pub fn slice(&self, range: std::ops::Range<usize>) -> ReturnPanel {
        ReturnPanel {
            kind: self.kind,
            dates: self.dates[range.clone()].to_vec(),
            index_id: self.index_id.clone(),
            index_returns: self.index_returns[range.clone()].to_vec(),
            asset_ids: self.asset_ids.clone(),
            asset_returns: self
                .asset_returns
                .iter()
                .map(|r| r[range.clone()].to_vec())
                .collect(),
        }
    }
}

pub fn series_returns(prices: &[f64], kind: ReturnKind) -> Vec<f64> {
    prices
        .windows(2)
        .map(|w| match kind {
            ReturnKind::Simple => (w[1] - w[0]) / w[0],
            ReturnKind::Log => (w[1] / w[0]).ln(),
        })
        .collect()
}

pub fn compute_returns(panel: &PricePanel, kind: ReturnKind) -> ReturnPanel {
    ReturnPanel {
        kind,
        dates: panel.dates[1..].to_vec(),
        index_id: panel.index_id.clone(),
        index_returns: series_returns(&panel.index_prices, kind),
        asset_ids: panel.asset_ids.clone(),
        asset_returns: panel
            .asset_prices
            .iter()
            .map(|p| series_returns(p, kind))
            .collect(),
    }
}

/// Reads a comma-separated price file. The first column holds date labels,
/// the remaining columns prices; `index_column` names the benchmark.
///
/// Rows with an empty or `NA`/`NaN` cell are dropped; any other
/// unparseable cell or a non-positive price is an error.
pub fn load_csv_prices(path: impl AsRef<Path>, index_column: &str) -> Result<PricePanel> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?
        .clone();
    if headers.len() < 3 {
        return Err(Error::parse(
            path,
            1,
            "header needs a date column, the index and at least one asset",
        ));
    }
    let index_col = headers
        .iter()
        .skip(1)
        .position(|h| h == index_column)
        .map(|p| p + 1)
        .ok_or_else(|| Error::parse(path, 1, format!("index column '{index_column}' absent")))?;
    let asset_cols: Vec<usize> = (1..headers.len()).filter(|&c| c != index_col).collect();

    let mut dates: Vec<String> = Vec::new();
    let mut index_prices = Vec::new();
    let mut asset_prices: Vec<Vec<f64>> = vec![Vec::new(); asset_cols.len()];
    for (row_no, record) in reader.records().enumerate() {
        let line = row_no + 2;
        let record = record.map_err(|e| Error::parse(path, line, e.to_string()))?;
        if record.len() != headers.len() {
            return Err(Error::parse(
                path,
                line,
                format!("expected {} fields, found {}", headers.len(), record.len()),
            ));
        }
        let mut row = Vec::with_capacity(headers.len() - 1);
        let mut missing = false;
        for col in 1..headers.len() {
            let cell = &record[col];
            if cell.is_empty()
                || cell.eq_ignore_ascii_case("na")
                || cell.eq_ignore_ascii_case("nan")
            {
                missing = true;
                continue;
            }
            let value: f64 = cell.parse().map_err(|_| {
                Error::parse(
                    path,
                    line,
                    format!("unparseable cell '{cell}' in column {}", &headers[col]),
                )
            })?;
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::parse(
                    path,
                    line,
                    format!("non-positive price {value} in column {}", &headers[col]),
                ));
            }
            row.push((col, value));
        }
        if missing {
            continue;
        }
        let date = record[0].to_string();
        if let Some(prev) = dates.last() {
            if compare_labels(prev, &date) != Ordering::Less {
                return Err(Error::parse(
                    path,
                    line,
                    format!("dates not increasing: {prev} then {date}"),
                ));
            }
        }
        dates.push(date);
        for (col, value) in row {
            if col == index_col {
                index_prices.push(value);
            } else {
                let slot = asset_cols
                    .iter()
                    .position(|&c| c == col)
                    .expect("asset column");
                asset_prices[slot].push(value);
            }
        }
    }
    if dates.len() < 2 {
        return Err(Error::parse(
            path,
            dates.len() + 1,
            "fewer than 2 usable rows",
        ));
    }
    let asset_ids = asset_cols.iter().map(|&c| headers[c].to_string()).collect();
    PricePanel::new(dates, index_column, index_prices, asset_ids, asset_prices)
}

/// Where the index series sits inside an OR-Library `indtrack` file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexPosition {
    #[default]
    First,
    Last,
}

/// Number of weekly periods in the OR-Library index-tracking instances.
pub const ORLIB_PERIODS: usize = 291;

/// Loads an OR-Library `indtrack` instance.
///
/// The token stream starts with the stock count `N`. Three layouts are
/// recognised from the token count: `N` followed by `(N+1)·291` prices;
/// `N T` followed by `(N+1)·T` prices; and `N` followed by `N+1` blocks that
/// each start with their own period count `T`. Series are stored one after
/// another with the index at `position`.
pub fn load_orlib_indtrack(path: impl AsRef<Path>, position: IndexPosition) -> Result<PricePanel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut tokens = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| {
                Error::parse(
                    path,
                    line_no + 1,
                    format!("non-numeric token '{tok}' (token {})", tokens.len() + 1),
                )
            })?;
            tokens.push(v);
        }
    }
    parse_orlib_tokens(&tokens, position).map_err(|msg| Error::parse(path, 1, msg))
}

fn as_count(v: f64) -> Option<usize> {
    (v.is_finite() && v >= 1.0 && v.fract() == 0.0).then_some(v as usize)
}

fn parse_orlib_tokens(
    tokens: &[f64],
    position: IndexPosition,
) -> std::result::Result<PricePanel, String> {
    let n = tokens
        .first()
        .copied()
        .and_then(as_count)
        .ok_or("first token must be the stock count")?;
    let series_count = n + 1;
    let total = tokens.len();

    let series: Vec<Vec<f64>> = if total == 1 + series_count * ORLIB_PERIODS {
        tokens[1..]
            .chunks(ORLIB_PERIODS)
            .map(<[f64]>::to_vec)
            .collect()
    } else if let Some(t) = tokens
        .get(1)
        .copied()
        .and_then(as_count)
        .filter(|&t| total == 2 + series_count * t)
    {
        tokens[2..].chunks(t).map(<[f64]>::to_vec).collect()
    } else if let Some(t) = tokens
        .get(1)
        .copied()
        .and_then(as_count)
        .filter(|&t| total == 1 + series_count * (t + 1))
    {
        let mut out = Vec::with_capacity(series_count);
        for (i, block) in tokens[1..].chunks(t + 1).enumerate() {
            if as_count(block[0]) != Some(t) {
                return Err(format!(
                    "token count mismatch: series {i} declares {} periods, expected {t}",
                    block[0]
                ));
            }
            out.push(block[1..].to_vec());
        }
        out
    } else {
        return Err(format!(
            "token count mismatch: {total} tokens for N={n} (expected {} for 291 periods)",
            1 + series_count * ORLIB_PERIODS
        ));
    };

    let (index, assets): (Vec<f64>, Vec<Vec<f64>>) = match position {
        IndexPosition::First => (series[0].clone(), series[1..].to_vec()),
        IndexPosition::Last => (series[n].clone(), series[..n].to_vec()),
    };
    let t = index.len();
    let dates = (1..=t).map(|d| d.to_string()).collect();
    let ids = (1..=n).map(|i| format!("S{i}")).collect();
    PricePanel::new(dates, "INDEX", index, ids, assets).map_err(|e| e.to_string())
}

/// A rolling window over return indices: in-sample `[in_start, in_end)`
/// followed by out-of-sample `[out_start, out_end)` with `in_end == out_start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowPlan {
    pub in_start: usize,
    pub in_end: usize,
    pub out_start: usize,
    pub out_end: usize,
}

impl WindowPlan {
    pub fn in_sample(&self) -> std::ops::Range<usize> {
        self.in_start..self.in_end
    }

    pub fn out_of_sample(&self) -> std::ops::Range<usize> {
        self.out_start..self.out_end
    }
}

pub fn make_windows(
    t: usize,
    in_len: usize,
    out_len: usize,
    step: usize,
) -> Result<Vec<WindowPlan>> {
    if in_len == 0 || out_len == 0 {
        return Err(Error::config("window lengths must be positive"));
    }
    if step == 0 {
        return Err(Error::config("window step must be at least 1"));
    }
    if in_len + out_len > t {
        return Err(Error::config(format!(
            "window of {in_len}+{out_len} does not fit in {t} observations"
        )));
    }
    Ok((0..)
        .map(|k| k * step)
        .take_while(|offset| offset + in_len + out_len <= t)
        .map(|offset| WindowPlan {
            in_start: offset,
            in_end: offset + in_len,
            out_start: offset + in_len,
            out_end: offset + in_len + out_len,
        })
        .collect())
}

/// Overlapping sub-series of length `len` shifted by `shift`, with
/// `total - len == shift * (count - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubSeriesPlan {
    pub len: usize,
    pub shift: usize,
    pub count: usize,
}

impl SubSeriesPlan {
    pub fn new(total: usize, len: usize, shift: usize) -> Result<Self> {
        if len == 0 || len > total {
            return Err(Error::invalid(format!(
                "sub-series length {len} outside 1..={total}"
            )));
        }
        if shift == 0 || shift > len {
            return Err(Error::invalid(format!(
                "sub-series shift {shift} outside 1..={len}"
            )));
        }
        if (total - len) % shift != 0 {
            return Err(Error::invalid(format!(
                "series length {total} minus sub-series length {len} is not divisible by shift {shift}"
            )));
        }
        Ok(Self {
            len,
            shift,
            count: (total - len) / shift + 1,
        })
    }

    /// `len = ceil(total/3)`; `shift` is the divisor of `total - len` nearest
    /// to `ceil(len/2)` (smaller on ties), so the plan tiles the series.
    pub fn default_for(total: usize) -> Result<Self> {
        if total == 0 {
            return Err(Error::invalid("empty series"));
        }
        let len = total.div_ceil(3);
        let target = len.div_ceil(2);
        let span = total - len;
        let shift = if span == 0 {
            target.max(1)
        } else {
            (1..=len.min(span))
                .filter(|d| span % d == 0)
                .min_by_key(|&d| (d.abs_diff(target), d))
                .unwrap_or(1)
        };
        Self::new(total, len, shift)
    }

    pub fn total(&self) -> usize {
        self.len + self.shift * (self.count - 1)
    }
}

pub fn make_subseries(series: &[f64], len: usize, shift: usize) -> Result<Vec<&[f64]>> {
    let plan = SubSeriesPlan::new(series.len(), len, shift)?;
    Ok(subseries(series, &plan))
}

pub fn subseries<'a>(series: &'a [f64], plan: &SubSeriesPlan) -> Vec<&'a [f64]> {
    (0..plan.count)
        .map(|i| &series[i * plan.shift..i * plan.shift + plan.len])
        .collect()
}

/// Sub-series weights: positive and summing to one within `1e-9`.
pub fn validate_weights(weights: &[f64], count: usize) -> Result<()> {
    if weights.len() != count {
        return Err(Error::invalid(format!(
            "{} sub-series weights for {count} sub-series",
            weights.len()
        )));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::invalid("sub-series weights must be positive"));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "sub-series weights sum to {sum}, not 1"
        )));
    }
    Ok(())
}
