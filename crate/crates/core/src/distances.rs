//! Distances between return series built on persistence summaries, plus
//! correlation and Euclidean baselines.
//!
//! Windowed variants (AWD, ABD, ALD) compare the summaries of matching
//! overlapping sub-series and average them with weights. Difference
//! variants (DWD, DLD) summarise the single series `x - y` and measure it
//! against the empty diagram.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::{subseries, validate_weights, SubSeriesPlan};
use crate::matrix::LabeledMatrix;
use crate::tda::{
    landscape, landscape_distance, landscape_norm, persistence_to_empty, rips_persistence,
    takens_embed, wasserstein, FiltrationSpec, PersistenceDiagram, PersistenceLandscape,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DistanceKind {
    /// Weighted mean Wasserstein distance over sub-series.
    Awd,
    /// `Awd` with `p = ∞`.
    Abd,
    /// Diagram of `x - y` against the empty diagram.
    Dwd,
    /// Weighted mean landscape distance over sub-series.
    Ald,
    /// Landscape norm of `x - y`.
    Dld,
    /// Wasserstein distance between full-series diagrams.
    Wd,
    /// Landscape distance between full-series landscapes.
    Ld,
    Spearman,
    Pearson,
    /// Squared Euclidean distance.
    EuclidSq,
    Euclidean,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 11] = [
        DistanceKind::Awd,
        DistanceKind::Abd,
        DistanceKind::Dwd,
        DistanceKind::Ald,
        DistanceKind::Dld,
        DistanceKind::Wd,
        DistanceKind::Ld,
        DistanceKind::Spearman,
        DistanceKind::Pearson,
        DistanceKind::EuclidSq,
        DistanceKind::Euclidean,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DistanceKind::Awd => "awd",
            DistanceKind::Abd => "abd",
            DistanceKind::Dwd => "dwd",
            DistanceKind::Ald => "ald",
            DistanceKind::Dld => "dld",
            DistanceKind::Wd => "wd",
            DistanceKind::Ld => "ld",
            DistanceKind::Spearman => "spearman",
            DistanceKind::Pearson => "pearson",
            DistanceKind::EuclidSq => "euclid_sq",
            DistanceKind::Euclidean => "euclidean",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config(format!("unknown distance '{s}'")))
    }

    fn is_topological(self) -> bool {
        !matches!(
            self,
            DistanceKind::Spearman
                | DistanceKind::Pearson
                | DistanceKind::EuclidSq
                | DistanceKind::Euclidean
        )
    }

    fn is_windowed(self) -> bool {
        matches!(
            self,
            DistanceKind::Awd | DistanceKind::Abd | DistanceKind::Ald
        )
    }

    fn uses_landscapes(self) -> bool {
        matches!(
            self,
            DistanceKind::Ald | DistanceKind::Dld | DistanceKind::Ld
        )
    }
}

/// Which homology dimensions feed the topological distances. With both,
/// per-dimension distances are combined as `(d0^p + d1^p)^{1/p}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Homology {
    H0,
    #[default]
    H1,
    Both,
}

impl Homology {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "0" | "h0" => Ok(Homology::H0),
            "1" | "h1" => Ok(Homology::H1),
            "both" | "01" | "h01" => Ok(Homology::Both),
            _ => Err(Error::config(format!("unknown homology selection '{s}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Homology::H0 => "0",
            Homology::H1 => "1",
            Homology::Both => "both",
        }
    }

    fn dims(self) -> &'static [u8] {
        match self {
            Homology::H0 => &[0],
            Homology::H1 => &[1],
            Homology::Both => &[0, 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceSpec {
    pub kind: DistanceKind,
    /// Wasserstein order / landscape norm exponent; `f64::INFINITY` allowed.
    pub p: f64,
    pub embed_dim: usize,
    pub delay: usize,
    pub homology: Homology,
    /// `(ℓ, η)`; `None` picks [`SubSeriesPlan::default_for`] per series length.
    pub subseries: Option<(usize, usize)>,
    /// Sub-series weights; `None` means uniform.
    pub weights: Option<Vec<f64>>,
    /// Diagram points with persistence at or below this are dropped.
    pub persistence_threshold: f64,
}

impl Default for DistanceSpec {
    fn default() -> Self {
        Self {
            kind: DistanceKind::Dwd,
            p: 1.0,
            embed_dim: 2,
            delay: 1,
            homology: Homology::H1,
            subseries: None,
            weights: None,
            persistence_threshold: 0.0,
        }
    }
}

impl DistanceSpec {
    pub fn with_kind(kind: DistanceKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    fn order(&self) -> f64 {
        if self.kind == DistanceKind::Abd {
            f64::INFINITY
        } else {
            self.p
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p.is_nan() || self.p < 1.0 {
            return Err(Error::config(format!("p={} must be >= 1", self.p)));
        }
        if self.embed_dim == 0 || self.delay == 0 {
            return Err(Error::config(
                "embedding dimension and delay must be at least 1",
            ));
        }
        if self.persistence_threshold < 0.0 || self.persistence_threshold.is_nan() {
            return Err(Error::config("persistence threshold must be >= 0"));
        }
        Ok(())
    }

    /// Sub-series plan and weights for series of length `t`.
    pub fn plan(&self, t: usize) -> Result<(SubSeriesPlan, Vec<f64>)> {
        let plan = if !self.kind.is_windowed() {
            SubSeriesPlan::new(t, t, t.max(1))?
        } else if let Some((len, shift)) = self.subseries {
            SubSeriesPlan::new(t, len, shift)?
        } else {
            SubSeriesPlan::default_for(t)?
        };
        let weights = match (&self.weights, self.kind.is_windowed()) {
            (Some(w), true) => {
                validate_weights(w, plan.count)?;
                w.clone()
            }
            _ => vec![1.0 / plan.count as f64; plan.count],
        };
        Ok((plan, weights))
    }
}

/// Persistence summary of one series (or sub-series) in the selected
/// homology dimensions.
#[derive(Debug, Clone)]
struct Summary {
    diagrams: Vec<PersistenceDiagram>,
    landscapes: Vec<PersistenceLandscape>,
}

fn summarize(series: &[f64], spec: &DistanceSpec, with_landscapes: bool) -> Result<Summary> {
    let cloud = takens_embed(series, spec.embed_dim, spec.delay)?;
    let max_dim = if spec.homology == Homology::H0 { 0 } else { 1 };
    let full = rips_persistence(
        &cloud,
        &FiltrationSpec {
            max_dim,
            max_radius: None,
        },
    )?;
    let mut diagrams = Vec::new();
    let mut landscapes = Vec::new();
    for &dim in spec.homology.dims() {
        // The essential class has no finite counterpart to match; it is
        // common to every diagram and carries no information here.
        let d = full
            .restrict(dim)
            .finite()
            .above(spec.persistence_threshold);
        if with_landscapes {
            landscapes.push(landscape(&d, None)?);
        }
        diagrams.push(d);
    }
    Ok(Summary {
        diagrams,
        landscapes,
    })
}

/// Persistence diagram of one series under `spec` (selected dimensions only,
/// essential class dropped).
pub fn series_diagram(series: &[f64], spec: &DistanceSpec) -> Result<PersistenceDiagram> {
    let s = summarize(series, spec, false)?;
    let features = s
        .diagrams
        .iter()
        .flat_map(|d| d.features().iter().copied())
        .collect();
    PersistenceDiagram::new(features)
}

fn combine(parts: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p.is_infinite() {
        parts.fold(0.0, f64::max)
    } else {
        let mut n = 0;
        let mut last = 0.0;
        let s: f64 = parts
            .inspect(|v| {
                n += 1;
                last = *v;
            })
            .map(|v| v.powf(p))
            .sum();
        // A single dimension is returned untouched to avoid a pow round trip.
        if n == 1 {
            last
        } else {
            s.powf(1.0 / p)
        }
    }
}

fn summary_distance(a: &Summary, b: &Summary, kind: DistanceKind, p: f64) -> Result<f64> {
    let vals: Result<Vec<f64>> = if kind.uses_landscapes() {
        a.landscapes
            .iter()
            .zip(&b.landscapes)
            .map(|(x, y)| landscape_distance(x, y, p))
            .collect()
    } else {
        a.diagrams
            .iter()
            .zip(&b.diagrams)
            .map(|(x, y)| wasserstein(x, y, p))
            .collect()
    };
    Ok(combine(vals?.into_iter(), p))
}

fn summary_to_empty(s: &Summary, kind: DistanceKind, p: f64) -> Result<f64> {
    let vals: Result<Vec<f64>> = if kind.uses_landscapes() {
        s.landscapes.iter().map(|l| landscape_norm(l, p)).collect()
    } else {
        s.diagrams
            .iter()
            .map(|d| persistence_to_empty(d, p))
            .collect()
    };
    Ok(combine(vals?.into_iter(), p))
}

fn check_lengths(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    Ok(())
}

/// Per-series precomputation so that a pairwise matrix summarises each
/// series once.
#[derive(Debug, Clone)]
struct SeriesSummary {
    parts: Vec<Summary>,
}

fn series_summary(x: &[f64], spec: &DistanceSpec) -> Result<SeriesSummary> {
    let (plan, _) = spec.plan(x.len())?;
    let parts = subseries(x, &plan)
        .into_iter()
        .map(|s| summarize(s, spec, spec.kind.uses_landscapes()))
        .collect::<Result<_>>()?;
    Ok(SeriesSummary { parts })
}

fn windowed_from_summaries(
    a: &SeriesSummary,
    b: &SeriesSummary,
    weights: &[f64],
    spec: &DistanceSpec,
) -> Result<f64> {
    let p = spec.order();
    let mut total = 0.0;
    for ((sa, sb), w) in a.parts.iter().zip(&b.parts).zip(weights) {
        total += w * summary_distance(sa, sb, spec.kind, p)?;
    }
    Ok(total)
}

fn difference_distance(x: &[f64], y: &[f64], spec: &DistanceSpec) -> Result<f64> {
    let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let s = summarize(&diff, spec, spec.kind.uses_landscapes())?;
    summary_to_empty(&s, spec.kind, spec.p)
}

/// Distance between two equal-length series under `spec.kind`.
pub fn distance(x: &[f64], y: &[f64], spec: &DistanceSpec) -> Result<f64> {
    spec.validate()?;
    check_lengths(x, y)?;
    match spec.kind {
        DistanceKind::Spearman => corr_distance(x, y, CorrKind::Spearman),
        DistanceKind::Pearson => corr_distance(x, y, CorrKind::Pearson),
        DistanceKind::EuclidSq => Ok(-euclid_sq_neg(x, y)?),
        DistanceKind::Euclidean => Ok((-euclid_sq_neg(x, y)?).sqrt()),
        DistanceKind::Dwd | DistanceKind::Dld => difference_distance(x, y, spec),
        _ => {
            let (_, weights) = spec.plan(x.len())?;
            let a = series_summary(x, spec)?;
            let b = series_summary(y, spec)?;
            windowed_from_summaries(&a, &b, &weights, spec)
        }
    }
}

fn with_kind(spec: &DistanceSpec, kind: DistanceKind) -> DistanceSpec {
    DistanceSpec {
        kind,
        ..spec.clone()
    }
}

/// Average Wasserstein distance; `p = ∞` gives the average bottleneck distance.
pub fn awd(x: &[f64], y: &[f64], spec: &DistanceSpec) -> Result<f64> {
    distance(x, y, &with_kind(spec, DistanceKind::Awd))
}

pub fn abd(x: &[f64], y: &[f64], spec: &DistanceSpec) -> Result<f64> {
    distance(x, y, &with_kind(spec, DistanceKind::Abd))
}

pub fn dwd(x: &[f64], y: &[f64], spec: &DistanceSpec) -> Result<f64> {
    distance(x, y, &with_kind(spec, DistanceKind::Dwd))
}

pub fn ald(x: &[f64], y: &[f64], spec: &DistanceSpec) -> Result<f64> {
    distance(x, y, &with_kind(spec, DistanceKind::Ald))
}

pub fn dld(x: &[f64], y: &[f64], spec: &DistanceSpec) -> Result<f64> {
    distance(x, y, &with_kind(spec, DistanceKind::Dld))
}

pub fn wd(x: &[f64], y: &[f64], spec: &DistanceSpec) -> Result<f64> {
    distance(x, y, &with_kind(spec, DistanceKind::Wd))
}

pub fn ld(x: &[f64], y: &[f64], spec: &DistanceSpec) -> Result<f64> {
    distance(x, y, &with_kind(spec, DistanceKind::Ld))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorrKind {
    Spearman,
    Pearson,
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::numerical(
            "correlation undefined for a constant series",
        ));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

pub fn correlation(x: &[f64], y: &[f64], kind: CorrKind) -> Result<f64> {
    check_lengths(x, y)?;
    if x.len() < 2 {
        return Err(Error::invalid("correlation needs at least 2 observations"));
    }
    match kind {
        CorrKind::Pearson => pearson(x, y),
        CorrKind::Spearman => pearson(&ranks(x), &ranks(y)),
    }
}

/// `sqrt(2(1 - ρ))`, in `[0, 2]`.
pub fn corr_distance(x: &[f64], y: &[f64], kind: CorrKind) -> Result<f64> {
    let rho = correlation(x, y, kind)?;
    Ok((2.0 * (1.0 - rho)).max(0.0).sqrt())
}

/// `-Σ (x_t - y_t)^2`; a similarity rather than a distance.
pub fn euclid_sq_neg(x: &[f64], y: &[f64]) -> Result<f64> {
    check_lengths(x, y)?;
    Ok(-x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
}

/// Pairwise distances between `series` (entity order preserved). Each
/// series is summarised once; pairs are evaluated in parallel and written
/// back by index, so the result does not depend on scheduling.
pub fn distance_matrix(
    ids: Vec<String>,
    series: &[&[f64]],
    spec: &DistanceSpec,
) -> Result<LabeledMatrix> {
    spec.validate()?;
    let n = series.len();
    if ids.len() != n {
        return Err(Error::invalid("identifier count differs from series count"));
    }
    if let Some(first) = series.first() {
        if let Some(bad) = series.iter().position(|s| s.len() != first.len()) {
            return Err(Error::invalid(format!(
                "series {} has length {}, expected {}",
                ids[bad],
                series[bad].len(),
                first.len()
            )));
        }
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();

    let values: Vec<f64> = if spec.kind.is_topological()
        && !matches!(spec.kind, DistanceKind::Dwd | DistanceKind::Dld)
    {
        let summaries: Vec<SeriesSummary> = series
            .par_iter()
            .map(|s| series_summary(s, spec))
            .collect::<Result<_>>()?;
        let weights = match series.first() {
            Some(s) => spec.plan(s.len())?.1,
            None => Vec::new(),
        };
        pairs
            .par_iter()
            .map(|&(i, j)| windowed_from_summaries(&summaries[i], &summaries[j], &weights, spec))
            .collect::<Result<_>>()?
    } else {
        pairs
            .par_iter()
            .map(|&(i, j)| distance(series[i], series[j], spec))
            .collect::<Result<_>>()?
    };

    let mut m = LabeledMatrix::from_fn(ids, |_, _| 0.0);
    for (&(i, j), v) in pairs.iter().zip(values) {
        m.set(i, j, v);
        m.set(j, i, v);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_series(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn identical_series_are_at_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_series(&mut rng, 30);
        for kind in [
            DistanceKind::Awd,
            DistanceKind::Dwd,
            DistanceKind::Ald,
            DistanceKind::Dld,
            DistanceKind::Wd,
            DistanceKind::Ld,
        ] {
            assert_eq!(
                distance(&x, &x, &DistanceSpec::with_kind(kind)).unwrap(),
                0.0,
                "{kind:?}"
            );
        }
    }

    #[test]
    fn constant_shift_has_zero_difference_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_series(&mut rng, 40);
        let y: Vec<f64> = x.iter().map(|v| v + 0.37).collect();
        assert_eq!(dwd(&x, &y, &DistanceSpec::default()).unwrap(), 0.0);
        assert_eq!(dld(&x, &y, &DistanceSpec::default()).unwrap(), 0.0);
    }

    #[test]
    fn single_window_reduces_to_plain() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_series(&mut rng, 24);
        let y = random_series(&mut rng, 24);
        let spec = DistanceSpec {
            subseries: Some((24, 1)),
            ..DistanceSpec::default()
        };
        assert_eq!(awd(&x, &y, &spec).unwrap(), wd(&x, &y, &spec).unwrap());
        assert_eq!(ald(&x, &y, &spec).unwrap(), ld(&x, &y, &spec).unwrap());
    }

    #[test]
    fn halves_compose() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random_series(&mut rng, 40);
        let y = random_series(&mut rng, 40);
        let spec = DistanceSpec {
            subseries: Some((20, 20)),
            weights: Some(vec![0.5, 0.5]),
            ..DistanceSpec::default()
        };
        let h1 = |s: &[f64]| series_diagram(s, &spec).unwrap();
        let expected = 0.5 * wasserstein(&h1(&x[..20]), &h1(&y[..20]), 1.0).unwrap()
            + 0.5 * wasserstein(&h1(&x[20..]), &h1(&y[20..]), 1.0).unwrap();
        assert!((awd(&x, &y, &spec).unwrap() - expected).abs() < 1e-15);

        let l = |s: &[f64]| landscape(&h1(s), None).unwrap();
        let expected = 0.5 * landscape_distance(&l(&x[..20]), &l(&y[..20]), 1.0).unwrap()
            + 0.5 * landscape_distance(&l(&x[20..]), &l(&y[20..]), 1.0).unwrap();
        assert!((ald(&x, &y, &spec).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn alternating_difference() {
        // x - y = (0,1,0,1,0,1) embeds to two distinct points: no loops.
        let x = [0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
        let y = [0.0; 6];
        assert_eq!(dwd(&x, &y, &DistanceSpec::default()).unwrap(), 0.0);
        // In dimension 0 the duplicates die at 0 and one merge happens at √2.
        let h0 = DistanceSpec {
            homology: Homology::H0,
            ..DistanceSpec::default()
        };
        assert!((dwd(&x, &y, &h0).unwrap() - 0.5 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn difference_with_single_loop() {
        // The square (0,0),(1,0),(1,1),(0,1) traced by the series gives one
        // loop (1, √2); its landscape norm at p=1 is the tent area.
        let d = [0.0, 0.0, 1.0, 1.0, 0.0, 0.0];
        let zero = [0.0; 6];
        let spec = DistanceSpec::default();
        let diag = series_diagram(&d, &spec).unwrap();
        assert_eq!(diag.pairs(), vec![(1.0, 2f64.sqrt())]);
        let half = 0.5 * (2f64.sqrt() - 1.0);
        assert!((dld(&d, &zero, &spec).unwrap() - half * half).abs() < 1e-15);
        assert!((dwd(&d, &zero, &spec).unwrap() - half).abs() < 1e-15);
    }

    #[test]
    fn correlation_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
        assert!(corr_distance(&x, &y, CorrKind::Pearson).unwrap().abs() < 1e-7);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((corr_distance(&x, &neg, CorrKind::Pearson).unwrap() - 2.0).abs() < 1e-12);
        let z = [1.0, 3.0, 2.0, 4.0];
        assert!((correlation(&x, &z, CorrKind::Spearman).unwrap() - 0.8).abs() < 1e-12);
        assert!((corr_distance(&x, &z, CorrKind::Spearman).unwrap() - 0.4f64.sqrt()).abs() < 1e-12);
        assert!(corr_distance(&x, &[1.0; 4], CorrKind::Pearson).is_err());
        assert_eq!(ranks(&[3.0, 1.0, 3.0]), vec![2.5, 1.0, 2.5]);
    }

    #[test]
    fn euclid_examples() {
        assert_eq!(euclid_sq_neg(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(euclid_sq_neg(&[1.0, 1.0], &[0.0, 0.0]).unwrap(), -2.0);
        assert_eq!(euclid_sq_neg(&[3.0, 4.0], &[0.0, 0.0]).unwrap(), -25.0);
        assert!(euclid_sq_neg(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn matrix_matches_pairwise_calls() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let data: Vec<Vec<f64>> = (0..5).map(|_| random_series(&mut rng, 30)).collect();
        let refs: Vec<&[f64]> = data.iter().map(Vec::as_slice).collect();
        let ids: Vec<String> = (0..5).map(|i| format!("s{i}")).collect();
        for kind in [
            DistanceKind::Awd,
            DistanceKind::Dld,
            DistanceKind::Pearson,
            DistanceKind::Ald,
        ] {
            let spec = DistanceSpec::with_kind(kind);
            let m = distance_matrix(ids.clone(), &refs, &spec).unwrap();
            for i in 0..5 {
                assert_eq!(m.get(i, i), 0.0);
                for j in 0..5 {
                    if i != j {
                        assert_eq!(m.get(i, j), distance(&data[i], &data[j], &spec).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn both_dimensions_combine() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = random_series(&mut rng, 30);
        let y = random_series(&mut rng, 30);
        let mk = |h| DistanceSpec {
            kind: DistanceKind::Wd,
            p: 2.0,
            homology: h,
            ..DistanceSpec::default()
        };
        let d0 = distance(&x, &y, &mk(Homology::H0)).unwrap();
        let d1 = distance(&x, &y, &mk(Homology::H1)).unwrap();
        let both = distance(&x, &y, &mk(Homology::Both)).unwrap();
        assert!((both - (d0 * d0 + d1 * d1).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn invalid_inputs() {
        assert!(dwd(&[1.0, 2.0], &[1.0], &DistanceSpec::default()).is_err());
        let bad = DistanceSpec {
            subseries: Some((4, 2)),
            ..DistanceSpec::with_kind(DistanceKind::Awd)
        };
        assert!(distance(&[0.0; 7], &[0.0; 7], &bad).is_err());
        let bad_w = DistanceSpec {
            subseries: Some((4, 2)),
            weights: Some(vec![0.5, 0.6]),
            ..DistanceSpec::with_kind(DistanceKind::Awd)
        };
        assert!(distance(&[0.0; 6], &[0.0; 6], &bad_w).is_err());
        assert!(DistanceKind::parse("nope").is_err());
        assert_eq!(DistanceKind::parse("AWD").unwrap(), DistanceKind::Awd);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn triple() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
            let s = || proptest::collection::vec(-1.0f64..1.0, 18);
            (s(), s(), s())
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn pseudo_metric_axioms((x, y, z) in triple()) {
                for kind in [DistanceKind::Awd, DistanceKind::Dwd, DistanceKind::Ald, DistanceKind::Dld] {
                    let spec = DistanceSpec::with_kind(kind);
                    let xy = distance(&x, &y, &spec).unwrap();
                    prop_assert!(xy >= 0.0);
                    prop_assert!((xy - distance(&y, &x, &spec).unwrap()).abs() < 1e-12);
                    prop_assert_eq!(distance(&x, &x, &spec).unwrap(), 0.0);
                    if matches!(kind, DistanceKind::Awd | DistanceKind::Ald) {
                        let xz = distance(&x, &z, &spec).unwrap();
                        let zy = distance(&z, &y, &spec).unwrap();
                        prop_assert!(xy <= xz + zy + 1e-12);
                    }
                }
            }
        }
    }
}
