use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{solve_index_tracking, tracking_error};
use crate::error::{Error, Result};

/// Search limits for the cardinality heuristic. The evaluation cap makes
/// runs reproducible; the wall-clock budget is a safety net.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CardinalityBudget {
    pub time: Duration,
    /// Maximum number of restricted tracking solves; `None` for no cap.
    pub max_evaluations: Option<usize>,
}

impl Default for CardinalityBudget {
    fn default() -> Self {
        Self {
            time: Duration::from_secs(60),
            max_evaluations: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardinalityResult {
    /// Weight per asset column (zero outside the support).
    pub weights: Vec<f64>,
    pub support: Vec<usize>,
    pub objective: f64,
    pub greedy_objective: f64,
    pub evaluations: usize,
    pub swaps: usize,
    pub budget_exhausted: bool,
}

struct Search<'a> {
    columns: &'a [&'a [f64]],
    r0: &'a [f64],
    budget: CardinalityBudget,
    start: Instant,
    evaluations: usize,
}

impl Search<'_> {
    fn exhausted(&self) -> bool {
        self.budget
            .max_evaluations
            .is_some_and(|m| self.evaluations >= m)
            || self.start.elapsed() >= self.budget.time
    }

    /// Tracking fit restricted to `support` (sorted ascending).
    fn fit(&mut self, support: &[usize]) -> Result<(Vec<f64>, f64)> {
        self.evaluations += 1;
        let cols: Vec<&[f64]> = support.iter().map(|&i| self.columns[i]).collect();
        let w = solve_index_tracking(&cols, self.r0)?;
        let te = tracking_error(&cols, self.r0, &w);
        Ok((w, te))
    }
}

fn with(support: &[usize], add: usize, drop: Option<usize>) -> Vec<usize> {
    let mut s: Vec<usize> = support
        .iter()
        .copied()
        .filter(|&i| Some(i) != drop)
        .collect();
    s.push(add);
    s.sort_unstable();
    s
}

/// Tracking portfolio with at most `k_max` holdings: greedy forward
/// selection (each step adds the asset whose refit lowers the tracking
/// error most, lowest index on ties) followed by best-improvement single
/// swaps until none improves or the budget runs out.
pub fn solve_it_cardinality(
    columns: &[&[f64]],
    r0: &[f64],
    k_max: usize,
    budget: CardinalityBudget,
) -> Result<CardinalityResult> {
    let n = columns.len();
    if n == 0 {
        return Err(Error::invalid("no candidate assets"));
    }
    if k_max == 0 || k_max > n {
        return Err(Error::config(format!(
            "cardinality {k_max} outside 1..={n}"
        )));
    }
    if budget.time.is_zero() || budget.max_evaluations == Some(0) {
        return Err(Error::config("cardinality budget must be positive"));
    }
    let mut search = Search {
        columns,
        r0,
        budget,
        start: Instant::now(),
        evaluations: 0,
    };
    if k_max == n {
        let all: Vec<usize> = (0..n).collect();
        let (w, te) = search.fit(&all)?;
        return Ok(CardinalityResult {
            weights: w,
            support: all,
            objective: te,
            greedy_objective: te,
            evaluations: search.evaluations,
            swaps: 0,
            budget_exhausted: false,
        });
    }

    let mut support: Vec<usize> = Vec::new();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut exhausted = false;
    while support.len() < k_max && !exhausted {
        let mut step: Option<(usize, Vec<f64>, f64)> = None;
        for j in (0..n).filter(|j| !support.contains(j)) {
            if search.exhausted() && step.is_some() {
                exhausted = true;
                break;
            }
            let (w, te) = search.fit(&with(&support, j, None))?;
            if step.as_ref().is_none_or(|s| te < s.2) {
                step = Some((j, w, te));
            }
        }
        let (j, w, te) = step.expect("at least one candidate evaluated");
        support = with(&support, j, None);
        best = Some((w, te));
    }
    let (mut weights, mut objective) = best.expect("greedy adds at least one asset");
    let greedy_objective = objective;

    let mut swaps = 0;
    'outer: while !exhausted {
        let mut improve: Option<(Vec<usize>, Vec<f64>, f64)> = None;
        for &out in &support {
            for inn in (0..n).filter(|j| !support.contains(j)) {
                if search.exhausted() {
                    exhausted = true;
                    break;
                }
                let trial = with(&support, inn, Some(out));
                let (w, te) = search.fit(&trial)?;
                if te < objective * (1.0 - 1e-12) && improve.as_ref().is_none_or(|s| te < s.2) {
                    improve = Some((trial, w, te));
                }
            }
        }
        match improve {
            Some((s, w, te)) => {
                support = s;
                weights = w;
                objective = te;
                swaps += 1;
            }
            None => break 'outer,
        }
    }

    let mut full = vec![0.0; n];
    for (k, &i) in support.iter().enumerate() {
        full[i] = weights[k];
    }
    Ok(CardinalityResult {
        weights: full,
        support,
        objective,
        greedy_objective,
        evaluations: search.evaluations,
        swaps,
        budget_exhausted: exhausted,
    })
}
