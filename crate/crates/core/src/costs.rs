//! Plan-level objectives over per-tour battery costs.
//!
//! * MinMax: the largest tour cost.
//! * c-MinSum: sum of tour costs, each soft-constrained by the budget with
//!   a linear penalty `k_c` per percent of overshoot.
//! * Combined: c-MinSum plus MinMax divided by the number of tours.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_K_C: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostKind {
    MinMax,
    CMinSum,
    Combined,
}

impl CostKind {
    pub const ALL: [CostKind; 3] = [CostKind::MinMax, CostKind::CMinSum, CostKind::Combined];

    pub fn as_str(self) -> &'static str {
        match self {
            CostKind::MinMax => "minmax",
            CostKind::CMinSum => "cminsum",
            CostKind::Combined => "combined",
        }
    }
}

impl fmt::Display for CostKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CostKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "minmax" => Ok(CostKind::MinMax),
            "cminsum" | "c-minsum" => Ok(CostKind::CMinSum),
            "combined" | "mincomb" => Ok(CostKind::Combined),
            other => Err(Error::Parameter(format!(
                "unknown cost function '{other}' (expected minmax, cminsum or combined)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostFunction {
    pub kind: CostKind,
    pub k_c: f64,
    pub c_max: f64,
}

impl CostFunction {
    pub fn new(kind: CostKind, k_c: f64, c_max: f64) -> Result<Self> {
        if !(k_c > 0.0) || !(c_max > 0.0) {
            return Err(Error::Parameter(format!("k_c and c_max must be positive (k_c={k_c}, c_max={c_max})")));
        }
        Ok(Self { kind, k_c, c_max })
    }

    /// Value over `tour_costs`; `n_t` is the number of tours.
    pub fn evaluate(&self, tour_costs: &[f64]) -> Result<f64> {
        match self.kind {
            CostKind::MinMax => cost_minmax(tour_costs),
            CostKind::CMinSum => cost_cminsum(tour_costs, self.c_max, self.k_c),
            CostKind::Combined => cost_combined(tour_costs, self.c_max, self.k_c, tour_costs.len()),
        }
    }
}

pub fn cost_minmax(tour_costs: &[f64]) -> Result<f64> {
    if tour_costs.is_empty() {
        return Err(Error::Parameter("cost_minmax needs at least one tour".into()));
    }
    Ok(tour_costs.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

/// Soft-constrained tour cost; `c == c_max` is within budget.
pub fn cost_constrained(tour_cost: f64, c_max: f64, k_c: f64) -> f64 {
    if tour_cost <= c_max {
        tour_cost
    } else {
        tour_cost + (tour_cost - c_max) * k_c
    }
}

pub fn cost_cminsum(tour_costs: &[f64], c_max: f64, k_c: f64) -> Result<f64> {
    if tour_costs.is_empty() {
        return Err(Error::Parameter("cost_cminsum needs at least one tour".into()));
    }
    Ok(tour_costs.iter().map(|&c| cost_constrained(c, c_max, k_c)).sum())
}

pub fn cost_combined(tour_costs: &[f64], c_max: f64, k_c: f64, n_t: usize) -> Result<f64> {
    if n_t == 0 || n_t != tour_costs.len() {
        return Err(Error::Parameter(format!(
            "n_t = {n_t} must equal the number of tour costs ({})",
            tour_costs.len()
        )));
    }
    Ok(cost_cminsum(tour_costs, c_max, k_c)? + cost_minmax(tour_costs)? / n_t as f64)
}

/// Evaluates `kind` over `(tour_cost, budget)` pairs, each tour carrying its
/// own budget. Used by the solver, where re-plans give every surviving
/// vehicle a different remaining budget. Agrees with the free functions
/// when every budget equals `c_max`.
pub fn evaluate_with_budgets(kind: CostKind, k_c: f64, tours: impl Iterator<Item = (f64, f64)>) -> f64 {
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut n = 0usize;
    for (c, budget) in tours {
        max = max.max(c);
        if kind != CostKind::MinMax {
            sum += cost_constrained(c, budget, k_c);
        }
        n += 1;
    }
    if n == 0 {
        return 0.0;
    }
    match kind {
        CostKind::MinMax => max,
        CostKind::CMinSum => sum,
        CostKind::Combined => sum + max / n as f64,
    }
}
