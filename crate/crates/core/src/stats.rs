//! Analytic-versus-simulated comparison.

use serde::Serialize;
use thiserror::Error;

use crate::analytic::{self, AnalyticError};
use crate::model::{AgePmf, PathConfig};
use crate::simulator::{EmpiricalDist, SimResult};

/// Tail tolerance of the analytic PMF used by [`compare`].
pub const COMPARE_TAIL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("empirical distribution has no samples")]
    EmptySample,
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub age: usize,
    pub empirical: f64,
    pub analytic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub tv_distance: f64,
    /// `|empirical mean - analytic mean|`.
    pub mean_gap: f64,
    pub per_age_residuals: Vec<Residual>,
    pub sample_count: u64,
    /// Empirical mass above the analytic horizon, compared in aggregate
    /// against the analytic tail.
    pub empirical_tail: f64,
    pub analytic_tail: f64,
}

/// Relative frequencies up to the largest observed age.
pub fn normalize(emp: &EmpiricalDist) -> Result<AgePmf, StatsError> {
    let max = emp.max_age().ok_or(StatsError::EmptySample)? as usize;
    let total = emp.total() as f64;
    let mut probs = vec![0.0; max + 1];
    for (&age, &count) in emp.counts() {
        probs[age as usize] = count as f64 / total;
    }
    Ok(AgePmf::from_parts(probs, 0.0))
}

/// Half the L1 distance over the union of both horizons, with each tail
/// treated as one extra atom disjoint from every explicit age.
pub fn total_variation(a: &AgePmf, b: &AgePmf) -> f64 {
    let len = a.probs().len().max(b.probs().len());
    let at = |pmf: &AgePmf, d: usize| pmf.prob(d).unwrap_or(0.0);
    let body: f64 = (0..len).map(|d| (at(a, d) - at(b, d)).abs()).sum();
    (0.5 * (body + (a.tail_mass() - b.tail_mass()).abs())).clamp(0.0, 1.0)
}

/// Compares a simulation against the analytic distribution of the same path.
pub fn compare(path: &PathConfig, sim: &SimResult) -> Result<ComparisonReport, StatsError> {
    let analytic = analytic::pmf_auto_truncate(path, COMPARE_TAIL_TOL)?;
    let empirical = normalize(&sim.empirical)?.with_horizon(analytic.horizon());
    let tv_distance = total_variation(&empirical, &analytic);
    let mean_gap = (sim.mean_age.mean - analytic::expected_age(path)).abs();
    let per_age_residuals = analytic
        .probs()
        .iter()
        .zip(empirical.probs())
        .enumerate()
        .map(|(age, (&a, &e))| Residual {
            age,
            empirical: e,
            analytic: a,
        })
        .collect();
    Ok(ComparisonReport {
        tv_distance,
        mean_gap,
        per_age_residuals,
        sample_count: sim.empirical.total(),
        empirical_tail: empirical.tail_mass(),
        analytic_tail: analytic.tail_mass(),
    })
}
