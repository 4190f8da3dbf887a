//! Least-squares fit of `log p_k(n)` against `log k`.
//!
//! The slope gives an exponent estimate `tau = -slope`, converted to
//! `delta` two ways: `tau - 3` and `mu (tau - 3)` (from `tau = 3 + delta / mu`).
//! There is no honest standard error for this estimator, so no CI is produced.

use serde::{Deserialize, Serialize};

use super::{BoundaryHit, EstimateReport, EstimatorKind};
use crate::error::{Error, Result};
use crate::pa_sim::EvolutionStats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub k_min: usize,
    pub k_max: usize,
    /// Number of non-empty histogram cells used.
    pub cells: usize,
    pub slope: f64,
    pub intercept: f64,
    pub tau_hat: f64,
    /// `tau_hat - 3`.
    pub delta_raw: f64,
    /// `mu (tau_hat - 3)`.
    pub delta_scaled: f64,
}

/// Fits over the non-empty cells with `k_min <= k <= k_max`. The report's
/// `delta_hat` is `delta_raw`.
pub fn loglog_fit(snapshot: &EvolutionStats, k_min: usize, k_max: usize, mu: f64) -> Result<EstimateReport> {
    if k_min >= k_max {
        return Err(Error::Validation(format!("need k_min < k_max, got {k_min} >= {k_max}")));
    }
    let norm = snapshot.vertex_count() as f64;
    let points: Vec<(f64, f64)> = snapshot
        .occupied()
        .filter(|(k, _)| (k_min..=k_max).contains(k))
        .map(|(k, c)| ((k as f64).ln(), (c as f64 / norm).ln()))
        .collect();
    if points.len() < 3 {
        return Err(Error::Validation(format!(
            "log-log fit needs at least 3 non-empty cells in [{k_min}, {k_max}], found {}",
            points.len()
        )));
    }
    let len = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / len;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / len;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mean_x) * (x - mean_x)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let tau_hat = -slope;
    let fit = LogLogFit {
        k_min,
        k_max,
        cells: points.len(),
        slope,
        intercept,
        tau_hat,
        delta_raw: tau_hat - 3.0,
        delta_scaled: mu * (tau_hat - 3.0),
    };
    Ok(EstimateReport {
        estimator: EstimatorKind::Loglog,
        delta_hat: fit.delta_raw,
        bracket: None,
        converged: true,
        boundary_hit: BoundaryHit::None,
        observed_info: 0.0,
        alpha: 0.0,
        ci: None,
        std_error: None,
        score_at_estimate: 0.0,
        iterations: 0,
        n: snapshot.n(),
        loglog: Some(fit),
    })
}
