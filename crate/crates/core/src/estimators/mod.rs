//! Estimators of the affine parameter `delta`.
//!
//! * [`mle`]: full-history MLE, root of `iota_n'`.
//! * [`mle_fixed_m`]: the same estimator computed from the snapshot alone
//!   when every vertex brings the same number of edges.
//! * [`qmle`]: quasi-MLE from the snapshot and a known initial-degree law.
//! * [`loglog_fit`]: regression of `log p_k(n)` on `log k`, kept as a baseline.

mod likelihood;
mod loglog;
mod solve;

use serde::{Deserialize, Serialize};

pub use likelihood::{Criterion, FixedMLikelihood, FullLikelihood, QuasiLikelihood};
pub use loglog::{loglog_fit, LogLogFit};
pub use solve::BoundaryHit;

use crate::degree_law::nu_tilde0;
use crate::error::{check_delta, Error, Result};
use crate::model::InitialDegreeModel;
use crate::numeric::normal_two_sided_quantile;
use crate::pa_sim::EvolutionStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Mle,
    MleFixedM,
    Qmle,
    Loglog,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 4] =
        [EstimatorKind::Mle, EstimatorKind::MleFixedM, EstimatorKind::Qmle, EstimatorKind::Loglog];

    /// Name used in CSV files and on the command line.
    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorKind::Mle => "mle",
            EstimatorKind::MleFixedM => "mle_fixed_m",
            EstimatorKind::Qmle => "qmle",
            EstimatorKind::Loglog => "loglog",
        }
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "mle" => Ok(EstimatorKind::Mle),
            "mle_fixed_m" => Ok(EstimatorKind::MleFixedM),
            "qmle" => Ok(EstimatorKind::Qmle),
            "loglog" => Ok(EstimatorKind::Loglog),
            other => Err(Error::Validation(format!("unknown estimator '{other}'"))),
        }
    }
}

/// Parameter set `[lo, hi]` with `-1 < lo < hi < inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > -1.0 && lo < hi && hi.is_finite()) {
            return Err(Error::Validation(format!(
                "bracket must satisfy -1 < lo < hi < inf, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }
}

impl Default for Bracket {
    fn default() -> Self {
        Self { lo: -0.99, hi: 25.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub bracket: Bracket,
    /// Tolerance on `delta` and on the score at the root.
    pub tol: f64,
    /// The confidence interval has level `1 - alpha`.
    pub alpha: f64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self { bracket: Bracket::default(), tol: 1e-8, alpha: 0.05 }
    }
}

impl EstimateOptions {
    pub fn validate(&self) -> Result<()> {
        Bracket::new(self.bracket.lo, self.bracket.hi)?;
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Validation(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Validation(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lo: f64,
    pub hi: f64,
}

impl ConfidenceInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimator: EstimatorKind,
    pub delta_hat: f64,
    /// Parameter set searched; `None` for the regression baseline.
    pub bracket: Option<Bracket>,
    pub converged: bool,
    pub boundary_hit: BoundaryHit,
    /// `-iota_n''(delta_hat)`, per vertex.
    pub observed_info: f64,
    pub alpha: f64,
    pub ci: Option<ConfidenceInterval>,
    /// Estimated standard deviation of `delta_hat`.
    pub std_error: Option<f64>,
    pub score_at_estimate: f64,
    pub iterations: usize,
    pub n: usize,
    /// Present for [`EstimatorKind::Loglog`] only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loglog: Option<LogLogFit>,
}

/// Solves `criterion` and attaches observed information and a normal CI.
/// `variance` maps the observed information to the variance of `delta_hat`.
fn estimate<C: Criterion>(
    kind: EstimatorKind,
    criterion: &C,
    opts: &EstimateOptions,
    variance: impl Fn(f64, f64) -> Option<f64>,
) -> Result<EstimateReport> {
    opts.validate()?;
    let Bracket { lo, hi } = opts.bracket;
    let sol = solve::solve(criterion, lo, hi, opts.tol);
    let observed_info = -criterion.curvature(sol.delta_hat);
    let mut ci = None;
    let mut std_error = None;
    if sol.converged && sol.boundary == BoundaryHit::None && observed_info > 0.0 {
        if let Some(var) = variance(sol.delta_hat, observed_info) {
            let se = var.sqrt();
            let z = normal_two_sided_quantile(opts.alpha);
            ci = Some(ConfidenceInterval { lo: sol.delta_hat - z * se, hi: sol.delta_hat + z * se });
            std_error = Some(se);
        }
    }
    Ok(EstimateReport {
        estimator: kind,
        delta_hat: sol.delta_hat,
        bracket: Some(opts.bracket),
        converged: sol.converged,
        boundary_hit: sol.boundary,
        observed_info,
        alpha: opts.alpha,
        ci,
        std_error,
        score_at_estimate: sol.score,
        iterations: sol.iterations,
        n: criterion.n(),
        loglog: None,
    })
}

/// `iota_n(delta)` from the full arrival record.
pub fn iota_n(delta: f64, stats: &EvolutionStats) -> Result<f64> {
    check_delta(delta)?;
    Ok(FullLikelihood::new(stats)?.value(delta))
}

/// `iota_n'(delta)`.
pub fn iota_n_prime(delta: f64, stats: &EvolutionStats) -> Result<f64> {
    check_delta(delta)?;
    Ok(FullLikelihood::new(stats)?.score(delta))
}

/// `iota_n''(delta)`.
pub fn iota_n_second(delta: f64, stats: &EvolutionStats) -> Result<f64> {
    check_delta(delta)?;
    Ok(FullLikelihood::new(stats)?.curvature(delta))
}

/// Full-history maximum likelihood estimator.
///
/// The CI is `delta_hat ± z / sqrt(n (-iota_n''(delta_hat)))`.
pub fn mle(stats: &EvolutionStats, opts: &EstimateOptions) -> Result<EstimateReport> {
    let criterion = FullLikelihood::new(stats)?;
    let n = stats.n() as f64;
    estimate(EstimatorKind::Mle, &criterion, opts, |_, info| Some(1.0 / (n * info)))
}

/// Snapshot MLE for a constant initial degree `m` (recovered from the edge
/// count when `None`).
pub fn mle_fixed_m(snapshot: &EvolutionStats, m: Option<u32>, opts: &EstimateOptions) -> Result<EstimateReport> {
    let criterion = FixedMLikelihood::new(snapshot, m)?;
    let n = snapshot.n() as f64;
    estimate(EstimatorKind::MleFixedM, &criterion, opts, |_, info| Some(1.0 / (n * info)))
}

/// Quasi-maximum likelihood estimator.
///
/// The CI uses the sandwich variance `(nu + nu~(delta_hat)) / (nu^2 n)`
/// with `nu` the observed quasi-information.
pub fn qmle(snapshot: &EvolutionStats, r: &InitialDegreeModel, opts: &EstimateOptions) -> Result<EstimateReport> {
    let criterion = QuasiLikelihood::new(snapshot, r);
    let n = snapshot.n() as f64;
    estimate(EstimatorKind::Qmle, &criterion, opts, |delta_hat, info| {
        let extra = nu_tilde0(delta_hat, r).ok()?;
        Some((info + extra) / (info * info * n))
    })
}

/// Mean initial degree from the snapshot, `sum_k k N_k(n) / (2 n)`.
pub fn mu_hat(snapshot: &EvolutionStats) -> f64 {
    snapshot.total_edges() as f64 / snapshot.n() as f64
}
