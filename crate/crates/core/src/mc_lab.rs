//! Monte Carlo replication harness.
//!
//! Replicate `r` simulates with stream `(base_seed, r)` and runs every
//! selected estimator on the result. Replicates run in parallel on a
//! dedicated thread pool and are collected in replicate order, so a summary
//! depends only on the configuration and never on `workers`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::degree_law::{self, limit_law, DEFAULT_TAIL_TOL};
use crate::error::{Error, Result};
use crate::estimators::{
    loglog_fit, mle, mle_fixed_m, mu_hat, qmle, BoundaryHit, EstimateOptions, EstimateReport,
    EstimatorKind,
};
use crate::model::InitialDegreeModel;
use crate::numeric::{normal_cdf, CompensatedSum};
use crate::pa_sim::{snapshot_stats, EvolutionStats, SimConfig, Simulator};

/// Fit window of the log-log baseline. Unset ends default to the smallest
/// and largest occupied degree of each replicate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LogLogRange {
    pub k_min: Option<usize>,
    pub k_max: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub replicates: usize,
    /// Simulation template; its `seed` and `stream` are replaced per replicate.
    pub sim: SimConfig,
    pub estimators: Vec<EstimatorKind>,
    pub base_seed: u64,
    /// Worker threads; `0` uses one per available core.
    pub workers: usize,
    /// `None` selects Freedman-Diaconis binning.
    pub histogram_bins: Option<usize>,
    pub estimate: EstimateOptions,
    #[serde(default)]
    pub loglog: LogLogRange,
}

impl McConfig {
    pub fn new(replicates: usize, sim: SimConfig, estimators: Vec<EstimatorKind>, base_seed: u64) -> Self {
        Self {
            replicates,
            sim,
            estimators,
            base_seed,
            workers: 0,
            histogram_bins: None,
            estimate: EstimateOptions::default(),
            loglog: LogLogRange::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Validation("replicates must be at least 1".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::Validation("select at least one estimator".into()));
        }
        if self.histogram_bins == Some(0) {
            return Err(Error::Validation("histogram_bins must be at least 1".into()));
        }
        self.sim.validate()?;
        self.estimate.validate()?;
        if self.estimators.contains(&EstimatorKind::MleFixedM) && self.sim.initial_degrees.fixed().is_none() {
            return Err(Error::Validation(
                "mle_fixed_m needs a constant initial degree; use mle or qmle for random m".into(),
            ));
        }
        if let (Some(lo), Some(hi)) = (self.loglog.k_min, self.loglog.k_max) {
            if lo >= hi {
                return Err(Error::Validation(format!("loglog range needs k_min < k_max, got {lo} >= {hi}")));
            }
        }
        Ok(())
    }

    /// Simulation configuration of replicate `r`.
    pub fn replicate_sim(&self, r: usize) -> SimConfig {
        let mut sim = self.sim.clone();
        sim.seed = self.base_seed;
        sim.stream = r as u64;
        sim
    }

    fn estimator_list(&self) -> Vec<EstimatorKind> {
        let mut kinds = self.estimators.clone();
        kinds.sort();
        kinds.dedup();
        kinds
    }
}

/// One estimate from one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub estimator: EstimatorKind,
    pub delta_hat: f64,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub converged: bool,
    pub boundary_hit: BoundaryHit,
}

/// A replicate stage that returned an error; excluded from every statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateFailure {
    pub replicate: usize,
    pub seed: u64,
    pub stream: u64,
    /// `None` when the simulation itself failed.
    pub estimator: Option<EstimatorKind>,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalParams {
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    /// Expected count under the asymptotic normal law, when it is known.
    pub normal_asymptotic: Option<f64>,
    /// Expected count under the normal law with the sample mean and variance.
    pub normal_bestfit: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub level: f64,
    pub covered: usize,
    /// Replicates that produced an interval.
    pub intervals: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub estimator: EstimatorKind,
    /// Successful estimates, in replicate order.
    pub estimates: Vec<f64>,
    pub failures: usize,
    pub boundary_hits: usize,
    pub not_converged: usize,
    pub min: Option<f64>,
    pub median: Option<f64>,
    pub mean: Option<f64>,
    pub max: Option<f64>,
    /// Unbiased sample variance; absent below two estimates.
    pub sample_variance: Option<f64>,
    pub bias: Option<f64>,
    /// `bias^2 + sample_variance`.
    pub mse: Option<f64>,
    /// Asymptotic variance at the true parameter, where a theory exists.
    pub predicted_variance: Option<f64>,
    pub normal_asymptotic: Option<NormalParams>,
    pub normal_bestfit: Option<NormalParams>,
    pub histogram: Vec<HistogramBin>,
    pub coverage: Option<Coverage>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummary {
    pub version: String,
    pub config: McConfig,
    pub delta0: f64,
    pub n: usize,
    pub nu0: f64,
    /// Present when the QMLE was run.
    pub nu_tilde0: Option<f64>,
    pub estimators: Vec<EstimatorSummary>,
    pub failures: Vec<ReplicateFailure>,
    #[serde(skip)]
    pub records: Vec<ReplicateRecord>,
}

/// Paths written by [`McSummary::write_outputs`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McOutputs {
    pub estimates_csv: PathBuf,
    pub summary_json: PathBuf,
    pub histogram_csv: PathBuf,
}

struct ReplicateOutcome {
    records: Vec<ReplicateRecord>,
    failures: Vec<ReplicateFailure>,
}

struct Plan<'a> {
    config: &'a McConfig,
    kinds: Vec<EstimatorKind>,
    model: InitialDegreeModel,
    fixed_m: Option<u32>,
}

impl Plan<'_> {
    fn run_replicate(&self, r: usize) -> ReplicateOutcome {
        let sim = self.config.replicate_sim(r);
        let failure = |estimator, err: Error| ReplicateFailure {
            replicate: r,
            seed: sim.seed,
            stream: sim.stream,
            estimator,
            message: err.to_string(),
        };
        let stats = match Simulator::new(sim.clone()).map(|mut s| {
            s.run_until(sim.n);
            s.stats()
        }) {
            Ok(stats) => stats,
            Err(err) => return ReplicateOutcome { records: vec![], failures: vec![failure(None, err)] },
        };
        let snapshot = snapshot_stats(&stats);
        let mut out = ReplicateOutcome { records: Vec::new(), failures: Vec::new() };
        for &kind in &self.kinds {
            match self.estimate(kind, &stats, &snapshot) {
                Ok(report) => out.records.push(ReplicateRecord {
                    replicate: r,
                    estimator: kind,
                    delta_hat: report.delta_hat,
                    ci_lo: report.ci.map(|c| c.lo),
                    ci_hi: report.ci.map(|c| c.hi),
                    converged: report.converged,
                    boundary_hit: report.boundary_hit,
                }),
                Err(err) => out.failures.push(failure(Some(kind), err)),
            }
        }
        out
    }

    fn estimate(&self, kind: EstimatorKind, stats: &EvolutionStats, snapshot: &EvolutionStats) -> Result<EstimateReport> {
        let opts = &self.config.estimate;
        match kind {
            EstimatorKind::Mle => mle(stats, opts),
            EstimatorKind::MleFixedM => mle_fixed_m(snapshot, self.fixed_m, opts),
            EstimatorKind::Qmle => qmle(snapshot, &self.model, opts),
            EstimatorKind::Loglog => {
                let k_min = self.config.loglog.k_min.unwrap_or_else(|| snapshot.min_degree());
                let k_max = self.config.loglog.k_max.unwrap_or_else(|| snapshot.max_degree());
                loglog_fit(snapshot, k_min, k_max, mu_hat(snapshot))
            }
        }
    }
}

/// Runs all replicates and aggregates the sampling distributions.
pub fn run_mc(config: &McConfig) -> Result<McSummary> {
    config.validate()?;
    let model = config.sim.initial_degrees.model()?;
    let kinds = config.estimator_list();
    let delta0 = config.sim.delta;
    let n = config.sim.n;
    let nu0 = degree_law::nu0(delta0, &model, DEFAULT_TAIL_TOL)?;
    let nu_tilde0 = if kinds.contains(&EstimatorKind::Qmle) {
        Some(degree_law::nu_tilde0(delta0, &model)?)
    } else {
        None
    };

    let plan = Plan { config, kinds: kinds.clone(), model, fixed_m: config.sim.initial_degrees.fixed() };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Numerical(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<ReplicateOutcome> =
        pool.install(|| (0..config.replicates).into_par_iter().map(|r| plan.run_replicate(r)).collect());

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        records.extend(o.records);
        failures.extend(o.failures);
    }

    let estimators = kinds
        .iter()
        .map(|&kind| {
            let predicted = match kind {
                EstimatorKind::Mle | EstimatorKind::MleFixedM => Some(degree_law::mle_variance(nu0, n)),
                EstimatorKind::Qmle => nu_tilde0.map(|nt| degree_law::qmle_variance(nu0, nt, n)),
                EstimatorKind::Loglog => None,
            };
            summarise(kind, &records, &failures, delta0, predicted, config)
        })
        .collect();

    Ok(McSummary {
        version: crate::VERSION.to_string(),
        config: config.clone(),
        delta0,
        n,
        nu0,
        nu_tilde0,
        estimators,
        failures,
        records,
    })
}

fn summarise(
    kind: EstimatorKind,
    records: &[ReplicateRecord],
    failures: &[ReplicateFailure],
    delta0: f64,
    predicted_variance: Option<f64>,
    config: &McConfig,
) -> EstimatorSummary {
    let rows: Vec<&ReplicateRecord> = records.iter().filter(|r| r.estimator == kind).collect();
    let estimates: Vec<f64> = rows.iter().map(|r| r.delta_hat).collect();
    let failed = failures
        .iter()
        .filter(|f| f.estimator.is_none() || f.estimator == Some(kind))
        .count();

    let mut sorted = estimates.clone();
    sorted.sort_by(f64::total_cmp);
    let mean = (!estimates.is_empty()).then(|| mean(&estimates));
    let sample_variance = (estimates.len() >= 2).then(|| sample_variance(&estimates));
    let bias = mean.map(|m| m - delta0);
    let mse = bias.map(|b| b * b + sample_variance.unwrap_or(0.0));

    let normal_asymptotic = predicted_variance.map(|v| NormalParams { mean: delta0, variance: v });
    let normal_bestfit = match (mean, sample_variance) {
        (Some(m), Some(v)) => Some(NormalParams { mean: m, variance: v }),
        _ => None,
    };
    let histogram = histogram(&sorted, config.histogram_bins, normal_asymptotic, normal_bestfit);

    let coverage = if matches!(kind, EstimatorKind::Loglog) {
        None
    } else {
        let mut intervals = 0;
        let mut covered = 0;
        for r in &rows {
            if let (Some(lo), Some(hi)) = (r.ci_lo, r.ci_hi) {
                intervals += 1;
                if lo <= delta0 && delta0 <= hi {
                    covered += 1;
                }
            }
        }
        Some(Coverage { level: 1.0 - config.estimate.alpha, covered, intervals })
    };

    EstimatorSummary {
        estimator: kind,
        failures: failed,
        boundary_hits: rows.iter().filter(|r| r.boundary_hit != BoundaryHit::None).count(),
        not_converged: rows.iter().filter(|r| !r.converged).count(),
        min: sorted.first().copied(),
        median: median(&sorted),
        mean,
        max: sorted.last().copied(),
        sample_variance,
        bias,
        mse,
        predicted_variance,
        normal_asymptotic,
        normal_bestfit,
        histogram,
        coverage,
        estimates,
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().copied().collect::<CompensatedSum>().value() / xs.len() as f64
}

/// Two-pass unbiased variance. Needs at least two values.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let ss = xs.iter().map(|x| (x - m) * (x - m)).collect::<CompensatedSum>().value();
    ss / (xs.len() - 1) as f64
}

fn median(sorted: &[f64]) -> Option<f64> {
    let len = sorted.len();
    match len {
        0 => None,
        _ if len % 2 == 1 => Some(sorted[len / 2]),
        _ => Some(0.5 * (sorted[len / 2 - 1] + sorted[len / 2])),
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

const MAX_BINS: usize = 1000;

/// Freedman-Diaconis bin count, `ceil(range / (2 IQR R^{-1/3}))`.
pub fn freedman_diaconis_bins(sorted: &[f64]) -> usize {
    if sorted.len() < 2 {
        return 1;
    }
    let range = sorted[sorted.len() - 1] - sorted[0];
    let iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
    if !(range > 0.0) || !(iqr > 0.0) {
        return 1;
    }
    let width = 2.0 * iqr / (sorted.len() as f64).cbrt();
    ((range / width).ceil() as usize).clamp(1, MAX_BINS)
}

fn histogram(
    sorted: &[f64],
    bins: Option<usize>,
    asymptotic: Option<NormalParams>,
    bestfit: Option<NormalParams>,
) -> Vec<HistogramBin> {
    if sorted.is_empty() {
        return Vec::new();
    }
    let bins = bins.unwrap_or_else(|| freedman_diaconis_bins(sorted));
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in sorted {
        let b = (((x - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let total = sorted.len() as f64;
    let expected = |p: Option<NormalParams>, a: f64, b: f64| {
        p.filter(|p| p.variance > 0.0).map(|p| {
            let sd = p.variance.sqrt();
            total * (normal_cdf((b - p.mean) / sd) - normal_cdf((a - p.mean) / sd))
        })
    };
    counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| {
            let a = lo + i as f64 * width;
            let b = if i + 1 == bins { hi } else { lo + (i + 1) as f64 * width };
            HistogramBin {
                lo: a,
                hi: b,
                count,
                normal_asymptotic: expected(asymptotic, a, b),
                normal_bestfit: expected(bestfit, a, b),
            }
        })
        .collect()
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl McSummary {
    pub fn estimator(&self, kind: EstimatorKind) -> Option<&EstimatorSummary> {
        self.estimators.iter().find(|s| s.estimator == kind)
    }

    /// `replicate,estimator,delta_hat,ci_lo,ci_hi,converged,boundary_hit`;
    /// missing interval ends are empty.
    pub fn write_estimates_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "replicate,estimator,delta_hat,ci_lo,ci_hi,converged,boundary_hit")?;
        for r in &self.records {
            let boundary = match r.boundary_hit {
                BoundaryHit::None => "none",
                BoundaryHit::Lower => "lower",
                BoundaryHit::Upper => "upper",
                BoundaryHit::Flat => "flat",
            };
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.replicate,
                r.estimator,
                r.delta_hat,
                opt(r.ci_lo),
                opt(r.ci_hi),
                r.converged,
                boundary
            )?;
        }
        Ok(())
    }

    /// `estimator,bin_lo,bin_hi,count,normal_asymptotic,normal_bestfit`.
    pub fn write_histogram_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "estimator,bin_lo,bin_hi,count,normal_asymptotic,normal_bestfit")?;
        for s in &self.estimators {
            for b in &s.histogram {
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    s.estimator,
                    b.lo,
                    b.hi,
                    b.count,
                    opt(b.normal_asymptotic),
                    opt(b.normal_bestfit)
                )?;
            }
        }
        Ok(())
    }

    /// Writes `estimates.csv`, `summary.json` and `histogram.csv` into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> Result<McOutputs> {
        fs::create_dir_all(dir)?;
        let out = McOutputs {
            estimates_csv: dir.join("estimates.csv"),
            summary_json: dir.join("summary.json"),
            histogram_csv: dir.join("histogram.csv"),
        };
        let mut w = std::io::BufWriter::new(fs::File::create(&out.estimates_csv)?);
        self.write_estimates_csv(&mut w)?;
        w.flush()?;
        let mut w = std::io::BufWriter::new(fs::File::create(&out.histogram_csv)?);
        self.write_histogram_csv(&mut w)?;
        w.flush()?;
        let mut w = std::io::BufWriter::new(fs::File::create(&out.summary_json)?);
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(out)
    }
}

/// Sup-distance `max_k |N_k(t)/(t+1) - p_k|` at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub t: usize,
    pub sup_distance: f64,
}

/// Runs one simulation and measures its distance to the limiting law at
/// each checkpoint. Checkpoints are visited in ascending order.
pub fn convergence_probe(config: &SimConfig, checkpoints: &[usize]) -> Result<Vec<ConvergencePoint>> {
    config.validate()?;
    if let Some(&t) = checkpoints.iter().find(|&&t| t == 0 || t > config.n) {
        return Err(Error::Validation(format!("checkpoint {t} is outside 1..={}", config.n)));
    }
    let model = config.initial_degrees.model()?;
    let law = limit_law(config.delta, &model, DEFAULT_TAIL_TOL)?;
    let mut ts = checkpoints.to_vec();
    ts.sort_unstable();
    ts.dedup();
    let mut sim = Simulator::new(config.clone())?;
    let mut out = Vec::with_capacity(ts.len());
    for t in ts {
        sim.run_until(t);
        let hist = sim.degree_histogram();
        let norm = (t + 1) as f64;
        let k_max = hist.len().max(law.p.len());
        let sup = (1..k_max)
            .map(|k| (hist.get(k).copied().unwrap_or(0) as f64 / norm - law.pk(k)).abs())
            .fold(0.0, f64::max);
        out.push(ConvergencePoint { t, sup_distance: sup });
    }
    Ok(out)
}
