//! Normalised log-likelihood criteria and their first two derivatives.
//!
//! All three criteria share the shape
//! `sum_k w_k log(k + delta) - (normaliser term)`; they differ in the
//! weights `w_k` and in how the total preference `S_{t,i-1}` enters.

use crate::error::{Error, Result};
use crate::model::InitialDegreeModel;
use crate::numeric::CompensatedSum;
use crate::pa_sim::{Arrivals, EvolutionStats};

/// A smooth criterion in `delta` whose maximiser is the estimate.
pub trait Criterion {
    fn value(&self, delta: f64) -> f64;
    fn score(&self, delta: f64) -> f64;
    fn curvature(&self, delta: f64) -> f64;
    /// Sample size `n` used to scale the observed information.
    fn n(&self) -> usize;
}

/// Degree part `sum_k w_k f(k + delta)` of every criterion.
fn degree_sum(weights: &[f64], delta: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for (k, w) in weights.iter().enumerate().skip(1) {
        if *w != 0.0 {
            acc.add(w * f(k as f64 + delta));
        }
    }
    acc.value()
}

/// `iota_n` from the full arrival record:
///
/// `iota_n(delta) = sum_k log(k + delta) (N_{>k} - R_{>k}) / (n + 1)
///                  - (n + 1)^{-1} sum_{t=2}^n sum_{i=1}^{m_t} log S_{t,i-1}(delta)`.
pub struct FullLikelihood<'a> {
    n: usize,
    /// `weights[k] = (N_{>k}(n) - R_{>k}(n)) / (n + 1)`.
    weights: Vec<f64>,
    arrivals: &'a Arrivals,
}

impl<'a> FullLikelihood<'a> {
    pub fn new(stats: &'a EvolutionStats) -> Result<Self> {
        let arrivals = stats.arrivals().ok_or_else(|| {
            Error::MissingHistory(
                "the full-history MLE needs the arrival sequence (m_t); for a snapshot use \
                 the fixed-m MLE (constant initial degree, where the snapshot is sufficient) \
                 or the quasi-MLE with a known initial-degree law"
                    .into(),
            )
        })?;
        let n = stats.n();
        let norm = n as f64 + 1.0;
        let mut weights = vec![0.0; stats.max_degree() + 1];
        for (k, w) in weights.iter_mut().enumerate().skip(1) {
            let chosen = stats.tail_count(k) as i64 - arrivals.r_tail(k) as i64;
            if chosen < 0 {
                return Err(Error::Validation(format!(
                    "N_>{k} < R_>{k}: degree histogram is inconsistent with the arrival sequence"
                )));
            }
            *w = chosen as f64 / norm;
        }
        Ok(Self { n, weights, arrivals })
    }

    /// `(n + 1)^{-1} sum_{t,i} f(t, S_{t,i-1}(delta))`.
    fn preference_sum(&self, delta: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
        let mut acc = CompensatedSum::new();
        let cum = self.arrivals.cum_edges();
        for t in 2..=self.n {
            let tf = t as f64;
            let base = tf * delta + 2.0 * cum[t - 1] as f64;
            for i in 0..self.arrivals.m(t) {
                acc.add(f(tf, base + f64::from(i)));
            }
        }
        acc.value() / (self.n as f64 + 1.0)
    }
}

impl Criterion for FullLikelihood<'_> {
    fn value(&self, delta: f64) -> f64 {
        degree_sum(&self.weights, delta, f64::ln) - self.preference_sum(delta, |_, s| s.ln())
    }

    fn score(&self, delta: f64) -> f64 {
        degree_sum(&self.weights, delta, |x| 1.0 / x) - self.preference_sum(delta, |t, s| t / s)
    }

    fn curvature(&self, delta: f64) -> f64 {
        -degree_sum(&self.weights, delta, |x| 1.0 / (x * x))
            + self.preference_sum(delta, |t, s| (t / s) * (t / s))
    }

    fn n(&self) -> usize {
        self.n
    }
}

/// Snapshot likelihood for a constant initial degree `m`, written per vertex:
///
/// `iota_n'(delta) = sum_k (p_{>k}(n) - 1{k < m}) / (k + delta)
///                   - (n + 1)^{-1} sum_{t=2}^n sum_{i=1}^m 1 / (delta + (2 M_{t-1} + i - 1) / t)`
///
/// with `M_{t-1} = m (t - 1)`.
pub struct FixedMLikelihood {
    n: usize,
    m: u32,
    /// `weights[k] = N_{>k}(n) / (n + 1) - 1{k < m}`.
    weights: Vec<f64>,
}

impl FixedMLikelihood {
    /// `m = None` recovers `m` from the edge count `M_n = m n`.
    pub fn new(snapshot: &EvolutionStats, m: Option<u32>) -> Result<Self> {
        let n = snapshot.n();
        let edges = snapshot.total_edges();
        let m = match m {
            Some(m) => m,
            None => {
                if !edges.is_multiple_of(n as u64) {
                    return Err(Error::Validation(format!(
                        "{edges} edges over n = {n} arrivals is not a constant initial degree"
                    )));
                }
                u32::try_from(edges / n as u64)
                    .map_err(|_| Error::Validation("initial degree out of range".into()))?
            }
        };
        if m == 0 {
            return Err(Error::Validation("fixed initial degree must be at least 1".into()));
        }
        if edges != u64::from(m) * n as u64 {
            return Err(Error::Validation(format!(
                "histogram has {edges} edges, but constant m = {m} implies m n = {}",
                u64::from(m) * n as u64
            )));
        }
        if snapshot.min_degree() < m as usize {
            return Err(Error::Validation(format!(
                "a vertex has degree {} < m = {m}",
                snapshot.min_degree()
            )));
        }
        let norm = n as f64 + 1.0;
        let k_max = snapshot.max_degree();
        let mut weights = vec![0.0; k_max + 1];
        for (k, w) in weights.iter_mut().enumerate().skip(1) {
            let below_m = if k < m as usize { 1.0 } else { 0.0 };
            *w = snapshot.tail_count(k) as f64 / norm - below_m;
        }
        Ok(Self { n, m, weights })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// `(n + 1)^{-1} sum_{t,i} f(delta + c_{t,i} / t)`, `c_{t,i} = 2 m (t - 1) + i - 1`.
    fn preference_sum(&self, delta: f64, f: impl Fn(f64) -> f64) -> f64 {
        let mut acc = CompensatedSum::new();
        let two_m = 2.0 * f64::from(self.m);
        for t in 2..=self.n {
            let tf = t as f64;
            let base = two_m * (tf - 1.0);
            for i in 0..self.m {
                acc.add(f(delta + (base + f64::from(i)) / tf));
            }
        }
        acc.value() / (self.n as f64 + 1.0)
    }

    fn log_preference_sum(&self, delta: f64) -> f64 {
        let mut acc = CompensatedSum::new();
        let two_m = 2.0 * f64::from(self.m);
        for t in 2..=self.n {
            let tf = t as f64;
            let base = tf * delta + two_m * (tf - 1.0);
            for i in 0..self.m {
                acc.add((base + f64::from(i)).ln());
            }
        }
        acc.value() / (self.n as f64 + 1.0)
    }
}

impl Criterion for FixedMLikelihood {
    fn value(&self, delta: f64) -> f64 {
        degree_sum(&self.weights, delta, f64::ln) - self.log_preference_sum(delta)
    }

    fn score(&self, delta: f64) -> f64 {
        degree_sum(&self.weights, delta, |x| 1.0 / x) - self.preference_sum(delta, |x| 1.0 / x)
    }

    fn curvature(&self, delta: f64) -> f64 {
        -degree_sum(&self.weights, delta, |x| 1.0 / (x * x))
            + self.preference_sum(delta, |x| 1.0 / (x * x))
    }

    fn n(&self) -> usize {
        self.n
    }
}

/// Quasi-likelihood from the snapshot and a known initial-degree law:
///
/// `iota~_n'(delta) = sum_k (N_{>k}(n) / (n + 1) - r_{>k}) / (k + delta) - 1 / (2 + delta / mu)`,
///
/// integrated to `sum_k (...) log(k + delta) - mu log(2 mu + delta)`.
pub struct QuasiLikelihood {
    n: usize,
    mu: f64,
    weights: Vec<f64>,
}

impl QuasiLikelihood {
    pub fn new(snapshot: &EvolutionStats, r: &InitialDegreeModel) -> Self {
        let n = snapshot.n();
        let norm = n as f64 + 1.0;
        let k_max = snapshot.max_degree().max(r.support_max());
        let mut weights = vec![0.0; k_max + 1];
        for (k, w) in weights.iter_mut().enumerate().skip(1) {
            *w = snapshot.tail_count(k) as f64 / norm - r.tail(k);
        }
        Self { n, mu: r.mu(), weights }
    }
}

impl Criterion for QuasiLikelihood {
    fn value(&self, delta: f64) -> f64 {
        degree_sum(&self.weights, delta, f64::ln) - self.mu * (2.0 * self.mu + delta).ln()
    }

    fn score(&self, delta: f64) -> f64 {
        degree_sum(&self.weights, delta, |x| 1.0 / x) - 1.0 / (2.0 + delta / self.mu)
    }

    fn curvature(&self, delta: f64) -> f64 {
        let d = 2.0 * self.mu + delta;
        -degree_sum(&self.weights, delta, |x| 1.0 / (x * x)) + self.mu / (d * d)
    }

    fn n(&self) -> usize {
        self.n
    }
}
