//! The initial-degree law: the distribution `(r_k)` of the number of edges a
//! newly arriving vertex brings with it.

use rand::Rng;
use rand_distr::{weighted::WeightedAliasIndex, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NORMALIZATION_TOL: f64 = 1e-12;

/// A probability mass function on `{1, 2, ..., k_max}`.
///
/// Only finite supports are represented. Unbounded laws (geometric, Poisson
/// shifted by one, ...) are truncated by the caller before construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PmfRepr", into = "PmfRepr")]
pub struct InitialDegreeModel {
    /// `pmf[k] = r_k`; `pmf[0] = 0`.
    pmf: Vec<f64>,
    /// `tail[k] = r_{>k}` for `k = 0..=k_max`.
    tail: Vec<f64>,
    mu: f64,
    mu2: f64,
}

#[derive(Serialize, Deserialize)]
struct PmfRepr {
    /// `(k, r_k)` pairs with `r_k > 0`.
    pmf: Vec<(u32, f64)>,
}

impl TryFrom<PmfRepr> for InitialDegreeModel {
    type Error = Error;
    fn try_from(repr: PmfRepr) -> Result<Self> {
        InitialDegreeModel::from_pairs(&repr.pmf)
    }
}

impl From<InitialDegreeModel> for PmfRepr {
    fn from(model: InitialDegreeModel) -> Self {
        PmfRepr { pmf: model.support().collect() }
    }
}

impl InitialDegreeModel {
    /// Builds a model from `pmf[k] = r_k` (index 0 must carry no mass).
    pub fn from_pmf(mut pmf: Vec<f64>) -> Result<Self> {
        if pmf.len() < 2 {
            return Err(Error::Validation("initial-degree pmf has empty support".into()));
        }
        if let Some((k, r)) = pmf.iter().enumerate().find(|(_, r)| !r.is_finite() || **r < 0.0) {
            return Err(Error::Validation(format!(
                "initial-degree pmf has invalid mass r_{k} = {r}"
            )));
        }
        if pmf[0] != 0.0 {
            return Err(Error::Validation(format!(
                "initial degrees must be positive, got r_0 = {}",
                pmf[0]
            )));
        }
        while pmf.len() > 2 && *pmf.last().unwrap() == 0.0 {
            pmf.pop();
        }
        let total = crate::numeric::sum(pmf.iter().copied());
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Validation(format!(
                "initial-degree pmf sums to {total}, not 1"
            )));
        }
        if *pmf.last().unwrap() == 0.0 {
            return Err(Error::Validation("initial-degree pmf has no mass".into()));
        }

        let k_max = pmf.len() - 1;
        let mut tail = vec![0.0; k_max + 1];
        for k in (0..k_max).rev() {
            tail[k] = tail[k + 1] + pmf[k + 1];
        }
        // The suffix sums are exact up to rounding; pin r_{>0} to 1.
        tail[0] = 1.0;
        let mu = crate::numeric::sum(pmf.iter().enumerate().map(|(k, r)| k as f64 * r));
        let mu2 = crate::numeric::sum(pmf.iter().enumerate().map(|(k, r)| (k * k) as f64 * r));
        Ok(Self { pmf, tail, mu, mu2 })
    }

    /// Builds a model from `(k, r_k)` pairs; repeated degrees are rejected.
    pub fn from_pairs(pairs: &[(u32, f64)]) -> Result<Self> {
        let k_max = pairs.iter().map(|(k, _)| *k).max().unwrap_or(0) as usize;
        let mut pmf = vec![0.0; k_max + 1];
        let mut seen = vec![false; k_max + 1];
        for &(k, r) in pairs {
            if k == 0 {
                return Err(Error::Validation("initial degree 0 is not allowed".into()));
            }
            if std::mem::replace(&mut seen[k as usize], true) {
                return Err(Error::Validation(format!("degree {k} listed twice in pmf")));
            }
            pmf[k as usize] = r;
        }
        Self::from_pmf(pmf)
    }

    /// The point mass `r_m = 1`.
    pub fn degenerate(m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::Validation("fixed initial degree must be at least 1".into()));
        }
        let mut pmf = vec![0.0; m as usize + 1];
        pmf[m as usize] = 1.0;
        Self::from_pmf(pmf)
    }

    /// Uniform law on `{lo, ..., hi}`.
    pub fn uniform(lo: u32, hi: u32) -> Result<Self> {
        if lo == 0 || lo > hi {
            return Err(Error::Validation(format!("invalid uniform support {lo}..={hi}")));
        }
        let w = 1.0 / f64::from(hi - lo + 1);
        let mut pmf = vec![0.0; hi as usize + 1];
        for r in &mut pmf[lo as usize..] {
            *r = w;
        }
        // Re-normalise so the mass sums to one in floating point as well.
        let total: f64 = crate::numeric::sum(pmf.iter().copied());
        pmf.iter_mut().for_each(|r| *r /= total);
        Self::from_pmf(pmf)
    }

    /// Geometric law `r_k ∝ (1-p)^{k-1} p` restricted to `{1, ..., k_max}`.
    pub fn truncated_geometric(p: f64, k_max: u32) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) || k_max == 0 {
            return Err(Error::Validation(format!(
                "invalid truncated geometric (p = {p}, k_max = {k_max})"
            )));
        }
        let mut pmf = vec![0.0; k_max as usize + 1];
        for (k, r) in pmf.iter_mut().enumerate().skip(1) {
            *r = (1.0 - p).powi(k as i32 - 1) * p;
        }
        let total: f64 = crate::numeric::sum(pmf.iter().copied());
        pmf.iter_mut().for_each(|r| *r /= total);
        Self::from_pmf(pmf)
    }

    /// `Some(m)` when the law is a point mass at `m`.
    pub fn as_degenerate(&self) -> Option<u32> {
        let mut support = self.support();
        match (support.next(), support.next()) {
            (Some((k, _)), None) => Some(k),
            _ => None,
        }
    }

    /// `r_k`, zero outside the support.
    pub fn r(&self, k: usize) -> f64 {
        self.pmf.get(k).copied().unwrap_or(0.0)
    }

    /// `r_{>k}`, zero beyond the support.
    pub fn tail(&self, k: usize) -> f64 {
        self.tail.get(k).copied().unwrap_or(0.0)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Second moment `E[m^2]`.
    pub fn mu2(&self) -> f64 {
        self.mu2
    }

    pub fn variance(&self) -> f64 {
        (self.mu2 - self.mu * self.mu).max(0.0)
    }

    /// Largest degree with positive mass.
    pub fn support_max(&self) -> usize {
        self.pmf.len() - 1
    }

    /// `(k, r_k)` for every `k` with `r_k > 0`, ascending.
    pub fn support(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.pmf
            .iter()
            .enumerate()
            .filter(|(_, r)| **r > 0.0)
            .map(|(k, r)| (k as u32, *r))
    }

    pub fn sampler(&self) -> DegreeSampler {
        match self.as_degenerate() {
            Some(m) => DegreeSampler::Constant(m),
            None => {
                let table = WeightedAliasIndex::new(self.pmf.clone())
                    .expect("validated pmf is a valid weight vector");
                DegreeSampler::Alias(table)
            }
        }
    }
}

/// Draws i.i.d. initial degrees.
#[derive(Debug, Clone)]
pub enum DegreeSampler {
    Constant(u32),
    Alias(WeightedAliasIndex<f64>),
}

impl DegreeSampler {
    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match self {
            DegreeSampler::Constant(m) => *m,
            DegreeSampler::Alias(table) => table.sample(rng) as u32,
        }
    }
}
