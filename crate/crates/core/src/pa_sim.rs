//! Generator for affine preferential attachment multigraphs with random
//! initial degrees, under intermediate updating.
//!
//! `PA_1` is two vertices joined by `m_1` parallel edges. At step `t` the
//! new vertex `v_t` places its `m_t` edges one at a time; edge `i` picks
//! `v_j` in `V_{t-1}` with probability `(deg(v_j) + delta) / S_{t,i-1}`,
//! where `S_{t,i-1} = t delta + 2 M_{t-1} + (i - 1)`. Draws within a step
//! see the degree increments of earlier draws, repeated targets are
//! allowed, and `v_t` itself is never a candidate.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_delta, Error, Result};
use crate::model::{DegreeSampler, InitialDegreeModel};
use crate::rng::{stream_rng, StreamRng};

/// How the initial degrees `m_t` are generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialDegrees {
    Fixed(u32),
    Random(InitialDegreeModel),
}

impl InitialDegrees {
    /// The law of `m_t` as an [`InitialDegreeModel`].
    pub fn model(&self) -> Result<InitialDegreeModel> {
        match self {
            InitialDegrees::Fixed(m) => InitialDegreeModel::degenerate(*m),
            InitialDegrees::Random(r) => Ok(r.clone()),
        }
    }

    /// `Some(m)` when every vertex brings exactly `m` edges.
    pub fn fixed(&self) -> Option<u32> {
        match self {
            InitialDegrees::Fixed(m) => Some(*m),
            InitialDegrees::Random(r) => r.as_degenerate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Final time index; the network has `n + 1` vertices.
    pub n: usize,
    pub delta: f64,
    pub initial_degrees: InitialDegrees,
    pub seed: u64,
    /// Stream within the seed; Monte Carlo replicate `r` uses stream `r`.
    #[serde(default)]
    pub stream: u64,
    #[serde(default)]
    pub record_history: bool,
}

impl SimConfig {
    pub fn new(n: usize, delta: f64, initial_degrees: InitialDegrees, seed: u64) -> Self {
        Self { n, delta, initial_degrees, seed, stream: 0, record_history: false }
    }

    pub fn fixed(n: usize, delta: f64, m: u32, seed: u64) -> Self {
        Self::new(n, delta, InitialDegrees::Fixed(m), seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Validation(format!("n must be at least 2, got {}", self.n)));
        }
        if self.n >= u32::MAX as usize {
            return Err(Error::Validation(format!("n = {} exceeds the vertex id range", self.n)));
        }
        check_delta(self.delta)?;
        if let InitialDegrees::Fixed(0) = self.initial_degrees {
            return Err(Error::Validation("fixed initial degree must be at least 1".into()));
        }
        Ok(())
    }
}

/// One placed edge: at step `t`, edge `i` went to `target`, whose degree
/// was `degree` just before the edge was added.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attachment {
    pub t: u32,
    pub i: u32,
    pub target: u32,
    pub degree: u32,
}

/// Provenance of a simulated network. Estimators never read it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimMeta {
    pub delta: f64,
    pub seed: u64,
    pub stream: u64,
    pub initial_degrees: InitialDegrees,
}

/// The arrival sequence `(m_t)` and quantities derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct Arrivals {
    /// `m_seq[t - 1] = m_t` for `t = 1..=n`.
    m_seq: Vec<u32>,
    /// `cum_edges[t] = M_t`, with `cum_edges[0] = 0`.
    cum_edges: Vec<u64>,
    /// `r_tail[k] = R_{>k}(n) = 2 1{m_1 > k} + sum_{t=2}^n 1{m_t > k}`.
    r_tail: Vec<u64>,
}

impl Arrivals {
    pub fn from_m_seq(m_seq: Vec<u32>) -> Result<Self> {
        if m_seq.is_empty() || m_seq.contains(&0) {
            return Err(Error::Validation("arrival sequence must be non-empty and positive".into()));
        }
        let mut cum_edges = Vec::with_capacity(m_seq.len() + 1);
        cum_edges.push(0u64);
        let mut total = 0u64;
        for &m in &m_seq {
            total += u64::from(m);
            cum_edges.push(total);
        }
        let m_max = *m_seq.iter().max().unwrap() as usize;
        // counts[j] = weighted number of arrivals with m = j; R_{>k} is its suffix sum.
        let mut counts = vec![0u64; m_max + 1];
        counts[m_seq[0] as usize] += 2;
        for &m in &m_seq[1..] {
            counts[m as usize] += 1;
        }
        let mut r_tail = vec![0u64; m_max + 1];
        for k in (0..m_max).rev() {
            r_tail[k] = r_tail[k + 1] + counts[k + 1];
        }
        Ok(Self { m_seq, cum_edges, r_tail })
    }

    pub fn m_seq(&self) -> &[u32] {
        &self.m_seq
    }

    /// `m_t` for `t >= 1`.
    pub fn m(&self, t: usize) -> u32 {
        self.m_seq[t - 1]
    }

    pub fn cum_edges(&self) -> &[u64] {
        &self.cum_edges
    }

    /// `R_{>k}(n)`.
    pub fn r_tail(&self, k: usize) -> u64 {
        self.r_tail.get(k).copied().unwrap_or(0)
    }
}

/// Degree statistics of a network at time `n`, optionally with the
/// arrival sequence and the full attachment history.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionStats {
    n: usize,
    total_edges: u64,
    /// `degree_hist[k] = N_k(n)` for `k = 0..=max_degree`.
    degree_hist: Vec<u64>,
    /// `tail_counts[k] = N_{>k}(n)`.
    tail_counts: Vec<u64>,
    arrivals: Option<Arrivals>,
    history: Option<Vec<Attachment>>,
    meta: Option<SimMeta>,
}

impl EvolutionStats {
    /// Builds statistics from a degree histogram, checking the vertex count
    /// and handshake identities.
    pub fn from_histogram(
        n: usize,
        degree_hist: Vec<u64>,
        arrivals: Option<Arrivals>,
        history: Option<Vec<Attachment>>,
        meta: Option<SimMeta>,
    ) -> Result<Self> {
        let mut degree_hist = degree_hist;
        while degree_hist.len() > 1 && *degree_hist.last().unwrap() == 0 {
            degree_hist.pop();
        }
        if degree_hist.is_empty() {
            degree_hist.push(0);
        }
        if degree_hist[0] != 0 {
            return Err(Error::Validation("the network has isolated vertices".into()));
        }
        let vertices: u64 = degree_hist.iter().sum();
        if vertices != n as u64 + 1 {
            return Err(Error::Validation(format!(
                "histogram counts {vertices} vertices, expected n + 1 = {}",
                n + 1
            )));
        }
        let degree_sum: u64 = degree_hist.iter().enumerate().map(|(k, c)| k as u64 * c).sum();
        if !degree_sum.is_multiple_of(2) {
            return Err(Error::Validation(format!("degree sum {degree_sum} is odd")));
        }
        let total_edges = degree_sum / 2;
        if let Some(a) = &arrivals {
            if a.m_seq.len() != n {
                return Err(Error::Validation(format!(
                    "arrival sequence has {} entries, expected n = {n}",
                    a.m_seq.len()
                )));
            }
            if a.cum_edges[n] != total_edges {
                return Err(Error::Validation(format!(
                    "arrivals add up to {} edges but the histogram has {total_edges}",
                    a.cum_edges[n]
                )));
            }
        }
        let mut tail_counts = vec![0u64; degree_hist.len()];
        for k in (0..degree_hist.len() - 1).rev() {
            tail_counts[k] = tail_counts[k + 1] + degree_hist[k + 1];
        }
        Ok(Self { n, total_edges, degree_hist, tail_counts, arrivals, history, meta })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertex_count(&self) -> u64 {
        self.n as u64 + 1
    }

    /// `M_n`.
    pub fn total_edges(&self) -> u64 {
        self.total_edges
    }

    pub fn max_degree(&self) -> usize {
        self.degree_hist.len() - 1
    }

    /// `N_k(n)`.
    pub fn count(&self, k: usize) -> u64 {
        self.degree_hist.get(k).copied().unwrap_or(0)
    }

    /// `N_{>k}(n)`.
    pub fn tail_count(&self, k: usize) -> u64 {
        self.tail_counts.get(k).copied().unwrap_or(0)
    }

    pub fn degree_hist(&self) -> &[u64] {
        &self.degree_hist
    }

    /// `(k, N_k)` for every occupied degree, ascending.
    pub fn occupied(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.degree_hist.iter().enumerate().filter(|(_, c)| **c > 0).map(|(k, c)| (k, *c))
    }

    pub fn arrivals(&self) -> Option<&Arrivals> {
        self.arrivals.as_ref()
    }

    pub fn history(&self) -> Option<&[Attachment]> {
        self.history.as_deref()
    }

    pub fn meta(&self) -> Option<&SimMeta> {
        self.meta.as_ref()
    }

    pub fn is_snapshot(&self) -> bool {
        self.arrivals.is_none()
    }

    /// Smallest occupied degree.
    pub fn min_degree(&self) -> usize {
        self.occupied().next().map(|(k, _)| k).unwrap_or(0)
    }
}

/// Drops everything that cannot be read off the final network: the
/// arrival sequence, `R_{>k}`, `M_t` and the attachment history.
pub fn snapshot_stats(stats: &EvolutionStats) -> EvolutionStats {
    EvolutionStats {
        n: stats.n,
        total_edges: stats.total_edges,
        degree_hist: stats.degree_hist.clone(),
        tail_counts: stats.tail_counts.clone(),
        arrivals: None,
        history: None,
        meta: stats.meta.clone(),
    }
}

/// Sampling state for one attachment draw.
///
/// `endpoints` holds one entry per edge endpoint incident to `V_{t-1}`:
/// both ends of every edge of `PA_{t-1}` plus the target end of each edge
/// already placed by `v_t`. Its length is `2 M_{t-1} + (i - 1)`.
#[derive(Debug, Clone)]
pub struct AttachmentState {
    endpoints: Vec<u32>,
    degrees: Vec<u32>,
    candidates: usize,
}

impl AttachmentState {
    /// A state whose candidate set is exactly the given vertices.
    pub fn from_degrees(degrees: &[u32]) -> Self {
        let mut endpoints = Vec::with_capacity(degrees.iter().map(|d| *d as usize).sum());
        for (v, &d) in degrees.iter().enumerate() {
            endpoints.extend(std::iter::repeat_n(v as u32, d as usize));
        }
        Self { endpoints, degrees: degrees.to_vec(), candidates: degrees.len() }
    }

    /// Number of candidate vertices `|V_{t-1}| = t`.
    pub fn candidates(&self) -> usize {
        self.candidates
    }

    pub fn degree(&self, v: u32) -> u32 {
        self.degrees[v as usize]
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    /// `S = t delta + sum of candidate degrees`.
    pub fn total_preference(&self, delta: f64) -> f64 {
        self.candidates as f64 * delta + self.endpoints.len() as f64
    }

    fn attach(&mut self, target: u32) {
        self.degrees[target as usize] += 1;
        self.endpoints.push(target);
    }

    /// Integrates a newcomer with `m` edges and makes it a candidate.
    fn admit(&mut self, m: u32) {
        let v = self.degrees.len() as u32;
        self.degrees.push(m);
        self.endpoints.extend(std::iter::repeat_n(v, m as usize));
        self.candidates += 1;
    }
}

/// Draws a target with probability `(deg + delta) / S`.
///
/// For `delta >= 0` this is the mixture of a degree-proportional draw
/// (weight `2 M_{t-1} + i - 1`) and a uniform vertex draw (weight `t delta`).
/// For `-1 < delta < 0` a degree-proportional proposal is accepted with
/// probability `(deg + delta) / deg >= 1 + delta`.
#[inline]
pub fn sample_target<R: Rng + ?Sized>(state: &AttachmentState, delta: f64, rng: &mut R) -> u32 {
    let ends = state.endpoints.len();
    if delta >= 0.0 {
        let s = state.total_preference(delta);
        let u = rng.random::<f64>() * s;
        let uf = u.floor();
        if uf < ends as f64 {
            state.endpoints[(uf as usize).min(ends - 1)]
        } else {
            let v = ((u - ends as f64) / delta) as usize;
            v.min(state.candidates - 1) as u32
        }
    } else {
        loop {
            let v = state.endpoints[rng.random_range(0..ends)];
            let d = f64::from(state.degrees[v as usize]);
            if rng.random::<f64>() * d < d + delta {
                return v;
            }
        }
    }
}

/// Step-by-step network generator.
pub struct Simulator {
    config: SimConfig,
    rng: StreamRng,
    sampler: DegreeSampler,
    state: AttachmentState,
    t: usize,
    m_seq: Vec<u32>,
    history: Option<Vec<Attachment>>,
}

impl Simulator {
    /// Validates the configuration and builds `PA_1`.
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let sampler = config.initial_degrees.model()?.sampler();
        let mut rng = stream_rng(config.seed, config.stream);
        let m1 = sampler.draw(&mut rng);
        let mut edge_capacity = 2 * (config.n + 1);
        if let Some(m) = config.initial_degrees.fixed() {
            edge_capacity = 2 * m as usize * config.n;
        }
        let mut state = AttachmentState {
            endpoints: Vec::with_capacity(edge_capacity),
            degrees: Vec::with_capacity(config.n + 1),
            candidates: 0,
        };
        state.admit(m1);
        state.admit(m1);
        let mut m_seq = Vec::with_capacity(config.n);
        m_seq.push(m1);
        let history = config.record_history.then(Vec::new);
        Ok(Self { config, rng, sampler, state, t: 1, m_seq, history })
    }

    /// Current time index `t` (the network has `t + 1` vertices).
    pub fn time(&self) -> usize {
        self.t
    }

    pub fn is_done(&self) -> bool {
        self.t >= self.config.n
    }

    /// Degrees of all vertices, indexed by vertex id.
    pub fn degrees(&self) -> &[u32] {
        self.state.degrees()
    }

    /// Adds vertex `v_{t+1}` with its edges.
    pub fn step(&mut self) {
        let t = self.t + 1;
        let m = self.sampler.draw(&mut self.rng);
        for i in 1..=m {
            let target = sample_target(&self.state, self.config.delta, &mut self.rng);
            if let Some(h) = &mut self.history {
                h.push(Attachment {
                    t: t as u32,
                    i,
                    target,
                    degree: self.state.degree(target),
                });
            }
            self.state.attach(target);
        }
        self.state.admit(m);
        self.m_seq.push(m);
        self.t = t;
    }

    /// Advances to time `min(t, n)`.
    pub fn run_until(&mut self, t: usize) {
        let t = t.min(self.config.n);
        while self.t < t {
            self.step();
        }
    }

    /// Degree histogram `N_k(t)` at the current time.
    pub fn degree_histogram(&self) -> Vec<u64> {
        let max = self.state.degrees.iter().copied().max().unwrap_or(0) as usize;
        let mut hist = vec![0u64; max + 1];
        for &d in &self.state.degrees {
            hist[d as usize] += 1;
        }
        hist
    }

    /// Statistics of the network at the current time.
    pub fn stats(&self) -> EvolutionStats {
        let arrivals = Arrivals::from_m_seq(self.m_seq.clone()).expect("simulated arrivals are positive");
        let meta = SimMeta {
            delta: self.config.delta,
            seed: self.config.seed,
            stream: self.config.stream,
            initial_degrees: self.config.initial_degrees.clone(),
        };
        EvolutionStats::from_histogram(
            self.t,
            self.degree_histogram(),
            Some(arrivals),
            self.history.clone(),
            Some(meta),
        )
        .expect("simulated network satisfies the histogram identities")
    }
}

/// Runs a full simulation to time `config.n`.
pub fn simulate(config: &SimConfig) -> Result<EvolutionStats> {
    let mut sim = Simulator::new(config.clone())?;
    sim.run_until(config.n);
    Ok(sim.stats())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_graph_is_two_vertices_with_m1_edges() {
        let sim = Simulator::new(SimConfig::fixed(10, 0.0, 3, 1)).unwrap();
        assert_eq!(sim.degrees(), &[3, 3]);
        assert_eq!(sim.state.total_preference(0.5), 2.0 * 0.5 + 6.0);
    }

    #[test]
    fn total_preference_matches_closed_form_during_a_step() {
        let mut sim = Simulator::new(SimConfig::fixed(50, 0.7, 4, 9)).unwrap();
        sim.run_until(20);
        let t = 21usize;
        let m_prev_total = 4 * 20;
        for i in 1..=4u32 {
            let s = sim.state.total_preference(0.7);
            let closed = t as f64 * 0.7 + 2.0 * m_prev_total as f64 + f64::from(i - 1);
            assert!((s - closed).abs() < 1e-9);
            let v = sample_target(&sim.state, 0.7, &mut sim.rng);
            assert!((v as usize) < t, "newcomer must not be a candidate");
            sim.state.attach(v);
        }
    }

    #[test]
    fn rejects_invalid_configs() {
        assert!(SimConfig::fixed(1, 0.0, 1, 0).validate().is_err());
        assert!(SimConfig::fixed(10, -1.0, 1, 0).validate().is_err());
        assert!(SimConfig::fixed(10, f64::NAN, 1, 0).validate().is_err());
        assert!(SimConfig::fixed(10, 0.0, 0, 0).validate().is_err());
    }

    #[test]
    fn snapshot_keeps_only_the_histogram() {
        let mut cfg = SimConfig::fixed(300, 0.5, 2, 4);
        cfg.record_history = true;
        let stats = simulate(&cfg).unwrap();
        let snap = snapshot_stats(&stats);
        assert!(snap.arrivals().is_none());
        assert!(snap.history().is_none());
        assert_eq!(snap.degree_hist(), stats.degree_hist());
        assert_eq!(snap.degree_hist().iter().sum::<u64>(), 301);
        assert_eq!(snap.total_edges(), 600);
    }

    #[test]
    fn arrivals_r_tail_counts_first_vertex_twice() {
        let a = Arrivals::from_m_seq(vec![3, 1, 2, 5]).unwrap();
        // k = 0: 2 + 3; k = 1: 2 (m_1 = 3) + 1 (m = 2) + 1 (m = 5); k = 2: 2 + 1; k = 4: 1
        assert_eq!(a.r_tail(0), 5);
        assert_eq!(a.r_tail(1), 4);
        assert_eq!(a.r_tail(2), 3);
        assert_eq!(a.r_tail(3), 1);
        assert_eq!(a.r_tail(4), 1);
        assert_eq!(a.r_tail(5), 0);
        assert_eq!(a.cum_edges(), &[0, 3, 4, 6, 11]);
    }
}
