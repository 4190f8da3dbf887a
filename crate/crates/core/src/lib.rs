//! Simulation and likelihood-based inference for affine preferential
//! attachment networks whose vertices arrive with random initial degrees.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: the initial-degree law `(r_k)`.
//! * [`degree_law`]: the limiting degree law `p_k` and the asymptotic
//!   variance constants of the estimators.
//! * [`pa_sim`]: the network generator and its sufficient statistics.
//! * [`estimators`]: the full-history MLE, the snapshot MLE for fixed
//!   initial degree, the quasi-MLE and the log-log regression baseline.
//! * [`mc_lab`]: the parallel Monte Carlo harness.
//! * [`io`]: on-disk formats.

pub mod degree_law;
pub mod error;
pub mod estimators;
pub mod io;
pub mod mc_lab;
pub mod model;
pub mod numeric;
pub mod pa_sim;
pub mod rng;

pub use degree_law::{fixed_m_law, limit_law, limit_score, nu0, nu_tilde0, LimitLaw};
pub use error::{Error, Result};
pub use estimators::{
    iota_n, iota_n_prime, iota_n_second, loglog_fit, mle, mle_fixed_m, mu_hat, qmle,
    BoundaryHit, EstimateOptions, EstimateReport, EstimatorKind,
};
pub use mc_lab::{convergence_probe, run_mc, McConfig, McSummary};
pub use model::InitialDegreeModel;
pub use pa_sim::{simulate, snapshot_stats, EvolutionStats, InitialDegrees, SimConfig};

/// Library version, stamped into every JSON document the crate writes.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
