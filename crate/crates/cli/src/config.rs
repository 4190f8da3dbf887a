//! Flag validation and the flat TOML config of `mc`.
//!
//! Config keys mirror the long flag names (`base-seed`, `pmf-file`, ...).
//! Flags override file values; `workers` falls back to `$AFFINE_PA_WORKERS`
//! and then to one thread per core.

use std::fs;
use std::path::{Path, PathBuf};

use affine_pa::estimators::Bracket;
use affine_pa::io::read_pmf_file;
use affine_pa::mc_lab::LogLogRange;
use affine_pa::{EstimateOptions, EstimatorKind, InitialDegreeModel, InitialDegrees, McConfig, SimConfig};
use serde::{Deserialize, Serialize};

use crate::args::{DegreeArgs, McArgs, SolverArgs};
use crate::{CliError, CliResult};

pub const WORKERS_ENV: &str = "AFFINE_PA_WORKERS";

pub fn check_delta(flag: &str, delta: f64) -> CliResult<f64> {
    if delta > -1.0 && delta.is_finite() {
        Ok(delta)
    } else {
        Err(CliError::usage(format!("{flag}: delta must satisfy delta > -1, got {delta}")))
    }
}

pub fn check_n(flag: &str, n: usize) -> CliResult<usize> {
    if n >= 2 {
        Ok(n)
    } else {
        Err(CliError::usage(format!("{flag}: n must be at least 2, got {n}")))
    }
}

fn check_m(m: u32) -> CliResult<u32> {
    if m >= 1 {
        Ok(m)
    } else {
        Err(CliError::usage("--m: the initial degree must be at least 1"))
    }
}

fn with_flag(flag: &str, err: affine_pa::Error) -> CliError {
    let mut e = CliError::from(err);
    e.message = format!("{flag}: {}", e.message);
    e
}

pub fn load_pmf(path: &Path) -> CliResult<InitialDegreeModel> {
    read_pmf_file(path).map_err(|e| with_flag("--pmf-file", e))
}

/// Resolves `--m` / `--pmf-file` to the initial-degree law.
pub fn degrees(args: &DegreeArgs) -> CliResult<InitialDegrees> {
    match (args.m, &args.pmf_file) {
        (Some(m), None) => Ok(InitialDegrees::Fixed(check_m(m)?)),
        (None, Some(path)) => Ok(InitialDegrees::Random(load_pmf(path)?)),
        _ => Err(CliError::usage("give exactly one of --m or --pmf-file")),
    }
}

pub fn parse_bracket(text: &str) -> CliResult<Bracket> {
    let bad = || CliError::usage(format!("--bracket: expected LO,HI, got '{text}'"));
    let (lo, hi) = text.split_once(',').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    Bracket::new(lo, hi).map_err(|e| with_flag("--bracket", e))
}

pub fn parse_estimator(text: &str) -> CliResult<EstimatorKind> {
    text.parse().map_err(|e| with_flag("--estimator", e))
}

/// Solver options from flags layered over `base`.
pub fn estimate_options(args: &SolverArgs, base: EstimateOptions) -> CliResult<EstimateOptions> {
    let mut opts = base;
    if let Some(b) = &args.bracket {
        opts.bracket = parse_bracket(b)?;
    }
    if let Some(tol) = args.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::usage(format!("--tol: must be positive, got {tol}")));
        }
        opts.tol = tol;
    }
    if let Some(alpha) = args.alpha {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(CliError::usage(format!("--alpha: must lie in (0, 1), got {alpha}")));
        }
        opts.alpha = alpha;
    }
    Ok(opts)
}

/// Contents of an `mc` config file. Every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct McFile {
    pub replicates: Option<usize>,
    pub n: Option<usize>,
    pub delta: Option<f64>,
    pub m: Option<u32>,
    pub pmf_file: Option<PathBuf>,
    pub estimators: Option<Vec<String>>,
    pub base_seed: Option<u64>,
    pub workers: Option<usize>,
    pub bins: Option<usize>,
    pub bracket: Option<[f64; 2]>,
    pub tol: Option<f64>,
    pub alpha: Option<f64>,
    pub k_min: Option<usize>,
    pub k_max: Option<usize>,
    pub out: Option<PathBuf>,
}

impl McFile {
    /// Reads a config file; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("--config: cannot read {}: {e}", path.display())))?;
        let mut file: McFile = toml::from_str(&text)
            .map_err(|e| CliError::usage(format!("--config: {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut file.pmf_file, &mut file.out].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(file)
    }
}

/// Merged `mc` settings.
#[derive(Debug, Clone)]
pub struct McPlan {
    pub config: McConfig,
    /// Resolved settings in config-file form, written next to the outputs.
    pub file: McFile,
    pub out: Option<PathBuf>,
}

fn required<T>(value: Option<T>, key: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::usage(format!("--{key} is required (flag or config key '{key}')")))
}

pub fn resolve_mc(args: &McArgs) -> CliResult<McPlan> {
    let file = match &args.config {
        Some(path) => McFile::load(path)?,
        None => McFile::default(),
    };

    let replicates = required(args.replicates.or(file.replicates), "replicates")?;
    if replicates == 0 {
        return Err(CliError::usage("--replicates: must be at least 1"));
    }
    let n = check_n("--n", required(args.n.or(file.n), "n")?)?;
    let delta = check_delta("--delta", required(args.delta.or(file.delta), "delta")?)?;

    // A degree flag replaces both degree keys of the file.
    let (m, pmf_file) = if args.degrees.m.is_some() || args.degrees.pmf_file.is_some() {
        (args.degrees.m, args.degrees.pmf_file.clone())
    } else {
        (file.m, file.pmf_file.clone())
    };
    let initial_degrees = degrees(&DegreeArgs { m, pmf_file: pmf_file.clone() })?;

    let names = args
        .estimators
        .clone()
        .or(file.estimators.clone())
        .unwrap_or_else(|| vec!["mle".to_string()]);
    let estimators = names
        .iter()
        .map(|s| s.parse::<EstimatorKind>().map_err(|e| with_flag("--estimators", e)))
        .collect::<CliResult<Vec<_>>>()?;

    let workers = match args.workers.or(file.workers) {
        Some(w) => w,
        None => match std::env::var(WORKERS_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("${WORKERS_ENV}: expected a thread count, got '{v}'")))?,
            Err(_) => 0,
        },
    };

    let mut base_opts = EstimateOptions::default();
    if let Some([lo, hi]) = file.bracket {
        base_opts.bracket = Bracket::new(lo, hi).map_err(|e| with_flag("bracket", e))?;
    }
    base_opts.tol = file.tol.unwrap_or(base_opts.tol);
    base_opts.alpha = file.alpha.unwrap_or(base_opts.alpha);
    let estimate = estimate_options(&args.solver, base_opts)?;
    estimate.validate().map_err(CliError::from)?;

    let bins = args.bins.or(file.bins);
    if bins == Some(0) {
        return Err(CliError::usage("--bins: must be at least 1"));
    }
    let loglog = LogLogRange {
        k_min: args.solver.k_min.or(file.k_min),
        k_max: args.solver.k_max.or(file.k_max),
    };
    let base_seed = args.base_seed.or(file.base_seed).unwrap_or(0);

    let sim = SimConfig::new(n, delta, initial_degrees, base_seed);
    let config = McConfig {
        replicates,
        sim,
        estimators: estimators.clone(),
        base_seed,
        workers,
        histogram_bins: bins,
        estimate,
        loglog,
    };
    config.validate()?;

    let out = args.out.clone().or(file.out.clone());
    let resolved = McFile {
        replicates: Some(replicates),
        n: Some(n),
        delta: Some(delta),
        m,
        pmf_file,
        estimators: Some(estimators.iter().map(|k| k.as_str().to_string()).collect()),
        base_seed: Some(base_seed),
        workers: Some(workers),
        bins,
        bracket: Some([estimate.bracket.lo, estimate.bracket.hi]),
        tol: Some(estimate.tol),
        alpha: Some(estimate.alpha),
        k_min: loglog.k_min,
        k_max: loglog.k_max,
        out: None,
    };
    Ok(McPlan { config, file: resolved, out })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_parsing() {
        assert_eq!(parse_bracket("-0.5, 3").unwrap(), Bracket { lo: -0.5, hi: 3.0 });
        assert_eq!(parse_bracket("1,0").unwrap_err().code, 2);
        assert!(parse_bracket("abc").unwrap_err().message.starts_with("--bracket"));
    }

    #[test]
    fn file_keys_are_kebab_case() {
        let f: McFile = toml::from_str("base-seed = 3\nbracket = [-0.9, 10.0]\nestimators = [\"mle\"]\n").unwrap();
        assert_eq!(f.base_seed, Some(3));
        assert_eq!(f.bracket, Some([-0.9, 10.0]));
        assert!(toml::from_str::<McFile>("seed = 3\n").is_err());
    }
}
