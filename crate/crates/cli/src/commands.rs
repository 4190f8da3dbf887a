use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use affine_pa::degree_law::{self, limit_law};
use affine_pa::estimators::LogLogFit;
use affine_pa::io::{read_histogram_csv, read_stats_json, write_histogram_csv, write_stats_json};
use affine_pa::{
    loglog_fit, mle, mle_fixed_m, mu_hat, qmle, run_mc, EstimateOptions, EstimateReport, EstimatorKind,
    EvolutionStats, SimConfig,
};
use serde::Serialize;

use crate::args::{EstimateArgs, LimitArgs, McArgs, SimulateArgs};
use crate::config::{self, check_delta, check_n};
use crate::manifest::{now_ms, RunManifest};
use crate::{CliError, CliResult};

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::usage(format!("--out: cannot create {}: {e}", dir.display())))
}

pub fn simulate(args: &SimulateArgs, argv: &[String]) -> CliResult<()> {
    let started = now_ms();
    let n = check_n("--n", args.n)?;
    let delta = check_delta("--delta", args.delta)?;
    let degrees = config::degrees(&args.degrees)?;
    let mut cfg = SimConfig::new(n, delta, degrees, args.seed);
    cfg.stream = args.stream;
    cfg.record_history = args.record_history;
    cfg.validate()?;

    let stats = affine_pa::simulate(&cfg)?;
    create_dir(&args.out)?;
    let stats_path = args.out.join("stats.json");
    let hist_path = args.out.join("histogram.csv");
    write_stats_json(&stats, &stats_path)?;
    let mut w = BufWriter::new(fs::File::create(&hist_path)?);
    write_histogram_csv(&stats, &mut w)?;
    w.flush()?;

    let mut manifest = RunManifest::new("simulate", argv, &cfg, Some(cfg.seed), started)?;
    manifest.outputs = vec![stats_path.clone(), hist_path.clone()];
    manifest.write(&args.out)?;
    println!(
        "n={} vertices={} edges={} max_degree={} stats={}",
        stats.n(),
        stats.vertex_count(),
        stats.total_edges(),
        stats.max_degree(),
        stats_path.display()
    );
    Ok(())
}

fn load_input(path: &Path) -> CliResult<(EvolutionStats, PathBuf)> {
    let file = if path.is_dir() { path.join("stats.json") } else { path.to_path_buf() };
    if !file.exists() {
        return Err(CliError::usage(format!("--input: {} does not exist", file.display())));
    }
    let stats = if file.extension().is_some_and(|e| e == "csv") {
        read_histogram_csv(BufReader::new(fs::File::open(&file)?))
    } else {
        read_stats_json(&file)
    }
    .map_err(|e| {
        let mut err = CliError::from(e);
        err.message = format!("--input: {}: {}", file.display(), err.message);
        err
    })?;
    let dir = file.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((stats, dir))
}

#[derive(Debug, Serialize)]
struct EstimateEcho {
    input: PathBuf,
    estimator: EstimatorKind,
    pmf_file: Option<PathBuf>,
    m: Option<u32>,
    options: EstimateOptions,
    k_min: Option<usize>,
    k_max: Option<usize>,
}

#[derive(Debug, Serialize)]
struct EstimateDocument<'a> {
    format: &'static str,
    version: &'static str,
    config: &'a EstimateEcho,
    manifest: &'a RunManifest,
    report: &'a EstimateReport,
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_else(|| "NA".to_string())
}

pub fn estimate(args: &EstimateArgs, argv: &[String]) -> CliResult<()> {
    let started = now_ms();
    let kind = config::parse_estimator(&args.estimator)?;
    let opts = config::estimate_options(&args.solver, EstimateOptions::default())?;
    let model = match (&args.pmf_file, kind) {
        (Some(p), _) => Some(config::load_pmf(p)?),
        (None, EstimatorKind::Qmle) => {
            return Err(CliError::usage(
                "--pmf-file is required by qmle: the quasi-likelihood needs the initial-degree law",
            ));
        }
        (None, _) => None,
    };
    let (stats, input_dir) = load_input(&args.input)?;

    let report = match kind {
        EstimatorKind::Mle => mle(&stats, &opts),
        EstimatorKind::MleFixedM => mle_fixed_m(&stats, args.m, &opts),
        EstimatorKind::Qmle => qmle(&stats, model.as_ref().expect("checked above"), &opts),
        EstimatorKind::Loglog => {
            let k_min = args.solver.k_min.unwrap_or_else(|| stats.min_degree());
            let k_max = args.solver.k_max.unwrap_or_else(|| stats.max_degree());
            loglog_fit(&stats, k_min, k_max, mu_hat(&stats))
        }
    }?;

    let echo = EstimateEcho {
        input: args.input.clone(),
        estimator: kind,
        pmf_file: args.pmf_file.clone(),
        m: args.m,
        options: opts,
        k_min: args.solver.k_min,
        k_max: args.solver.k_max,
    };
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| input_dir.join(format!("estimate-{}.json", kind.as_str())));
    let mut manifest = RunManifest::new("estimate", argv, &echo, None, started)?;
    manifest.finished_unix_ms = now_ms();
    manifest.outputs = vec![out.clone()];
    let doc = EstimateDocument {
        format: "affine-pa/estimate-report",
        version: affine_pa::VERSION,
        config: &echo,
        manifest: &manifest,
        report: &report,
    };
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    fs::write(&out, serde_json::to_string_pretty(&doc)? + "\n")?;

    let mut line = format!(
        "estimator={} delta_hat={} ci_lo={} ci_hi={} converged={} boundary_hit={} observed_info={} n={}",
        kind,
        report.delta_hat,
        fmt_opt(report.ci.map(|c| c.lo)),
        fmt_opt(report.ci.map(|c| c.hi)),
        report.converged,
        serde_json::to_value(report.boundary_hit)?.as_str().unwrap_or("none"),
        report.observed_info,
        report.n
    );
    if let Some(LogLogFit { tau_hat, delta_scaled, .. }) = &report.loglog {
        line.push_str(&format!(" tau_hat={tau_hat} delta_scaled={delta_scaled}"));
    }
    println!("{line}");
    Ok(())
}

pub fn mc(args: &McArgs, argv: &[String]) -> CliResult<()> {
    let started = now_ms();
    let plan = config::resolve_mc(args)?;
    let summary = run_mc(&plan.config)?;

    for s in &summary.estimators {
        let mut line = format!(
            "estimator={} estimates={} failures={} boundary_hits={} mean={} median={} sample_var={} predicted_var={} min={} max={} mse={}",
            s.estimator,
            s.estimates.len(),
            s.failures,
            s.boundary_hits,
            fmt_opt(s.mean),
            fmt_opt(s.median),
            fmt_opt(s.sample_variance),
            fmt_opt(s.predicted_variance),
            fmt_opt(s.min),
            fmt_opt(s.max),
            fmt_opt(s.mse),
        );
        if let Some(c) = s.coverage {
            line.push_str(&format!(" coverage={}/{}", c.covered, c.intervals));
        }
        println!("{line}");
    }

    if let Some(dir) = &plan.out {
        create_dir(dir)?;
        let outputs = summary.write_outputs(dir)?;
        let mut file = plan.file.clone();
        if let Some(pmf) = &file.pmf_file {
            let copy = dir.join("initial_degrees.csv");
            fs::copy(pmf, &copy)?;
            file.pmf_file = Some(PathBuf::from("initial_degrees.csv"));
        }
        let resolved = dir.join("config.toml");
        let text = toml::to_string(&file).map_err(|e| CliError { code: 1, message: e.to_string() })?;
        fs::write(&resolved, text)?;
        let mut manifest = RunManifest::new("mc", argv, &plan.config, Some(plan.config.base_seed), started)?;
        manifest.outputs = vec![outputs.estimates_csv, outputs.summary_json, outputs.histogram_csv, resolved];
        manifest.write(dir)?;
        println!("outputs={}", dir.display());
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct LimitEcho {
    delta: f64,
    initial_degrees: affine_pa::InitialDegrees,
    tail_tol: f64,
}

#[derive(Debug, Serialize)]
struct LimitDocument {
    version: &'static str,
    delta: f64,
    theta: f64,
    mu: f64,
    k_trunc: usize,
    trunc_mass: f64,
    nu0: f64,
    nu0_error_bound: f64,
    nu_tilde0: f64,
    mle_variance_per_n: f64,
    qmle_variance_per_n: f64,
}

pub fn limit(args: &LimitArgs, argv: &[String]) -> CliResult<()> {
    let started = now_ms();
    let delta = check_delta("--delta", args.delta)?;
    let degrees = config::degrees(&args.degrees)?;
    let r = degrees.model()?;
    if !(args.tail_tol > 0.0 && args.tail_tol < 1.0) {
        return Err(CliError::usage(format!("--tail-tol: must lie in (0, 1), got {}", args.tail_tol)));
    }
    let law = limit_law(delta, &r, args.tail_tol)?;
    let nu0 = degree_law::nu0_from_law(&law)?;
    let nu_tilde0 = degree_law::nu_tilde0(delta, &r)?;
    let doc = LimitDocument {
        version: affine_pa::VERSION,
        delta,
        theta: law.theta,
        mu: law.mu,
        k_trunc: law.k_trunc(),
        trunc_mass: law.trunc_mass,
        nu0: nu0.value,
        nu0_error_bound: nu0.error_bound,
        nu_tilde0,
        mle_variance_per_n: 1.0 / nu0.value,
        qmle_variance_per_n: (nu0.value + nu_tilde0) / (nu0.value * nu0.value),
    };

    println!("delta = {delta}");
    println!("mu = {}", law.mu);
    println!("theta = {}", law.theta);
    println!("tail_exponent = {}", 1.0 + law.theta);
    println!("nu0 = {}", nu0.value);
    println!("nu_tilde0 = {nu_tilde0}");
    println!("mle_variance_per_n = {}", doc.mle_variance_per_n);
    println!("qmle_variance_per_n = {}", doc.qmle_variance_per_n);
    println!("k_trunc = {}", law.k_trunc());
    let first = r.support().next().map_or(1, |(k, _)| k as usize);
    for k in first..(first + args.show).min(law.k_trunc() + 1) {
        println!("p_{k} = {}", law.p[k]);
    }

    if let Some(dir) = &args.out {
        create_dir(dir)?;
        let csv = dir.join("limit_law.csv");
        let mut w = BufWriter::new(fs::File::create(&csv)?);
        law.write_csv(&mut w)?;
        w.flush()?;
        let json = dir.join("limit.json");
        fs::write(&json, serde_json::to_string_pretty(&doc)? + "\n")?;
        let echo = LimitEcho { delta, initial_degrees: degrees, tail_tol: args.tail_tol };
        let mut manifest = RunManifest::new("limit", argv, &echo, None, started)?;
        manifest.outputs = vec![csv, json];
        manifest.write(dir)?;
    }
    Ok(())
}
