use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_affine-pa")).args(args).output().expect("spawn affine-pa")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn field(line: &str, key: &str) -> f64 {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no {key} in {line}"))
        .parse()
        .unwrap()
}

fn named(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|v| v.trim_start().strip_prefix('=')))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .trim()
        .parse()
        .unwrap()
}

fn simulate(dir: &Path, seed: &str) -> Output {
    run(&["simulate", "--n", "3000", "--delta", "0.5", "--m", "3", "--seed", seed, "--out", dir.to_str().unwrap()])
}

#[test]
fn simulate_is_seed_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    let out = simulate(&a, "11");
    assert!(out.status.success(), "{}", stderr(&out));
    let line = stdout(&out);
    assert_eq!(field(&line, "vertices"), 3001.0);
    assert_eq!(field(&line, "edges"), 9000.0);
    for f in ["stats.json", "histogram.csv", "manifest.json"] {
        assert!(a.join(f).is_file(), "{f}");
    }
    assert!(simulate(&b, "11").status.success());
    assert!(simulate(&c, "12").status.success());
    let read = |d: &Path| std::fs::read(d.join("histogram.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "simulate");
    assert_eq!(manifest["seed"], 11);
}

#[test]
fn invalid_delta_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["simulate", "--n", "10", "--delta", "-1.5", "--m", "1", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--delta"), "{}", stderr(&out));
}

#[test]
fn estimators_agree_on_constant_degree_data() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("sim");
    assert!(simulate(&dir, "5").status.success());
    let d = dir.to_str().unwrap();
    let full = run(&["estimate", "--input", d, "--estimator", "mle"]);
    let fixed = run(&["estimate", "--input", d, "--estimator", "mle-fixed-m"]);
    assert!(full.status.success() && fixed.status.success(), "{}{}", stderr(&full), stderr(&fixed));
    let (a, b) = (field(&stdout(&full), "delta_hat"), field(&stdout(&fixed), "delta_hat"));
    assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    assert!(dir.join("estimate-mle.json").is_file());

    let report = tmp.path().join("ll.json");
    let ll = run(&["estimate", "--input", d, "--estimator", "loglog", "--out", report.to_str().unwrap()]);
    assert!(ll.status.success(), "{}", stderr(&ll));
    assert!(stdout(&ll).contains("tau_hat="));
    assert!(report.is_file());
}

#[test]
fn estimate_rejects_unusable_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("sim");
    assert!(simulate(&dir, "6").status.success());
    let qmle = run(&["estimate", "--input", dir.to_str().unwrap(), "--estimator", "qmle"]);
    assert_eq!(qmle.status.code(), Some(2));
    assert!(stderr(&qmle).contains("--pmf-file"));

    let csv = dir.join("histogram.csv");
    let mle = run(&["estimate", "--input", csv.to_str().unwrap(), "--estimator", "mle"]);
    assert_eq!(mle.status.code(), Some(2), "{}", stderr(&mle));
    let fixed = run(&["estimate", "--input", csv.to_str().unwrap(), "--estimator", "mle-fixed-m"]);
    assert!(fixed.status.success(), "{}", stderr(&fixed));

    let pmf = tmp.path().join("pmf.csv");
    std::fs::write(&pmf, "k,prob\n3,1.0\n").unwrap();
    let q = run(&["estimate", "--input", csv.to_str().unwrap(), "--estimator", "qmle", "--pmf-file", pmf.to_str().unwrap()]);
    assert!(q.status.success(), "{}", stderr(&q));
}

#[test]
fn limit_reports_constants() {
    let out = run(&["limit", "--delta", "0", "--m", "5"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!((named(&stdout(&out), "nu0") - 0.0198443360567).abs() < 1e-9);

    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["limit", "--delta", "0", "--m", "1", "--show", "3", "--out", tmp.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!((named(&text, "p_1") - 2.0 / 3.0).abs() < 1e-6);
    assert!((named(&text, "nu0") - (std::f64::consts::PI.powi(2) / 6.0 - 1.5)).abs() < 1e-9);
    let csv = std::fs::read_to_string(tmp.path().join("limit_law.csv")).unwrap();
    assert!(csv.lines().next().unwrap().starts_with("k,"));
    assert!(tmp.path().join("manifest.json").is_file());
}

#[test]
fn mc_from_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "replicates = 6\nn = 800\ndelta = 0.0\nm = 2\nestimators = [\"mle\", \"loglog\"]\nbase-seed = 3\n")
        .unwrap();
    let out_dir = tmp.path().join("mc");
    let out = run(&["mc", "--config", cfg.to_str().unwrap(), "--workers", "2", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.lines().any(|l| l.starts_with("estimator=mle ")));
    for f in ["estimates.csv", "summary.json", "histogram.csv", "config.toml", "manifest.json"] {
        assert!(out_dir.join(f).is_file(), "{f}");
    }
    let estimates = std::fs::read_to_string(out_dir.join("estimates.csv")).unwrap();
    assert_eq!(estimates.lines().count(), 1 + 6 * 2);

    // The echoed config reruns to the same summary.
    let again = tmp.path().join("again");
    let rerun = run(&["mc", "--config", out_dir.join("config.toml").to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(rerun.status.success(), "{}", stderr(&rerun));
    assert_eq!(
        std::fs::read_to_string(out_dir.join("estimates.csv")).unwrap(),
        std::fs::read_to_string(again.join("estimates.csv")).unwrap()
    );
}
