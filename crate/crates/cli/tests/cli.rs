use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn latentcast(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latentcast"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = latentcast(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn synthesize(dir: &Path) {
    ok(
        dir,
        &["--seed", "5", "--output", "data", "synthesize", "--series", "40", "--latent", "3"],
    );
}

#[test]
fn run_writes_every_artifact_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    synthesize(dir);
    let meta = fs::read_to_string(dir.join("data/metadata.csv")).unwrap();
    assert!(meta.starts_with("id,category\nS1,"));
    for out in ["a", "b"] {
        let stdout = ok(
            dir,
            &[
                "--seed", "2", "--output", out, "run", "--data", "data/panel.csv", "--metadata", "data/metadata.csv", "--rank", "3",
            ],
        );
        assert!(stdout.contains("leakage violations: 0"), "{stdout}");
    }
    for name in [
        "forecasts.csv",
        "model.json",
        "scaling.json",
        "latent.csv",
        "latent_forecast.csv",
        "cv_scores.csv",
        "cv_summary.json",
        "eval.json",
        "benchmark.json",
    ] {
        assert!(dir.join("a").join(name).is_file(), "missing {name}");
    }
    let a = fs::read(dir.join("a/forecasts.csv")).unwrap();
    assert_eq!(a, fs::read(dir.join("b/forecasts.csv")).unwrap());
    assert!(String::from_utf8_lossy(&a).starts_with("id,F1,F2,"));
    let cv = fs::read_to_string(dir.join("a/cv_scores.csv")).unwrap();
    assert!(cv.starts_with("latent_id,method,fold,smape\n"));
}

#[test]
fn config_file_with_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    synthesize(dir);
    fs::write(
        dir.join("run.toml"),
        r#"version = 1
seed = 1
methods = ["mean", "naive", "snaive", "drift", "ses"]

[data]
path = "data/panel.csv"

[trmf]
rank = 2

[cv]
metric = "smape_abs"

[output]
dir = "from-config"

[benchmark]
enabled = false
"#,
    )
    .unwrap();
    ok(dir, &["run", "--config", "run.toml"]);
    let summary = fs::read_to_string(dir.join("from-config/cv_summary.json")).unwrap();
    assert!(summary.contains("\"smape_abs\""));
    assert!(!summary.contains("holt"));
    let model = fs::read_to_string(dir.join("from-config/model.json")).unwrap();
    assert!(model.contains("\"seed\": 1"));
    // --output and --seed override the file.
    ok(dir, &["--output", "override", "--seed", "9", "factorize", "--config", "run.toml", "--rank", "3"]);
    let model = fs::read_to_string(dir.join("override/model.json")).unwrap();
    assert!(model.contains("\"seed\": 9") && model.contains("\"rank\": 3"));
}

#[test]
fn factorize_then_cv_and_evaluate() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    synthesize(dir);
    ok(dir, &["--output", "fac", "factorize", "--data", "data/panel.csv", "--rank", "3"]);
    let latent = fs::read_to_string(dir.join("fac/latent.csv")).unwrap();
    assert_eq!(latent.lines().count(), 4);
    let stdout = ok(dir, &["--output", "cv", "cv", "--latent", "fac/latent.csv", "--horizon", "12"]);
    assert_eq!(stdout.lines().filter(|l| l.contains(": top ")).count(), 3);
    assert!(dir.join("cv/latent_forecast.csv").is_file());

    ok(dir, &["--output", "run", "run", "--data", "data/panel.csv", "--rank", "3", "--no-benchmark"]);
    let stdout = ok(
        dir,
        &["--output", "ev", "evaluate", "--data", "data/panel.csv", "--forecasts", "run/forecasts.csv", "--method", "mine"],
    );
    assert!(stdout.starts_with("mine: sMAPE"), "{stdout}");
    let eval = fs::read_to_string(dir.join("ev/eval.json")).unwrap();
    let run_eval = fs::read_to_string(dir.join("run/eval.json")).unwrap();
    let owa = |s: &str| s.lines().find(|l| l.contains("\"owa\":")).map(str::to_string);
    assert_eq!(owa(&eval), owa(&run_eval));
}

#[test]
fn rank_sweep_and_benchmark() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    synthesize(dir);
    let stdout = ok(dir, &["--output", "sw", "rank-sweep", "--data", "data/panel.csv", "--grid", "1,2,3,4,6"]);
    assert!(stdout.contains("<- elbow"));
    let elbow = fs::read_to_string(dir.join("sw/elbow.csv")).unwrap();
    assert_eq!(elbow.lines().count(), 6);
    let stdout = ok(
        dir,
        &["--threads", "1", "--output", "bm", "benchmark", "--data", "data/panel.csv", "--rank", "3", "--no-direct-cv"],
    );
    assert!(stdout.contains("hw_additive") && stdout.contains("ratio"));
    assert!(dir.join("bm/benchmark.json").is_file());
}

#[test]
fn errors_are_reported_with_nonzero_exit() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let out = latentcast(dir, &["run"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--config or --data"));

    let out = latentcast(dir, &["run", "--data", "missing.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    fs::write(dir.join("v2.toml"), "version = 2\n[data]\npath = \"x.csv\"\n").unwrap();
    let out = latentcast(dir, &["run", "--config", "v2.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("version"));

    fs::write(dir.join("typo.toml"), "version = 1\n[data]\npath = \"x.csv\"\n[trmf]\nrnak = 3\n").unwrap();
    let out = latentcast(dir, &["run", "--config", "typo.toml"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("rnak"));

    fs::write(dir.join("bad.csv"), "S1,1,2,x\n").unwrap();
    let out = latentcast(dir, &["run", "--data", "bad.csv"]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.csv") && err.contains("column 4"), "{err}");

    let out = latentcast(dir, &["run", "--data", "x.csv", "--metric", "rmse"]);
    assert_eq!(out.status.code(), Some(2));
    let out = latentcast(dir, &["--threads", "0", "synthesize"]);
    assert_eq!(out.status.code(), Some(1));
}
