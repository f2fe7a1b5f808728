use std::path::Path;
use std::process::Command;

use sampcomp::cli::cli_main;

fn run(args: &[&str]) -> i32 {
    cli_main(std::iter::once("sampcomp").chain(args.iter().copied()))
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sampcomp"))
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    let cfg = dir.join("one_cell.toml");
    std::fs::write(
        &cfg,
        "d = [2]\nm = [2]\nsigma = [0.1]\nepsilon = [1.0]\ntrials = 2\nn0 = 16\nn_cap = 32\nseed = 9\n",
    )
    .unwrap();
    cfg
}

#[test]
fn sweep_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = dir.path().join("out");
    assert_eq!(run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
    let csv_path = out.join("trials.csv");
    assert!(csv_path.exists());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert!(summary["sample_complexity"].as_array().unwrap().len() == 1);

    let before = std::fs::read(&csv_path).unwrap();
    let svg = dir.path().join("samples.svg");
    let args = ["report", "--in", csv_path.to_str().unwrap(), "--fig", "samples", "--out", svg.to_str().unwrap()];
    let reached = summary["sample_complexity"][0]["n_eps"].is_number();
    if reached {
        assert_eq!(run(&args), 0);
        let text = std::fs::read_to_string(&svg).unwrap();
        assert_eq!(text.matches("<circle").count(), 1);
        assert_eq!(text.matches("<line").count(), 0, "one point cannot be fitted");
    }
    let q = dir.path().join("queries.svg");
    assert_eq!(
        run(&["report", "--in", csv_path.to_str().unwrap(), "--fig", "queries", "--out", q.to_str().unwrap()]),
        0
    );
    let first = std::fs::read(&q).unwrap();
    assert_eq!(std::fs::read_to_string(&q).unwrap().matches("<line").count(), 1);
    assert_eq!(
        run(&["report", "--in", csv_path.to_str().unwrap(), "--fig", "queries", "--out", q.to_str().unwrap()]),
        0
    );
    assert_eq!(std::fs::read(&q).unwrap(), first);
    assert_eq!(std::fs::read(&csv_path).unwrap(), before, "report must not touch its input");
}

#[test]
fn lambda_and_lrfind_write_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["lambda", "--m-list", "1,2,4", "--trials", "20", "--out", out]), 0);
    let samples = dir.path().join("lambda.csv");
    assert_eq!(std::fs::read_to_string(&samples).unwrap().lines().count(), 61);
    let svg = dir.path().join("lambda.svg");
    assert_eq!(
        run(&["report", "--in", samples.to_str().unwrap(), "--fig", "lambda", "--out", svg.to_str().unwrap()]),
        0
    );
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<svg"));

    let trace = dir.path().join("trace.csv");
    let args = ["lrfind", "--d", "3", "--m", "2", "--n", "200", "--width", "8", "--out", trace.to_str().unwrap()];
    assert_eq!(run(&args), 0);
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("lr,smoothed_loss"));
}

#[test]
fn trial_prints_a_row() {
    let out = bin()
        .args(["trial", "--d", "1", "--m", "1", "--n", "32", "--scheme", "four_m", "--seed", "4"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "d,M,sigma,depth,scheme,N,trial,seed,error,queries,width,flag");
    assert!(lines[1].starts_with("1,1,0.1,1,four_m,32,0,"));
}

#[test]
fn exit_codes() {
    assert_eq!(bin().arg("selftest").status().unwrap().code(), Some(0));
    assert_eq!(bin().arg("frobnicate").status().unwrap().code(), Some(2));
    assert_eq!(bin().args(["selftest", "--bogus"]).status().unwrap().code(), Some(2));
    assert_eq!(bin().arg("--help").status().unwrap().code(), Some(0));
    let missing = bin().args(["sweep", "--config", "/nonexistent/desk.toml"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/nonexistent/desk.toml"));
}

#[test]
fn invalid_config_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "d = [1]\nm = [1]\nsigma = [0.1]\nepsilon = [1.0]\ntrials = 0\n").unwrap();
    assert_eq!(run(&["sweep", "--config", cfg.to_str().unwrap()]), 1);
}
