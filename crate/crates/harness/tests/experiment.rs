use std::process::Command;

use harness::config::ModeSetting;
use harness::output::{records_from_csv, CURVES_FILE, SUMMARY_FILE, TASKS_FILE};
use harness::{run_comparison_with_workers, run_experiment_with_workers, Algorithm, ExperimentConfig, OutputFormat};

fn small(algorithm: Algorithm, dir: &std::path::Path) -> ExperimentConfig {
    ExperimentConfig {
        algorithm,
        d: 5,
        k: 2,
        tasks: 6,
        horizon: 900,
        n_seeds: 4,
        master_seed: 17,
        trace_stride: 25,
        out_dir: Some(dir.to_path_buf()),
        ..Default::default()
    }
}

fn read_all(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn outputs_are_byte_identical_across_runs_and_workers() {
    for algorithm in [Algorithm::Mtrl, Algorithm::Lll] {
        let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        run_experiment_with_workers(&small(algorithm, a.path()), 1).unwrap();
        run_experiment_with_workers(&small(algorithm, b.path()), 1).unwrap();
        run_experiment_with_workers(&small(algorithm, c.path()), 4).unwrap();
        let first = read_all(a.path());
        assert!(!first.is_empty());
        assert_eq!(first, read_all(b.path()));
        assert_eq!(first, read_all(c.path()));
    }
}

#[test]
fn csv_round_trips_records() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small(Algorithm::Lll, dir.path());
    config.n_seeds = 3;
    let out = run_experiment_with_workers(&config, 2).unwrap();
    let curves = std::fs::read(dir.path().join(CURVES_FILE)).unwrap();
    let tasks = std::fs::read(dir.path().join(TASKS_FILE)).unwrap();
    let back = records_from_csv(&curves, Some(&tasks)).unwrap();
    let original: Vec<_> = out.records.into_iter().map(|r| r.without_timing()).collect();
    assert_eq!(back, original);
    let header = String::from_utf8(curves).unwrap();
    assert!(header.starts_with("algo,d,k,M,T,noise_std,seed,t,cum_regret\n"));
    assert!(String::from_utf8(tasks)
        .unwrap()
        .starts_with("algo,d,k,M,T,seed,task,task_regret,entered_stage2,tau_after,samples_used\n"));
}

#[test]
fn paired_comparison_shares_instances() {
    let config = ExperimentConfig {
        out_dir: None,
        ..small(Algorithm::Mtrl, std::path::Path::new("."))
    };
    let out = run_comparison_with_workers(&config, &[Algorithm::Mtrl, Algorithm::Mtrl], 2).unwrap();
    assert_eq!(out.records.len(), 8);
    let solo = run_experiment_with_workers(&config, 3).unwrap();
    let a: Vec<_> = solo.records.into_iter().map(|r| r.without_timing()).collect();
    let b: Vec<_> = out.records[..4].iter().cloned().map(|r| r.without_timing()).collect();
    assert_eq!(a, b);

    let cmp = run_comparison_with_workers(&config, &[Algorithm::Mtrl, Algorithm::Independent], 2).unwrap();
    let pair = cmp.comparison.pair(Algorithm::Mtrl, Algorithm::Independent).unwrap();
    let m = cmp.comparison.summary(Algorithm::Mtrl).unwrap().final_regret.mean;
    let i = cmp.comparison.summary(Algorithm::Independent).unwrap().final_regret.mean;
    assert!((pair.difference - (m - i)).abs() < 1e-9);
}

#[test]
fn json_format_writes_runs_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = ExperimentConfig {
        output_format: OutputFormat::Json,
        algorithm: Algorithm::Lll,
        mode: ModeSetting::PureExploration,
        epsilon: 0.3,
        ..small(Algorithm::Lll, dir.path())
    };
    let out = run_experiment_with_workers(&config, 2).unwrap();
    let names: Vec<_> = read_all(dir.path()).into_iter().map(|(n, _)| n).collect();
    assert_eq!(names, vec!["runs.json", SUMMARY_FILE]);
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join(SUMMARY_FILE)).unwrap()).unwrap();
    assert_eq!(summary["config"]["M"], 6);
    assert_eq!(summary["summaries"][0]["final_regret"]["n"], 4);
    let runs: Vec<harness::RunRecord> =
        serde_json::from_slice(&std::fs::read(dir.path().join("runs.json")).unwrap()).unwrap();
    assert_eq!(runs, out.records.into_iter().map(|r| r.without_timing()).collect::<Vec<_>>());
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_repbandit"))
}

#[test]
fn cli_flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(&cfg, "d = 4\nk = 2\nM = 3\nT = 500\nseeds = 2\ntrace_stride = 50\n").unwrap();
    let out_dir = dir.path().join("out");
    let status = cli()
        .args(["independent", "--config"])
        .arg(&cfg)
        .args(["--M", "4", "--out-dir"])
        .arg(&out_dir)
        .env("REPBANDIT_WORKERS", "2")
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let curves = std::fs::read(out_dir.join(CURVES_FILE)).unwrap();
    let records = records_from_csv(&curves, None).unwrap();
    assert_eq!(records.len(), 2);
    assert!(records.iter().all(|r| r.spec.tasks == 4 && r.spec.d == 4 && r.trace.last().unwrap().t == 2000));
}

#[test]
fn cli_errors_are_structured() {
    let out = cli().args(["mtrl", "--d", "3", "--k", "5"]).output().unwrap();
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
    assert_eq!(err["error"], "config");
    assert_eq!(err["field"], "k");

    let out = cli().args(["mtrl", "--T", "10", "--M", "2"]).output().unwrap();
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
    assert_eq!(err["error"], "horizon_too_short");
}

#[test]
fn cli_compare_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli()
        .args(["compare", "--algos", "mtrl,e2tc", "--d", "4", "--M", "3", "--T", "400", "--seeds", "2", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("mtrl - e2tc"));
    let records = records_from_csv(&std::fs::read(dir.path().join(CURVES_FILE)).unwrap(), None).unwrap();
    assert_eq!(records.iter().filter(|r| r.algorithm == Algorithm::E2tc).count(), 2);
}
