//! File emission. Floats in CSV use 17 significant digits so parsing them
//! back recovers the exact `f64`.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{Algorithm, ExperimentConfig, OutputFormat};
use crate::error::{io_err, HarnessError, Result};
use crate::run::{LllExtras, RunRecord, SpecEcho, TaskRow, TraceRow};
use crate::stats::Comparison;

pub const CURVES_FILE: &str = "curves.csv";
pub const TASKS_FILE: &str = "tasks.csv";
pub const RUNS_FILE: &str = "runs.json";
pub const SUMMARY_FILE: &str = "summary.json";

pub const CURVES_HEADER: [&str; 9] = ["algo", "d", "k", "M", "T", "noise_std", "seed", "t", "cum_regret"];
pub const TASKS_HEADER: [&str; 11] = [
    "algo",
    "d",
    "k",
    "M",
    "T",
    "seed",
    "task",
    "task_regret",
    "entered_stage2",
    "tau_after",
    "samples_used",
];

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Parse {
        what: "csv",
        reason: e.to_string(),
    }
}

pub fn curves_csv(records: &[RunRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CURVES_HEADER).map_err(csv_err)?;
    for r in records {
        let s = &r.spec;
        let head = [
            r.algorithm.tag().to_string(),
            s.d.to_string(),
            s.k.to_string(),
            s.tasks.to_string(),
            s.horizon.to_string(),
            format_float(s.noise_std),
            r.seed.to_string(),
        ];
        for p in &r.trace {
            let mut row = head.to_vec();
            row.push(p.t.to_string());
            row.push(format_float(p.cum_regret));
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    w.into_inner().map_err(csv_err)
}

pub fn tasks_csv(records: &[RunRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TASKS_HEADER).map_err(csv_err)?;
    for r in records {
        let Some(extras) = &r.lll else { continue };
        let s = &r.spec;
        for row in &extras.tasks {
            w.write_record([
                r.algorithm.tag().to_string(),
                s.d.to_string(),
                s.k.to_string(),
                s.tasks.to_string(),
                s.horizon.to_string(),
                r.seed.to_string(),
                (row.task + 1).to_string(),
                format_float(row.task_regret),
                row.entered_stage2.to_string(),
                row.tau_after.to_string(),
                row.samples_used.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.into_inner().map_err(csv_err)
}

#[derive(Debug, Deserialize)]
struct CurveRow {
    algo: String,
    d: usize,
    k: usize,
    #[serde(rename = "M")]
    tasks: usize,
    #[serde(rename = "T")]
    horizon: u64,
    noise_std: f64,
    seed: u64,
    t: u64,
    cum_regret: f64,
}

#[derive(Debug, Deserialize)]
struct TaskCsvRow {
    algo: String,
    seed: u64,
    task: usize,
    task_regret: f64,
    entered_stage2: bool,
    tau_after: usize,
    samples_used: u64,
}

fn algorithm(tag: &str) -> Result<Algorithm> {
    Algorithm::from_tag(tag).ok_or_else(|| csv_err(format!("unknown algorithm `{tag}`")))
}

/// Rebuilds run records from the curves CSV and, for LLL runs, the per-task
/// CSV. Seed indices follow the order of appearance within each algorithm;
/// wall-clock time is not stored and comes back as 0.
pub fn records_from_csv(curves: &[u8], tasks: Option<&[u8]>) -> Result<Vec<RunRecord>> {
    let mut records: Vec<RunRecord> = Vec::new();
    for row in csv::Reader::from_reader(curves).deserialize::<CurveRow>() {
        let row = row.map_err(csv_err)?;
        let algo = algorithm(&row.algo)?;
        let point = TraceRow {
            t: row.t,
            cum_regret: row.cum_regret,
        };
        match records.last_mut() {
            Some(r) if r.algorithm == algo && r.seed == row.seed => r.trace.push(point),
            _ => {
                let seed_index = records.iter().filter(|r| r.algorithm == algo).count();
                records.push(RunRecord {
                    algorithm: algo,
                    spec: SpecEcho {
                        d: row.d,
                        k: row.k,
                        tasks: row.tasks,
                        horizon: row.horizon,
                        noise_std: row.noise_std,
                    },
                    seed_index,
                    seed: row.seed,
                    final_regret: 0.0,
                    trace: vec![point],
                    lll: None,
                    wall_seconds: 0.0,
                });
            }
        }
    }
    for r in &mut records {
        r.final_regret = r.trace.last().map_or(0.0, |p| p.cum_regret);
    }
    if let Some(bytes) = tasks {
        let mut grouped: Vec<(Algorithm, u64, Vec<TaskRow>)> = Vec::new();
        for row in csv::Reader::from_reader(bytes).deserialize::<TaskCsvRow>() {
            let row = row.map_err(csv_err)?;
            let algo = algorithm(&row.algo)?;
            let task = TaskRow {
                task: row.task.checked_sub(1).ok_or_else(|| csv_err("task indices start at 1"))?,
                task_regret: row.task_regret,
                entered_stage2: row.entered_stage2,
                tau_after: row.tau_after,
                samples_used: row.samples_used,
            };
            match grouped.last_mut() {
                Some((a, s, rows)) if *a == algo && *s == row.seed => rows.push(task),
                _ => grouped.push((algo, row.seed, vec![task])),
            }
        }
        for (algo, seed, rows) in grouped {
            let r = records
                .iter_mut()
                .find(|r| r.algorithm == algo && r.seed == seed)
                .ok_or_else(|| csv_err(format!("task rows for unknown run ({}, {seed})", algo.tag())))?;
            r.lll = Some(LllExtras::from_tasks(rows));
        }
    }
    Ok(records)
}

/// Write to a sibling temp file, then rename over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| HarnessError::Records(format!("not a file path: {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result.map_err(io_err(path))
}

#[derive(Serialize)]
struct SummaryDocument<'a> {
    config: &'a ExperimentConfig,
    #[serde(flatten)]
    comparison: &'a Comparison,
}

/// Writes the configured outputs into `dir` and returns their paths.
pub fn write_outputs(
    dir: &Path,
    config: &ExperimentConfig,
    records: &[RunRecord],
    comparison: &Comparison,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut files: Vec<(PathBuf, Vec<u8>)> = Vec::new();
    match config.output_format {
        OutputFormat::Csv => {
            files.push((dir.join(CURVES_FILE), curves_csv(records)?));
            if records.iter().any(|r| r.lll.is_some()) {
                files.push((dir.join(TASKS_FILE), tasks_csv(records)?));
            }
        }
        OutputFormat::Json => {
            let mut bytes = serde_json::to_vec_pretty(records).map_err(|e| HarnessError::Parse {
                what: "json",
                reason: e.to_string(),
            })?;
            bytes.push(b'\n');
            files.push((dir.join(RUNS_FILE), bytes));
        }
    }
    let doc = SummaryDocument { config, comparison };
    let mut summary = serde_json::to_vec_pretty(&doc).map_err(|e| HarnessError::Parse {
        what: "json",
        reason: e.to_string(),
    })?;
    summary.push(b'\n');
    files.push((dir.join(SUMMARY_FILE), summary));
    for (path, bytes) in &files {
        write_atomic(path, bytes)?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}
