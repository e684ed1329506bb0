//! Benchmark harness: solve every MPS file in a directory under each mode
//! and aggregate with shifted geometric means.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::batch::map_jobs;
use crate::boost::{Mode, SolveConfig};
use crate::general::solve_general;
use crate::io::mps::parse_mps;
use crate::rational::format_rational;

pub const TIME_SHIFT: f64 = 0.1;
pub const ITERATION_SHIFT: f64 = 10.0;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("shifted geometric mean of an empty list")]
    Empty,
    #[error("shift must be positive, got {0}")]
    BadShift(f64),
    #[error("negative value {0}")]
    Negative(f64),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// `exp(mean(log(v + shift))) - shift`
pub fn shifted_geomean(values: &[f64], shift: f64) -> Result<f64, BenchError> {
    if values.is_empty() {
        return Err(BenchError::Empty);
    }
    if shift.is_nan() || shift <= 0.0 {
        return Err(BenchError::BadShift(shift));
    }
    if let Some(&v) = values.iter().find(|&&v| v < 0.0) {
        return Err(BenchError::Negative(v));
    }
    if values.iter().all(|&v| v == values[0]) {
        return Ok(values[0]);
    }
    let mean = values.iter().map(|v| (v + shift).ln()).sum::<f64>() / values.len() as f64;
    Ok((mean.exp() - shift).max(0.0))
}

/// One instance solved under one mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub mode: String,
    /// optimal, infeasible, unbounded, failure or timeout
    pub status: String,
    pub objective: Option<String>,
    /// Wall time after the first float solve.
    pub wall_seconds: f64,
    pub first_solve_seconds: f64,
    pub rounds: usize,
    pub boosts: u32,
    pub pivots_initial: u64,
    pub pivots_boosted: u64,
    pub precision_final: u32,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub mode: String,
    pub instances: usize,
    pub solved: usize,
    pub time_sgm: f64,
    pub pivots_initial_sgm: f64,
    pub pivots_boosted_sgm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub records: Vec<RunRecord>,
    pub aggregates: Vec<AggregateRow>,
}

impl BenchmarkReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn records_csv(&self) -> Result<String, BenchError> {
        to_csv(&self.records)
    }

    pub fn aggregates_csv(&self) -> Result<String, BenchError> {
        to_csv(&self.aggregates)
    }

    /// Writes `records.csv`, `aggregates.csv` and `report.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), BenchError> {
        let io = |path: PathBuf| move |source| BenchError::Io { path, source };
        fs::create_dir_all(dir).map_err(io(dir.to_path_buf()))?;
        for (name, body) in [
            ("records.csv", self.records_csv()?),
            ("aggregates.csv", self.aggregates_csv()?),
            ("report.json", self.to_json()),
        ] {
            let path = dir.join(name);
            fs::write(&path, body).map_err(io(path.clone()))?;
        }
        Ok(())
    }
}

fn to_csv<S: Serialize>(rows: &[S]) -> Result<String, BenchError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row)?;
    }
    let bytes = writer.into_inner().map_err(|e| BenchError::Io { path: PathBuf::new(), source: e.into_error() })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Aggregates per mode, in the order the modes first appear. Rows that
/// failed to parse are left out.
pub fn aggregate(records: &[RunRecord]) -> Vec<AggregateRow> {
    let mut modes: Vec<&str> = Vec::new();
    for r in records {
        if !modes.contains(&r.mode.as_str()) {
            modes.push(&r.mode);
        }
    }
    modes
        .into_iter()
        .filter_map(|mode| {
            let rows: Vec<&RunRecord> = records.iter().filter(|r| r.mode == mode && r.error.is_none()).collect();
            let sgm = |f: &dyn Fn(&RunRecord) -> f64, shift| {
                shifted_geomean(&rows.iter().map(|r| f(r)).collect::<Vec<_>>(), shift).ok()
            };
            Some(AggregateRow {
                mode: mode.to_string(),
                instances: rows.len(),
                solved: rows.iter().filter(|r| !matches!(r.status.as_str(), "failure" | "timeout")).count(),
                time_sgm: sgm(&|r| r.wall_seconds, TIME_SHIFT)?,
                pivots_initial_sgm: sgm(&|r| r.pivots_initial as f64, ITERATION_SHIFT)?,
                pivots_boosted_sgm: sgm(&|r| r.pivots_boosted as f64, ITERATION_SHIFT)?,
            })
        })
        .collect()
}

fn instance_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn run_one(path: &Path, mode: Mode, base: &SolveConfig) -> RunRecord {
    let mut record = RunRecord {
        instance: instance_name(path),
        mode: mode.name().to_string(),
        status: "failure".to_string(),
        objective: None,
        wall_seconds: 0.0,
        first_solve_seconds: 0.0,
        rounds: 0,
        boosts: 0,
        pivots_initial: 0,
        pivots_boosted: 0,
        precision_final: 0,
        error: None,
    };
    let parsed = fs::read_to_string(path)
        .map_err(|e| e.to_string())
        .and_then(|text| parse_mps(&text).map_err(|e| e.to_string()));
    let lp = match parsed {
        Ok(lp) => lp,
        Err(e) => {
            record.error = Some(format!("parse: {e}"));
            return record;
        }
    };
    let config = SolveConfig { mode, ..base.clone() };
    let (result, map) = match solve_general(&lp, &config) {
        Ok(solved) => solved,
        Err(e) => {
            record.error = Some(format!("model: {e}"));
            return record;
        }
    };
    let stats = &result.stats;
    record.status = result.status().to_string();
    record.objective = result.objective().map(|obj| format_rational(&map.objective(obj)));
    record.wall_seconds = (stats.total_seconds - stats.first_solve_seconds).max(0.0);
    record.first_solve_seconds = stats.first_solve_seconds;
    record.rounds = stats.refinement_rounds;
    record.boosts = stats.boosts;
    record.pivots_initial = stats.pivots_initial;
    record.pivots_boosted = stats.pivots_boosted;
    record.precision_final = stats.precision_final;
    record
}

/// Solves every `*.mps` file in `dir` under each of `modes`. Jobs are
/// dispatched in an order shuffled by `seed`; records come back sorted by
/// instance, then mode order.
pub fn run_benchmark(dir: &Path, modes: &[Mode], seed: u64, base: &SolveConfig) -> Result<BenchmarkReport, BenchError> {
    let entries = fs::read_dir(dir).map_err(|source| BenchError::Io { path: dir.to_path_buf(), source })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|ext| ext.eq_ignore_ascii_case("mps")))
        .collect();
    files.sort();

    let mut jobs: Vec<(usize, usize)> =
        (0..files.len()).flat_map(|f| (0..modes.len()).map(move |m| (f, m))).collect();
    jobs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut done: Vec<((usize, usize), RunRecord)> =
        map_jobs(&jobs, |&(f, m)| ((f, m), run_one(&files[f], modes[m], base)));
    done.sort_by_key(|(key, _)| *key);
    let records: Vec<RunRecord> = done.into_iter().map(|(_, r)| r).collect();
    let aggregates = aggregate(&records);
    Ok(BenchmarkReport { records, aggregates })
}
