use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::batch::{decision_count, BatchReport, BatchTiming, Summary};
use super::trial::TrialRun;
use super::HarnessError;
use crate::planner::DecisionKind;
use crate::sim::write_trajectory_csv;

pub const BATCH_FILE: &str = "batch.json";
pub const METADATA_FILE: &str = "metadata.json";
pub const TIMING_FILE: &str = "timing.json";

pub const TRIAL_COLUMNS: [&str; 21] = [
    "cell",
    "trial",
    "density",
    "v_x",
    "seed",
    "endpoint",
    "realized_density",
    "outcome",
    "flight_time",
    "path_length",
    "max_speed",
    "avg_speed",
    "control_effort",
    "final_speed",
    "final_goal_distance",
    "final_clearance",
    "min_clearance",
    "commit_rounds",
    "execute_stop_rounds",
    "goal_reached_rounds",
    "error",
];

pub const CELL_COLUMNS: [&str; 20] = [
    "density",
    "v_x",
    "trials",
    "success",
    "collision",
    "timeout",
    "errors",
    "success_rate",
    "collision_rate",
    "timeout_rate",
    "realized_density",
    "flight_time_median",
    "flight_time_mean",
    "path_length_median",
    "path_length_mean",
    "avg_speed_mean",
    "max_speed_mean",
    "max_speed_max",
    "control_effort_median",
    "control_effort_mean",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format '{other}', expected csv or json")),
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| HarnessError::io(path, e))
}

fn json_bytes<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("reports always serialize");
    bytes.push(b'\n');
    bytes
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the canonical report and its metadata.
pub fn write_batch(dir: &Path, report: &BatchReport) -> Result<(), HarnessError> {
    write_file(&dir.join(BATCH_FILE), &json_bytes(report))?;
    write_file(&dir.join(METADATA_FILE), &json_bytes(&report.metadata))
}

/// Timing depends on the machine, so it lives outside the report.
pub fn write_timing(dir: &Path, timing: &BatchTiming) -> Result<(), HarnessError> {
    write_file(&dir.join(TIMING_FILE), &json_bytes(timing))
}

pub fn load_batch(dir: &Path) -> Result<BatchReport, HarnessError> {
    let path = dir.join(BATCH_FILE);
    let text = fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn trial_rows(report: &BatchReport) -> Vec<Vec<String>> {
    report
        .trials
        .iter()
        .map(|t| {
            let mut row = vec![
                t.cell.to_string(),
                t.trial.to_string(),
                t.density.to_string(),
                t.v_x.to_string(),
                t.seed.to_string(),
                t.endpoint.to_string(),
                opt(t.realized_density),
            ];
            match &t.result {
                Some(r) => row.extend([
                    r.outcome.as_str().to_string(),
                    r.flight_time.to_string(),
                    r.path_length.to_string(),
                    r.max_speed.to_string(),
                    r.avg_speed.to_string(),
                    r.control_effort.to_string(),
                    r.final_speed.to_string(),
                    r.final_goal_distance.to_string(),
                    r.final_clearance.to_string(),
                    r.min_clearance.to_string(),
                    decision_count(r, DecisionKind::Commit).to_string(),
                    decision_count(r, DecisionKind::ExecuteStop).to_string(),
                    decision_count(r, DecisionKind::GoalReached).to_string(),
                ]),
                None => row.extend(std::iter::repeat_n(String::new(), 13)),
            }
            row.push(t.error.clone().unwrap_or_default());
            row
        })
        .collect()
}

fn cell_rows(report: &BatchReport) -> Vec<Vec<String>> {
    let med = |s: &Summary| opt(s.median);
    let mean = |s: &Summary| opt(s.mean);
    report
        .cells
        .iter()
        .map(|c| {
            vec![
                c.density.to_string(),
                c.v_x.to_string(),
                c.trials.to_string(),
                c.success.to_string(),
                c.collision.to_string(),
                c.timeout.to_string(),
                c.errors.to_string(),
                c.success_rate.to_string(),
                c.collision_rate.to_string(),
                c.timeout_rate.to_string(),
                opt(c.realized_density),
                med(&c.flight_time),
                mean(&c.flight_time),
                med(&c.path_length),
                mean(&c.path_length),
                mean(&c.avg_speed),
                mean(&c.max_speed),
                opt(c.max_speed.max),
                med(&c.control_effort),
                mean(&c.control_effort),
            ]
        })
        .collect()
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for r in rows {
        w.write_record(r).expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

/// Writes per-trial and per-cell tables in `format`; returns the paths.
pub fn write_report(
    dir: &Path,
    report: &BatchReport,
    format: Format,
) -> Result<Vec<PathBuf>, HarnessError> {
    let (trials, cells) = match format {
        Format::Csv => (dir.join("trials.csv"), dir.join("cells.csv")),
        Format::Json => (dir.join("trials.json"), dir.join("cells.json")),
    };
    match format {
        Format::Csv => {
            write_file(&trials, &csv_bytes(&TRIAL_COLUMNS, &trial_rows(report)))?;
            write_file(&cells, &csv_bytes(&CELL_COLUMNS, &cell_rows(report)))?;
        }
        Format::Json => {
            write_file(&trials, &json_bytes(&report.trials))?;
            write_file(&cells, &json_bytes(&report.cells))?;
        }
    }
    Ok(vec![trials, cells])
}

/// Writes a single trial's trajectory CSV, result JSON and round log.
pub fn write_trial(dir: &Path, run: &TrialRun) -> Result<Vec<PathBuf>, HarnessError> {
    let traj = dir.join("trajectory.csv");
    let result = dir.join("result.json");
    let rounds = dir.join("rounds.ndjson");
    let mut csv = Vec::new();
    write_trajectory_csv(&run.trajectory, &mut csv).map_err(|e| HarnessError::Parse {
        path: traj.display().to_string(),
        message: e.to_string(),
    })?;
    write_file(&traj, &csv)?;
    write_file(&result, &json_bytes(&run.result))?;
    let mut log = Vec::new();
    for r in &run.rounds {
        writeln!(log, "{}", r.to_ndjson()).expect("writing to memory");
    }
    write_file(&rounds, &log)?;
    Ok(vec![traj, result, rounds])
}
