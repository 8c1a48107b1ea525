use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::TrialConfig;
use super::trial::{run_trial_opts, Outcome, TrialOptions, TrialResult};
use super::HarnessError;
use crate::planner::DecisionKind;

/// Trials sharing one world seed, each with its own endpoint pair.
pub const ENDPOINTS_PER_SEED: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchSpec {
    pub densities: Vec<f64>,
    pub speeds: Vec<f64>,
    pub trials_per_cell: usize,
    pub base_seed: u64,
}

impl Default for BatchSpec {
    fn default() -> Self {
        Self {
            densities: vec![0.025, 0.05, 0.075, 0.1],
            speeds: vec![1.5, 3.0, 5.0],
            trials_per_cell: 50,
            base_seed: 1,
        }
    }
}

impl BatchSpec {
    /// `(density, speed)` pairs, density-major.
    pub fn cells(&self) -> Vec<(f64, f64)> {
        self.densities
            .iter()
            .flat_map(|&d| self.speeds.iter().map(move |&v| (d, v)))
            .collect()
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// World seed for a trial. Consecutive groups of [`ENDPOINTS_PER_SEED`]
/// trials in a cell share a seed.
pub fn derive_seed(base: u64, cell: usize, trial: usize) -> u64 {
    mix(mix(mix(base) ^ cell as u64) ^ (trial / ENDPOINTS_PER_SEED) as u64)
}

/// Start and goal for endpoint `k`: evenly spaced across the forest width,
/// on opposite edges of the region.
pub fn endpoints(base: &TrialConfig, k: usize) -> ([f64; 3], [f64; 3]) {
    let [x0, x1, y0, y1] = base.world.forest.region;
    let y = y0 + (k as f64 + 0.5) * (y1 - y0) / ENDPOINTS_PER_SEED as f64;
    ([x0, y, base.start.z], [x1, y, base.goal.z])
}

/// Config of one trial in the batch.
pub fn trial_config(base: &TrialConfig, spec: &BatchSpec, cell: usize, trial: usize) -> TrialConfig {
    let (density, speed) = spec.cells()[cell];
    let mut cfg = base.clone();
    cfg.world.file = None;
    cfg.world.seed = derive_seed(spec.base_seed, cell, trial);
    cfg.world.forest.density = density;
    // every endpoint of the seed is cleared so the seed names one world
    cfg.world.forest.spawn_points = (0..ENDPOINTS_PER_SEED)
        .flat_map(|k| {
            let (s, g) = endpoints(base, k);
            [[s[0], s[1]], [g[0], g[1]]]
        })
        .collect();
    let (s, g) = endpoints(base, trial % ENDPOINTS_PER_SEED);
    cfg.start = s.into();
    cfg.goal = g.into();
    cfg.start_yaw = None;
    cfg.planner.v_x = speed;
    cfg
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub cell: usize,
    pub trial: usize,
    pub density: f64,
    pub v_x: f64,
    pub seed: u64,
    pub endpoint: usize,
    pub realized_density: Option<f64>,
    pub result: Option<TrialResult>,
    /// Set when the trial could not run.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub min: Option<f64>,
    pub median: Option<f64>,
    pub mean: Option<f64>,
    pub max: Option<f64>,
    pub values: Vec<f64>,
}

impl Summary {
    pub fn of(values: Vec<f64>) -> Self {
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median = match n {
            0 => None,
            _ if n % 2 == 1 => Some(sorted[n / 2]),
            _ => Some(0.5 * (sorted[n / 2 - 1] + sorted[n / 2])),
        };
        Self {
            count: n,
            min: sorted.first().copied(),
            median,
            mean: (n > 0).then(|| sorted.iter().sum::<f64>() / n as f64),
            max: sorted.last().copied(),
            values,
        }
    }
}

/// Per-cell outcome rates, with flight metrics over successful trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellAggregate {
    pub density: f64,
    pub v_x: f64,
    pub trials: usize,
    pub success: usize,
    pub collision: usize,
    pub timeout: usize,
    pub errors: usize,
    pub success_rate: f64,
    pub collision_rate: f64,
    pub timeout_rate: f64,
    pub realized_density: Option<f64>,
    pub flight_time: Summary,
    pub path_length: Summary,
    pub avg_speed: Summary,
    pub max_speed: Summary,
    pub control_effort: Summary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    /// SHA-256 of the canonical JSON of the base config and batch spec.
    pub config_hash: String,
    pub base_seed: u64,
    pub densities: Vec<f64>,
    pub speeds: Vec<f64>,
    pub trials_per_cell: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub metadata: RunMetadata,
    pub cells: Vec<CellAggregate>,
    pub trials: Vec<TrialRecord>,
}

impl BatchReport {
    pub fn results(&self) -> impl Iterator<Item = &TrialResult> {
        self.trials.iter().filter_map(|t| t.result.as_ref())
    }
}

/// Planner latency per cell, kept apart from the deterministic report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellTiming {
    pub density: f64,
    pub v_x: f64,
    pub rounds: usize,
    pub mean_ms: f64,
    pub max_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchTiming {
    pub jobs: usize,
    pub wall_seconds: f64,
    pub mean_plan_ms: f64,
    pub max_plan_ms: f64,
    pub rounds: usize,
    pub cells: Vec<CellTiming>,
}

pub fn config_hash(base: &TrialConfig, spec: &BatchSpec) -> String {
    let doc = serde_json::json!({ "base": base, "spec": spec });
    let bytes = serde_json::to_vec(&doc).expect("configs always serialize");
    hex::encode(Sha256::digest(&bytes))
}

pub fn aggregate(density: f64, v_x: f64, records: &[&TrialRecord]) -> CellAggregate {
    let count = |o: Outcome| {
        records
            .iter()
            .filter(|r| r.result.as_ref().is_some_and(|x| x.outcome == o))
            .count()
    };
    let trials = records.len();
    let success = count(Outcome::Success);
    let collision = count(Outcome::Collision);
    let timeout = count(Outcome::Timeout);
    let rate = |k: usize| if trials == 0 { 0.0 } else { k as f64 / trials as f64 };
    let ok: Vec<&TrialResult> = records
        .iter()
        .filter_map(|r| r.result.as_ref())
        .filter(|r| r.outcome == Outcome::Success)
        .collect();
    let metric = |f: fn(&TrialResult) -> f64| Summary::of(ok.iter().map(|r| f(r)).collect());
    let densities: Vec<f64> = records.iter().filter_map(|r| r.realized_density).collect();
    CellAggregate {
        density,
        v_x,
        trials,
        success,
        collision,
        timeout,
        errors: records.iter().filter(|r| r.error.is_some()).count(),
        success_rate: rate(success),
        collision_rate: rate(collision),
        timeout_rate: rate(timeout),
        realized_density: (!densities.is_empty())
            .then(|| densities.iter().sum::<f64>() / densities.len() as f64),
        flight_time: metric(|r| r.flight_time),
        path_length: metric(|r| r.path_length),
        avg_speed: metric(|r| r.avg_speed),
        max_speed: metric(|r| r.max_speed),
        control_effort: metric(|r| r.control_effort),
    }
}

/// Runs the density-by-speed matrix on `jobs` worker threads.
///
/// Each trial is single-threaded and seeded from its cell and index, so
/// the report does not depend on `jobs`.
pub fn run_batch(
    base: &TrialConfig,
    spec: &BatchSpec,
    jobs: usize,
) -> Result<(BatchReport, BatchTiming), HarnessError> {
    if spec.trials_per_cell == 0 {
        return Err(HarnessError::Config("trials_per_cell must be at least 1".into()));
    }
    if spec.densities.is_empty() || spec.speeds.is_empty() {
        return Err(HarnessError::Config("densities and speeds must be non-empty".into()));
    }
    let cells = spec.cells();
    let jobs = jobs.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start worker pool: {e}")))?;
    let work: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..spec.trials_per_cell).map(move |i| (c, i)))
        .collect();

    let started = std::time::Instant::now();
    let outputs: Vec<(TrialRecord, Vec<f64>)> = pool.install(|| {
        use rayon::prelude::*;
        work.par_iter()
            .map(|&(cell, trial)| {
                let cfg = trial_config(base, spec, cell, trial);
                let (density, v_x) = cells[cell];
                let mut record = TrialRecord {
                    cell,
                    trial,
                    density,
                    v_x,
                    seed: cfg.world.seed,
                    endpoint: trial % ENDPOINTS_PER_SEED,
                    realized_density: None,
                    result: None,
                    error: None,
                };
                let mut times = Vec::new();
                match run_trial_opts(&cfg, TrialOptions::default()) {
                    Ok(run) => {
                        record.realized_density = run.realized_density;
                        record.result = Some(run.result);
                        times = run.plan_times;
                    }
                    Err(e) => record.error = Some(e.to_string()),
                }
                (record, times)
            })
            .collect()
    });
    let wall_seconds = started.elapsed().as_secs_f64();

    let mut aggregates = Vec::with_capacity(cells.len());
    let mut timing_cells = Vec::with_capacity(cells.len());
    let mut all_times = Vec::new();
    for (c, &(density, v_x)) in cells.iter().enumerate() {
        let records: Vec<&TrialRecord> =
            outputs.iter().filter(|(r, _)| r.cell == c).map(|(r, _)| r).collect();
        aggregates.push(aggregate(density, v_x, &records));
        let times: Vec<f64> = outputs
            .iter()
            .filter(|(r, _)| r.cell == c)
            .flat_map(|(_, t)| t.iter().copied())
            .collect();
        timing_cells.push(timing_of(density, v_x, &times));
        all_times.extend(times);
    }
    let overall = timing_of(0.0, 0.0, &all_times);
    let timing = BatchTiming {
        jobs,
        wall_seconds,
        mean_plan_ms: overall.mean_ms,
        max_plan_ms: overall.max_ms,
        rounds: overall.rounds,
        cells: timing_cells,
    };
    let report = BatchReport {
        metadata: RunMetadata {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config_hash(base, spec),
            base_seed: spec.base_seed,
            densities: spec.densities.clone(),
            speeds: spec.speeds.clone(),
            trials_per_cell: spec.trials_per_cell,
        },
        cells: aggregates,
        trials: outputs.into_iter().map(|(r, _)| r).collect(),
    };
    Ok((report, timing))
}

fn timing_of(density: f64, v_x: f64, times: &[f64]) -> CellTiming {
    let n = times.len();
    CellTiming {
        density,
        v_x,
        rounds: n,
        mean_ms: if n == 0 { 0.0 } else { 1e3 * times.iter().sum::<f64>() / n as f64 },
        max_ms: 1e3 * times.iter().copied().fold(0.0, f64::max),
    }
}

/// Decision counts of a record, zero when absent.
pub fn decision_count(result: &TrialResult, kind: DecisionKind) -> u64 {
    result.decision_counts.get(&kind).copied().unwrap_or(0)
}
