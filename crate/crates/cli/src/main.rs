use std::path::{Path, PathBuf};
use std::process::ExitCode;

use arcnav::harness::{
    load_batch, run_batch, run_trial_opts, write_batch, write_report, write_timing, write_trial,
    BatchSpec, Format, HarnessError, TrialConfig, TrialOptions,
};
use arcnav::sim::{gen_forest, Aabb, ForestParams};
use arcnav::Vec3;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "arcnav", version, about = "Forward-arc local planner trials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutDir {
    /// Output directory.
    #[arg(long, env = "ARCNAV_OUT_DIR", default_value = "arcnav-out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single trial.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the world seed.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Run a density-by-speed matrix of forest trials.
    Batch {
        #[arg(long)]
        config: PathBuf,
        /// Obstacles per square meter.
        #[arg(long, value_delimiter = ',', default_values_t = BatchSpec::default().densities)]
        densities: Vec<f64>,
        /// Forward speeds, m/s.
        #[arg(long, value_delimiter = ',', default_values_t = BatchSpec::default().speeds)]
        speeds: Vec<f64>,
        /// Trials per cell.
        #[arg(long, default_value_t = BatchSpec::default().trials_per_cell)]
        trials: usize,
        /// Worker threads; defaults to the number of CPUs.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, default_value_t = BatchSpec::default().base_seed)]
        seed: u64,
        #[command(flatten)]
        out: OutDir,
    },
    /// Generate a forest world file.
    Worldgen {
        /// Obstacles per square meter.
        #[arg(long)]
        density: f64,
        /// Extent along x, m.
        #[arg(long, default_value_t = 70.0)]
        width: f64,
        /// Extent along y, centered on zero, m.
        #[arg(long, default_value_t = 40.0)]
        height: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// World file; defaults to world.json in the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write per-trial and per-cell tables for a finished batch.
    Report {
        /// Batch output directory.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "csv")]
        format: Format,
    },
}

fn run(config: &Path, seed: Option<u64>, out: &Path) -> Result<(), HarnessError> {
    let mut cfg = TrialConfig::load(config)?;
    if let Some(seed) = seed {
        cfg.world.seed = seed;
    }
    if cfg.world.file.is_none() && cfg.world.forest.spawn_points.is_empty() {
        cfg.world.forest.spawn_points = vec![[cfg.start.x, cfg.start.y], [cfg.goal.x, cfg.goal.y]];
    }
    let opts = TrialOptions {
        record_trajectory: true,
        record_rounds: true,
    };
    let run = run_trial_opts(&cfg, opts)?;
    for path in write_trial(out, &run)? {
        eprintln!("wrote {}", path.display());
    }
    let r = &run.result;
    println!(
        "{} flight_time={:.2}s path_length={:.2}m avg_speed={:.2}m/s goal_distance={:.2}m",
        r.outcome.as_str(),
        r.flight_time,
        r.path_length,
        r.avg_speed,
        r.final_goal_distance
    );
    Ok(())
}

fn batch(config: &Path, spec: &BatchSpec, jobs: usize, out: &Path) -> Result<(), HarnessError> {
    let base = TrialConfig::load(config)?;
    let (report, timing) = run_batch(&base, spec, jobs)?;
    write_batch(out, &report)?;
    write_timing(out, &timing)?;
    write_report(out, &report, Format::Csv)?;
    println!("density  v_x  success  collision  timeout  errors");
    for c in &report.cells {
        println!(
            "{:7}  {:3}  {:7.3}  {:9.3}  {:7.3}  {:6}",
            c.density, c.v_x, c.success_rate, c.collision_rate, c.timeout_rate, c.errors
        );
    }
    println!(
        "{} trials in {:.1}s, mean plan {:.2}ms, max plan {:.2}ms; results in {}",
        report.trials.len(),
        timing.wall_seconds,
        timing.mean_plan_ms,
        timing.max_plan_ms,
        out.display()
    );
    Ok(())
}

fn worldgen(density: f64, width: f64, height: f64, seed: u64, out: &Path) -> Result<(), HarnessError> {
    if !(width > 0.0 && height > 0.0) {
        return Err(HarnessError::Config("width and height must be positive".into()));
    }
    let defaults = ForestParams::default();
    let params = ForestParams {
        density,
        region: [0.0, width, -height / 2.0, height / 2.0],
        spawn_points: vec![[0.0, 0.0], [width, 0.0]],
        bounds: Aabb::new(
            Vec3::new(-10.0, -height / 2.0 - 10.0, defaults.bounds.min[2]),
            Vec3::new(width + 10.0, height / 2.0 + 10.0, defaults.bounds.max[2]),
        ),
        ..defaults
    };
    let forest = gen_forest(&params, seed)?;
    if let Some(w) = &forest.warning {
        eprintln!("warning: {w}");
    }
    forest.world.save(out)?;
    println!(
        "{} cylinders, realized density {:.4}/m^2, wrote {}",
        forest.world.cylinders.len(),
        forest.realized_density,
        out.display()
    );
    Ok(())
}

fn report(input: &Path, format: Format) -> Result<(), HarnessError> {
    let batch = load_batch(input)?;
    for path in write_report(input, &batch, format)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, seed, out } => run(&config, seed, &out.out),
        Command::Batch {
            config,
            densities,
            speeds,
            trials,
            jobs,
            seed,
            out,
        } => {
            let spec = BatchSpec {
                densities,
                speeds,
                trials_per_cell: trials,
                base_seed: seed,
            };
            let jobs = jobs.unwrap_or_else(|| {
                std::thread::available_parallelism().map_or(1, |n| n.get())
            });
            batch(&config, &spec, jobs, &out.out)
        }
        Command::Worldgen {
            density,
            width,
            height,
            seed,
            out,
        } => {
            let out = out.unwrap_or_else(|| {
                let dir = std::env::var_os("ARCNAV_OUT_DIR").unwrap_or_else(|| "arcnav-out".into());
                PathBuf::from(dir).join("world.json")
            });
            worldgen(density, width, height, seed, &out)
        }
        Command::Report { input, format } => report(&input, format),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
