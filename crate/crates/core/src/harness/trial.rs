use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::{Translation3, UnitQuaternion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::config::TrialConfig;
use super::HarnessError;
use crate::memory::{DepthFrame, FrameChain};
use crate::planner::{
    DecisionKind, ForwardArcPlanner, LocalPlanner, PlanningLoop, RoundRecord,
};
use crate::primitives::ReferenceState;
use crate::sim::{apply_depth_noise, render_raster, sim_step, SimState, TrajectoryRow, World};
use crate::{Pose, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Collision,
    Timeout,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Success => "success",
            Self::Collision => "collision",
            Self::Timeout => "timeout",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub outcome: Outcome,
    pub flight_time: f64,
    pub path_length: f64,
    pub max_speed: f64,
    pub avg_speed: f64,
    /// Integral of squared jerk magnitude, (m/s^3)^2 s.
    pub control_effort: f64,
    /// Planning rounds by decision kind.
    pub decision_counts: BTreeMap<DecisionKind, u64>,
    pub final_position: Vec3,
    pub final_speed: f64,
    pub final_goal_distance: f64,
    /// Ground-truth distance to the nearest obstacle at the end, m.
    pub final_clearance: f64,
    /// Smallest ground-truth clearance along the flight, m.
    pub min_clearance: f64,
    /// Distance from start to the final position, m.
    pub straight_line: f64,
}

/// What to keep besides the result.
#[derive(Clone, Copy, Debug, Default)]
pub struct TrialOptions {
    pub record_trajectory: bool,
    pub record_rounds: bool,
}

#[derive(Clone, Debug)]
pub struct TrialRun {
    pub result: TrialResult,
    pub trajectory: Vec<TrajectoryRow>,
    pub rounds: Vec<RoundRecord>,
    /// Wall-clock seconds of each planning round that evaluated candidates.
    pub plan_times: Vec<f64>,
    pub realized_density: Option<f64>,
}

/// Body pose of a level vehicle at `r`.
pub fn body_pose(r: &ReferenceState) -> Pose {
    Pose::from_parts(
        Translation3::from(r.position),
        UnitQuaternion::from_euler_angles(0.0, 0.0, r.yaw),
    )
}

/// Resolves the world and runs the default planner.
pub fn run_trial(cfg: &TrialConfig) -> Result<TrialRun, HarnessError> {
    run_trial_opts(cfg, TrialOptions::default())
}

pub fn run_trial_opts(cfg: &TrialConfig, opts: TrialOptions) -> Result<TrialRun, HarnessError> {
    cfg.validate()?;
    let resolved = cfg.world.resolve()?;
    let mut planner = ForwardArcPlanner::new(cfg.planner.clone())?;
    let mut run = run_trial_with(cfg, &resolved.world, &mut planner, opts)?;
    run.realized_density = resolved.realized_density;
    Ok(run)
}

/// Runs one trial in `world` with any planner.
///
/// Physics steps, camera frames and planning rounds all run on the physics
/// clock. The trial ends at the first collision, on reaching the goal, or
/// at the time limit.
pub fn run_trial_with<P: LocalPlanner + ?Sized>(
    cfg: &TrialConfig,
    world: &World,
    planner: &mut P,
    opts: TrialOptions,
) -> Result<TrialRun, HarnessError> {
    cfg.validate()?;
    world.validate()?;
    cfg.validate_in(world)?;
    let (camera_every, plan_every) = cfg.step_ratios()?;
    let dt = 1.0 / cfg.rates.physics_hz;
    let time_limit = cfg.time_limit();
    let goal_radius = cfg.planner.goal_radius;

    let initial = ReferenceState::hover(cfg.start, cfg.start_yaw());
    let mut lp = PlanningLoop::new(initial);
    let mut sim = SimState::new(0.0, initial);
    let mut chain = FrameChain::new(cfg.camera.clone(), cfg.memory.clone())?;
    let mut noise_rng = ChaCha8Rng::seed_from_u64(cfg.world.seed ^ 0x6e6f_6973_6521);
    let pose_noise = (cfg.noise.pose_sigma > 0.0)
        .then(|| Normal::new(0.0, cfg.noise.pose_sigma).expect("sigma is positive"));

    let mut counts: BTreeMap<DecisionKind, u64> = BTreeMap::new();
    let mut trajectory = Vec::new();
    let mut rounds = Vec::new();
    let mut plan_times = Vec::new();
    let mut last_kind = "hold";

    let mut n: u64 = 0;
    let outcome = loop {
        let t = n as f64 * dt;
        if n.is_multiple_of(camera_every as u64) {
            let truth = body_pose(&sim.reference);
            let mut raster = render_raster(world, &cfg.camera.sensor_pose(&truth), &cfg.camera);
            apply_depth_noise(&mut raster, cfg.noise.depth_sigma, &mut noise_rng);
            let mut believed = truth;
            if let Some(normal) = &pose_noise {
                let e = Vec3::from_fn(|_, _| normal.sample(&mut noise_rng));
                believed.translation.vector += e;
            }
            let frame = DepthFrame::new(&cfg.camera, raster, t, believed, cfg.memory.stride)?;
            chain.push_posed(frame)?;
        }
        if n.is_multiple_of(plan_every as u64) {
            let started = Instant::now();
            let step = lp.step(t, &chain, &cfg.goal, planner)?;
            if step.evaluated {
                plan_times.push(started.elapsed().as_secs_f64());
            }
            *counts.entry(step.decision.kind).or_default() += 1;
            last_kind = step.decision.kind.as_str();
            if opts.record_rounds {
                rounds.push(RoundRecord::new(t, &step.decision, step.evaluated));
            }
        }
        if opts.record_trajectory {
            trajectory.push(TrajectoryRow::new(t, &sim.reference, last_kind));
        }

        sim = sim_step(&sim, &lp, dt, world, cfg.robot_radius);
        n += 1;
        sim.time = n as f64 * dt;
        if sim.collided {
            break Outcome::Collision;
        }
        if (sim.reference.position - cfg.goal).norm() <= goal_radius {
            break Outcome::Success;
        }
        if sim.time >= time_limit {
            break Outcome::Timeout;
        }
    };
    if opts.record_trajectory {
        trajectory.push(TrajectoryRow::new(sim.time, &sim.reference, last_kind));
    }

    let position = sim.reference.position;
    let result = TrialResult {
        outcome,
        flight_time: sim.time,
        path_length: sim.path_length,
        max_speed: sim.speed_max,
        avg_speed: if sim.time > 0.0 { sim.path_length / sim.time } else { 0.0 },
        control_effort: sim.effort_accum,
        decision_counts: counts,
        final_position: position,
        final_speed: sim.reference.speed(),
        final_goal_distance: (position - cfg.goal).norm(),
        final_clearance: world.clearance(&position),
        min_clearance: sim.min_clearance,
        straight_line: (position - cfg.start).norm(),
    };
    Ok(TrialRun {
        result,
        trajectory,
        rounds,
        plan_times,
        realized_density: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn body_pose_is_level() {
        let r = ReferenceState::hover(Vec3::new(1.0, 2.0, 3.0), 0.5);
        let p = body_pose(&r);
        let up = p.rotation * Vec3::z();
        assert!((up - Vec3::z()).norm() < 1e-15);
        assert_eq!(p.translation.vector, r.position);
    }

    #[test]
    fn tiny_time_limit_times_out() {
        let cfg = TrialConfig {
            time_limit: Some(0.01),
            ..TrialConfig::default()
        };
        let run = run_trial(&cfg).unwrap();
        assert_eq!(run.result.outcome, Outcome::Timeout);
        assert!(run.result.flight_time < 0.02);
    }
}
