use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::memory::{CameraModel, ChainConfig};
use crate::planner::PlannerConfig;
use crate::sim::{gen_forest, ForestParams, World};
use crate::Vec3;

/// Where a trial's world comes from: a world file if `file` is set,
/// otherwise a forest generated from `forest` and `seed`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldConfig {
    pub seed: u64,
    pub file: Option<PathBuf>,
    pub forest: ForestParams,
}

/// A resolved world and the density it realized, if generated.
#[derive(Clone, Debug)]
pub struct ResolvedWorld {
    pub world: World,
    pub realized_density: Option<f64>,
    pub warning: Option<String>,
}

impl WorldConfig {
    pub fn resolve(&self) -> Result<ResolvedWorld, HarnessError> {
        match &self.file {
            Some(path) => Ok(ResolvedWorld {
                world: World::load(path)?,
                realized_density: None,
                warning: None,
            }),
            None => {
                let forest = gen_forest(&self.forest, self.seed)?;
                Ok(ResolvedWorld {
                    world: forest.world,
                    realized_density: Some(forest.realized_density),
                    warning: forest.warning,
                })
            }
        }
    }
}

/// Event rates on the physics clock. The planner runs every `t_p` from the
/// planner configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Rates {
    pub physics_hz: f64,
    pub camera_hz: f64,
}

impl Default for Rates {
    fn default() -> Self {
        Self {
            physics_hz: 240.0,
            camera_hz: 30.0,
        }
    }
}

/// Optional perception perturbations, all off by default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    /// Standard deviation of additive depth noise, m.
    pub depth_sigma: f64,
    /// Standard deviation of the translation error on frame poses, m.
    pub pose_sigma: f64,
}

/// Default camera for trials: the 424x240 model at half resolution. With
/// the memory stride of 2 this gives the same cloud density as full
/// resolution at stride 4.
pub fn trial_camera() -> CameraModel {
    CameraModel::default().scaled(0.5)
}

pub fn trial_memory() -> ChainConfig {
    ChainConfig {
        stride: 2,
        ..ChainConfig::default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrialConfig {
    pub world: WorldConfig,
    pub start: Vec3,
    pub goal: Vec3,
    /// Initial heading; faces the goal when unset.
    pub start_yaw: Option<f64>,
    /// Defaults to 2.5 times the straight-line flight time at `v_x`.
    pub time_limit: Option<f64>,
    pub planner: PlannerConfig,
    pub camera: CameraModel,
    pub memory: ChainConfig,
    pub robot_radius: f64,
    pub rates: Rates,
    pub noise: NoiseConfig,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            world: WorldConfig::default(),
            start: Vec3::new(0.0, 0.0, 1.5),
            goal: Vec3::new(70.0, 0.0, 1.5),
            start_yaw: None,
            time_limit: None,
            planner: PlannerConfig::default(),
            camera: trial_camera(),
            memory: trial_memory(),
            robot_radius: 0.3,
            rates: Rates::default(),
            noise: NoiseConfig::default(),
        }
    }
}

fn ratio(a: f64, b: f64) -> Option<usize> {
    let r = a / b;
    let n = r.round();
    ((r - n).abs() < 1e-6 && n >= 1.0).then_some(n as usize)
}

impl TrialConfig {
    pub fn time_limit(&self) -> f64 {
        self.time_limit.unwrap_or_else(|| {
            let dist = (self.goal - self.start).norm();
            if self.planner.v_x > 0.0 {
                2.5 * dist / self.planner.v_x
            } else {
                f64::INFINITY
            }
        })
    }

    pub fn start_yaw(&self) -> f64 {
        self.start_yaw.unwrap_or_else(|| {
            let d = self.goal - self.start;
            d.y.atan2(d.x)
        })
    }

    /// Physics steps between camera frames and between planning rounds.
    pub fn step_ratios(&self) -> Result<(usize, usize), HarnessError> {
        let r = &self.rates;
        if !(r.physics_hz > 0.0 && r.camera_hz > 0.0) {
            return Err(HarnessError::Config("rates must be positive".into()));
        }
        let camera = ratio(r.physics_hz, r.camera_hz).ok_or_else(|| {
            HarnessError::Config(format!(
                "physics rate {} is not a multiple of the camera rate {}",
                r.physics_hz, r.camera_hz
            ))
        })?;
        let planner = ratio(r.physics_hz * self.planner.t_p, 1.0).ok_or_else(|| {
            HarnessError::Config(format!(
                "planning period {} is not a whole number of physics steps",
                self.planner.t_p
            ))
        })?;
        Ok((camera, planner))
    }

    /// Checks everything that does not need the world.
    pub fn validate(&self) -> Result<(), HarnessError> {
        self.planner.validate()?;
        self.camera.validate()?;
        if self.memory.stride == 0 || self.memory.k == 0 {
            return Err(HarnessError::Config("memory stride and k must be at least 1".into()));
        }
        if !(self.time_limit() > 0.0) {
            return Err(HarnessError::Config(format!(
                "time limit must be positive, got {}",
                self.time_limit()
            )));
        }
        if !(self.robot_radius > 0.0) {
            return Err(HarnessError::Config("robot_radius must be positive".into()));
        }
        if !(self.noise.depth_sigma >= 0.0 && self.noise.pose_sigma >= 0.0) {
            return Err(HarnessError::Config("noise levels must be non-negative".into()));
        }
        if !(self.start.iter().all(|c| c.is_finite()) && self.goal.iter().all(|c| c.is_finite())) {
            return Err(HarnessError::Config("start and goal must be finite".into()));
        }
        self.step_ratios()?;
        Ok(())
    }

    /// Checks start and goal against a resolved world.
    pub fn validate_in(&self, world: &World) -> Result<(), HarnessError> {
        for (name, p) in [("start", &self.start), ("goal", &self.goal)] {
            if !world.bounds.contains(p) {
                return Err(HarnessError::Config(format!("{name} lies outside the world bounds")));
            }
            if world.gt_collides(p, self.robot_radius) {
                return Err(HarnessError::Config(format!("{name} is in collision")));
            }
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Parse {
            path: "<toml>".into(),
            message: e.to_string(),
        })
    }

    /// Loads a `.toml` or `.json` file. World file paths are taken relative
    /// to the config file.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let parse_err = |message: String| HarnessError::Parse {
            path: path.display().to_string(),
            message,
        };
        let mut cfg: TrialConfig = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text).map_err(|e| parse_err(e.to_string()))?,
            Some("toml") => toml::from_str(&text).map_err(|e| parse_err(e.to_string()))?,
            other => {
                return Err(parse_err(format!(
                    "unknown config extension {other:?}, expected .toml or .json"
                )))
            }
        };
        if let (Some(file), Some(dir)) = (&cfg.world.file, path.parent()) {
            if file.is_relative() {
                cfg.world.file = Some(dir.join(file));
            }
        }
        Ok(cfg)
    }
}
