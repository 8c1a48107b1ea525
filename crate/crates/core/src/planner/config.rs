use serde::{Deserialize, Serialize};

use super::PlannerError;
use crate::primitives::symmetric_grid;

/// How samples in never-observed space are treated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnknownPolicy {
    /// Unknown space is infeasible, except near the vehicle.
    #[default]
    Conservative,
}

/// Which candidates a round checks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluation {
    /// Check in cost order and stop at the first feasible candidate.
    #[default]
    Lazy,
    /// Check every candidate.
    Exhaustive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    /// Minimum distance from any sample to its nearest observed point, m.
    pub r_coll: f64,
    /// Sampling step along primitives and stops, s.
    pub delta_t: f64,
    /// Planning period, s.
    pub t_p: f64,
    pub goal_radius: f64,
    /// Forward speed of every primitive, m/s.
    pub v_x: f64,
    pub omega_set: Vec<f64>,
    pub v_z_set: Vec<f64>,
    /// Primitive duration T, s.
    pub duration: f64,
    pub ramp_duration: f64,
    pub stop_duration: f64,
    pub unknown_policy: UnknownPolicy,
    /// Unknown samples this close to the vehicle are taken as free, m.
    pub startup_free_radius: f64,
    /// Neighbors fetched per query.
    pub k: usize,
    pub evaluation: Evaluation,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            r_coll: 0.6,
            delta_t: 0.1,
            t_p: 1.0 / 12.0,
            goal_radius: 1.0,
            v_x: 3.0,
            omega_set: symmetric_grid(1.2, 11),
            v_z_set: vec![-0.5, 0.0, 0.5],
            duration: 2.0,
            ramp_duration: 0.3,
            stop_duration: 2.0,
            unknown_policy: UnknownPolicy::Conservative,
            startup_free_radius: 1.0,
            k: 1,
            evaluation: Evaluation::Lazy,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), PlannerError> {
        let fail = |msg: String| Err(PlannerError::Config(msg));
        if !(self.r_coll > 0.0 && self.r_coll.is_finite()) {
            return fail(format!("r_coll must be positive, got {}", self.r_coll));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return fail(format!("duration must be positive, got {}", self.duration));
        }
        if !(self.delta_t > 0.0 && self.delta_t <= self.duration) {
            return fail(format!("delta_t must lie in (0, T], got {}", self.delta_t));
        }
        if !(self.t_p > 0.0 && self.t_p < self.duration) {
            return fail(format!("t_p must lie in (0, T), got {}", self.t_p));
        }
        if !(0.0..=self.duration).contains(&self.ramp_duration) {
            return fail(format!("ramp_duration {} outside [0, T]", self.ramp_duration));
        }
        if !(self.stop_duration > 0.0 && self.stop_duration.is_finite()) {
            return fail(format!("stop_duration must be positive, got {}", self.stop_duration));
        }
        if !(self.v_x >= 0.0 && self.v_x.is_finite()) {
            return fail(format!("v_x must be non-negative, got {}", self.v_x));
        }
        if !(self.goal_radius >= 0.0 && self.startup_free_radius >= 0.0) {
            return fail("goal_radius and startup_free_radius must be non-negative".into());
        }
        if self.omega_set.is_empty() || self.v_z_set.is_empty() {
            return fail("omega_set and v_z_set must be non-empty".into());
        }
        if self.k == 0 {
            return fail("k must be at least 1".into());
        }
        Ok(())
    }

    pub fn library_size(&self) -> usize {
        self.omega_set.len() * self.v_z_set.len()
    }
}
