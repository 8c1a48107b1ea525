use serde::{Deserialize, Serialize};

use super::flat::{wrap_angle, FlatState};
use crate::Vec3;

/// Full reference handed to the tracking controller.
///
/// Besides the position derivatives this carries the yaw acceleration: with
/// the vehicle at rest the lateral jerk no longer determines it, and the
/// next primitive needs it to continue the yaw-rate profile smoothly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub acceleration: Vec3,
    pub jerk: Vec3,
    pub snap: Vec3,
    pub yaw: f64,
    pub yaw_rate: f64,
    pub yaw_acceleration: f64,
}

impl ReferenceState {
    /// At rest at `position` facing `yaw`.
    pub fn hover(position: Vec3, yaw: f64) -> Self {
        Self {
            position,
            velocity: Vec3::zeros(),
            acceleration: Vec3::zeros(),
            jerk: Vec3::zeros(),
            snap: Vec3::zeros(),
            yaw: wrap_angle(yaw),
            yaw_rate: 0.0,
            yaw_acceleration: 0.0,
        }
    }

    pub fn flat(&self) -> FlatState {
        FlatState::new(self.position, self.yaw)
    }

    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }

    pub fn is_finite(&self) -> bool {
        [
            &self.position,
            &self.velocity,
            &self.acceleration,
            &self.jerk,
            &self.snap,
        ]
        .iter()
        .all(|v| v.iter().all(|c| c.is_finite()))
            && self.yaw.is_finite()
            && self.yaw_rate.is_finite()
            && self.yaw_acceleration.is_finite()
    }

    /// Largest per-component deviation from `other` over the fields that must
    /// be continuous across schedule junctions (everything except snap), and
    /// the name of the field where it occurs.
    pub fn max_deviation(&self, other: &ReferenceState) -> (f64, &'static str) {
        let mut worst = (0.0, "position");
        let vectors = [
            ("position", &self.position, &other.position),
            ("velocity", &self.velocity, &other.velocity),
            ("acceleration", &self.acceleration, &other.acceleration),
            ("jerk", &self.jerk, &other.jerk),
        ];
        for (name, a, b) in vectors {
            let d = (a - b).amax();
            if d > worst.0 {
                worst = (d, name);
            }
        }
        let scalars = [
            ("yaw", wrap_angle(self.yaw - other.yaw).abs()),
            ("yaw_rate", (self.yaw_rate - other.yaw_rate).abs()),
        ];
        for (name, d) in scalars {
            if d > worst.0 {
                worst = (d, name);
            }
        }
        worst
    }
}
