use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::PrimitiveError;
use crate::Vec3;

/// Yaw rates below this magnitude use the straight-line limit of the arc.
pub const OMEGA_EPSILON: f64 = 1e-9;

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let wrapped = angle.rem_euclid(TAU);
    if wrapped > PI {
        wrapped - TAU
    } else {
        wrapped
    }
}

/// `sin(x) / x`, with the removable singularity at zero filled in.
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Flat output of the vehicle: world position and heading.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatState {
    pub position: Vec3,
    /// Heading in radians, kept in `(-pi, pi]`.
    pub yaw: f64,
}

impl FlatState {
    pub fn new(position: Vec3, yaw: f64) -> Self {
        Self {
            position,
            yaw: wrap_angle(yaw),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|c| c.is_finite()) && self.yaw.is_finite()
    }
}

/// Body-frame command of a forward-arc primitive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BodyCommand {
    /// Forward speed along body x, m/s.
    pub v_x: f64,
    /// Vertical speed along body z, m/s.
    pub v_z: f64,
    /// Yaw rate about body z, rad/s.
    pub omega: f64,
    /// Primitive duration, s.
    pub duration: f64,
}

impl BodyCommand {
    pub fn new(v_x: f64, v_z: f64, omega: f64, duration: f64) -> Result<Self, PrimitiveError> {
        let cmd = Self {
            v_x,
            v_z,
            omega,
            duration,
        };
        cmd.validate()?;
        Ok(cmd)
    }

    pub fn validate(&self) -> Result<(), PrimitiveError> {
        if ![self.v_x, self.v_z, self.omega, self.duration]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(PrimitiveError::invalid("command has non-finite fields"));
        }
        if self.v_x < 0.0 {
            return Err(PrimitiveError::invalid(format!(
                "forward speed must be non-negative, got {}",
                self.v_x
            )));
        }
        if self.duration <= 0.0 {
            return Err(PrimitiveError::invalid(format!(
                "duration must be positive, got {}",
                self.duration
            )));
        }
        Ok(())
    }
}

/// Closed-form unicycle solution for a constant command held for `tau`.
pub fn propagate_flat(
    xi: &FlatState,
    cmd: &BodyCommand,
    tau: f64,
) -> Result<FlatState, PrimitiveError> {
    cmd.validate()?;
    if !xi.is_finite() {
        return Err(PrimitiveError::invalid("flat state is not finite"));
    }
    if !(0.0..=cmd.duration).contains(&tau) {
        return Err(PrimitiveError::invalid(format!(
            "tau {tau} outside [0, {}]",
            cmd.duration
        )));
    }
    let (position, heading) = advance_arc(&xi.position, xi.yaw, cmd.v_x, cmd.v_z, cmd.omega, tau);
    Ok(FlatState::new(position, heading))
}

/// Unchecked arc propagation. Returns the position and the *unwrapped*
/// heading so callers can keep the heading continuous.
///
/// Uses the half-angle form `v*tau*sinc(w*tau/2)` for the chord, which is the
/// textbook `(v/w)(sin(th + w*tau) - sin th)` solution without the division
/// by `w`.
pub(crate) fn advance_arc(
    position: &Vec3,
    heading: f64,
    v_x: f64,
    v_z: f64,
    omega: f64,
    tau: f64,
) -> (Vec3, f64) {
    let (dx, dy) = if omega.abs() < OMEGA_EPSILON {
        (v_x * tau * heading.cos(), v_x * tau * heading.sin())
    } else {
        let half = 0.5 * omega * tau;
        let chord = v_x * tau * sinc(half);
        let mid = heading + half;
        (chord * mid.cos(), chord * mid.sin())
    };
    let heading_end = if omega.abs() < OMEGA_EPSILON {
        heading
    } else {
        heading + omega * tau
    };
    (
        Vec3::new(position.x + dx, position.y + dy, position.z + v_z * tau),
        heading_end,
    )
}
