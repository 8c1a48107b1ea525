//! Forward-arc motion primitives, stopping primitives and schedules.

mod arc;
mod blend;
mod flat;
mod reference;
mod schedule;

use thiserror::Error;

pub use arc::{
    build_library, build_stop, build_stop_after, sample_points, sample_times, symmetric_grid, MotionPrimitive,
    PrimitiveLibrary, StopPrimitive, Trajectory,
};
pub use flat::{propagate_flat, wrap_angle, BodyCommand, FlatState, OMEGA_EPSILON};
pub use reference::ReferenceState;
pub use schedule::{
    commit_schedule, Hold, ReferenceSource, ScheduledTrajectory, HANDOFF_TOLERANCE,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PrimitiveError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// The new primitive does not start where the committed plan hands off.
    #[error("primitive start does not match the scheduled handoff ({field} off by {deviation:e})")]
    StartMismatch { field: &'static str, deviation: f64 },
    #[error("stop does not start at the end of the active window ({field} off by {deviation:e})")]
    StopMismatch { field: &'static str, deviation: f64 },
}

impl PrimitiveError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Self::InvalidArgument(msg.into())
    }
}
